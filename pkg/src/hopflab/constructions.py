"""Desk-scale truncations of the infinite-divisibility lattice examples.

The infinite construction adjoins 1/p^infinity chains; a truncation at
depth K replaces each chain with denominator p^K, giving a full-rank
subgroup of Q^(N+1) presented by an integer basis after clearing
denominators.  Every claim this module certifies is phrased as a
monotone-growth or constraint-collapse statement that is stable under
increasing K, never as a statement about the infinite group itself.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import lcm
from typing import Optional, Sequence

import sympy

from .integer_linear import (
    FgGroupCanon,
    IntMatrix,
    cokernel_structure,
    det_bareiss,
    hermite_normal_form,
    kernel_basis,
    matrix_to_json,
    solve_integer,
    solve_rational,
)


class DegenerateMultiplierError(ValueError):
    """Multiplication by zero: the quotient is the whole group."""


class BadPermutationError(ValueError):
    pass


class UnknownPrimeError(ValueError):
    pass


@dataclass(frozen=True)
class InfinConfig:
    """Truncation rank N, divisibility depth K, and the prime partition.

    The default partition interleaves the ascending primes: the p-list
    takes positions 0, 2, 4, ... and the q-list positions 1, 3, 5, ...,
    so N = 1 gives p0 = 2, q1 = 3, p1 = 5.
    """

    N: int
    K: int
    p_list: tuple[int, ...] = ()
    q_list: tuple[int, ...] = ()

    def __post_init__(self):
        if self.N < 1 or self.K < 1:
            raise ValueError("need N >= 1 and K >= 1")
        if not self.p_list and not self.q_list:
            ps, qs = default_partition(self.N)
            object.__setattr__(self, "p_list", ps)
            object.__setattr__(self, "q_list", qs)
        if len(self.p_list) != self.N + 1 or len(self.q_list) != self.N:
            raise ValueError("need N+1 p-primes and N q-primes")
        all_primes = list(self.p_list) + list(self.q_list)
        for p in all_primes:
            if not sympy.isprime(p):
                raise ValueError(f"not a prime: {p}")
        if len(set(all_primes)) != len(all_primes):
            raise ValueError("partition primes must be distinct")

    def prime_of_line(self, i: int, sigma: Optional[dict] = None) -> int:
        """q-prime attached to the line e0 + e_i (after permuting by sigma)."""
        j = sigma[i] if sigma else i
        return self.q_list[j - 1]


def default_partition(n: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    primes = list(itertools.islice(sympy.primerange(2, 10 ** 6), 2 * n + 1))
    return tuple(primes[0::2]), tuple(primes[1::2])


@dataclass(frozen=True)
class TruncatedLattice:
    """Subgroup of Q^(N+1) given by scale M and an integer basis B.

    The group is (1/M) times the row span of B; B is in row Hermite form
    and has full rank, so membership and coordinate solving are exact.
    """

    ambient_dim: int
    scale: int
    basis: IntMatrix

    def membership(self, vec: Sequence[Fraction]) -> bool:
        w = [Fraction(x) * self.scale for x in vec]
        if any(x.denominator != 1 for x in w):
            return False
        return solve_integer(self.basis.transpose(), [int(x) for x in w]) is not None

    def order_of(self, vec: Sequence[Fraction]) -> int:
        """Minimal t >= 1 with t * vec in the lattice (vec must be rational)."""
        w = [Fraction(x) * self.scale for x in vec]
        y = solve_rational(self.basis.transpose(), w)
        if y is None:
            raise ValueError("vector outside the rational span")
        return lcm(*(f.denominator for f in y)) if y else 1

    def coordinates(self, vec: Sequence[Fraction]) -> Optional[list[int]]:
        w = [Fraction(x) * self.scale for x in vec]
        if any(x.denominator != 1 for x in w):
            return None
        return solve_integer(self.basis.transpose(), [int(x) for x in w])

    def to_json(self) -> dict:
        return {
            "ambient_dim": self.ambient_dim,
            "scale": str(self.scale),
            "basis": matrix_to_json(self.basis),
        }


def _unit(dim: int, i: int) -> list[Fraction]:
    v = [Fraction(0)] * dim
    v[i] = Fraction(1)
    return v


def generators(cfg: InfinConfig, sigma: Optional[dict] = None) -> list[list[Fraction]]:
    """Generating vectors: (1/p_i^K) e_i and (1/q_i^K)(e0 + e_i)."""
    dim = cfg.N + 1
    gens = []
    for i in range(dim):
        g = _unit(dim, i)
        g[i] /= cfg.p_list[i] ** cfg.K
        gens.append(g)
    for i in range(1, dim):
        q = cfg.prime_of_line(i, sigma)
        g = _unit(dim, 0)
        g[i] = Fraction(1)
        gens.append([x / q ** cfg.K for x in g])
    return gens


def build_truncation(cfg: InfinConfig, sigma: Optional[dict] = None) -> TruncatedLattice:
    """The depth-K truncation lattice (optionally with permuted q-assignment)."""
    dim = cfg.N + 1
    scale = 1
    for p in cfg.p_list:
        scale *= p ** cfg.K
    for q in cfg.q_list:
        scale *= q ** cfg.K
    rows = []
    for g in generators(cfg, sigma):
        row = [Fraction(x) * scale for x in g]
        assert all(x.denominator == 1 for x in row)
        rows.append([int(x) for x in row])
    h, _ = hermite_normal_form(IntMatrix.from_rows(rows))
    basis_rows = [r for r in h.to_rows() if any(r)]
    if len(basis_rows) != dim:
        raise AssertionError("truncation basis must have full rank")
    return TruncatedLattice(dim, scale, IntMatrix.from_rows(basis_rows))


def quotient_growth(cfg: InfinConfig, n: int) -> FgGroupCanon:
    """Structure of G/nG for the truncation, computed through the basis.

    The coordinates of n times each basis row are solved exactly in the
    basis and the cokernel of the resulting relation matrix is read off
    its Smith form.  For n = +-1 the quotient is trivial; n = 0 is
    rejected because the quotient is the whole group.
    """
    if n == 0:
        raise DegenerateMultiplierError("multiplication by 0: G/0G = G, not a finite computation")
    lat = build_truncation(cfg)
    dim = lat.ambient_dim
    bt = lat.basis.transpose()
    coord_rows = []
    for i in range(dim):
        target = [n * lat.basis.at(i, j) for j in range(dim)]
        sol = solve_integer(bt, target)
        if sol is None:
            raise AssertionError("n * basis row left the lattice")
        coord_rows.append(sol)
    relation = IntMatrix.from_rows(coord_rows).transpose()
    return cokernel_structure(relation)


@dataclass(frozen=True)
class MultiplierSolution:
    """Stable solution set of the multiplier constraint system.

    ``solution_set`` describes the multiplier tuples that satisfy the
    derived membership constraints at every depth >= K:  AllIntegers
    means exactly the uniform tuples (n, n, ..., n), n in Z; OnlyZero
    means only the zero map.  The constraint log holds the per-line
    congruence lattices computed at depth K, and ``re_verify`` replays
    the probes that justify the classification.
    """

    solution_set: str  # "AllIntegers" | "OnlyZero" | "Finite"
    finite_values: tuple[int, ...] = ()
    constraint_log: tuple[dict, ...] = ()
    metadata: dict = field(default_factory=dict)


def _line_constraint_lattice(cfg: InfinConfig, tgt: TruncatedLattice,
                             i: int, q_src: int) -> IntMatrix:
    """Row-Hermite basis of {(a, b) : (1/q_src^K)(a e0 + b e_i) in target}."""
    dim = cfg.N + 1
    d = q_src ** cfg.K
    u0 = [tgt.scale // d if r == 0 else 0 for r in range(dim)]
    ui = [tgt.scale // d if r == i else 0 for r in range(dim)]
    assert tgt.scale % d == 0
    bt = tgt.basis.transpose()
    rows = []
    for r in range(dim):
        rows.append([u0[r], ui[r]] + [-bt.at(r, c) for c in range(dim)])
    kb = kernel_basis(IntMatrix.from_rows(rows))
    gen_rows = [[kb.at(0, c), kb.at(1, c)] for c in range(kb.cols)]
    if not gen_rows:
        return IntMatrix.zeros(0, 2)
    h, _ = hermite_normal_form(IntMatrix.from_rows(gen_rows))
    return IntMatrix.from_rows([r for r in h.to_rows() if any(r)])


def _describe_constraint(basis: IntMatrix, q: int, K: int) -> str:
    rows = basis.to_rows()
    if len(rows) == 2 and rows[0] == [1, 1] and rows[1][0] == 0:
        return f"c0 - c_i == 0 (mod {rows[1][1]})"
    if len(rows) == 2 and rows[0][1] == 0 and rows[1][0] == 0:
        return f"c0 == 0 (mod {rows[0][0]}) and c_i == 0 (mod {rows[1][1]})"
    return f"constraint lattice rows {rows}"


def _image_in_target(cfg: InfinConfig, tgt: TruncatedLattice, i: int, q_src: int,
                     c0: int, ci: int) -> bool:
    dim = cfg.N + 1
    d = Fraction(1, q_src ** cfg.K)
    vec = [Fraction(0)] * dim
    vec[0] = c0 * d
    vec[i] = ci * d
    return tgt.membership(vec)


def _uniform_candidate_ok(cfg: InfinConfig, sigma: Optional[dict], n: int) -> bool:
    """Does multiplication by n map the source truncation into the target?"""
    tgt = build_truncation(cfg, sigma)
    for g in generators(cfg, None):
        if not tgt.membership([n * x for x in g]):
            return False
    return True


def hom_multiplier_constraints(cfg: InfinConfig, sigma_src: Optional[dict],
                               sigma_tgt: Optional[dict]) -> MultiplierSolution:
    """Constraint algebra for multiplier-class maps between two truncations.

    A candidate homomorphism is diagonal on the invariant lines,
    c = (c0, ..., cN) with e_i -> c_i e_i, which is the shape full
    invariance forces.  The per-line membership constraints at depth K
    are computed as two-variable congruence lattices; the classification
    then probes depths K and K+1 to determine the stable solution set.
    """
    dim = cfg.N + 1
    tgt_k = build_truncation(cfg, sigma_tgt)
    cfg_k1 = replace(cfg, K=cfg.K + 1)
    tgt_k1 = build_truncation(cfg_k1, sigma_tgt)

    log = []
    moved = []
    for i in range(1, dim):
        q_src = cfg.prime_of_line(i, sigma_src)
        q_tgt = cfg.prime_of_line(i, sigma_tgt)
        lam = _line_constraint_lattice(cfg, tgt_k, i, q_src)
        desc = _describe_constraint(lam, q_src, cfg.K)
        diagonal_ok = _image_in_target(cfg, tgt_k, i, q_src, 1, 1)
        if not diagonal_ok:
            moved.append(i)
        log.append({
            "line": i,
            "source_prime": q_src,
            "target_prime": q_tgt,
            "lattice": lam.to_rows(),
            "congruence": desc,
            "diagonal_admitted": diagonal_ok,
        })
        # p-line images are unconstrained beyond integrality
        pvec = [Fraction(0)] * dim
        pvec[i] = Fraction(1, cfg.p_list[i] ** cfg.K)
        assert tgt_k.membership(pvec)

    meta = {
        "candidate_class": "diagonal multipliers on the invariant lines (the shape full invariance forces); "
                           "this certifies the constraint algebra, not the full endomorphism ring of the truncation",
        "depth": cfg.K,
        "probe_depth": cfg.K + 1,
    }

    if not moved:
        # uniform candidates pass at both depths; minimal deviations collapse
        assert _uniform_candidate_ok(cfg, sigma_tgt, 1)
        assert _uniform_candidate_ok(cfg_k1, sigma_tgt, 1)
        for i in range(1, dim):
            q = cfg.prime_of_line(i, sigma_src)
            dev = q ** cfg.K
            assert _image_in_target(cfg, tgt_k, i, q, 0, dev), "deviation must satisfy the depth-K constraint"
            assert not _image_in_target(cfg_k1, tgt_k1, i, q, 0, dev), \
                "deviation must fail one depth further"
        meta["collapse"] = "non-uniform deviations admitted at depth K fail at depth K+1"
        return MultiplierSolution("AllIntegers", (), tuple(log), meta)

    # some line moved: uniform multiplication by 1 already fails at depth K,
    # and the forced q^K-divisible candidates fail one depth further
    assert not _uniform_candidate_ok(cfg, sigma_tgt, 1)
    j = moved[0]
    qj = cfg.prime_of_line(j, sigma_src)
    dev = qj ** cfg.K
    assert _image_in_target(cfg, tgt_k, j, qj, dev, dev), \
        "q^K-divisible candidates must satisfy the depth-K constraint"
    assert not _image_in_target(cfg_k1, tgt_k1, j, qj, dev, dev), \
        "q^K-divisible candidates must fail one depth further"
    meta["collapse"] = f"c0 is forced divisible by q^K on line {j} at every depth, so only 0 is stable"
    return MultiplierSolution("OnlyZero", (), tuple(log), meta)


def _check_sigma(cfg: InfinConfig, sigma) -> dict:
    if sigma is None:
        return {i: i for i in range(1, cfg.N + 1)}
    if isinstance(sigma, (list, tuple)):
        sigma = {i + 1: v for i, v in enumerate(sigma)}
    dom = set(range(1, cfg.N + 1))
    if set(sigma.keys()) != dom or set(sigma.values()) != dom:
        raise BadPermutationError(f"not a permutation of 1..{cfg.N}: {sigma}")
    return dict(sigma)


def multiplier_constraints(cfg: InfinConfig, sigma=None) -> MultiplierSolution:
    """Solution set of candidate multiplier maps from the truncation into its
    sigma-twisted sibling; the identity permutation admits exactly the integer
    multiplications, any non-identity permutation only the zero map."""
    sig = _check_sigma(cfg, sigma)
    return hom_multiplier_constraints(cfg, None, sig)


def rigid_system_check(cfg: InfinConfig, perms: Sequence) -> dict:
    """Pairwise Hom analysis of a finite sub-system of twisted truncations.

    Returns the table Hom(G_sigma, G_tau) classified through the
    multiplier constraint algebra; a rigid sub-system shows AllIntegers
    on the diagonal and OnlyZero off it, so the endomorphism ring of the
    finite direct sum is the corresponding product of copies of Z acting
    block-diagonally.
    """
    sigmas = [_check_sigma(cfg, p) for p in perms]
    table = {}
    rigid = True
    for a, sa in enumerate(sigmas):
        for b, sb in enumerate(sigmas):
            sol = hom_multiplier_constraints(cfg, sa, sb)
            table[(a, b)] = sol.solution_set
            expected = "AllIntegers" if sa == sb else "OnlyZero"
            if sol.solution_set != expected:
                rigid = False
    return {
        "permutations": [tuple(s[i] for i in range(1, cfg.N + 1)) for s in sigmas],
        "table": table,
        "rigid": rigid,
        "endomorphism_ring_of_sum": f"Z^{len(sigmas)} acting block-diagonally" if rigid else "not rigid",
    }


@dataclass(frozen=True)
class FirWitness:
    prime: int
    injective: bool
    quotient: FgGroupCanon
    note: str


def fir_witness(cfg: InfinConfig, p: int) -> FirWitness:
    """Multiplication by p on the truncation: injective with a quotient whose
    order grows without bound across N, the finite shadow of an injective
    endomorphism with infinite cokernel."""
    if p not in cfg.p_list and p not in cfg.q_list:
        raise UnknownPrimeError(f"{p} is not in the configured partition")
    lat = build_truncation(cfg)
    dim = lat.ambient_dim
    coord_rows = []
    bt = lat.basis.transpose()
    for i in range(dim):
        sol = solve_integer(bt, [p * lat.basis.at(i, j) for j in range(dim)])
        coord_rows.append(sol)
    mat = IntMatrix.from_rows(coord_rows)
    injective = det_bareiss(mat) != 0
    quotient = quotient_growth(cfg, p)
    return FirWitness(p, injective, quotient,
                      note="multiplication by a non-zero integer on a torsion-free lattice is injective; "
                           "the quotient order grows with the truncation rank N")


@dataclass(frozen=True)
class TensorEndoReport:
    injective: bool
    surjective: bool
    cokernel_finite: bool
    cfh_consistent: bool
    determinant: int
    cokernel: FgGroupCanon

    def to_json(self) -> dict:
        return {
            "injective": self.injective,
            "surjective": self.surjective,
            "cokernel_finite": self.cokernel_finite,
            "cfh_consistent": self.cfh_consistent,
            "determinant": str(self.determinant),
            "cokernel_of_gamma": str(self.cokernel),
        }


def tensor_endo_analyze(gamma: IntMatrix) -> TensorEndoReport:
    """Flags of the endomorphism gamma (x) G of a finite power of the lattice group.

    Tensoring with the torsion-free group is exact, so gamma and the
    induced endomorphism agree on injectivity and surjectivity.  Any
    non-trivial cokernel of gamma, free or Z(n), tensors to an infinite
    group, so the induced map has finite cokernel exactly when gamma is
    unimodular; cfh_consistent records that a finite cokernel forces an
    automorphism, which is the matrix-level co-finite Hopficity witness.
    """
    from .integer_linear import NotSquareError

    if gamma.rows != gamma.cols:
        raise NotSquareError("tensor endomorphism analysis needs a square matrix")
    d = det_bareiss(gamma)
    coker = cokernel_structure(gamma)
    injective = d != 0
    surjective = abs(d) == 1
    cokernel_finite = abs(d) == 1
    cfh_consistent = (not cokernel_finite) or (injective and surjective)
    return TensorEndoReport(injective, surjective, cokernel_finite, cfh_consistent, d, coker)
