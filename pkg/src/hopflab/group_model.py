"""Group expressions and structural fact extraction.

The grammar describes abelian groups as direct sums of atoms with
multiplicities in N u {omega}: the integers, the rationals, cyclic
p-groups, quasicyclic (Prufer) p-groups, p-adic modules and their
finite-support products, rank-1 groups of a given type, and completely
decomposable families presented by a type family.

``normalize`` flattens to a canonical sum of atom powers; ``facts``
derives the structural predicates the classifier consumes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .types_lattice import (
    OMEGA,
    Mult,
    TypeClass,
    TypeFamily,
    TYPE_Q,
    TYPE_Z,
    PairwiseIncomparableChain,
    DescendingChain,
    check_prime,
    is_finite_mult,
    nth_prime,
)


class InvalidGroupError(ValueError):
    pass


def _check_mult(m: Mult) -> Mult:
    if m == OMEGA:
        return OMEGA
    if isinstance(m, int) and not isinstance(m, bool) and m >= 1:
        return m
    raise InvalidGroupError(f"multiplicity must be a positive integer or omega: {m!r}")


def mult_mul(a: Mult, b: Mult) -> Mult:
    if a == OMEGA or b == OMEGA:
        return OMEGA
    return a * b


def mult_add(a: Mult, b: Mult) -> Mult:
    if a == OMEGA or b == OMEGA:
        return OMEGA
    return a + b


@dataclass(frozen=True)
class Zero:
    def __str__(self):
        return "0"


@dataclass(frozen=True)
class IntZ:
    def __str__(self):
        return "Z"


@dataclass(frozen=True)
class RatQ:
    def __str__(self):
        return "Q"


@dataclass(frozen=True)
class Cyclic:
    p: int
    n: int

    def __post_init__(self):
        check_prime(self.p)
        if not isinstance(self.n, int) or self.n < 1:
            raise InvalidGroupError(f"cyclic exponent must be >= 1: {self.n!r}")

    def __str__(self):
        return f"Z({self.p}^{self.n})"


@dataclass(frozen=True)
class Prufer:
    p: int

    def __post_init__(self):
        check_prime(self.p)

    def __str__(self):
        return f"Prufer({self.p})"


@dataclass(frozen=True)
class Padic:
    p: int

    def __post_init__(self):
        check_prime(self.p)

    def __str__(self):
        return f"Jp({self.p})"


@dataclass(frozen=True)
class RankOne:
    tclass: TypeClass

    def __str__(self):
        return str(self.tclass)


@dataclass(frozen=True)
class AdicProduct:
    """Finite-support product of free p-adic modules; absent primes carry rank 0."""

    ranks: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if not self.ranks:
            raise InvalidGroupError("AdicProduct needs at least one prime")
        seen = set()
        for p, r in self.ranks:
            check_prime(p)
            if not isinstance(r, int) or r < 1:
                raise InvalidGroupError(f"adic rank must be >= 1: {r!r}")
            if p in seen:
                raise InvalidGroupError(f"duplicate prime in AdicProduct: {p}")
            seen.add(p)
        object.__setattr__(self, "ranks", tuple(sorted(self.ranks)))

    def __str__(self):
        return "Prod(" + ",".join(f"{p}:{r}" for p, r in self.ranks) + ")"


@dataclass(frozen=True)
class CompletelyDecomposable:
    """Sugar for a direct sum of rank-1 atoms given by a type family."""

    family: TypeFamily

    def __str__(self):
        sch = self.family.omega_schema()
        if sch is not None and not self.family.entries:
            name = "incomparable" if isinstance(sch, PairwiseIncomparableChain) else "descending"
            return "CD{%s(w)}" % name
        items = []
        for t, m in self.family.entries:
            items.append(str(t) + (":" + mult_str(m) if m != 1 else ""))
        if sch is not None:
            name = "incomparable" if isinstance(sch, PairwiseIncomparableChain) else "descending"
            items.append(f"{name}(w)")
        return "CD{" + ", ".join(items) + "}"


@dataclass(frozen=True)
class DirectSum:
    parts: tuple[tuple["GroupExpr", Mult], ...]

    def __post_init__(self):
        if not self.parts:
            raise InvalidGroupError("DirectSum needs at least one part")
        for g, m in self.parts:
            _check_mult(m)

    def __str__(self):
        return " + ".join(term_str(g, m) for g, m in self.parts)


GroupExpr = Union[Zero, IntZ, RatQ, Cyclic, Prufer, Padic, RankOne,
                  AdicProduct, CompletelyDecomposable, DirectSum]

Atom = Union[IntZ, RatQ, Cyclic, Prufer, Padic, RankOne, AdicProduct, CompletelyDecomposable]


def mult_str(m: Mult) -> str:
    return "w" if m == OMEGA else str(m)


def term_str(g: GroupExpr, m: Mult) -> str:
    return str(g) if m == 1 else f"{g}^{mult_str(m)}"


# ---------------------------------------------------------------------------
# Normalization

# canonical ordering of atom kinds: divisible first, then torsion, then the rest
_KIND_ORDER = {RatQ: 0, Prufer: 1, Cyclic: 2, IntZ: 3, RankOne: 4,
               Padic: 5, AdicProduct: 6, CompletelyDecomposable: 7}


def atom_sort_key(a: Atom) -> tuple:
    k = _KIND_ORDER[type(a)]
    if isinstance(a, (IntZ, RatQ)):
        return (k,)
    if isinstance(a, (Prufer, Padic)):
        return (k, a.p)
    if isinstance(a, Cyclic):
        return (k, a.p, a.n)
    if isinstance(a, RankOne):
        return (k,) + a.tclass.sort_key()
    if isinstance(a, AdicProduct):
        return (k, a.ranks)
    if isinstance(a, CompletelyDecomposable):
        sch = a.family.schema
        return (k, 0 if isinstance(sch, PairwiseIncomparableChain) else 1)
    raise TypeError(a)


def _flatten(g: GroupExpr, mult: Mult, out: list) -> None:
    if isinstance(g, Zero):
        return
    if isinstance(g, DirectSum):
        for part, m in g.parts:
            _flatten(part, mult_mul(mult, m), out)
        return
    if isinstance(g, RankOne):
        if g.tclass == TYPE_Z:
            out.append((IntZ(), mult))
        elif g.tclass == TYPE_Q:
            out.append((RatQ(), mult))
        else:
            out.append((g, mult))
        return
    if isinstance(g, CompletelyDecomposable):
        for t, m in g.family.expanded_entries():
            _flatten(RankOne(t), mult_mul(mult, m), out)
        sch = g.family.omega_schema()
        if sch is not None:
            out.append((CompletelyDecomposable(TypeFamily((), sch)), mult))
        return
    if isinstance(g, (IntZ, RatQ, Cyclic, Prufer, Padic, AdicProduct)):
        out.append((g, mult))
        return
    raise InvalidGroupError(f"not a group expression: {g!r}")


def normalize(g: GroupExpr) -> GroupExpr:
    """Canonical form: a sorted, merged sum of atom powers.

    Flattens nested sums with n * omega = omega, resolves rank-1 atoms of
    extreme type to Z and Q, expands finitely presented completely
    decomposable families, merges p-adic material (finite multiplicities
    combine into a single product with per-prime ranks, omega copies
    collapse to one omega-power per prime), and groups equal atoms.
    Idempotent, and the denoted group is unchanged up to isomorphism.
    """
    flat: list[tuple[Atom, Mult]] = []
    _flatten(g, 1, flat)

    adic_fin: dict[int, int] = {}
    adic_omega: set[int] = set()
    merged: dict[Atom, Mult] = {}
    for atom, m in flat:
        if isinstance(atom, Padic):
            if is_finite_mult(m):
                adic_fin[atom.p] = adic_fin.get(atom.p, 0) + m
            else:
                adic_omega.add(atom.p)
        elif isinstance(atom, AdicProduct):
            for p, r in atom.ranks:
                if is_finite_mult(m):
                    adic_fin[p] = adic_fin.get(p, 0) + r * m
                else:
                    adic_omega.add(p)
        else:
            merged[atom] = mult_add(merged.get(atom, 0), m)

    for p in adic_omega:
        adic_fin.pop(p, None)  # J_p^r + J_p^w = J_p^w
        merged[Padic(p)] = OMEGA
    if adic_fin:
        if len(adic_fin) == 1:
            ((p, r),) = adic_fin.items()
            merged[Padic(p)] = mult_add(merged.get(Padic(p), 0), r)
        else:
            ap = AdicProduct(tuple(sorted(adic_fin.items())))
            merged[ap] = mult_add(merged.get(ap, 0), 1)

    parts = tuple(sorted(merged.items(), key=lambda am: atom_sort_key(am[0])))
    if not parts:
        return Zero()
    if len(parts) == 1 and parts[0][1] == 1:
        return parts[0][0]
    return DirectSum(parts)


def components(g: GroupExpr) -> tuple[tuple[Atom, Mult], ...]:
    """Atom powers of a normalized expression (empty for the zero group)."""
    if isinstance(g, Zero):
        return ()
    if isinstance(g, DirectSum):
        return g.parts
    return ((g, 1),)


# ---------------------------------------------------------------------------
# Structural facts

YES = "yes"
NO = "no"
UNKNOWN = "unknown"


def _atom_is_divisible(a: Atom) -> bool:
    return isinstance(a, (RatQ, Prufer))


def _atom_is_torsion(a: Atom) -> bool:
    return isinstance(a, (Cyclic, Prufer))


def _atom_cotorsion(a: Atom, m: Mult) -> str:
    """Three-valued cotorsion status of an atom power (documented table).

    Yes: cyclic powers (bounded, even with omega copies), divisible atoms,
    and finite-multiplicity adic modules (algebraically compact).
    No: Z, and reduced rank-1 atoms of finite multiplicity.
    Unknown: everything the table does not settle, in particular omega
    powers of adic modules and of reduced rank-1 atoms.
    """
    if isinstance(a, (Cyclic, RatQ, Prufer)):
        return YES
    if isinstance(a, (Padic, AdicProduct)):
        return YES if is_finite_mult(m) else UNKNOWN
    if isinstance(a, IntZ):
        return NO
    if isinstance(a, RankOne):
        return NO if is_finite_mult(m) else UNKNOWN
    if isinstance(a, CompletelyDecomposable):
        return UNKNOWN
    raise TypeError(a)


def _atom_nondivisible_prime(a: Atom) -> Optional[int]:
    """Smallest prime at which the atom is not divisible, None if divisible."""
    if isinstance(a, (RatQ, Prufer)):
        return None
    if isinstance(a, IntZ):
        return 2
    if isinstance(a, Cyclic):
        return a.p
    if isinstance(a, (Padic,)):
        return a.p
    if isinstance(a, AdicProduct):
        return a.ranks[0][0]
    if isinstance(a, RankOne):
        t = a.tclass
        if t.default == 0:
            i = 1
            while True:
                p = nth_prime(i)
                if not t.infinite_at(p):
                    return p
                i += 1
        return min(t.exceptions) if t.exceptions else None
    if isinstance(a, CompletelyDecomposable):
        # both omega-schemas contain a summand with finite height at 2
        return 2
    raise TypeError(a)


@dataclass(frozen=True)
class StructuralFacts:
    is_zero: bool
    is_finite: bool
    is_torsion: bool
    is_torsion_free: bool
    is_divisible: bool
    is_reduced: bool
    is_completely_decomposable: bool
    is_cotorsion: str  # yes / no / unknown
    torsion_free_rank: Mult
    divisible_part: GroupExpr
    reduced_part: GroupExpr
    torsion_part: GroupExpr
    torsion_free_part: GroupExpr
    primary_parts: dict[int, GroupExpr]
    bounded_p_torsion: dict[int, bool]
    tp_finite: dict[int, bool]
    tp_separable: dict[int, bool]
    smallest_nondivisible_prime: Optional[int]

    @property
    def has_torsion(self) -> bool:
        return bool(self.primary_parts)

    @property
    def reduced_part_has_torsion(self) -> bool:
        return any(isinstance(a, Cyclic) for a, _ in components(self.torsion_part))

    @property
    def all_bounded_p_torsion(self) -> bool:
        return all(self.bounded_p_torsion.values())

    @property
    def all_tp_finite(self) -> bool:
        return all(self.tp_finite.values())

    @property
    def all_tp_separable(self) -> bool:
        return all(self.tp_separable.values())

    @property
    def has_finite_rank(self) -> bool:
        return is_finite_mult(self.torsion_free_rank)

    @property
    def divisible_part_is_qn(self) -> bool:
        """Divisible part isomorphic to Q^n for finite n >= 0."""
        comps = components(self.divisible_part)
        return all(isinstance(a, RatQ) and is_finite_mult(m) for a, m in comps)


def _sum_of(parts: list[tuple[Atom, Mult]]) -> GroupExpr:
    if not parts:
        return Zero()
    if len(parts) == 1 and parts[0][1] == 1:
        return parts[0][0]
    return DirectSum(tuple(parts))


def facts(g: GroupExpr) -> StructuralFacts:
    """Structural predicates of the denoted group; input is normalized first."""
    g = normalize(g)
    comps = components(g)

    div = [(a, m) for a, m in comps if _atom_is_divisible(a)]
    red = [(a, m) for a, m in comps if not _atom_is_divisible(a)]
    tors = [(a, m) for a, m in comps if _atom_is_torsion(a)]
    tf = [(a, m) for a, m in comps if not _atom_is_torsion(a)]

    primary: dict[int, list[tuple[Atom, Mult]]] = {}
    for a, m in tors:
        primary.setdefault(a.p, []).append((a, m))

    rank: Mult = 0
    for a, m in tf:
        if isinstance(a, (IntZ, RatQ, RankOne)):
            rank = mult_add(rank, m)
        else:
            rank = OMEGA  # adic modules and omega-schema families have infinite rank

    is_zero = not comps
    is_torsion = not tf
    is_torsion_free = not tors
    is_finite = is_torsion and all(isinstance(a, Cyclic) and is_finite_mult(m) for a, m in comps)
    is_divisible = not red
    is_reduced = not div
    is_cd = all(isinstance(a, (IntZ, RatQ, RankOne, CompletelyDecomposable)) for a, m in comps)

    statuses = {_atom_cotorsion(a, m) for a, m in comps}
    if NO in statuses:
        cot = NO
    elif UNKNOWN in statuses:
        cot = UNKNOWN
    else:
        cot = YES

    bounded = {p: all(not isinstance(a, Prufer) for a, _ in lst) for p, lst in primary.items()}
    finite_tp = {p: all(isinstance(a, Cyclic) and is_finite_mult(m) for a, m in lst)
                 for p, lst in primary.items()}
    separable = dict(bounded)  # grammar criterion: no Prufer summand in T_p

    nondiv = None
    for a, _ in comps:
        q = _atom_nondivisible_prime(a)
        if q is not None and (nondiv is None or q < nondiv):
            nondiv = q

    return StructuralFacts(
        is_zero=is_zero,
        is_finite=is_finite,
        is_torsion=is_torsion,
        is_torsion_free=is_torsion_free,
        is_divisible=is_divisible,
        is_reduced=is_reduced,
        is_completely_decomposable=is_cd,
        is_cotorsion=cot,
        torsion_free_rank=rank,
        divisible_part=_sum_of(div),
        reduced_part=_sum_of(red),
        torsion_part=_sum_of(tors),
        torsion_free_part=_sum_of(tf),
        primary_parts={p: _sum_of(lst) for p, lst in primary.items()},
        bounded_p_torsion=bounded,
        tp_finite=finite_tp,
        tp_separable=separable,
        smallest_nondivisible_prime=nondiv,
    )


def separability_table(g: GroupExpr) -> dict[int, bool]:
    """Separability of each non-trivial primary part T_p.

    The grammar-level criterion declares a direct sum of cyclic p-groups
    separable and any Prufer summand a defeater.  Primes absent from the
    map have T_p = 0 and count as separable.
    """
    return facts(g).tp_separable


def type_family_view(g: GroupExpr) -> Optional[tuple[tuple, tuple]]:
    """(entries, schemas) of a torsion-free completely decomposable expression,
    or None when the expression is not of that shape."""
    g = normalize(g)
    f = facts(g)
    if not (f.is_completely_decomposable and f.is_torsion_free):
        return None
    entries = []
    schemas = []
    for a, m in components(g):
        if isinstance(a, IntZ):
            entries.append((TYPE_Z, m))
        elif isinstance(a, RatQ):
            entries.append((TYPE_Q, m))
        elif isinstance(a, RankOne):
            entries.append((a.tclass, m))
        elif isinstance(a, CompletelyDecomposable):
            schemas.append((a.family.omega_schema(), m))
        else:
            return None
    return tuple(entries), tuple(schemas)
