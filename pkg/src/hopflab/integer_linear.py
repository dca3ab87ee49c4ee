"""Arbitrary-precision integer matrix algebra.

Smith and Hermite normal forms with recorded unimodular transforms,
exact kernels and cokernels of endomorphisms of finitely generated
abelian groups in canonical form.  Everything here is deterministic:
pivot selection is smallest-nonzero-magnitude with row-major tie-break,
so golden outputs are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Optional, Sequence

import sympy


class BlockShapeError(ValueError):
    """Raised for malformed endomorphism blocks."""


class NotSquareError(ValueError):
    pass


@dataclass(frozen=True)
class IntMatrix:
    """Immutable integer matrix; entries stored row-major."""

    rows: int
    cols: int
    entries: tuple[int, ...]

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise ValueError("negative dimensions")
        if len(self.entries) != self.rows * self.cols:
            raise ValueError("entry count does not match dimensions")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "IntMatrix":
        r = len(rows)
        c = len(rows[0]) if r else 0
        flat = []
        for row in rows:
            if len(row) != c:
                raise ValueError("ragged rows")
            flat.extend(int(x) for x in row)
        return cls(r, c, tuple(flat))

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, tuple(1 if i == j else 0 for i in range(n) for j in range(n)))

    @classmethod
    def zeros(cls, r: int, c: int) -> "IntMatrix":
        return cls(r, c, (0,) * (r * c))

    @classmethod
    def diag(cls, values: Sequence[int]) -> "IntMatrix":
        n = len(values)
        return cls(n, n, tuple(values[i] if i == j else 0 for i in range(n) for j in range(n)))

    def at(self, i: int, j: int) -> int:
        return self.entries[i * self.cols + j]

    def to_rows(self) -> list[list[int]]:
        return [list(self.entries[i * self.cols:(i + 1) * self.cols]) for i in range(self.rows)]

    def transpose(self) -> "IntMatrix":
        return IntMatrix(self.cols, self.rows,
                         tuple(self.at(i, j) for j in range(self.cols) for i in range(self.rows)))

    def mul(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ValueError("dimension mismatch")
        a, b = self.to_rows(), other.to_rows()
        out = []
        for i in range(self.rows):
            ai = a[i]
            for j in range(other.cols):
                out.append(sum(ai[k] * b[k][j] for k in range(self.cols)))
        return IntMatrix(self.rows, other.cols, tuple(out))

    def scale(self, c: int) -> "IntMatrix":
        return IntMatrix(self.rows, self.cols, tuple(c * x for x in self.entries))

    def column(self, j: int) -> list[int]:
        return [self.at(i, j) for i in range(self.rows)]

    def is_zero(self) -> bool:
        return all(x == 0 for x in self.entries)

    def __str__(self) -> str:
        return "[" + "; ".join(" ".join(str(self.at(i, j)) for j in range(self.cols))
                               for i in range(self.rows)) + "]"


def matrix_to_json(m: IntMatrix) -> list[list[str]]:
    """Array-of-arrays of decimal strings; safe for arbitrary precision."""
    return [[str(x) for x in row] for row in m.to_rows()]


def matrix_from_json(data: Sequence[Sequence[str]]) -> IntMatrix:
    return IntMatrix.from_rows([[int(x) for x in row] for row in data])


def det_bareiss(m: IntMatrix) -> int:
    """Exact determinant via fraction-free Gaussian elimination."""
    if m.rows != m.cols:
        raise NotSquareError("determinant of a non-square matrix")
    n = m.rows
    if n == 0:
        return 1
    a = m.to_rows()
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


# ---------------------------------------------------------------------------
# Smith normal form


@dataclass(frozen=True)
class SNFResult:
    """U * A * V = S with U, V unimodular and S = diag(d1 | d2 | ...)."""

    U: IntMatrix
    S: IntMatrix
    V: IntMatrix

    def diagonal(self) -> list[int]:
        k = min(self.S.rows, self.S.cols)
        return [self.S.at(i, i) for i in range(k)]

    def invariant_factors(self) -> list[int]:
        return [d for d in self.diagonal() if d not in (0, 1)]

    def rank(self) -> int:
        return sum(1 for d in self.diagonal() if d != 0)


def _swap_rows(a, i, j):
    a[i], a[j] = a[j], a[i]


def _swap_cols(a, i, j):
    for row in a:
        row[i], row[j] = row[j], row[i]


def smith_normal_form(m: IntMatrix) -> SNFResult:
    """Diagonalize by unimodular row and column operations.

    Pivot selection is the smallest non-zero magnitude in the working
    submatrix, ties broken row-major; after each diagonal entry is
    isolated it is forced to divide every remaining entry, which yields
    the divisibility chain directly.
    """
    rows, cols = m.rows, m.cols
    a = m.to_rows()
    u = IntMatrix.identity(rows).to_rows()
    v = IntMatrix.identity(cols).to_rows()

    def row_op(i, j, q):
        # row_i -= q * row_j, tracked in U
        for t in range(cols):
            a[i][t] -= q * a[j][t]
        for t in range(rows):
            u[i][t] -= q * u[j][t]

    def col_op(i, j, q):
        # col_i -= q * col_j, tracked in V
        for r in range(rows):
            a[r][i] -= q * a[r][j]
        for r in range(cols):
            v[r][i] -= q * v[r][j]

    n = min(rows, cols)
    t = 0
    while t < n:
        # locate pivot: smallest nonzero magnitude, row-major tie-break
        pivot = None
        for i in range(t, rows):
            for j in range(t, cols):
                x = a[i][j]
                if x != 0 and (pivot is None or abs(x) < abs(a[pivot[0]][pivot[1]])):
                    pivot = (i, j)
        if pivot is None:
            break
        pi, pj = pivot
        if pi != t:
            _swap_rows(a, t, pi)
            _swap_rows(u, t, pi)
        if pj != t:
            _swap_cols(a, t, pj)
            _swap_cols(v, t, pj)
        while True:
            # clear the pivot column
            dirty = False
            for i in range(t + 1, rows):
                if a[i][t] != 0:
                    q = a[i][t] // a[t][t]
                    row_op(i, t, q)
                    if a[i][t] != 0:
                        _swap_rows(a, t, i)
                        _swap_rows(u, t, i)
                        dirty = True
            if dirty:
                continue
            # clear the pivot row
            for j in range(t + 1, cols):
                if a[t][j] != 0:
                    q = a[t][j] // a[t][t]
                    col_op(j, t, q)
                    if a[t][j] != 0:
                        _swap_cols(a, t, j)
                        _swap_cols(v, t, j)
                        dirty = True
            if dirty:
                continue
            # force the pivot to divide the remaining submatrix
            d = a[t][t]
            bad = None
            for i in range(t + 1, rows):
                for j in range(t + 1, cols):
                    if a[i][j] % d != 0:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            # add the offending row to the pivot row and restart the clearing
            for col in range(cols):
                a[t][col] += a[bad][col]
            for col in range(rows):
                u[t][col] += u[bad][col]
        t += 1

    # normalize signs on the diagonal
    for i in range(min(rows, cols)):
        if a[i][i] < 0:
            for j in range(cols):
                a[i][j] = -a[i][j]
            for j in range(rows):
                u[i][j] = -u[i][j]
    return SNFResult(IntMatrix.from_rows(u) if rows else IntMatrix.zeros(0, 0),
                     IntMatrix.from_rows(a) if rows else IntMatrix.zeros(0, cols),
                     IntMatrix.from_rows(v) if cols else IntMatrix.zeros(cols, cols))


# ---------------------------------------------------------------------------
# Hermite normal form (row style)


def hermite_normal_form(m: IntMatrix) -> tuple[IntMatrix, IntMatrix]:
    """Row-style Hermite form: U * A = H with U unimodular.

    Pivot convention: pivots positive, entries above a pivot reduced into
    [0, pivot), zero rows at the bottom.
    """
    rows, cols = m.rows, m.cols
    a = m.to_rows()
    u = IntMatrix.identity(rows).to_rows()
    r = 0
    for j in range(cols):
        if r >= rows:
            break
        # gcd-reduce column j below row r
        while True:
            pivots = [i for i in range(r, rows) if a[i][j] != 0]
            if not pivots:
                break
            i0 = min(pivots, key=lambda i: (abs(a[i][j]), i))
            if i0 != r:
                _swap_rows(a, r, i0)
                _swap_rows(u, r, i0)
            done = True
            for i in range(r + 1, rows):
                if a[i][j] != 0:
                    q = a[i][j] // a[r][j]
                    for t in range(cols):
                        a[i][t] -= q * a[r][t]
                    for t in range(rows):
                        u[i][t] -= q * u[r][t]
                    if a[i][j] != 0:
                        done = False
            if done:
                break
        if r < rows and a[r][j] != 0:
            if a[r][j] < 0:
                for t in range(cols):
                    a[r][t] = -a[r][t]
                for t in range(rows):
                    u[r][t] = -u[r][t]
            p = a[r][j]
            for i in range(r):
                q = a[i][j] // p  # floor division puts the entry in [0, p)
                if q:
                    for t in range(cols):
                        a[i][t] -= q * a[r][t]
                    for t in range(rows):
                        u[i][t] -= q * u[r][t]
            r += 1
    return IntMatrix.from_rows(a) if rows else m, IntMatrix.from_rows(u) if rows else IntMatrix.zeros(0, 0)


def kernel_basis(m: IntMatrix) -> IntMatrix:
    """Basis for the integer kernel {x : A x = 0}, returned as columns."""
    snf = smith_normal_form(m)
    diag = snf.diagonal()
    free = [j for j in range(m.cols) if j >= len(diag) or diag[j] == 0]
    cols = [snf.V.column(j) for j in free]
    if not cols:
        return IntMatrix.zeros(m.cols, 0)
    return IntMatrix.from_rows([[col[i] for col in cols] for i in range(m.cols)])


def solve_integer(m: IntMatrix, b: Sequence[int]) -> Optional[list[int]]:
    """One integer solution of A x = b, or None if none exists."""
    sol = solve_rational(m, [Fraction(x) for x in b])
    if sol is None or any(x.denominator != 1 for x in sol):
        return None
    return [int(x) for x in sol]


def solve_rational(m: IntMatrix, b: Sequence[Fraction]) -> Optional[list[Fraction]]:
    """One rational solution of A x = b, or None; free coordinates are 0."""
    if len(b) != m.rows:
        raise ValueError("dimension mismatch")
    snf = smith_normal_form(m)
    c = [sum(Fraction(snf.U.at(i, k)) * b[k] for k in range(m.rows)) for i in range(m.rows)]
    diag = snf.diagonal()
    y: list[Fraction] = [Fraction(0)] * m.cols
    for i in range(m.rows):
        d = diag[i] if i < len(diag) else 0
        if d == 0:
            if c[i] != 0:
                return None
        else:
            y[i] = c[i] / d
    return [sum(Fraction(snf.V.at(i, k)) * y[k] for k in range(m.cols)) for i in range(m.cols)]


def column_lattice_contains(m: IntMatrix, b: Sequence[int]) -> bool:
    """Membership of b in the integer column span of A."""
    return solve_integer(m, b) is not None


# ---------------------------------------------------------------------------
# Finitely generated abelian groups in canonical form


@dataclass(frozen=True)
class FgGroupCanon:
    """Free rank plus primary torsion list (prime, exponent, multiplicity)."""

    free_rank: int
    torsion: tuple[tuple[int, int, int], ...] = ()

    def __post_init__(self):
        if self.free_rank < 0:
            raise ValueError("negative free rank")
        for p, e, m in self.torsion:
            if not sympy.isprime(p) or e < 1 or m < 1:
                raise ValueError(f"bad torsion entry {(p, e, m)}")
        object.__setattr__(self, "torsion", tuple(sorted(self.torsion)))

    @property
    def is_trivial(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    @property
    def is_finite(self) -> bool:
        return self.free_rank == 0

    def torsion_order(self) -> int:
        n = 1
        for p, e, m in self.torsion:
            n *= p ** (e * m)
        return n

    def order(self) -> Optional[int]:
        return self.torsion_order() if self.is_finite else None

    def cyclic_orders(self) -> list[int]:
        """The torsion part expanded into one order per cyclic factor."""
        out = []
        for p, e, m in self.torsion:
            out.extend([p ** e] * m)
        return out

    def __str__(self) -> str:
        parts = []
        if self.free_rank == 1:
            parts.append("Z")
        elif self.free_rank > 1:
            parts.append(f"Z^{self.free_rank}")
        for p, e, m in self.torsion:
            s = f"Z({p}^{e})" if e > 1 else f"Z({p})"
            parts.append(s + (f"^{m}" if m > 1 else ""))
        return " + ".join(parts) if parts else "0"


def invariant_factors_to_primary(factors: Sequence[int]) -> tuple[tuple[int, int, int], ...]:
    counts: dict[tuple[int, int], int] = {}
    for d in factors:
        for p, e in sympy.factorint(d).items():
            counts[(p, e)] = counts.get((p, e), 0) + 1
    return tuple(sorted((p, e, m) for (p, e), m in counts.items()))


def cokernel_structure(m: IntMatrix) -> FgGroupCanon:
    """Structure of Z^rows / column-span(A), read off the Smith form."""
    snf = smith_normal_form(m)
    free = m.rows - snf.rank()
    return FgGroupCanon(free, invariant_factors_to_primary(snf.invariant_factors()))


# ---------------------------------------------------------------------------
# Endomorphisms of finitely generated groups


@dataclass(frozen=True)
class EndoMap:
    """An endomorphism given block-wise on the canonical components.

    Components are indexed 0 for the free part (when present) followed by
    the torsion entries of the domain in order.  ``blocks`` maps a
    (target, source) pair of component indices to an integer matrix whose
    column j is the coefficient vector of the image of source generator j.
    Missing blocks are zero.  A torsion source with a free target must be
    zero; a torsion-to-torsion block between distinct primes must be
    zero, and within a prime each entry must be divisible by
    p^(max(0, e_target - e_source)).
    """

    domain: FgGroupCanon
    blocks: tuple[tuple[tuple[int, int], IntMatrix], ...]

    @classmethod
    def make(cls, domain: FgGroupCanon, blocks: dict[tuple[int, int], IntMatrix]) -> "EndoMap":
        return cls(domain, tuple(sorted(blocks.items())))

    def component_sizes(self) -> list[tuple[str, int]]:
        comps: list[tuple[str, int]] = []
        if self.domain.free_rank:
            comps.append(("free", self.domain.free_rank))
        for p, e, m in self.domain.torsion:
            comps.append((f"{p}^{e}", m))
        return comps

    def _component_meta(self) -> list[tuple[Optional[int], int, int]]:
        # (prime or None for free, exponent, size)
        meta: list[tuple[Optional[int], int, int]] = []
        if self.domain.free_rank:
            meta.append((None, 0, self.domain.free_rank))
        for p, e, m in self.domain.torsion:
            meta.append((p, e, m))
        return meta

    def validate(self) -> None:
        meta = self._component_meta()
        k = len(meta)
        for (ti, si), blk in self.blocks:
            if not (0 <= ti < k and 0 <= si < k):
                raise BlockShapeError(f"block index out of range: {(ti, si)}")
            tp, te, tn = meta[ti]
            sp, se, sn = meta[si]
            if blk.rows != tn or blk.cols != sn:
                raise BlockShapeError(f"block {(ti, si)} has shape {blk.rows}x{blk.cols}, expected {tn}x{sn}")
            if sp is not None and tp is None and not blk.is_zero():
                raise BlockShapeError("torsion-to-free block must be zero")
            if sp is not None and tp is not None:
                if sp != tp and not blk.is_zero():
                    raise BlockShapeError("cross-prime torsion block must be zero")
                if sp == tp:
                    need = tp ** max(0, te - se)
                    mod = tp ** te
                    for x in blk.entries:
                        if x % need != 0 or not (0 <= x < mod):
                            raise BlockShapeError(
                                f"entry {x} violates the divisibility constraint "
                                f"{tp}^max(0,{te}-{se}) | entry, reduced mod {mod}")

    def full_matrix(self) -> tuple[IntMatrix, list[int]]:
        """Assemble the integer matrix on all generators plus the order vector
        (0 marks a free generator)."""
        meta = self._component_meta()
        offsets = []
        total = 0
        for _, _, size in meta:
            offsets.append(total)
            total += size
        rows = [[0] * total for _ in range(total)]
        block_map = dict(self.blocks)
        for (ti, si), blk in block_map.items():
            oi, oj = offsets[ti], offsets[si]
            for i in range(blk.rows):
                for j in range(blk.cols):
                    rows[oi + i][oj + j] = blk.at(i, j)
        orders = []
        for p, e, size in meta:
            orders.extend([0 if p is None else p ** e] * size)
        return IntMatrix.from_rows(rows) if total else IntMatrix.zeros(0, 0), orders


@dataclass(frozen=True)
class KernelCokernel:
    kernel: FgGroupCanon
    cokernel: FgGroupCanon
    injective: bool
    surjective: bool
    cokernel_finite: bool


def kernel_cokernel_of_matrix(phi: IntMatrix, orders: Sequence[int]) -> KernelCokernel:
    """Kernel and cokernel of the map induced by phi on Z^n / diag(orders).

    The group is presented as Z^n modulo the relation columns o_i * e_i
    for the torsion generators.  The cokernel is Z^n / (im phi + relations).
    The kernel is the preimage lattice {x : phi x in relations} modulo the
    relations, computed from an integer kernel basis of [phi | -R].
    """
    n = phi.rows
    if phi.cols != n or len(orders) != n:
        raise BlockShapeError("square matrix and matching order vector required")
    t_idx = [i for i, o in enumerate(orders) if o != 0]
    rel_cols = []
    for i in t_idx:
        col = [0] * n
        col[i] = orders[i]
        rel_cols.append(col)
    t = len(rel_cols)
    if n == 0:
        triv = FgGroupCanon(0)
        return KernelCokernel(triv, triv, True, True, True)

    # cokernel: Z^n / (im phi + im R)
    aug_rows = [[phi.at(i, j) for j in range(n)] + [rel_cols[k][i] for k in range(t)] for i in range(n)]
    coker = cokernel_structure(IntMatrix.from_rows(aug_rows))

    # kernel: project ker [phi | -R] onto the x part, then mod out R
    big_rows = [[phi.at(i, j) for j in range(n)] + [-rel_cols[k][i] for k in range(t)] for i in range(n)]
    kb = kernel_basis(IntMatrix.from_rows(big_rows))
    x_part_cols = [[kb.at(i, c) for i in range(n)] for c in range(kb.cols)]
    lat_gen = IntMatrix.from_rows([[col[i] for col in x_part_cols] for i in range(n)]) \
        if x_part_cols else IntMatrix.zeros(n, 0)
    # column-style Hermite basis of the preimage lattice
    h, _ = hermite_normal_form(lat_gen.transpose())
    basis_rows = [row for row in h.to_rows() if any(row)]
    if not basis_rows:
        kernel = FgGroupCanon(0)
    else:
        lb = IntMatrix.from_rows(basis_rows).transpose()  # n x l, columns form a basis
        # express each relation column in the basis
        w_cols = []
        for col in rel_cols:
            sol = solve_integer(lb, col)
            if sol is None:
                raise AssertionError("relations must lie inside the preimage lattice")
            w_cols.append(sol)
        l = lb.cols
        if w_cols:
            w = IntMatrix.from_rows([[w_cols[k][i] for k in range(len(w_cols))] for i in range(l)])
        else:
            w = IntMatrix.zeros(l, 0)
        kernel = cokernel_structure(w)
    injective = kernel.is_trivial
    surjective = coker.is_trivial
    return KernelCokernel(kernel, coker, injective, surjective, coker.free_rank == 0)


def endo_kernel_cokernel(e: EndoMap) -> KernelCokernel:
    """Kernel/cokernel structure, injectivity and surjectivity of an EndoMap."""
    e.validate()
    phi, orders = e.full_matrix()
    return kernel_cokernel_of_matrix(phi, orders)
