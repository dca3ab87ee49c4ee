"""Types of rank-1 torsion-free groups and the descending type condition.

A characteristic assigns to every prime a height in N u {inf}; two
characteristics are equivalent when they differ at finitely many primes,
by a finite amount at each.  Only the pattern of infinite heights
survives that equivalence, so a canonical type class stores a default
(all-zero or all-infinity) together with the finite set of primes whose
infinity status differs from it.  That reduction is a documented lemma
of this module and is exercised by the test suite.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Union

import sympy

INF = float("inf")
#: Countably infinite multiplicity marker used throughout the package.
OMEGA = float("inf")

Height = Union[int, float]
Mult = Union[int, float]


class EmptyFamilyError(ValueError):
    """Raised when an operation requires a non-empty family of types."""


def is_finite_mult(m: Mult) -> bool:
    return m != OMEGA


def check_prime(p: int) -> int:
    if not isinstance(p, int) or isinstance(p, bool) or not sympy.isprime(p):
        raise ValueError(f"not a prime: {p!r}")
    return p


def nth_prime(i: int) -> int:
    """The i-th prime, 1-indexed (nth_prime(1) == 2)."""
    return sympy.prime(i)


def _check_height(v: Height) -> Height:
    if v == INF:
        return INF
    if isinstance(v, int) and not isinstance(v, bool) and v >= 0:
        return v
    raise ValueError(f"height must be a natural number or inf: {v!r}")


@dataclass(frozen=True)
class Characteristic:
    """A height function on primes: a default value plus finite exceptions.

    ``default`` is the height at every prime not listed; it must be 0 or
    INF.  ``exceptions`` is stored canonically: sorted, all keys prime,
    no entry equal to the default.
    """

    default: Height
    exceptions: tuple[tuple[int, Height], ...] = ()

    def __post_init__(self):
        if self.default not in (0, INF):
            raise ValueError("default height must be 0 or inf")
        seen = set()
        for p, v in self.exceptions:
            check_prime(p)
            _check_height(v)
            if p in seen:
                raise ValueError(f"duplicate prime in exceptions: {p}")
            if v == self.default:
                raise ValueError(f"exception at {p} equals the default")
            seen.add(p)
        object.__setattr__(self, "exceptions", tuple(sorted(self.exceptions)))

    @classmethod
    def make(cls, default: Height, exceptions: Optional[Mapping[int, Height]] = None) -> "Characteristic":
        exc = tuple((p, v) for p, v in (exceptions or {}).items() if v != default)
        return cls(default, exc)

    def height_at(self, p: int) -> Height:
        for q, v in self.exceptions:
            if q == p:
                return v
        return self.default


@dataclass(frozen=True)
class TypeClass:
    """Canonical form of a characteristic: only the infinity pattern.

    ``exceptions`` lists the primes whose infinity status differs from
    the default (infinite where the default is 0, finite where the
    default is INF).
    """

    default: Height
    exceptions: tuple[int, ...] = ()

    def __post_init__(self):
        if self.default not in (0, INF):
            raise ValueError("default must be 0 or inf")
        for p in self.exceptions:
            check_prime(p)
        if len(set(self.exceptions)) != len(self.exceptions):
            raise ValueError("duplicate primes in exceptions")
        object.__setattr__(self, "exceptions", tuple(sorted(self.exceptions)))

    def infinite_at(self, p: int) -> bool:
        in_exc = p in self.exceptions
        return in_exc if self.default == 0 else not in_exc

    def sort_key(self) -> tuple:
        return (0 if self.default == 0 else 1, self.exceptions)

    def __str__(self) -> str:
        if self.default == 0:
            body = ", ".join(f"{p}->inf" for p in self.exceptions)
            return "R1[def=0" + ("; " + body if body else "") + "]"
        body = ", ".join(f"{p}->0" for p in self.exceptions)
        return "R1[def=inf" + ("; " + body if body else "") + "]"


#: Type of the integers: height 0 everywhere.
TYPE_Z = TypeClass(0, ())
#: Type of the rationals: height inf everywhere.
TYPE_Q = TypeClass(INF, ())


def canonicalize(c: Characteristic) -> TypeClass:
    """Collapse a characteristic to its type class.

    Finite exception values vanish; only primes carrying inf (against a
    zero default) or a finite value (against an inf default) remain.
    Idempotent in the sense that equivalent characteristics, i.e. those
    differing finitely at finitely many primes, map to equal outputs.
    """
    if c.default == 0:
        exc = tuple(p for p, v in c.exceptions if v == INF)
    else:
        exc = tuple(p for p, v in c.exceptions if v != INF)
    return TypeClass(c.default, exc)


def type_le(a: TypeClass, b: TypeClass) -> bool:
    """Partial order: a <= b iff every prime infinite in a is infinite in b.

    The infinity sets are finite (default 0) or cofinite (default inf),
    so containment is decidable from the stored exception sets.
    """
    sa, sb = set(a.exceptions), set(b.exceptions)
    if a.default == 0 and b.default == 0:
        return sa <= sb
    if a.default == 0 and b.default == INF:
        return not (sa & sb)
    if a.default == INF and b.default == 0:
        return False  # a cofinite set of primes never fits inside a finite one
    return sb <= sa


def type_lt(a: TypeClass, b: TypeClass) -> bool:
    return a != b and type_le(a, b)


def minimal_elements(s: Iterable[TypeClass]) -> set[TypeClass]:
    """The elements of a finite set with nothing strictly below them."""
    elems = set(s)
    if not elems:
        raise EmptyFamilyError("minimal_elements of an empty family")
    return {m for m in elems if not any(type_lt(x, m) for x in elems)}


@dataclass(frozen=True)
class PairwiseIncomparableChain:
    """Schema for the family tau_1, tau_2, ... with inf on disjoint singleton
    prime sets; any two distinct members are incomparable."""

    length: Mult = OMEGA

    def type_at(self, i: int) -> TypeClass:
        return TypeClass(0, (nth_prime(i),))


@dataclass(frozen=True)
class DescendingChain:
    """Schema for a strictly descending family tau_1 > tau_2 > ..., obtained
    from the all-infinity type by cumulatively removing infinity primes."""

    length: Mult = OMEGA

    def type_at(self, i: int) -> TypeClass:
        return TypeClass(INF, tuple(nth_prime(j) for j in range(1, i + 1)))


Schema = Union[PairwiseIncomparableChain, DescendingChain]


@dataclass(frozen=True)
class TypeFamily:
    """A finitely presented family of types with multiplicities.

    ``entries`` is an explicit finite list of (type, multiplicity) pairs;
    ``schema`` optionally adds an omega-indexed family given by rule.  At
    least one of the two must be non-empty for a non-zero group.
    """

    entries: tuple[tuple[TypeClass, Mult], ...] = ()
    schema: Optional[Schema] = None

    def __post_init__(self):
        if not self.entries and self.schema is None:
            raise EmptyFamilyError("a type family needs entries or a schema")
        for t, m in self.entries:
            if not isinstance(t, TypeClass):
                raise TypeError(f"not a TypeClass: {t!r}")
            if m != OMEGA and (not isinstance(m, int) or m < 1):
                raise ValueError(f"multiplicity must be >= 1 or omega: {m!r}")

    def expanded_entries(self) -> tuple[tuple[TypeClass, Mult], ...]:
        """Entries with any finite-length schema unrolled into the list."""
        out = list(self.entries)
        if self.schema is not None and is_finite_mult(self.schema.length):
            out.extend((self.schema.type_at(i), 1) for i in range(1, int(self.schema.length) + 1))
        return tuple(out)

    def omega_schema(self) -> Optional[Schema]:
        if self.schema is not None and not is_finite_mult(self.schema.length):
            return self.schema
        return None


@dataclass(frozen=True)
class DtcResult:
    outcome: str  # "Holds" or "Fails"
    witness: Optional[str] = None
    details: tuple[str, ...] = ()

    @property
    def holds(self) -> bool:
        return self.outcome == "Holds"


def decide_descending_condition(
    entries: Iterable[tuple[TypeClass, Mult]],
    schemas: Iterable[tuple[Schema, Mult]] = (),
) -> DtcResult:
    """Core decision for the descending type condition on a family view.

    The condition holds iff (a) every type occurs finitely often and
    (b) every non-empty subset of the occurring types has a minimal
    element.  For a finitely presented family that reduces to: no entry
    carries multiplicity omega, no strictly descending omega-schema is
    present, and no omega-schema is itself repeated omega times.  A
    schema-free family with finite multiplicities always satisfies both
    conditions because its set of distinct types is finite, which is the
    tested reduction lemma of this module.
    """
    details = []
    merged: dict[TypeClass, Mult] = {}
    for t, m in entries:
        merged[t] = merged.get(t, 0) + m
    for t, m in sorted(merged.items(), key=lambda tm: tm[0].sort_key()):
        if not is_finite_mult(m):
            return DtcResult(
                "Fails",
                witness=f"condition (a) fails: type {t} is repeated with infinite multiplicity",
                details=(f"entry {t} has multiplicity omega",),
            )
    for schema, m in schemas:
        if is_finite_mult(schema.length):
            continue
        if isinstance(schema, DescendingChain):
            t1, t2 = schema.type_at(1), schema.type_at(2)
            return DtcResult(
                "Fails",
                witness=(
                    "condition (b) fails: the schema selects an infinite strictly "
                    f"descending chain {t1} > {t2} > ... with no minimal element"
                ),
                details=("descending omega-schema present",),
            )
        if not is_finite_mult(m):
            t1 = schema.type_at(1)
            return DtcResult(
                "Fails",
                witness=f"condition (a) fails: type {t1} is repeated with infinite multiplicity",
                details=("omega copies of an omega-schema",),
            )
        details.append(
            "incomparable omega-schema: each type occurs finitely often and every "
            "subset of an antichain plus a finite set has a minimal element"
        )
    details.append("all explicit multiplicities finite; the distinct-type set admits no infinite descending selection")
    return DtcResult("Holds", details=tuple(details))


def dtc_check(f: TypeFamily) -> DtcResult:
    """Decide the descending type condition for a finitely presented family."""
    schemas = []
    sch = f.omega_schema()
    if sch is not None:
        schemas.append((sch, 1))
    return decide_descending_condition(f.expanded_entries(), schemas)
