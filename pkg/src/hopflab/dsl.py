"""Textual syntax for group expressions, with a round-tripping printer.

Grammar (whitespace-insensitive)::

    expr     := term ("+" term)*
    term     := atom ("^" mult)?
    mult     := integer>=1 | "w"
    atom     := "Z" | "Q" | "Z(" prime "^" nat ")" | "Prufer(" prime ")"
              | "Jp(" prime ")" | "Prod(" prime ":" nat ("," prime ":" nat)* ")"
              | "R1[" charspec "]" | "CD{" family "}" | "0"
    charspec := "def=" ("0"|"inf") ((";"|",") prime "->" (nat|"inf"))*
    family   := entry ("," entry)* | "incomparable(w)" | "descending(w)"
    entry    := "R1[" charspec "]" (":" mult)?

Parse errors carry the byte offset of the offending token.  Printing a
normalized expression and parsing it back reproduces the normal form.
"""

from __future__ import annotations

from typing import Optional

import sympy

from .types_lattice import (
    INF,
    OMEGA,
    Characteristic,
    DescendingChain,
    PairwiseIncomparableChain,
    TypeClass,
    TypeFamily,
    canonicalize,
)
from .group_model import (
    AdicProduct,
    CompletelyDecomposable,
    Cyclic,
    DirectSum,
    GroupExpr,
    IntZ,
    InvalidGroupError,
    Padic,
    Prufer,
    RankOne,
    RatQ,
    Zero,
    components,
    mult_str,
    normalize,
)


class ParseError(ValueError):
    """Syntax or validity error with the byte offset where it occurred."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset
        self.message = message


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def eat(self, token: str) -> None:
        self.skip_ws()
        if not self.text.startswith(token, self.pos):
            raise ParseError(f"expected {token!r}", self.pos)
        self.pos += len(token)

    def try_eat(self, token: str) -> bool:
        self.skip_ws()
        if self.text.startswith(token, self.pos):
            self.pos += len(token)
            return True
        return False

    def eat_nat(self) -> int:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start:
            raise ParseError("expected a number", start)
        return int(self.text[start:self.pos])

    def eat_prime(self) -> int:
        self.skip_ws()
        start = self.pos
        p = self.eat_nat()
        if not sympy.isprime(p):
            raise ParseError(f"{p} is not prime", start)
        return p

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)


def _parse_charspec(s: _Scanner) -> TypeClass:
    s.eat("def=")
    if s.try_eat("inf"):
        default = INF
    elif s.try_eat("0"):
        default = 0
    else:
        raise ParseError("expected '0' or 'inf' after 'def='", s.pos)
    exceptions = {}
    while s.try_eat(";") or s.try_eat(","):
        start = s.pos
        p = s.eat_prime()
        s.eat("->")
        if s.try_eat("inf"):
            v = INF
        else:
            v = s.eat_nat()
        if p in exceptions:
            raise ParseError(f"duplicate prime {p} in characteristic", start)
        exceptions[p] = v
    return canonicalize(Characteristic.make(default, exceptions))


def _parse_mult(s: _Scanner):
    if s.try_eat("w"):
        return OMEGA
    start = s.pos
    n = s.eat_nat()
    if n < 1:
        raise ParseError("multiplicity must be >= 1", start)
    return n


def _parse_family(s: _Scanner) -> TypeFamily:
    if s.try_eat("incomparable(w)"):
        return TypeFamily((), PairwiseIncomparableChain(OMEGA))
    if s.try_eat("descending(w)"):
        return TypeFamily((), DescendingChain(OMEGA))
    entries = []
    while True:
        s.eat("R1[")
        t = _parse_charspec(s)
        s.eat("]")
        m = 1
        if s.try_eat(":"):
            m = _parse_mult(s)
        entries.append((t, m))
        if not s.try_eat(","):
            break
    return TypeFamily(tuple(entries), None)


def _parse_atom(s: _Scanner) -> GroupExpr:
    start = s.pos
    if s.try_eat("0"):
        return Zero()
    if s.try_eat("Z("):
        p = s.eat_prime()
        s.eat("^")
        n = s.eat_nat()
        s.eat(")")
        if n < 1:
            raise ParseError("cyclic exponent must be >= 1", start)
        return Cyclic(p, n)
    if s.try_eat("Z"):
        return IntZ()
    if s.try_eat("Q"):
        return RatQ()
    if s.try_eat("Prufer("):
        p = s.eat_prime()
        s.eat(")")
        return Prufer(p)
    if s.try_eat("Jp("):
        p = s.eat_prime()
        s.eat(")")
        return Padic(p)
    if s.try_eat("Prod("):
        ranks = {}
        while True:
            pstart = s.pos
            p = s.eat_prime()
            s.eat(":")
            r = s.eat_nat()
            if r < 1:
                raise ParseError("adic rank must be >= 1", pstart)
            if p in ranks:
                raise ParseError(f"duplicate prime {p} in Prod", pstart)
            ranks[p] = r
            if not s.try_eat(","):
                break
        s.eat(")")
        return AdicProduct(tuple(sorted(ranks.items())))
    if s.try_eat("R1["):
        t = _parse_charspec(s)
        s.eat("]")
        return RankOne(t)
    if s.try_eat("CD{"):
        fam = _parse_family(s)
        s.eat("}")
        return CompletelyDecomposable(fam)
    raise ParseError("expected a group atom", start)


def parse_group(text: str) -> GroupExpr:
    """Parse a group expression; raises ParseError with a byte offset."""
    s = _Scanner(text)
    parts = []
    while True:
        atom = _parse_atom(s)
        m = 1
        if s.try_eat("^"):
            m = _parse_mult(s)
        parts.append((atom, m))
        if not s.try_eat("+"):
            break
    if not s.at_end():
        raise ParseError("trailing input", s.pos)
    try:
        if len(parts) == 1 and parts[0][1] == 1:
            return parts[0][0]
        return DirectSum(tuple(parts))
    except InvalidGroupError as exc:
        raise ParseError(str(exc), 0) from exc


def print_group(g: GroupExpr) -> str:
    """Canonical text of the normal form; parse(print(g)) == normalize(g)."""
    g = normalize(g)
    if isinstance(g, Zero):
        return "0"
    return " + ".join(_print_term(a, m) for a, m in components(g))


def _print_term(atom, m) -> str:
    body = str(atom)
    return body if m == 1 else f"{body}^{mult_str(m)}"


def canonical_key(g: GroupExpr) -> str:
    """Stable identity string for a group expression (its canonical text)."""
    return print_group(g)


_PROPERTY_ALIASES = {
    "hopfian": "Hopfian",
    "hopf": "Hopfian",
    "cohopfian": "CoHopfian",
    "cohopf": "CoHopfian",
    "cfi": "CoFinitelyInjective",
    "cofinitelyinjective": "CoFinitelyInjective",
    "cfs": "CoFinitelySurjective",
    "cofinitelysurjective": "CoFinitelySurjective",
    "cfh": "CoFinitelyHopfian",
    "cofinitelyhopfian": "CoFinitelyHopfian",
    "acfh": "AlmostCoFinitelyHopfian",
    "almostcofinitelyhopfian": "AlmostCoFinitelyHopfian",
    "afh": "AlmostFinitelyHopfian",
    "almostfinitelyhopfian": "AlmostFinitelyHopfian",
    "fir": "FiniteInjectiveRank",
    "finiteinjectiverank": "FiniteInjectiveRank",
    "bassian": "Bassian",
}


def parse_property_name(text: str) -> str:
    key = text.strip().lower().replace("-", "").replace("_", "")
    if key not in _PROPERTY_ALIASES:
        raise ValueError(f"unknown property: {text!r}")
    return _PROPERTY_ALIASES[key]
