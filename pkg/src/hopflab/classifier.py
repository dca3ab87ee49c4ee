"""Forward-chaining classifier for Hopficity-style properties.

Each rule implements one named result; a verdict records the chain of
rules that produced it together with their anchor quotations.  Outcomes
are three-valued: a property no rule chain settles stays Undecided.

The engine saturates: every applicable rule is fired on every relevant
subexpression until nothing new is concluded, and a rule concluding the
opposite of an already recorded outcome raises ConfluenceError.  Because
rule premises only ever test structural facts and already decided
verdicts, the saturated outcome set is independent of the order in which
rules are applied; the order only selects which rule gets recorded in
the trace when several settle the same property.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Optional

from .types_lattice import decide_descending_condition, is_finite_mult
from .group_model import (
    Cyclic,
    GroupExpr,
    Prufer,
    StructuralFacts,
    Zero,
    components,
    facts,
    normalize,
    type_family_view,
)
from .dsl import print_group


class Property(str, Enum):
    HOPFIAN = "Hopfian"
    CO_HOPFIAN = "CoHopfian"
    CFI = "CoFinitelyInjective"
    CFS = "CoFinitelySurjective"
    CFH = "CoFinitelyHopfian"
    ACFH = "AlmostCoFinitelyHopfian"
    AFH = "AlmostFinitelyHopfian"
    FIR = "FiniteInjectiveRank"
    BASSIAN = "Bassian"


ALL_PROPERTIES = tuple(Property)


class Outcome(str, Enum):
    HOLDS = "Holds"
    FAILS = "Fails"
    UNDECIDED = "Undecided"


class ConfluenceError(RuntimeError):
    """Two rules concluded opposite outcomes for the same property."""


@dataclass(frozen=True)
class TraceStep:
    rule: str
    anchor: str
    subject: str
    note: str = ""
    premises: tuple[str, ...] = ()


@dataclass(frozen=True)
class Verdict:
    property: Property
    outcome: Outcome
    trace: tuple[TraceStep, ...] = ()
    witness: Optional[str] = None
    group: str = ""


ANCHORS = {
    "R0": 'definitional: the zero group admits only the zero endomorphism, which is an automorphism',
    "R1": 'Lemma 2.1: "A satisfies the same property"',
    "R2a": 'Example 2.2: "neither co-finitely injective nor co-finitely surjective"',
    "R2b": 'Example 2.2: "co-finitely surjective, but not co-finitely injective"',
    "R2c": 'Section 1: "a non-trivial finite group will always be Hopfian, but never be co-finitely Hopfian"',
    "R3a": 'Corollary 2.3: "If G is co-finitely injective, then G is torsion-free"',
    "R3b": 'Corollary 2.3: "the reduced part of G is torsion-free"',
    "R4a": 'Proposition 2.4: "co-finitely injective if and only if it is torsion-free of finite rank"',
    "R4b": 'Proposition 2.4: "D is always co-finitely surjective"',
    "R4c": 'Proposition 2.4: "such a D is co-finitely Hopfian"',
    "R5a": 'Proposition 2.5: "R is co-finitely injective and D ~= Q^n for some n < omega"',
    "R5b": 'Proposition 2.5: "G is co-finitely surjective if and only if R is co-finitely surjective"',
    "R6": 'Corollary 2.6: "R is reduced co-finitely Hopfian"',
    "R7": 'Proposition 2.7: "co-finitely injective (and hence Hopfian)"',
    "R8": 'Proposition 2.8: "(d) G is divisible"',
    "R9": 'Corollary 3.1: "if and only if it is divisible"',
    "R10": 'Theorem 3.3: "descending type condition on rank 1 summands"',
    "R11": 'Lemma 3.2: "has a minimal element" and "the set of all j in I such that tau_j = tau_i is finite"',
    "R12": 'Proposition 4.1: "co-finitely surjective if and only if it is divisible"',
    "R13": 'Proposition 4.2: "direct sum of a finite number of copies of the p-adic integers"',
    "R14": 'Corollary 4.3: "torsion-free divisible of finite rank"',
    "R15": 'Proposition 6.2: "all but finitely many T_p are Hopfian"',
    "R16": 'Proposition 6.3: "if and only if it is co-finitely injective"',
    "R17": 'Corollary 6.4: "always be almost co-finitely Hopfian"',
    "R18": 'Proposition 6.5: "If both T and G/T are almost co-finitely Hopfian"',
    "R19": 'Proposition 6.6: "if and only if each T_p is finite"',
    "R20": 'Corollary 6.7: "if and only if it is Bassian"',
    "R21": 'Theorem 7.2: "T_p is separable"',
    "R22a": 'Section 1: "both co-finitely injective and co-finitely surjective"',
    "R22b": 'Section 1: "any group that is co-finitely injective will be Hopfian"',
    "R22c": 'Section 6: "any co-finitely injective group is almost co-finitely Hopfian"',
    "R22d": 'Section 7: "any almost co-finitely Hopfian and in addition, any Hopfian group, is almost finitely Hopfian"',
    "R22e": 'Section 5: "if G has finite injective rank, then it is trivially co-finitely injective"',
    "EXT1": 'EXT grammar lemma: a torsion p-group of the grammar is Hopfian iff it is finite',
    "EXT2": 'EXT grammar lemma: Z(p^inf) is almost finitely Hopfian',
    "EXT3": 'EXT grammar lemma: Z(p^inf) is not Hopfian',
}


@dataclass(frozen=True)
class Conclusion:
    key: str
    prop: Property
    outcome: Outcome
    rule: str
    anchor_id: str
    witness: Optional[str] = None
    note: str = ""
    premises: tuple[tuple[str, Property], ...] = ()
    extra_steps: tuple[TraceStep, ...] = ()


@dataclass
class _Cell:
    outcome: Outcome
    rule: str
    anchor_id: str
    witness: Optional[str]
    note: str
    premises: tuple[tuple[str, Property], ...]
    extra_steps: tuple[TraceStep, ...]


@dataclass
class _Node:
    expr: GroupExpr
    key: str
    facts: StructuralFacts
    dkey: str = ""
    rkey: str = ""
    tkey: str = ""
    qkey: str = ""
    primaries: dict = field(default_factory=dict)
    summands: tuple[str, ...] = ()
    family: Optional[tuple] = None


def _expr_power(atom, mult):
    from .group_model import DirectSum
    if mult == 1:
        return atom
    return DirectSum(((atom, mult),))


def build_closure(g: GroupExpr) -> tuple[str, dict[str, _Node]]:
    """Canonical nodes for the expression and the summands rules refer to."""
    root = normalize(g)
    root_key = print_group(root)
    nodes: dict[str, _Node] = {}
    work = [root]
    while work:
        e = work.pop()
        key = print_group(e)
        if key in nodes:
            continue
        f = facts(e)
        node = _Node(expr=e, key=key, facts=f)
        nodes[key] = node
        derived: list[GroupExpr] = [f.divisible_part, f.reduced_part, f.torsion_part, f.torsion_free_part]
        derived.extend(f.primary_parts.values())
        for atom, mult in components(e):
            derived.append(_expr_power(atom, mult))
            if mult != 1:
                derived.append(atom)
        node.dkey = print_group(f.divisible_part)
        node.rkey = print_group(f.reduced_part)
        node.tkey = print_group(f.torsion_part)
        node.qkey = print_group(f.torsion_free_part)
        node.primaries = {p: print_group(tp) for p, tp in f.primary_parts.items()}
        summands = []
        for d in derived:
            dk = print_group(d)
            if dk not in nodes:
                work.append(d)
            if dk != key and dk != "0" and dk not in summands:
                summands.append(dk)
        node.summands = tuple(sorted(summands))
        node.family = type_family_view(e)
    return root_key, nodes


class _Ctx:
    def __init__(self, nodes: dict[str, _Node], extended: bool):
        self.nodes = nodes
        self.extended = extended
        self.mem: dict[tuple[str, Property], _Cell] = {}
        self.firings: set[tuple[str, str, Property, Outcome]] = set()

    def get(self, key: str, prop: Property) -> Optional[Outcome]:
        cell = self.mem.get((key, prop))
        return cell.outcome if cell else None

    def cell(self, key: str, prop: Property) -> Optional[_Cell]:
        return self.mem.get((key, prop))


def _cyclic_witness(f: StructuralFacts) -> Optional[tuple[int, str]]:
    for a, _ in components(f.torsion_part):
        if isinstance(a, Cyclic):
            return a.p, f"Z({a.p}^{a.n})"
    return None


def _prufer_witness(f: StructuralFacts) -> Optional[int]:
    for a, _ in components(f.torsion_part):
        if isinstance(a, Prufer):
            return a.p
    return None


# ---------------------------------------------------------------------------
# Rules.  Each is a generator of Conclusions for one node.


def _r0(node: _Node, ctx: _Ctx) -> Iterator[Conclusion]:
    if not node.facts.is_zero:
        return
    for prop in ALL_PROPERTIES:
        yield Conclusion(node.key, prop, Outcome.HOLDS, "R0", "R0",
                         note="zero group: the only endomorphism is the identity")


def _r1(node: _Node, ctx: _Ctx) -> Iterator[Conclusion]:
    for prop in (Property.CFI, Property.CFS, Property.CFH):
        for skey in node.summands:
            cell = ctx.cell(skey, prop)
            if cell and cell.outcome == Outcome.FAILS:
                inner = cell.witness or "a failing endomorphism of the summand"
                yield Conclusion(
                    node.key, prop, Outcome.FAILS, "R1", "R1",
                    witness=f"on the summand {skey}: {inner}; extended by the identity elsewhere",
                    note=f"summand {skey} fails {prop.value}",
                    premises=((skey, prop),))
                break


def _r2(node: _Node, ctx: _Ctx) -> Iterator[Conclusion]:
    f = node.facts
    e = node.expr
    if isinstance(e, Cyclic):
        w = (f"multiplication by {e.p}: kernel Z({e.p}), cokernel Z({e.p}) "
             f"(finite, non-trivial)")
        yield Conclusion(node.key, Property.CFI, Outcome.FAILS, "R2", "R2a", witness=w)
        yield Conclusion(node.key, Property.CFS, Outcome.FAILS, "R2", "R2a", witness=w)
    if isinstance(e, Prufer):
        yield Conclusion(node.key, Property.CFS, Outcome.HOLDS, "R2", "R2b")
        yield Conclusion(node.key, Property.CFI, Outcome.FAILS, "R2", "R2b",
                         witness=f"multiplication by {e.p}: surjective with kernel Z({e.p})")
    if f.is_finite and not f.is_zero:
        yield Conclusion(node.key, Property.HOPFIAN, Outcome.HOLDS, "R2", "R2c",
                         note="finite group: surjective endomorphisms are bijective by counting")


def _r3(node: _Node, ctx: _Ctx) -> Iterator[Conclusion]:
    f = node.facts
    if f.is_zero:
        return
    if f.has_torsion:
        cw = _cyclic_witness(f)
        if cw:
            p, name = cw
            w = f"multiplication by {p} on one {name} summand, identity elsewhere: kernel Z({p}), cokernel Z({p})"
        else:
            p = _prufer_witness(f)
            w = f"multiplication by {p} on the Z({p}^inf) summand, identity elsewhere: kernel Z({p}), surjective"
        yield Conclusion(node.key, Property.CFI, Outcome.FAILS, "R3", "R3a", witness=w,
                         note="the torsion subgroup is non-zero")
    if f.reduced_part_has_torsion:
        p, name = _cyclic_witness(f)
        yield Conclusion(
            node.key, Property.CFS, Outcome.FAILS, "R3", "R3b",
            witness=f"multiplication by {p} on one {name} summand, identity elsewhere: cokernel Z({p}), finite and non-zero",
            note="the reduced part has torsion")


def _r4(node: _Node, ctx: _Ctx) -> Iterator[Conclusion]:
    f = node.facts
    if not f.is_divisible or f.is_zero:
        return
    yield Conclusion(node.key, Property.CFS, Outcome.HOLDS, "R4", "R4b",
                     note="a finite divisible quotient is zero")
    if f.is_torsion_free and f.has_finite_rank:
        yield Conclusion(node.key, Property.CFI, Outcome.HOLDS, "R4", "R4a")
        yield Conclusion(node.key, Property.CFH, Outcome.HOLDS, "R4", "R4c")
    elif f.is_torsion_free:
        yield Conclusion(
            node.key, Property.CFI, Outcome.FAILS, "R4", "R4a",
            witness="G ~= Q + G; composing that isomorphism with the projection killing the "
                    "Q coordinate is surjective with kernel Q",
            note="torsion-free divisible of infinite rank")
    # divisible with torsion: cfi fails via R3


def _r5(node: _Node, ctx: _Ctx) -> Iterator[Conclusion]:
    f = node.facts
    if f.is_zero or node.dkey == "0" or node.rkey == "0":
        return
    d_is_qn = f.divisible_part_is_qn
    r_cfi = ctx.get(node.rkey, Property.CFI)
    if r_cfi == Outcome.HOLDS and d_is_qn:
        yield Conclusion(node.key, Property.CFI, Outcome.HOLDS, "R5", "R5a",
                         premises=((node.rkey, Property.CFI),),
                         note=f"reduced part {node.rkey} is co-finitely injective and the divisible part is Q^n")
    if r_cfi == Outcome.FAILS:
        cell = ctx.cell(node.rkey, Property.CFI)
        yield Conclusion(node.key, Property.CFI, Outcome.FAILS, "R5", "R5a",
                         premises=((node.rkey, Property.CFI),),
                         witness=cell.witness and f"on the reduced part: {cell.witness}")
    if not d_is_qn:
        yield Conclusion(node.key, Property.CFI, Outcome.FAILS, "R5", "R5a",
                         note="the divisible part is not Q^n for finite n")
    r_cfs = ctx.get(node.rkey, Property.CFS)
    if r_cfs is not None:
        cell = ctx.cell(node.rkey, Property.CFS)
        yield Conclusion(node.key, Property.CFS, r_cfs, "R5", "R5b",
                         premises=((node.rkey, Property.CFS),),
                         witness=(cell.witness and f"on the reduced part: {cell.witness}")
                         if r_cfs == Outcome.FAILS else None)


def _r6(node: _Node, ctx: _Ctx) -> Iterator[Conclusion]:
    f = node.facts
    if f.is_zero or node.dkey == "0":
        return
    if not f.divisible_part_is_qn:
        yield Conclusion(node.key, Property.CFH, Outcome.FAILS, "R6", "R6",
                         note="the divisible part is not Q^n for finite n")
        return
    r_cfh = ctx.get(node.rkey, Property.CFH)
    if r_cfh is not None:
        cell = ctx.cell(node.rkey, Property.CFH)
        yield Conclusion(node.key, Property.CFH, r_cfh, "R6", "R6",
                         premises=((node.rkey, Property.CFH),),
                         witness=(cell.witness and f"on the reduced part: {cell.witness}")
                         if r_cfh == Outcome.FAILS else None)


def _r7(node: _Node, ctx: _Ctx) -> Iterator[Conclusion]:
    f = node.facts
    if f.is_torsion_free and f.has_finite_rank and not f.is_zero:
        yield Conclusion(node.key, Property.CFI, Outcome.HOLDS, "R7", "R7",
                         note=f"torsion-free of finite rank {f.torsion_free_rank}")
        yield Conclusion(node.key, Property.HOPFIAN, Outcome.HOLDS, "R7", "R7")


def _witness_mult_p(f: StructuralFacts) -> str:
    p = f.smallest_nondivisible_prime
    return (f"multiplication by {p} (= {p}*identity): injective, finite cokernel, "
            f"not surjective since the group is not {p}-divisible")


def _r8(node: _Node, ctx: _Ctx) -> Iterator[Conclusion]:
    f = node.facts
    if not (f.is_torsion_free and f.has_finite_rank) or f.is_zero:
        return
    if f.is_divisible:
        for prop in (Property.CFH, Property.CFS, Property.CO_HOPFIAN):
            yield Conclusion(node.key, prop, Outcome.HOLDS, "R8", "R8")
    else:
        w = _witness_mult_p(f)
        for prop in (Property.CFH, Property.CFS, Property.CO_HOPFIAN):
            yield Conclusion(node.key, prop, Outcome.FAILS, "R8", "R8", witness=w,
                             note="torsion-free of finite rank but not divisible")


def _r9(node: _Node, ctx: _Ctx) -> Iterator[Conclusion]:
    f = node.facts
    if not (f.is_completely_decomposable and f.is_torsion_free) or f.is_zero:
        return
    if f.is_divisible:
        yield Conclusion(node.key, Property.CFS, Outcome.HOLDS, "R9", "R9")
        if f.has_finite_rank:
            for prop in (Property.CFH, Property.CO_HOPFIAN):
                yield Conclusion(node.key, prop, Outcome.HOLDS, "R9", "R9")
        else:
            w = ("G ~= Q + G; the projection killing the extra Q coordinate is "
                 "surjective with kernel Q and zero cokernel")
            yield Conclusion(node.key, Property.CFH, Outcome.FAILS, "R9", "R9", witness=w,
                             note="divisible but of infinite rank")
            yield Conclusion(node.key, Property.CO_HOPFIAN, Outcome.FAILS, "R9", "R9",
                             witness="the inclusion of G into Q + G ~= G misses a Q coordinate: injective, not surjective")
    else:
        p = f.smallest_nondivisible_prime
        w = (f"multiplication by {p} on one rank-1 summand that is not {p}-divisible, identity "
             f"elsewhere: cokernel Z({p}), finite and non-zero")
        yield Conclusion(node.key, Property.CFS, Outcome.FAILS, "R9", "R9", witness=w)
        yield Conclusion(node.key, Property.CFH, Outcome.FAILS, "R9", "R9", witness=w)
        yield Conclusion(node.key, Property.CO_HOPFIAN, Outcome.FAILS, "R9", "R9",
                         witness=f"multiplication by {p}: injective on a torsion-free group, not surjective")


def _r10(node: _Node, ctx: _Ctx) -> Iterator[Conclusion]:
    f = node.facts
    if node.family is None or f.is_zero:
        return
    entries, schemas = node.family
    dtc = decide_descending_condition(entries, schemas)
    note = ""
    if schemas:
        note = ("omega-schema family: the descending type condition is decided through the "
                "Lemma 3.2 conditions on the schema expansion (recorded interpretation choice)")
    sub = TraceStep("R11", ANCHORS["R11"], node.key,
                    note=dtc.witness or "; ".join(dtc.details))
    if dtc.holds:
        for prop in (Property.CFI, Property.HOPFIAN):
            yield Conclusion(node.key, prop, Outcome.HOLDS, "R10", "R10",
                             note=note or "descending type condition holds",
                             extra_steps=(sub,))
    else:
        w = (f"{dtc.witness}; gluing surjections along the selected summands yields a "
             f"surjective endomorphism with infinite kernel")
        for prop in (Property.CFI, Property.HOPFIAN):
            yield Conclusion(node.key, prop, Outcome.FAILS, "R10", "R10", witness=w,
                             note=note or "descending type condition fails",
                             extra_steps=(sub,))


def _r12(node: _Node, ctx: _Ctx) -> Iterator[Conclusion]:
    f = node.facts
    if f.is_cotorsion != "yes" or f.is_zero:
        return
    if f.is_divisible:
        yield Conclusion(node.key, Property.CFS, Outcome.HOLDS, "R12", "R12")
    else:
        cw = _cyclic_witness(f)
        if cw:
            p, name = cw
            w = f"multiplication by {p} on one {name} summand, identity elsewhere: cokernel Z({p})"
        else:
            p = f.smallest_nondivisible_prime
            w = (f"multiplication by {p} on the {p}-adic summand, identity elsewhere: "
                 f"G/phi(G) ~= Z({p}); it follows that G cannot be co-finitely surjective")
        yield Conclusion(node.key, Property.CFS, Outcome.FAILS, "R12", "R12", witness=w,
                         note="cotorsion but not divisible")


def _r13(node: _Node, ctx: _Ctx) -> Iterator[Conclusion]:
    f = node.facts
    if f.is_cotorsion != "yes" or f.is_zero:
        return
    if f.is_torsion_free:
        if f.divisible_part_is_qn:
            yield Conclusion(node.key, Property.CFI, Outcome.HOLDS, "R13", "R13",
                             note="Q^n plus a product of finite-rank p-adic modules")
            yield Conclusion(node.key, Property.HOPFIAN, Outcome.HOLDS, "R13", "R13")
        else:
            yield Conclusion(node.key, Property.CFI, Outcome.FAILS, "R13", "R13",
                             witness="the divisible part has infinite rank: kill one Q coordinate "
                                     "after an isomorphism G ~= Q + G",
                             note="cotorsion, torsion-free, but not of the Q^n + product shape")
        # under cotorsion and torsion-freeness, Hopfian and cfi coincide
        for src, dst in ((Property.CFI, Property.HOPFIAN), (Property.HOPFIAN, Property.CFI)):
            out = ctx.get(node.key, src)
            if out is not None:
                cell = ctx.cell(node.key, src)
                yield Conclusion(node.key, dst, out, "R13", "R13",
                                 premises=((node.key, src),), witness=cell.witness)
    elif f.has_torsion:
        cw = _cyclic_witness(f)
        if cw:
            p, name = cw
            w = f"multiplication by {p} on one {name} summand, identity elsewhere"
        else:
            p = _prufer_witness(f)
            w = f"multiplication by {p} on the Z({p}^inf) summand, identity elsewhere"
        yield Conclusion(node.key, Property.CFI, Outcome.FAILS, "R13", "R13", witness=w,
                         note="a cotorsion co-finitely injective group is torsion-free")


def _r14(node: _Node, ctx: _Ctx) -> Iterator[Conclusion]:
    f = node.facts
    if f.is_cotorsion != "yes" or f.is_zero:
        return
    if f.is_torsion_free and f.is_divisible and f.has_finite_rank:
        yield Conclusion(node.key, Property.CFH, Outcome.HOLDS, "R14", "R14")
    else:
        if not f.is_divisible:
            p = f.smallest_nondivisible_prime
            w = f"multiplication by {p} on a reduced summand, identity elsewhere: finite non-zero cokernel"
        elif f.has_torsion:
            p = _prufer_witness(f)
            w = f"multiplication by {p} on the Z({p}^inf) summand, identity elsewhere: surjective with kernel Z({p})"
        else:
            w = "kill one Q coordinate after an isomorphism G ~= Q + G"
        yield Conclusion(node.key, Property.CFH, Outcome.FAILS, "R14", "R14", witness=w,
                         note="cotorsion but not torsion-free divisible of finite rank")


def _r15(node: _Node, ctx: _Ctx) -> Iterator[Conclusion]:
    f = node.facts
    if not f.is_torsion or f.is_zero:
        return
    prim = node.primaries
    if not prim or any(k == node.key for k in prim.values()):
        return  # a single primary component is its own T_p
    outs = {p: ctx.get(k, Property.ACFH) for p, k in prim.items()}
    for p, out in sorted(outs.items()):
        if out == Outcome.FAILS:
            cell = ctx.cell(prim[p], Property.ACFH)
            yield Conclusion(node.key, Property.ACFH, Outcome.FAILS, "R15", "R15",
                             premises=((prim[p], Property.ACFH),),
                             witness=cell.witness and f"on T_{p}: {cell.witness}",
                             note=f"the primary part T_{p} is not almost co-finitely Hopfian")
            return
    if all(out == Outcome.HOLDS for out in outs.values()):
        yield Conclusion(node.key, Property.ACFH, Outcome.HOLDS, "R15", "R15",
                         premises=tuple((k, Property.ACFH) for _, k in sorted(prim.items())),
                         note="each T_p is almost co-finitely Hopfian; only finitely many primes "
                              "occur, so all but finitely many T_p are trivially Hopfian")


def _r16(node: _Node, ctx: _Ctx) -> Iterator[Conclusion]:
    f = node.facts
    if not f.is_torsion_free or f.is_zero:
        return
    for src, dst in ((Property.CFI, Property.ACFH), (Property.ACFH, Property.CFI)):
        out = ctx.get(node.key, src)
        if out is not None:
            cell = ctx.cell(node.key, src)
            yield Conclusion(node.key, dst, out, "R16", "R16",
                             premises=((node.key, src),), witness=cell.witness,
                             note="torsion-free: almost co-finitely Hopfian and co-finitely injective coincide")


def _r17(node: _Node, ctx: _Ctx) -> Iterator[Conclusion]:
    f = node.facts
    if f.is_torsion_free and f.has_finite_rank and not f.is_zero:
        yield Conclusion(node.key, Property.ACFH, Outcome.HOLDS, "R17", "R17")


def _r18(node: _Node, ctx: _Ctx) -> Iterator[Conclusion]:
    f = node.facts
    if f.is_zero or not f.has_torsion or node.qkey == "0" or node.tkey == node.key:
        return
    t_out = ctx.get(node.tkey, Property.ACFH)
    q_out = ctx.get(node.qkey, Property.ACFH)
    if t_out == Outcome.HOLDS and q_out == Outcome.HOLDS:
        yield Conclusion(node.key, Property.ACFH, Outcome.HOLDS, "R18", "R18",
                         premises=((node.tkey, Property.ACFH), (node.qkey, Property.ACFH)),
                         note="both the torsion part and the torsion-free quotient are almost co-finitely Hopfian")


def _r19(node: _Node, ctx: _Ctx) -> Iterator[Conclusion]:
    f = node.facts
    if f.is_zero or not f.has_torsion or not f.all_bounded_p_torsion:
        return
    q_out = ctx.get(node.qkey, Property.ACFH)
    if q_out != Outcome.HOLDS:
        return
    if f.all_tp_finite:
        yield Conclusion(node.key, Property.ACFH, Outcome.HOLDS, "R19", "R19",
                         premises=((node.qkey, Property.ACFH),),
                         note="bounded p-torsion with every T_p finite")
    else:
        p = next(p for p, fin in sorted(f.tp_finite.items()) if not fin)
        yield Conclusion(
            node.key, Property.ACFH, Outcome.FAILS, "R19", "R19",
            premises=((node.qkey, Property.ACFH),),
            witness=(f"G ~= H + Z({p}^n)^(N); the coordinate-pairing surjection of Z({p}^n)^(N), "
                     f"identity on H, is onto with infinite kernel and zero cokernel"),
            note=f"T_{p} is infinite though bounded")


def _r20(node: _Node, ctx: _Ctx) -> Iterator[Conclusion]:
    f = node.facts
    if f.is_zero or not f.has_finite_rank or not f.all_bounded_p_torsion:
        return
    for src, dst in ((Property.ACFH, Property.BASSIAN), (Property.BASSIAN, Property.ACFH)):
        out = ctx.get(node.key, src)
        if out is not None:
            cell = ctx.cell(node.key, src)
            yield Conclusion(node.key, dst, out, "R20", "R20",
                             premises=((node.key, src),), witness=cell.witness,
                             note="finite torsion-free rank and bounded p-torsion")


def _r21(node: _Node, ctx: _Ctx) -> Iterator[Conclusion]:
    f = node.facts
    if f.is_zero or not f.all_tp_separable:
        return
    for src, dst in ((Property.HOPFIAN, Property.AFH), (Property.AFH, Property.HOPFIAN)):
        out = ctx.get(node.key, src)
        if out is not None:
            cell = ctx.cell(node.key, src)
            yield Conclusion(node.key, dst, out, "R21", "R21",
                             premises=((node.key, src),), witness=cell.witness,
                             note="every primary part is separable")


def _r22(node: _Node, ctx: _Ctx) -> Iterator[Conclusion]:
    key = node.key
    get = ctx.get

    def cellw(prop):
        c = ctx.cell(key, prop)
        return c.witness if c else None

    cfi, cfs, cfh = get(key, Property.CFI), get(key, Property.CFS), get(key, Property.CFH)
    hopf, acfh, afh = get(key, Property.HOPFIAN), get(key, Property.ACFH), get(key, Property.AFH)
    fir = get(key, Property.FIR)

    if cfi == Outcome.HOLDS and cfs == Outcome.HOLDS:
        yield Conclusion(key, Property.CFH, Outcome.HOLDS, "R22", "R22a",
                         premises=((key, Property.CFI), (key, Property.CFS)))
    if cfi == Outcome.FAILS:
        yield Conclusion(key, Property.CFH, Outcome.FAILS, "R22", "R22a",
                         premises=((key, Property.CFI),), witness=cellw(Property.CFI))
    if cfs == Outcome.FAILS:
        yield Conclusion(key, Property.CFH, Outcome.FAILS, "R22", "R22a",
                         premises=((key, Property.CFS),), witness=cellw(Property.CFS))
    if cfh == Outcome.HOLDS:
        yield Conclusion(key, Property.CFI, Outcome.HOLDS, "R22", "R22a", premises=((key, Property.CFH),))
        yield Conclusion(key, Property.CFS, Outcome.HOLDS, "R22", "R22a", premises=((key, Property.CFH),))
    if cfh == Outcome.FAILS and cfi == Outcome.HOLDS:
        yield Conclusion(key, Property.CFS, Outcome.FAILS, "R22", "R22a",
                         premises=((key, Property.CFH), (key, Property.CFI)), witness=cellw(Property.CFH))
    if cfh == Outcome.FAILS and cfs == Outcome.HOLDS:
        yield Conclusion(key, Property.CFI, Outcome.FAILS, "R22", "R22a",
                         premises=((key, Property.CFH), (key, Property.CFS)), witness=cellw(Property.CFH))

    if cfi == Outcome.HOLDS:
        yield Conclusion(key, Property.HOPFIAN, Outcome.HOLDS, "R22", "R22b", premises=((key, Property.CFI),))
        yield Conclusion(key, Property.ACFH, Outcome.HOLDS, "R22", "R22c", premises=((key, Property.CFI),))
    if hopf == Outcome.FAILS:
        yield Conclusion(key, Property.CFI, Outcome.FAILS, "R22", "R22b",
                         premises=((key, Property.HOPFIAN),), witness=cellw(Property.HOPFIAN))
    if acfh == Outcome.FAILS:
        yield Conclusion(key, Property.CFI, Outcome.FAILS, "R22", "R22c",
                         premises=((key, Property.ACFH),), witness=cellw(Property.ACFH))

    if acfh == Outcome.HOLDS:
        yield Conclusion(key, Property.AFH, Outcome.HOLDS, "R22", "R22d", premises=((key, Property.ACFH),))
    if hopf == Outcome.HOLDS:
        yield Conclusion(key, Property.AFH, Outcome.HOLDS, "R22", "R22d", premises=((key, Property.HOPFIAN),))
    if afh == Outcome.FAILS:
        yield Conclusion(key, Property.ACFH, Outcome.FAILS, "R22", "R22d",
                         premises=((key, Property.AFH),), witness=cellw(Property.AFH))
        yield Conclusion(key, Property.HOPFIAN, Outcome.FAILS, "R22", "R22d",
                         premises=((key, Property.AFH),), witness=cellw(Property.AFH))

    if fir == Outcome.HOLDS:
        yield Conclusion(key, Property.CFI, Outcome.HOLDS, "R22", "R22e", premises=((key, Property.FIR),))
    if cfi == Outcome.FAILS:
        yield Conclusion(key, Property.FIR, Outcome.FAILS, "R22", "R22e",
                         premises=((key, Property.CFI),), witness=cellw(Property.CFI),
                         note="a group with finite injective rank is co-finitely injective")


def _ext1(node: _Node, ctx: _Ctx) -> Iterator[Conclusion]:
    f = node.facts
    if not ctx.extended or f.is_zero or not f.is_torsion or len(f.primary_parts) != 1:
        return
    if f.is_finite:
        yield Conclusion(node.key, Property.HOPFIAN, Outcome.HOLDS, "EXT1", "EXT1")
    else:
        p = _prufer_witness(f)
        if p is not None:
            w = f"multiplication by {p} on the Z({p}^inf) summand, identity elsewhere: surjective with kernel Z({p})"
        else:
            (p,) = f.primary_parts.keys()
            w = f"coordinate-pairing surjection on a Z({p}^n)^(N) summand, identity elsewhere: onto with infinite kernel"
        yield Conclusion(node.key, Property.HOPFIAN, Outcome.FAILS, "EXT1", "EXT1", witness=w)


def _ext2(node: _Node, ctx: _Ctx) -> Iterator[Conclusion]:
    if ctx.extended and isinstance(node.expr, Prufer):
        yield Conclusion(node.key, Property.AFH, Outcome.HOLDS, "EXT2", "EXT2",
                         note="surjective endomorphisms are p-adic unit multiples of p-powers; kernels are finite")


def _ext3(node: _Node, ctx: _Ctx) -> Iterator[Conclusion]:
    if ctx.extended and isinstance(node.expr, Prufer):
        p = node.expr.p
        yield Conclusion(node.key, Property.HOPFIAN, Outcome.FAILS, "EXT3", "EXT3",
                         witness=f"multiplication by {p}: surjective with kernel Z({p})")


RULES: tuple[tuple[str, object], ...] = (
    ("R0", _r0), ("R1", _r1), ("R2", _r2), ("R3", _r3), ("R4", _r4), ("R5", _r5),
    ("R6", _r6), ("R7", _r7), ("R8", _r8), ("R9", _r9), ("R10", _r10), ("R12", _r12),
    ("R13", _r13), ("R14", _r14), ("R15", _r15), ("R16", _r16), ("R17", _r17),
    ("R18", _r18), ("R19", _r19), ("R20", _r20), ("R21", _r21), ("R22", _r22),
    ("EXT1", _ext1), ("EXT2", _ext2), ("EXT3", _ext3),
)

RULE_IDS = tuple(rid for rid, _ in RULES)


def _saturate(nodes: dict[str, _Node], ctx: _Ctx, order: Iterable[str]) -> None:
    rules = dict(RULES)
    order = list(order)
    node_list = list(nodes.values())
    for _ in range(200):
        new = 0
        for rid in order:
            fn = rules[rid]
            for node in node_list:
                for c in fn(node, ctx):
                    slot = (c.key, c.prop)
                    prev = ctx.mem.get(slot)
                    ctx.firings.add((c.rule, c.key, c.prop, c.outcome))
                    if prev is None:
                        ctx.mem[slot] = _Cell(c.outcome, c.rule, c.anchor_id, c.witness,
                                              c.note, c.premises, c.extra_steps)
                        new += 1
                    elif prev.outcome != c.outcome:
                        raise ConfluenceError(
                            f"{c.prop.value} on {c.key}: {prev.rule} concluded {prev.outcome.value} "
                            f"but {c.rule} concluded {c.outcome.value}")
        if new == 0:
            return
    raise RuntimeError("rule saturation did not converge")


def _build_trace(ctx: _Ctx, key: str, prop: Property) -> tuple[TraceStep, ...]:
    steps: list[TraceStep] = []
    seen: set[tuple[str, Property]] = set()

    def visit(k: str, p: Property) -> None:
        if (k, p) in seen:
            return
        seen.add((k, p))
        cell = ctx.mem.get((k, p))
        if cell is None:
            return
        prem = tuple(f"{pp.value}={ctx.mem[(kk, pp)].outcome.value} on {kk}"
                     for kk, pp in cell.premises if (kk, pp) in ctx.mem)
        steps.append(TraceStep(cell.rule, ANCHORS[cell.anchor_id], k, cell.note, prem))
        steps.extend(cell.extra_steps)
        for kk, pp in cell.premises:
            visit(kk, pp)

    visit(key, prop)
    return tuple(steps)


def classify_detailed(g: GroupExpr,
                      props: Optional[Iterable[Property]] = None,
                      extended_lemmas: bool = False,
                      rule_order: Optional[Iterable[str]] = None):
    """Classify and also return the saturated memory for inspection."""
    root_key, nodes = build_closure(g)
    ctx = _Ctx(nodes, extended_lemmas)
    _saturate(nodes, ctx, rule_order or RULE_IDS)
    wanted = tuple(props) if props is not None else ALL_PROPERTIES
    verdicts: dict[Property, Verdict] = {}
    for prop in wanted:
        cell = ctx.mem.get((root_key, prop))
        if cell is None:
            verdicts[prop] = Verdict(prop, Outcome.UNDECIDED, (), None, root_key)
        else:
            verdicts[prop] = Verdict(prop, cell.outcome, _build_trace(ctx, root_key, prop),
                                     cell.witness, root_key)
    return verdicts, ctx


def classify(g: GroupExpr,
             props: Optional[Iterable[Property]] = None,
             extended_lemmas: bool = False,
             rule_order: Optional[Iterable[str]] = None) -> dict[Property, Verdict]:
    """Verdicts with derivation traces for the requested properties.

    With ``extended_lemmas`` False only anchored rules fire (plus the
    definitional zero-group rule).  ``rule_order`` permutes rule
    application; it can change which rule a trace records but never the
    outcome, which the saturation engine enforces.
    """
    verdicts, _ = classify_detailed(g, props, extended_lemmas, rule_order)
    return verdicts


def shuffled_rule_order(seed: int) -> list[str]:
    order = list(RULE_IDS)
    random.Random(seed).shuffle(order)
    return order


NEAR_MISS = {
    Property.HOPFIAN: (("R2", "finite group"), ("R7", "torsion-free of finite rank"),
                       ("R10", "completely decomposable torsion-free"), ("R13", "cotorsion"),
                       ("R21", "separable primary parts, from AlmostFinitelyHopfian"),
                       ("R22", "from CoFinitelyInjective")),
    Property.CO_HOPFIAN: (("R8", "torsion-free of finite rank"),
                          ("R9", "sum of finite-rank torsion-free groups")),
    Property.CFI: (("R3", "torsion present"), ("R4", "divisible"), ("R5", "reduced-divisible splitting"),
                   ("R7", "torsion-free of finite rank"), ("R10", "completely decomposable torsion-free"),
                   ("R13", "cotorsion"), ("R22", "closure")),
    Property.CFS: (("R2", "cyclic or quasicyclic atom"), ("R3", "reduced torsion"), ("R4", "divisible"),
                   ("R5", "reduced-divisible splitting"), ("R8", "torsion-free of finite rank"),
                   ("R9", "sum of finite-rank torsion-free groups"), ("R12", "cotorsion"), ("R22", "closure")),
    Property.CFH: (("R6", "reduced-divisible splitting"), ("R8", "torsion-free of finite rank"),
                   ("R9", "sum of finite-rank torsion-free groups"), ("R14", "cotorsion"), ("R22", "closure")),
    Property.ACFH: (("R15", "torsion group"), ("R16", "torsion-free"), ("R17", "torsion-free of finite rank"),
                    ("R18", "torsion and quotient both decided"), ("R19", "bounded p-torsion"),
                    ("R22", "closure")),
    Property.AFH: (("R21", "separable primary parts, from Hopfian"), ("R22", "from Hopfian or AlmostCoFinitelyHopfian")),
    Property.FIR: (("R22", "negative closure from CoFinitelyInjective only; no positive criterion is available"),),
    Property.BASSIAN: (("R20", "finite torsion-free rank and bounded p-torsion"),),
}


def explain(v: Verdict) -> str:
    """Deterministic human-readable rendering of a verdict's derivation."""
    lines = [f"{v.property.value} on {v.group}: {v.outcome.value}"]
    if v.outcome == Outcome.UNDECIDED:
        lines.append("  no applicable rule chain settles this property")
        near = NEAR_MISS.get(v.property, ())
        if near:
            lines.append("  nearest rules: " + "; ".join(f"{rid} (needs: {hyp})" for rid, hyp in near))
        return "\n".join(lines)
    for i, step in enumerate(v.trace, 1):
        lines.append(f"  {i}. {step.rule} on {step.subject} [{step.anchor}]")
        if step.note:
            lines.append(f"     note: {step.note}")
        for p in step.premises:
            lines.append(f"     premise: {p}")
    if v.witness:
        lines.append(f"  witness: {v.witness}")
    return "\n".join(lines)


def verdicts_to_json(verdicts: dict[Property, Verdict], group: str,
                     extended_lemmas: bool = False) -> dict:
    """The documented JSON shape for a classification report."""
    out = {
        "group": group,
        "extended_lemmas": extended_lemmas,
        "verdicts": [],
    }
    for prop in ALL_PROPERTIES:
        if prop not in verdicts:
            continue
        v = verdicts[prop]
        item = {
            "property": prop.value,
            "outcome": v.outcome.value,
            "trace": [{"rule": s.rule, "anchor": s.anchor} for s in v.trace],
        }
        if v.witness:
            item["witness"] = v.witness
        out["verdicts"].append(item)
    return out


def check_implications(verdicts: dict[Property, Verdict]) -> list[str]:
    """Violations of the implication closure among decided verdicts."""
    o = {p: v.outcome for p, v in verdicts.items()}
    bad = []

    def decided(p):
        return o.get(p) in (Outcome.HOLDS, Outcome.FAILS)

    def chk(cond, msg):
        if cond:
            bad.append(msg)

    H, F = Outcome.HOLDS, Outcome.FAILS
    chk(o.get(Property.CFI) == H and o.get(Property.HOPFIAN) == F, "cfi Holds but Hopfian Fails")
    chk(o.get(Property.CFI) == H and o.get(Property.ACFH) == F, "cfi Holds but acfH Fails")
    chk(o.get(Property.CFH) == H and (o.get(Property.CFI) == F or o.get(Property.CFS) == F),
        "cfH Holds but a component fails")
    chk(o.get(Property.CFI) == H and o.get(Property.CFS) == H and o.get(Property.CFH) == F,
        "cfi and cfs Hold but cfH Fails")
    chk(o.get(Property.ACFH) == H and o.get(Property.AFH) == F, "acfH Holds but afH Fails")
    chk(o.get(Property.HOPFIAN) == H and o.get(Property.AFH) == F, "Hopfian Holds but afH Fails")
    chk(o.get(Property.FIR) == H and o.get(Property.CFI) == F, "FIR Holds but cfi Fails")
    return bad
