"""Standpoint inclusions box[e](C <= D) and their encoding into S5_ALC^u.

A primitive standpoint ``s`` becomes a concept name ``S`` (first letter
upper-cased) that is constant on each world, so worlds play the role of
precisifications.  File format, one item per line::

    standpoints s1, s2          # optional declaration
    box[s1 & ~s2] C <= D        # C == D gives both directions
    C <= D                      # same as box[*] C <= D

A leading ``box[...]`` always belongs to the inclusion; write
``box[*] box[g] C <= D`` for a concept-level box in first position.

:func:`direct_entails_bounded` decides entailment over standpoint structures
with their own semantics and serves as an independent check on the encoding.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import z3

from ..decide import Outcome, SearchBounds, Verdict
from ..encode import SearchTimeout, _check, _solver
from ..formula import ParseError
from .concept import (
    TOP_C,
    UNIVERSAL,
    CAll,
    CAnd,
    CBottom,
    CBox,
    CDiamond,
    CName,
    CNot,
    Concept,
    ConceptParser,
    COr,
    CSome,
    CStandpoint,
    CTop,
    SAnd,
    SExpr,
    SName,
    SNot,
    SOr,
    SStar,
    ciff,
    concept_names,
    sexpr_text,
    standpoint_names,
)
from .ontology import Inclusion, Ontology


class StandpointError(ValueError):
    pass


@dataclass(frozen=True)
class StandpointInclusion:
    expr: SExpr
    sub: Concept
    sup: Concept

    def __str__(self) -> str:
        return f"box[{sexpr_text(self.expr)}] {self.sub} <= {self.sup}"


@dataclass(frozen=True)
class StandpointOntology:
    standpoints: tuple[str, ...]
    axioms: tuple[StandpointInclusion, ...]

    def __iter__(self):
        return iter(self.axioms)

    def __len__(self) -> int:
        return len(self.axioms)

    def __str__(self) -> str:
        head = f"standpoints {', '.join(self.standpoints)}\n" if self.standpoints else ""
        return head + "\n".join(str(a) for a in self.axioms)

    def without(self, index: int) -> StandpointOntology:
        return StandpointOntology(self.standpoints, self.axioms[:index] + self.axioms[index + 1 :])


def _expr_names(e: SExpr) -> set[str]:
    return {n.name for n in e.walk() if isinstance(n, SName)}


def mentioned_standpoints(axioms: Iterable[StandpointInclusion]) -> set[str]:
    out: set[str] = set()
    for a in axioms:
        out |= _expr_names(a.expr) | set(standpoint_names(a.sub, a.sup))
    return out


def parse_standpoint_line(line: str) -> list[StandpointInclusion]:
    p = ConceptParser(line)
    expr: SExpr = SStar()
    if p.peek() == "box":
        p.take()
        expr = p.bracket_expr()
    sub = p.concept()
    op = p.peek()
    if op not in ("<=", "=="):
        raise p.error("expected '<=' or '=='")
    p.take()
    sup = p.concept()
    p.done()
    out = [StandpointInclusion(expr, sub, sup)]
    if op == "==":
        out.append(StandpointInclusion(expr, sup, sub))
    return out


def parse_standpoint_ontology(text: str) -> StandpointOntology:
    declared: list[str] | None = None
    axioms: list[StandpointInclusion] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("standpoints ") or line == "standpoints":
            names = [n.strip() for n in line[len("standpoints") :].split(",") if n.strip()]
            declared = (declared or []) + names
            continue
        try:
            axioms.extend(parse_standpoint_line(line))
        except ParseError as exc:
            raise ParseError(str(exc).rsplit(" at line", 1)[0], number, exc.column) from None
    names = tuple(declared) if declared is not None else tuple(sorted(mentioned_standpoints(axioms)))
    return StandpointOntology(names, tuple(axioms))


# --------------------------------------------------------------------------
# encoding


def standpoint_concept_name(s: str) -> str:
    return s[0].upper() + s[1:]


def _dagger_expr(e: SExpr, names: dict[str, str]) -> Concept:
    if isinstance(e, SStar):
        return TOP_C
    if isinstance(e, SName):
        try:
            return CName(names[e.name])
        except KeyError:
            raise StandpointError(f"unknown standpoint {e.name!r}") from None
    if isinstance(e, SNot):
        return CNot(_dagger_expr(e.arg, names))
    if isinstance(e, SAnd):
        return CAnd(_dagger_expr(e.left, names), _dagger_expr(e.right, names))
    if isinstance(e, SOr):
        return COr(_dagger_expr(e.left, names), _dagger_expr(e.right, names))
    raise TypeError(f"not a standpoint expression: {e!r}")


def _dagger_concept(c: Concept, names: dict[str, str]) -> Concept:
    if isinstance(c, CStandpoint):
        # box[g] F holds of d when F holds of d in every precisification of g;
        # quantifying over all elements here would make it a global statement
        return CBox(COr(CNot(_dagger_expr(c.expr, names)), _dagger_concept(c.arg, names)))
    if isinstance(c, (CTop, CBottom, CName)):
        return c
    if isinstance(c, (CNot, CDiamond, CBox)):
        return type(c)(_dagger_concept(c.arg, names))
    if isinstance(c, (CAnd, COr)):
        return type(c)(_dagger_concept(c.left, names), _dagger_concept(c.right, names))
    if isinstance(c, (CSome, CAll)):
        return type(c)(c.role, _dagger_concept(c.arg, names))
    raise TypeError(f"not a concept: {c!r}")


def _name_map(onto: StandpointOntology, extra: Iterable[StandpointInclusion] = ()) -> dict[str, str]:
    unknown = mentioned_standpoints([*onto.axioms, *extra]) - set(onto.standpoints)
    if unknown:
        raise StandpointError(f"unknown standpoint {sorted(unknown)[0]!r}")
    names = {s: standpoint_concept_name(s) for s in onto.standpoints}
    taken = concept_names(*(c for a in [*onto.axioms, *extra] for c in (a.sub, a.sup)))
    clash = set(names.values()) & set(taken)
    if clash or len(set(names.values())) != len(names):
        raise StandpointError(f"standpoint concept names clash: {sorted(clash) or sorted(names.values())}")
    return names


def proposition_axiom(name: str) -> Inclusion:
    """Top <= [] all U.(some U.S <-> all U.S)."""
    s = CName(name)
    return Inclusion(TOP_C, CBox(CAll(UNIVERSAL, ciff(CSome(UNIVERSAL, s), CAll(UNIVERSAL, s)))))


def encode_inclusion(axiom: StandpointInclusion, names: dict[str, str]) -> Inclusion:
    e = _dagger_expr(axiom.expr, names)
    c, d = _dagger_concept(axiom.sub, names), _dagger_concept(axiom.sup, names)
    return Inclusion(TOP_C, CBox(CAll(UNIVERSAL, COr(CNot(CAnd(e, c)), d))))


def encode_standpoint(onto: StandpointOntology, query: StandpointInclusion | None = None) -> tuple[Ontology, Inclusion | None]:
    """The encoded ontology (proposition axioms first, then one inclusion per
    axiom in order) and, if given, the encoded query."""
    names = _name_map(onto, [query] if query is not None else [])
    axioms = [proposition_axiom(names[s]) for s in onto.standpoints]
    axioms += [encode_inclusion(a, names) for a in onto]
    return Ontology(tuple(axioms)), (encode_inclusion(query, names) if query is not None else None)


def encoded_entails_bounded(
    onto: StandpointOntology, query: StandpointInclusion, bounds: SearchBounds = SearchBounds()
) -> Verdict:
    from .search import entails_bounded

    encoded, target = encode_standpoint(onto, query)
    return entails_bounded(encoded, target.sub, target.sup, bounds)


# --------------------------------------------------------------------------
# direct semantics


class _Structure:
    """Symbolic standpoint structure with ``n_prec`` precisifications."""

    def __init__(self, standpoints: Iterable[str], n_prec: int, n_domain: int) -> None:
        self.P, self.D = range(n_prec), range(n_domain)
        self.member = {s: [z3.Bool(f"in_{s}_{p}") for p in self.P] for s in standpoints}
        self.names: dict[tuple[str, int, int], z3.BoolRef] = {}
        self.edges: dict[tuple[str, int, int, int], z3.BoolRef] = {}
        self.memo: dict = {}

    def in_expr(self, e: SExpr, p: int) -> z3.BoolRef:
        if isinstance(e, SStar):
            return z3.BoolVal(True)
        if isinstance(e, SName):
            return self.member[e.name][p]
        if isinstance(e, SNot):
            return z3.Not(self.in_expr(e.arg, p))
        if isinstance(e, SAnd):
            return z3.And(self.in_expr(e.left, p), self.in_expr(e.right, p))
        if isinstance(e, SOr):
            return z3.Or(self.in_expr(e.left, p), self.in_expr(e.right, p))
        raise TypeError(e)

    def name(self, a: str, p: int, d: int) -> z3.BoolRef:
        return self.names.setdefault((a, p, d), z3.Bool(f"c_{a}_{p}_{d}"))

    def edge(self, r: str, p: int, d: int, e: int) -> z3.BoolRef:
        return self.edges.setdefault((r, p, d, e), z3.Bool(f"r_{r}_{p}_{d}_{e}"))

    def holds(self, c: Concept, p: int, d: int) -> z3.BoolRef:
        key = (c, p, d)
        if key not in self.memo:
            self.memo[key] = self._holds(c, p, d)
        return self.memo[key]

    def _holds(self, c: Concept, p: int, d: int) -> z3.BoolRef:
        if isinstance(c, CTop):
            return z3.BoolVal(True)
        if isinstance(c, CBottom):
            return z3.BoolVal(False)
        if isinstance(c, CName):
            return self.name(c.name, p, d)
        if isinstance(c, CNot):
            return z3.Not(self.holds(c.arg, p, d))
        if isinstance(c, CAnd):
            return z3.And(self.holds(c.left, p, d), self.holds(c.right, p, d))
        if isinstance(c, COr):
            return z3.Or(self.holds(c.left, p, d), self.holds(c.right, p, d))
        if isinstance(c, (CSome, CAll)):
            some = c.role == UNIVERSAL
            if isinstance(c, CSome):
                return z3.Or([self.holds(c.arg, p, e) if some else z3.And(self.edge(c.role, p, d, e), self.holds(c.arg, p, e)) for e in self.D])
            return z3.And([self.holds(c.arg, p, e) if some else z3.Implies(self.edge(c.role, p, d, e), self.holds(c.arg, p, e)) for e in self.D])
        if isinstance(c, CStandpoint):
            return z3.And([z3.Implies(self.in_expr(c.expr, q), self.holds(c.arg, q, d)) for q in self.P])
        if isinstance(c, CBox):
            return z3.And([self.holds(c.arg, q, d) for q in self.P])
        if isinstance(c, CDiamond):
            return z3.Or([self.holds(c.arg, q, d) for q in self.P])
        raise TypeError(c)

    def satisfies(self, a: StandpointInclusion) -> z3.BoolRef:
        return z3.And(
            [
                z3.Implies(self.in_expr(a.expr, p), z3.Implies(self.holds(a.sub, p, d), self.holds(a.sup, p, d)))
                for p in self.P
                for d in self.D
            ]
        )


def direct_entails_bounded(
    onto: StandpointOntology, query: StandpointInclusion, bounds: SearchBounds = SearchBounds()
) -> Verdict:
    """Search standpoint structures with at most ``worlds1`` precisifications
    and ``domain1`` elements that satisfy ``onto`` but not ``query``."""
    _name_map(onto, [query])
    s = _solver(bounds.timeout_ms)
    sizes = (bounds.worlds1, bounds.domain1)
    st = _Structure(onto.standpoints, *sizes)
    s.add([st.satisfies(a) for a in onto])
    s.add(z3.Not(st.satisfies(query)))
    try:
        found = _check(s)
    except SearchTimeout:
        return Verdict(Outcome.UNKNOWN, None, bounds, None, "solver timeout")
    if found:
        return Verdict(Outcome.NO, None, bounds, None, f"standpoint structure with {sizes[0]} precisifications and {sizes[1]} elements")
    return Verdict(
        Outcome.UNKNOWN, None, bounds, None, f"no countermodel with at most {sizes[0]} precisifications and {sizes[1]} elements"
    )

