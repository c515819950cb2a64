"""S5_ALC^u concepts: syntax tree, parser, printer and normal form.

Concrete syntax::

    C ::= Top | Bottom | name | ~C | C & C | C | C | some r.C | all r.C
        | <>C | []C | box[e] C | (C)
    e ::= * | s | ~e | e & e | e | e | (e)

``&`` binds tighter than ``|``; all prefix operators bind tighter than
both, so ``some r.A & B`` is ``(some r.A) & B``.  The role ``U`` is the
universal role.  ``box[e] C`` is the standpoint operator; it only makes
sense in standpoint ontologies and is compiled away by
:func:`modalip.alcu.standpoint.encode_standpoint`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator

from .._node import Node
from ..formula import ParseError, Signature, _line_col

UNIVERSAL = "U"
KEYWORDS = frozenset({"Top", "Bottom", "some", "all", "box"})
NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")


class Concept(Node):
    def __and__(self, other: Concept) -> Concept:
        return CAnd(self, other)

    def __or__(self, other: Concept) -> Concept:
        return COr(self, other)

    def __invert__(self) -> Concept:
        return CNot(self)

    def __str__(self) -> str:
        return to_text(self)

    def __repr__(self) -> str:
        return f"Concept({to_text(self)!r})"


def _check_name(name: str, what: str) -> None:
    if not NAME.fullmatch(name) or name in KEYWORDS:
        raise ValueError(f"invalid {what} {name!r}")


@dataclass(frozen=True, eq=False)
class CTop(Concept):
    pass


@dataclass(frozen=True, eq=False)
class CBottom(Concept):
    pass


@dataclass(frozen=True, eq=False)
class CName(Concept):
    name: str

    def __post_init__(self) -> None:
        _check_name(self.name, "concept name")
        if self.name == UNIVERSAL:
            raise ValueError("U is reserved for the universal role")


@dataclass(frozen=True, eq=False)
class CNot(Concept):
    arg: Concept


@dataclass(frozen=True, eq=False)
class CAnd(Concept):
    left: Concept
    right: Concept


@dataclass(frozen=True, eq=False)
class COr(Concept):
    left: Concept
    right: Concept


@dataclass(frozen=True, eq=False)
class CSome(Concept):
    role: str
    arg: Concept

    def __post_init__(self) -> None:
        _check_name(self.role, "role name")


@dataclass(frozen=True, eq=False)
class CAll(Concept):
    role: str
    arg: Concept

    def __post_init__(self) -> None:
        _check_name(self.role, "role name")


@dataclass(frozen=True, eq=False)
class CDiamond(Concept):
    arg: Concept


@dataclass(frozen=True, eq=False)
class CBox(Concept):
    arg: Concept


# standpoint expressions


class SExpr(Node):
    def __str__(self) -> str:
        return sexpr_text(self)


@dataclass(frozen=True, eq=False)
class SStar(SExpr):
    pass


@dataclass(frozen=True, eq=False)
class SName(SExpr):
    name: str


@dataclass(frozen=True, eq=False)
class SNot(SExpr):
    arg: SExpr


@dataclass(frozen=True, eq=False)
class SAnd(SExpr):
    left: SExpr
    right: SExpr


@dataclass(frozen=True, eq=False)
class SOr(SExpr):
    left: SExpr
    right: SExpr


@dataclass(frozen=True, eq=False)
class CStandpoint(Concept):
    """``box[e] C``: C holds at this element under every precisification of e."""

    expr: SExpr
    arg: Concept


TOP_C = CTop()
BOTTOM_C = CBottom()


def cconj(parts: Iterable[Concept]) -> Concept:
    parts = list(parts)
    if not parts:
        return TOP_C
    out = parts[0]
    for p in parts[1:]:
        out = CAnd(out, p)
    return out


def cdisj(parts: Iterable[Concept]) -> Concept:
    parts = list(parts)
    if not parts:
        return BOTTOM_C
    out = parts[0]
    for p in parts[1:]:
        out = COr(out, p)
    return out


def ciff(a: Concept, b: Concept) -> Concept:
    return CAnd(COr(CNot(a), b), COr(CNot(b), a))


# --------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"(?P<op><=|==|<>|\[\]|[~&|().\[\]*])|(?P<ident>[A-Za-z_][A-Za-z0-9_']*)")


def tokenize(text: str) -> list[tuple[str, int]]:
    tokens: list[tuple[str, int]] = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos == len(text):
            return tokens
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", *_line_col(text, pos))
        tokens.append((m.group(), pos))
        pos = m.end()


class ConceptParser:
    """Recursive descent over a token list; also used for ontology lines."""

    def __init__(self, text: str) -> None:
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    def error(self, message: str) -> ParseError:
        offset = self.tokens[self.i][1] if self.i < len(self.tokens) else len(self.text)
        return ParseError(message, *_line_col(self.text, offset))

    def peek(self) -> str | None:
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def take(self, expected: str | None = None) -> str:
        tok = self.peek()
        if tok is None:
            raise self.error("unexpected end of input" if expected is None else f"expected {expected!r}")
        if expected is not None and tok != expected:
            raise self.error(f"expected {expected!r}, got {tok!r}")
        self.i += 1
        return tok

    def done(self) -> None:
        tok = self.peek()
        if tok is not None:
            raise self.error("unbalanced parentheses" if tok == ")" else f"unexpected token {tok!r}")

    def concept(self) -> Concept:
        left = self.conjunction()
        while self.peek() == "|":
            self.take()
            left = COr(left, self.conjunction())
        return left

    def conjunction(self) -> Concept:
        left = self.unary()
        while self.peek() == "&":
            self.take()
            left = CAnd(left, self.unary())
        return left

    def name(self, what: str) -> str:
        tok = self.peek()
        if tok is None or not NAME.fullmatch(tok) or tok in KEYWORDS:
            raise self.error(f"expected a {what}")
        return self.take()

    def unary(self) -> Concept:
        tok = self.peek()
        if tok == "~":
            self.take()
            return CNot(self.unary())
        if tok == "<>":
            self.take()
            return CDiamond(self.unary())
        if tok == "[]":
            self.take()
            return CBox(self.unary())
        if tok in ("some", "all"):
            self.take()
            role = self.name("role name")
            self.take(".")
            arg = self.unary()
            return CSome(role, arg) if tok == "some" else CAll(role, arg)
        if tok == "box":
            self.take()
            expr = self.bracket_expr()
            return CStandpoint(expr, self.unary())
        if tok == "(":
            self.take()
            inner = self.concept()
            if self.peek() != ")":
                raise self.error("unbalanced parentheses: expected ')'")
            self.take()
            return inner
        if tok == "Top":
            self.take()
            return TOP_C
        if tok == "Bottom":
            self.take()
            return BOTTOM_C
        if tok is None:
            raise self.error("unexpected end of input")
        if tok == UNIVERSAL:
            raise self.error("U is the universal role, not a concept name")
        return CName(self.name("concept"))

    def bracket_expr(self) -> SExpr:
        self.take("[")
        expr = self.sexpr()
        self.take("]")
        return expr

    def sexpr(self) -> SExpr:
        left = self.sconj()
        while self.peek() == "|":
            self.take()
            left = SOr(left, self.sconj())
        return left

    def sconj(self) -> SExpr:
        left = self.sunary()
        while self.peek() == "&":
            self.take()
            left = SAnd(left, self.sunary())
        return left

    def sunary(self) -> SExpr:
        tok = self.peek()
        if tok == "~":
            self.take()
            return SNot(self.sunary())
        if tok == "*":
            self.take()
            return SStar()
        if tok == "(":
            self.take()
            inner = self.sexpr()
            self.take(")")
            return inner
        return SName(self.name("standpoint name"))


def parse_concept(text: str) -> Concept:
    p = ConceptParser(text)
    if not p.tokens:
        raise p.error("empty concept")
    c = p.concept()
    p.done()
    return c


# --------------------------------------------------------------------------
# printing

_LEVEL = {COr: 1, CAnd: 2}


def to_text(c: Concept) -> str:
    if isinstance(c, CTop):
        return "Top"
    if isinstance(c, CBottom):
        return "Bottom"
    if isinstance(c, CName):
        return c.name
    if isinstance(c, (COr, CAnd)):
        op = " | " if isinstance(c, COr) else " & "
        level = _LEVEL[type(c)]
        parts = []
        for side, child in (("l", c.left), ("r", c.right)):
            text = to_text(child)
            child_level = _LEVEL.get(type(child))
            # left-nested chains of the same operator print flat
            if child_level is not None and (child_level < level or (child_level == level and side == "r")):
                text = f"({text})"
            parts.append(text)
        return op.join(parts)
    if isinstance(c, CNot):
        return "~" + _atomic(c.arg)
    if isinstance(c, CDiamond):
        return "<>" + _atomic(c.arg)
    if isinstance(c, CBox):
        return "[]" + _atomic(c.arg)
    if isinstance(c, CSome):
        return f"some {c.role}." + _atomic(c.arg)
    if isinstance(c, CAll):
        return f"all {c.role}." + _atomic(c.arg)
    if isinstance(c, CStandpoint):
        return f"box[{sexpr_text(c.expr)}] " + _atomic(c.arg)
    raise TypeError(f"not a concept: {c!r}")


def _atomic(c: Concept) -> str:
    text = to_text(c)
    return f"({text})" if isinstance(c, (CAnd, COr)) else text


def sexpr_text(e: SExpr) -> str:
    if isinstance(e, SStar):
        return "*"
    if isinstance(e, SName):
        return e.name
    if isinstance(e, SNot):
        inner = sexpr_text(e.arg)
        return "~" + (f"({inner})" if isinstance(e.arg, (SAnd, SOr)) else inner)
    op = " & " if isinstance(e, SAnd) else " | "

    def side(x: SExpr, right: bool) -> str:
        t = sexpr_text(x)
        wrap = (isinstance(e, SAnd) and isinstance(x, SOr)) or (right and type(x) is type(e))
        return f"({t})" if wrap else t

    return side(e.left, False) + op + side(e.right, True)


# --------------------------------------------------------------------------
# structure


def cnegate(c: Concept) -> Concept:
    return c.arg if isinstance(c, CNot) else CNot(c)


@lru_cache(maxsize=None)
def cnormalize(c: Concept) -> Concept:
    """Rewrite into Top, names, ~, &, some r. (r may be U) and <>; no double negation."""
    if isinstance(c, (CTop, CName)):
        return c
    if isinstance(c, CBottom):
        return CNot(TOP_C)
    if isinstance(c, CNot):
        inner = cnormalize(c.arg)
        return inner.arg if isinstance(inner, CNot) else CNot(inner)
    if isinstance(c, CAnd):
        return CAnd(cnormalize(c.left), cnormalize(c.right))
    if isinstance(c, COr):
        return cnegate(CAnd(cnegate(cnormalize(c.left)), cnegate(cnormalize(c.right))))
    if isinstance(c, CSome):
        return CSome(c.role, cnormalize(c.arg))
    if isinstance(c, CAll):
        return cnegate(CSome(c.role, cnegate(cnormalize(c.arg))))
    if isinstance(c, CDiamond):
        return CDiamond(cnormalize(c.arg))
    if isinstance(c, CBox):
        return cnegate(CDiamond(cnegate(cnormalize(c.arg))))
    if isinstance(c, CStandpoint):
        raise ValueError("standpoint operators must be encoded before normalization")
    raise TypeError(f"not a concept: {c!r}")


def concept_names(*concepts: Concept) -> Signature:
    return Signature(n.name for c in concepts for n in c.walk() if isinstance(n, CName))


def role_names(*concepts: Concept) -> Signature:
    return Signature(
        n.role for c in concepts for n in c.walk() if isinstance(n, (CSome, CAll)) and n.role != UNIVERSAL
    )


def concept_signature(*concepts: Concept) -> Signature:
    return concept_names(*concepts) | role_names(*concepts)


def standpoint_names(*concepts: Concept) -> Signature:
    return Signature(n.name for c in concepts for n in c.walk() if isinstance(n, SName))


def crename(c: Concept, mapping: dict[str, str]) -> Concept:
    """Rename concept and role names (never U)."""
    if isinstance(c, CName):
        return CName(mapping.get(c.name, c.name))
    if isinstance(c, (CTop, CBottom)):
        return c
    if isinstance(c, (CNot, CDiamond, CBox)):
        return type(c)(crename(c.arg, mapping))
    if isinstance(c, (CAnd, COr)):
        return type(c)(crename(c.left, mapping), crename(c.right, mapping))
    if isinstance(c, (CSome, CAll)):
        role = c.role if c.role == UNIVERSAL else mapping.get(c.role, c.role)
        return type(c)(role, crename(c.arg, mapping))
    if isinstance(c, CStandpoint):
        return CStandpoint(c.expr, crename(c.arg, mapping))
    raise TypeError(f"not a concept: {c!r}")


@dataclass(frozen=True)
class ConceptClosure:
    """Normalized subconcepts closed under single negation, with id lists for
    the operators that look beyond the current point."""

    members: tuple[Concept, ...]
    ids: dict
    neg: tuple[int, ...]
    exists_u: tuple[int, ...]
    diamond: tuple[int, ...]
    roles: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[Concept]:
        return iter(self.members)

    def id_of(self, c: Concept) -> int:
        return self.ids[cnormalize(c)]

    def mask(self, ids: Iterable[int]) -> int:
        out = 0
        for i in ids:
            out |= 1 << i
        return out


def concept_closure(*concepts: Concept) -> ConceptClosure:
    members: list[Concept] = []
    ids: dict[Concept, int] = {}

    def add(c: Concept) -> None:
        if c not in ids:
            ids[c] = len(members)
            members.append(c)

    def visit(c: Concept) -> None:
        if c in ids:
            return
        for child in c.children:
            visit(child)  # type: ignore[arg-type]
        add(c)
        add(cnegate(c))

    for c in concepts:
        visit(cnormalize(c))
    neg = tuple(ids[cnegate(c)] for c in members)
    exists_u = tuple(i for i, c in enumerate(members) if isinstance(c, CSome) and c.role == UNIVERSAL)
    diamond = tuple(i for i, c in enumerate(members) if isinstance(c, CDiamond))
    roles = tuple(i for i, c in enumerate(members) if isinstance(c, CSome) and c.role != UNIVERSAL)
    return ConceptClosure(tuple(members), ids, neg, exists_u, diamond, roles)


# --------------------------------------------------------------------------
# the role-free embedding of one-variable formulas


def formula_to_concept(phi) -> Concept:
    """p -> p, E -> some U., <> -> <>."""
    from ..formula import And, Atom, Box, Bottom, Diamond, Exists, Forall, Iff, Implies, Not, Or, Top

    def go(f) -> Concept:
        if isinstance(f, Top):
            return TOP_C
        if isinstance(f, Bottom):
            return BOTTOM_C
        if isinstance(f, Atom):
            return CName(f.name)
        if isinstance(f, Not):
            return CNot(go(f.arg))
        if isinstance(f, And):
            return CAnd(go(f.left), go(f.right))
        if isinstance(f, Or):
            return COr(go(f.left), go(f.right))
        if isinstance(f, Implies):
            return COr(CNot(go(f.left)), go(f.right))
        if isinstance(f, Iff):
            return ciff(go(f.left), go(f.right))
        if isinstance(f, Diamond):
            return CDiamond(go(f.arg))
        if isinstance(f, Box):
            return CBox(go(f.arg))
        if isinstance(f, Exists):
            return CSome(UNIVERSAL, go(f.arg))
        if isinstance(f, Forall):
            return CAll(UNIVERSAL, go(f.arg))
        raise TypeError(f"unexpected node {type(f).__name__}")

    return go(phi)
