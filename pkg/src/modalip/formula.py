"""One-variable bimodal formulas: syntax tree, text grammar, closures, renaming.

Formulas are built from unary predicates applied to the single individual
variable, the Booleans, the domain quantifiers ``E``/``A`` and the modal
operators ``<>``/``[]``.  The core connectives are Top, Atom, Not, And,
Exists and Diamond; everything else is an abbreviation and disappears under
:func:`normalize`.

Grammar (loosest binding first)::

    phi ::= phi '<->' phi | phi '->' phi | phi '|' phi | phi '&' phi
          | '~' phi | '<>' phi | '[]' phi | 'E' phi | 'A' phi
          | 'true' | 'false' | ident | '(' phi ')'

``->`` and ``<->`` associate to the right, ``&`` and ``|`` to the left.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Iterator, Mapping

from ._node import Node

IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")
KEYWORDS = frozenset({"true", "false", "E", "A"})


class Formula(Node):
    def __and__(self, other: Formula) -> Formula:
        return And(self, other)

    def __or__(self, other: Formula) -> Formula:
        return Or(self, other)

    def __invert__(self) -> Formula:
        return Not(self)

    def __str__(self) -> str:
        return to_text(self)

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {to_text(self)}>"


@dataclass(frozen=True, eq=False, repr=False)
class Top(Formula):
    pass


@dataclass(frozen=True, eq=False, repr=False)
class Bottom(Formula):
    pass


@dataclass(frozen=True, eq=False, repr=False)
class Atom(Formula):
    name: str

    def __post_init__(self) -> None:
        if not IDENT.fullmatch(self.name) or self.name in KEYWORDS:
            raise ValueError(f"invalid predicate name {self.name!r}")


@dataclass(frozen=True, eq=False, repr=False)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True, eq=False, repr=False)
class Diamond(Formula):
    arg: Formula


@dataclass(frozen=True, eq=False, repr=False)
class Box(Formula):
    arg: Formula


@dataclass(frozen=True, eq=False, repr=False)
class Exists(Formula):
    arg: Formula


@dataclass(frozen=True, eq=False, repr=False)
class Forall(Formula):
    arg: Formula


@dataclass(frozen=True, eq=False, repr=False)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, eq=False, repr=False)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, eq=False, repr=False)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, eq=False, repr=False)
class Iff(Formula):
    left: Formula
    right: Formula


TOP = Top()
BOTTOM = Bottom()

UNARY = (Not, Diamond, Box, Exists, Forall)
BINARY = (And, Or, Implies, Iff)
CORE = (Top, Atom, Not, And, Exists, Diamond)


def conj(parts: Iterable[Formula]) -> Formula:
    """Right-nested conjunction; the empty conjunction is Top."""
    items = list(parts)
    if not items:
        return TOP
    return reduce(lambda acc, f: And(f, acc), reversed(items[:-1]), items[-1])


def disj(parts: Iterable[Formula]) -> Formula:
    """Right-nested disjunction; the empty disjunction is Bottom."""
    items = list(parts)
    if not items:
        return BOTTOM
    return reduce(lambda acc, f: Or(f, acc), reversed(items[:-1]), items[-1])


def iff_chain(*parts: Formula) -> Formula:
    """``a <-> b <-> c`` read as "all equivalent": (a<->b) & (b<->c)."""
    return conj(Iff(a, b) for a, b in zip(parts, parts[1:]))


# --------------------------------------------------------------------------
# parsing


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


_TOKEN = re.compile(r"(?P<op><->|->|<>|\[\]|[~&|()])|(?P<ident>[A-Za-z_][A-Za-z0-9_']*)")


def _tokenize(text: str) -> list[tuple[str, int]]:
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


def _line_col(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    column = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, column


class _Parser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def error(self, message: str) -> ParseError:
        offset = self.tokens[self.i][1] if self.i < len(self.tokens) else len(self.text)
        return ParseError(message, *_line_col(self.text, offset))

    def peek(self) -> str | None:
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def take(self) -> str:
        tok = self.peek()
        if tok is None:
            raise self.error("unexpected end of input")
        self.i += 1
        return tok

    def parse(self) -> Formula:
        if not self.tokens:
            raise self.error("empty formula")
        phi = self.iff()
        if self.peek() is not None:
            tok = self.peek()
            raise self.error("unbalanced parentheses" if tok == ")" else f"unexpected token {tok!r}")
        return phi

    def iff(self) -> Formula:
        left = self.implies()
        if self.peek() == "<->":
            self.take()
            return Iff(left, self.iff())
        return left

    def implies(self) -> Formula:
        left = self.disjunction()
        if self.peek() == "->":
            self.take()
            return Implies(left, self.implies())
        return left

    def disjunction(self) -> Formula:
        left = self.conjunction()
        while self.peek() == "|":
            self.take()
            left = Or(left, self.conjunction())
        return left

    def conjunction(self) -> Formula:
        left = self.unary()
        while self.peek() == "&":
            self.take()
            left = And(left, self.unary())
        return left

    def unary(self) -> Formula:
        tok = self.peek()
        prefix = {"~": Not, "<>": Diamond, "[]": Box, "E": Exists, "A": Forall}
        if tok in prefix:
            self.take()
            return prefix[tok](self.unary())
        if tok == "(":
            self.take()
            inner = self.iff()
            if self.peek() != ")":
                raise self.error("unbalanced parentheses: expected ')'")
            self.take()
            return inner
        if tok == "true":
            self.take()
            return TOP
        if tok == "false":
            self.take()
            return BOTTOM
        if tok is not None and IDENT.fullmatch(tok):
            self.take()
            return Atom(tok)
        if tok is None:
            raise self.error("unexpected end of input")
        raise self.error("unbalanced parentheses" if tok == ")" else f"unexpected token {tok!r}")


def parse(text: str) -> Formula:
    return _Parser(text).parse()


# --------------------------------------------------------------------------
# printing

_PREFIX = {Not: "~", Diamond: "<>", Box: "[]", Exists: "E ", Forall: "A "}
_INFIX = {And: "&", Or: "|", Implies: "->", Iff: "<->"}
_LEVEL = {Iff: 1, Implies: 2, Or: 3, And: 4}


def to_text(phi: Formula, pretty: bool = False) -> str:
    """Fully parenthesized canonical text, or minimal parentheses if ``pretty``."""
    if isinstance(phi, Top):
        return "true"
    if isinstance(phi, Bottom):
        return "false"
    if isinstance(phi, Atom):
        return phi.name
    if isinstance(phi, UNARY):
        return _PREFIX[type(phi)] + _wrap(phi.arg, pretty, 5)
    op = _INFIX[type(phi)]
    if not pretty:
        return f"({to_text(phi.left)} {op} {to_text(phi.right)})"
    level = _LEVEL[type(phi)]
    right_assoc = isinstance(phi, (Implies, Iff))
    left = _wrap(phi.left, True, level + 1 if right_assoc else level)
    right = _wrap(phi.right, True, level if right_assoc else level + 1)
    return f"{left} {op} {right}"


def _wrap(phi: Formula, pretty: bool, min_level: int) -> str:
    text = to_text(phi, pretty)
    if pretty and isinstance(phi, BINARY) and _LEVEL[type(phi)] < min_level:
        return f"({text})"
    return text


# --------------------------------------------------------------------------
# structure


def negate(phi: Formula) -> Formula:
    """Single negation: strips a leading Not instead of stacking a second one."""
    return phi.arg if isinstance(phi, Not) else Not(phi)


def normalize(phi: Formula) -> Formula:
    """Rewrite into the core connectives, collapsing double negations."""
    memo: dict[Formula, Formula] = {}

    def go(f: Formula) -> Formula:
        hit = memo.get(f)
        if hit is not None:
            return hit
        if isinstance(f, (Top, Atom)):
            out = f
        elif isinstance(f, Bottom):
            out = Not(TOP)
        elif isinstance(f, Not):
            out = negate(go(f.arg))
        elif isinstance(f, And):
            out = And(go(f.left), go(f.right))
        elif isinstance(f, Or):
            out = Not(And(negate(go(f.left)), negate(go(f.right))))
        elif isinstance(f, Implies):
            out = Not(And(go(f.left), negate(go(f.right))))
        elif isinstance(f, Iff):
            a, b = go(f.left), go(f.right)
            out = And(Not(And(a, negate(b))), Not(And(b, negate(a))))
        elif isinstance(f, Exists):
            out = Exists(go(f.arg))
        elif isinstance(f, Forall):
            out = Not(Exists(negate(go(f.arg))))
        elif isinstance(f, Diamond):
            out = Diamond(go(f.arg))
        elif isinstance(f, Box):
            out = Not(Diamond(negate(go(f.arg))))
        else:
            raise TypeError(f"not a formula: {f!r}")
        memo[f] = out
        return out

    return go(phi)


def is_core(phi: Formula) -> bool:
    return all(isinstance(f, CORE) for f in phi.walk())


def node_count(phi: Formula) -> int:
    """Size of the tree (shared subtrees counted once per occurrence)."""
    return 1 + sum(node_count(c) for c in phi.children)  # type: ignore[arg-type]


def modal_depth(phi: Formula) -> int:
    """Nesting depth of <> and []; the domain quantifiers do not count."""
    memo: dict[Formula, int] = {}

    def go(f: Formula) -> int:
        if f in memo:
            return memo[f]
        inner = max((go(c) for c in f.children), default=0)  # type: ignore[arg-type]
        out = inner + 1 if isinstance(f, (Diamond, Box)) else inner
        memo[f] = out
        return out

    return go(phi)


def has_operator(phi: Formula, kinds: tuple[type, ...]) -> bool:
    return any(isinstance(f, kinds) for f in phi.walk())


class Signature(frozenset):
    """A finite set of predicate names that iterates in lexicographic order."""

    def __iter__(self) -> Iterator[str]:
        return iter(sorted(frozenset.__iter__(self)))

    def __and__(self, other: Iterable[str]) -> Signature:
        return Signature(frozenset.__and__(self, frozenset(other)))

    def __or__(self, other: Iterable[str]) -> Signature:
        return Signature(frozenset.__or__(self, frozenset(other)))

    def __sub__(self, other: Iterable[str]) -> Signature:
        return Signature(frozenset.__sub__(self, frozenset(other)))

    __rand__ = __and__
    __ror__ = __or__

    def __repr__(self) -> str:
        return "{" + ", ".join(self) + "}"


def signature_of(*formulas: Formula) -> Signature:
    return Signature(f.name for phi in formulas for f in phi.walk() if isinstance(f, Atom))


def substitute(phi: Formula, mapping: Mapping[str, str]) -> Formula:
    """Rename predicates according to ``mapping`` (others untouched)."""
    memo: dict[Formula, Formula] = {}

    def go(f: Formula) -> Formula:
        if f in memo:
            return memo[f]
        if isinstance(f, Atom):
            out: Formula = Atom(mapping.get(f.name, f.name))
        elif isinstance(f, UNARY):
            out = type(f)(go(f.arg))
        elif isinstance(f, BINARY):
            out = type(f)(go(f.left), go(f.right))
        else:
            out = f
        memo[f] = out
        return out

    return go(phi)


def fresh_renaming(symbols: Iterable[str], keep: Iterable[str], avoid: Iterable[str] = ()) -> dict[str, str]:
    """Map every symbol outside ``keep`` to a primed variant unused so far."""
    keep = set(keep)
    taken = set(symbols) | keep | set(avoid)
    mapping: dict[str, str] = {}
    for name in sorted(set(symbols) - keep):
        fresh = name + "'"
        while fresh in taken:
            fresh += "'"
        taken.add(fresh)
        mapping[name] = fresh
    return mapping


def rename_outside(phi: Formula, sigma: Iterable[str], avoid: Iterable[str] = ()) -> Formula:
    """phi with every predicate outside ``sigma`` replaced by a fresh primed copy."""
    return substitute(phi, fresh_renaming(signature_of(phi), sigma, avoid))


# --------------------------------------------------------------------------
# closure under single negation


@dataclass(frozen=True)
class ClosureIndex:
    """sub(phi, psi): subformulas of the normalized inputs plus single negations.

    Members carry dense ids (their list position); ``neg[i]`` is the id of the
    single negation of member ``i``.
    """

    members: tuple[Formula, ...]
    ids: Mapping[Formula, int]
    neg: tuple[int, ...]
    exists_ids: tuple[int, ...]
    diamond_ids: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, phi: object) -> bool:
        return phi in self.ids

    def __iter__(self) -> Iterator[Formula]:
        return iter(self.members)

    def id_of(self, phi: Formula) -> int:
        return self.ids[phi]

    @property
    def sub_exists(self) -> tuple[Formula, ...]:
        return tuple(self.members[i] for i in self.exists_ids)

    @property
    def sub_diamond(self) -> tuple[Formula, ...]:
        return tuple(self.members[i] for i in self.diamond_ids)

    def mask(self, ids: Iterable[int]) -> int:
        return sum(1 << i for i in ids)

    @property
    def exists_mask(self) -> int:
        return self.mask(self.exists_ids)

    @property
    def diamond_mask(self) -> int:
        return self.mask(self.diamond_ids)

    def decode(self, bits: int) -> frozenset[Formula]:
        return frozenset(m for i, m in enumerate(self.members) if bits >> i & 1)


def _kind_of(phi: Formula, kind: type) -> bool:
    return isinstance(phi, kind) or (isinstance(phi, Not) and isinstance(phi.arg, kind))


def closures(*formulas: Formula) -> ClosureIndex:
    """Build sub(...) for the normalized forms of ``formulas`` (usually phi, psi)."""
    order: list[Formula] = []
    ids: dict[Formula, int] = {}

    def add(f: Formula) -> None:
        if f not in ids:
            ids[f] = len(order)
            order.append(f)

    def visit(f: Formula) -> None:
        if f in ids:
            return
        for c in f.children:
            visit(c)  # type: ignore[arg-type]
        add(f)
        add(negate(f))

    for phi in formulas:
        visit(normalize(phi))
    neg = tuple(ids[negate(f)] for f in order)
    return ClosureIndex(
        members=tuple(order),
        ids=ids,
        neg=neg,
        exists_ids=tuple(i for i, f in enumerate(order) if _kind_of(f, Exists)),
        diamond_ids=tuple(i for i, f in enumerate(order) if _kind_of(f, Diamond)),
    )


def subformulas(phi: Formula) -> list[Formula]:
    """Distinct subformulas of phi (as written, not normalized), children first."""
    out: list[Formula] = []
    seen: set[Formula] = set()

    def go(f: Formula) -> None:
        if f in seen:
            return
        seen.add(f)
        for c in f.children:
            go(c)  # type: ignore[arg-type]
        out.append(f)

    go(phi)
    return out
