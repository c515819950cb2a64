"""First-order images of one-variable modal formulas.

Two translations are provided:

* the dagger translation into the equality- and substitution-free fragment
  of two-variable FO, where a world becomes the value of ``y`` and an
  element the value of ``x`` (so ``p`` becomes ``p(y, x)``);
* the standard translation for Q1K, with world variables ``z``/``y``
  alternating by modal depth and a reserved accessibility predicate ``R``.

Square S5 models (|W| = |D|) and FO structures correspond one to one once
a bijection between elements and worlds is fixed; see :func:`square_to_fo`
and :func:`fo_to_square`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Mapping

from ._node import Node
from .formula import And, Atom, Diamond, Exists, Formula, Not, Top, normalize
from .kripke import KripkeModel

ACCESS = "R"


class TranslationError(ValueError):
    pass


class FOFormula(Node):
    def __str__(self) -> str:
        return to_prefix(self)


@dataclass(frozen=True, eq=False)
class FTrue(FOFormula):
    pass


@dataclass(frozen=True, eq=False)
class FAtom(FOFormula):
    pred: str
    args: tuple[str, ...]


@dataclass(frozen=True, eq=False)
class FNot(FOFormula):
    arg: FOFormula


@dataclass(frozen=True, eq=False)
class FAnd(FOFormula):
    left: FOFormula
    right: FOFormula


@dataclass(frozen=True, eq=False)
class FExists(FOFormula):
    var: str
    body: FOFormula


def dagger_translation(phi: Formula) -> FOFormula:
    def go(f: Formula) -> FOFormula:
        if isinstance(f, Top):
            return FTrue()
        if isinstance(f, Atom):
            return FAtom(f.name, ("y", "x"))
        if isinstance(f, Not):
            return FNot(go(f.arg))
        if isinstance(f, And):
            return FAnd(go(f.left), go(f.right))
        if isinstance(f, Diamond):
            return FExists("y", go(f.arg))
        if isinstance(f, Exists):
            return FExists("x", go(f.arg))
        raise TypeError(f"unexpected node {type(f).__name__}")

    return go(normalize(phi))


def standard_translation(phi: Formula) -> FOFormula:
    """Free variables are z (current world) and x (current element)."""
    if ACCESS in {a.name for a in phi.walk() if isinstance(a, Atom)}:
        raise TranslationError(f"predicate {ACCESS!r} is reserved for accessibility")

    def go(f: Formula, w: str) -> FOFormula:
        if isinstance(f, Top):
            return FTrue()
        if isinstance(f, Atom):
            return FAtom(f.name, (w, "x"))
        if isinstance(f, Not):
            return FNot(go(f.arg, w))
        if isinstance(f, And):
            return FAnd(go(f.left, w), go(f.right, w))
        if isinstance(f, Diamond):
            v = "y" if w == "z" else "z"
            return FExists(v, FAnd(FAtom(ACCESS, (w, v)), go(f.arg, v)))
        if isinstance(f, Exists):
            return FExists("x", go(f.arg, w))
        raise TypeError(f"unexpected node {type(f).__name__}")

    return go(normalize(phi), "z")


def free_variables(f: FOFormula) -> frozenset[str]:
    if isinstance(f, FTrue):
        return frozenset()
    if isinstance(f, FAtom):
        return frozenset(f.args)
    if isinstance(f, FNot):
        return free_variables(f.arg)
    if isinstance(f, FAnd):
        return free_variables(f.left) | free_variables(f.right)
    return free_variables(f.body) - {f.var}


def predicates(f: FOFormula) -> frozenset[str]:
    return frozenset(n.pred for n in f.walk() if isinstance(n, FAtom))


# --------------------------------------------------------------------------
# rendering


def to_prefix(f: FOFormula) -> str:
    if isinstance(f, FTrue):
        return "true"
    if isinstance(f, FAtom):
        return f"({f.pred} {' '.join(f.args)})"
    if isinstance(f, FNot):
        return f"(not {to_prefix(f.arg)})"
    if isinstance(f, FAnd):
        return f"(and {to_prefix(f.left)} {to_prefix(f.right)})"
    return f"(exists {f.var} {to_prefix(f.body)})"


def to_tptp(f: FOFormula, name: str = "goal", role: str = "axiom") -> str:
    """A ``fof`` line; predicates are lowercased-first and variables uppercased."""

    def pred(p: str) -> str:
        return p[0].lower() + p[1:]

    def go(g: FOFormula) -> str:
        if isinstance(g, FTrue):
            return "$true"
        if isinstance(g, FAtom):
            return f"{pred(g.pred)}({','.join(a.upper() for a in g.args)})"
        if isinstance(g, FNot):
            return f"~{go(g.arg)}"
        if isinstance(g, FAnd):
            return f"({go(g.left)} & {go(g.right)})"
        return f"(?[{g.var.upper()}] : {go(g.body)})"

    return f"fof({name}, {role}, {go(f)})."


# --------------------------------------------------------------------------
# finite structures


@dataclass(frozen=True)
class FOStructure:
    """A finite structure.  ``sorts`` optionally gives a variable its own range,
    which is how the two-sorted reading of the standard translation is evaluated."""

    domain: tuple[str, ...]
    relations: Mapping[str, frozenset[tuple[str, ...]]]
    sorts: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    def range_of(self, var: str) -> tuple[str, ...]:
        return self.sorts.get(var, self.domain)


def fo_evaluate(structure: FOStructure, f: FOFormula, assignment: Mapping[str, str]) -> bool:
    env = dict(assignment)
    missing = free_variables(f) - env.keys()
    if missing:
        raise TranslationError(f"unassigned variables: {sorted(missing)}")

    def go(g: FOFormula) -> bool:
        if isinstance(g, FTrue):
            return True
        if isinstance(g, FAtom):
            return tuple(env[a] for a in g.args) in structure.relations.get(g.pred, frozenset())
        if isinstance(g, FNot):
            return not go(g.arg)
        if isinstance(g, FAnd):
            return go(g.left) and go(g.right)
        saved = env.get(g.var)
        try:
            for value in structure.range_of(g.var):
                env[g.var] = value
                if go(g.body):
                    return True
            return False
        finally:
            if saved is None:
                env.pop(g.var, None)
            else:
                env[g.var] = saved

    return go(f)


def square_to_fo(model: KripkeModel, bijection: Mapping[str, str] | None = None) -> FOStructure:
    """A_{M,f}: (a, b) in p iff b is in p at world f(a)."""
    if not model.is_s5:
        raise TranslationError("square models are S5 models")
    if len(model.worlds) != len(model.domain):
        raise TranslationError(f"model is not square: {len(model.worlds)} worlds, {len(model.domain)} elements")
    f = dict(bijection) if bijection is not None else dict(zip(model.domain, model.worlds))
    if sorted(f) != sorted(model.domain) or sorted(f.values()) != sorted(model.worlds):
        raise TranslationError("not a bijection from elements onto worlds")
    rels = {}
    for p in model.predicates:
        ext = model.holds(p)
        rels[p] = frozenset(
            (a, b) for a in model.domain for j, b in enumerate(model.domain) if ext[model.world_index(f[a]), j]
        )
    return FOStructure(tuple(model.domain), rels)


def fo_to_square(structure: FOStructure) -> KripkeModel:
    """M_A: worlds and elements are both the FO domain; b in p at a iff (a, b) in p."""
    val = {}
    for p, tuples in structure.relations.items():
        if any(len(t) != 2 for t in tuples):
            raise TranslationError(f"predicate {p!r} is not binary")
        val[p] = sorted(tuples)
    return KripkeModel.build(list(structure.domain), list(structure.domain), val)


def kripke_to_fo(model: KripkeModel) -> FOStructure:
    """Two-sorted structure for the standard translation: z, y range over worlds, x over elements."""
    if ACCESS in model.predicates:
        raise TranslationError(f"predicate {ACCESS!r} is reserved for accessibility")
    rels = {}
    for p in model.predicates:
        ext = model.holds(p)
        rels[p] = frozenset(
            (w, d) for (i, w), (j, d) in product(enumerate(model.worlds), enumerate(model.domain)) if ext[i, j]
        )
    R = model.R
    rels[ACCESS] = frozenset(
        (w, v) for (i, w), (j, v) in product(enumerate(model.worlds), repeat=2) if R[i, j]
    )
    worlds = tuple(model.worlds)
    return FOStructure(tuple(model.domain), rels, {"z": worlds, "y": worlds, "x": tuple(model.domain)})

