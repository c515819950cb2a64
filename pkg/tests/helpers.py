"""Random generators and slow, independent oracles shared by the test modules.

The oracles evaluate one point at a time with plain Python loops and share no
code with the numpy evaluators or fixpoint routines under test.
"""

from __future__ import annotations

import itertools
import random

import numpy as np
from hypothesis import strategies as st

from modalip.alcu import concept as C
from modalip.alcu.model import DLModel
from modalip.formula import (
    And,
    Atom,
    Bottom,
    Box,
    Diamond,
    Exists,
    Forall,
    Iff,
    Implies,
    Not,
    Or,
    Top,
)
from modalip.kripke import KripkeModel

# --------------------------------------------------------------------------
# random formulas and models


def random_formula(rng: random.Random, atoms, depth: int, modal: bool = True):
    if depth == 0 or rng.random() < 0.2:
        return Atom(rng.choice(atoms))
    ops = ["not", "and", "or", "imp", "E", "A"] + (["dia", "box"] if modal else [])
    op = rng.choice(ops)
    sub = lambda: random_formula(rng, atoms, depth - 1, modal)  # noqa: E731
    if op == "not":
        return Not(sub())
    if op == "and":
        return And(sub(), sub())
    if op == "or":
        return Or(sub(), sub())
    if op == "imp":
        return Implies(sub(), sub())
    return {"E": Exists, "A": Forall, "dia": Diamond, "box": Box}[op](sub())


def random_model(rng: random.Random, sigma, max_worlds: int, max_domain: int, s5: bool = True, density: float = 0.5):
    nw, nd = rng.randint(1, max_worlds), rng.randint(1, max_domain)
    tables = {p: np.array([[rng.random() < density for _ in range(nd)] for _ in range(nw)]) for p in sigma}
    access = None if s5 else np.array([[rng.random() < density for _ in range(nw)] for _ in range(nw)])
    return KripkeModel([f"w{i}" for i in range(nw)], [f"d{i}" for i in range(nd)], tables, access)


def random_concept(rng: random.Random, names, roles, depth: int):
    if depth == 0 or rng.random() < 0.25:
        return C.CName(rng.choice(names))
    k = rng.randrange(8)
    sub = lambda: random_concept(rng, names, roles, depth - 1)  # noqa: E731
    if k == 0:
        return C.CNot(sub())
    if k == 1:
        return C.CAnd(sub(), sub())
    if k == 2:
        return C.COr(sub(), sub())
    if k == 3:
        return C.CSome(rng.choice(roles), sub())
    if k == 4:
        return C.CAll(rng.choice(roles), sub())
    if k == 5:
        return C.CDiamond(sub())
    if k == 6:
        return C.CBox(sub())
    return C.CSome(C.UNIVERSAL, sub())


def random_dl_model(rng: random.Random, names, roles, max_worlds: int, max_domain: int):
    nw, nd = rng.randint(1, max_worlds), rng.randint(1, max_domain)
    concepts = {a: np.array([[rng.random() < 0.5 for _ in range(nd)] for _ in range(nw)]) for a in names}
    rel = {r: np.array([[[rng.random() < 0.4 for _ in range(nd)] for _ in range(nd)] for _ in range(nw)]) for r in roles}
    return DLModel([f"w{i}" for i in range(nw)], [f"d{i}" for i in range(nd)], concepts, rel)


# hypothesis versions


def formulas(atoms=("p", "q", "r"), modal: bool = True, max_leaves: int = 12):
    leaves = st.sampled_from([Atom(a) for a in atoms]) | st.just(Top()) | st.just(Bottom())
    unary = [Not, Exists, Forall] + ([Diamond, Box] if modal else [])
    binary = [And, Or, Implies, Iff]

    def extend(children):
        return st.one_of(
            st.builds(lambda f, c: f(c), st.sampled_from(unary), children),
            st.builds(lambda f, a, b: f(a, b), st.sampled_from(binary), children, children),
        )

    return st.recursive(leaves, extend, max_leaves=max_leaves)


@st.composite
def models(draw, sigma=("p", "q", "r"), max_worlds: int = 3, max_domain: int = 3, s5: bool = True):
    nw = draw(st.integers(1, max_worlds))
    nd = draw(st.integers(1, max_domain))
    tables = {p: np.array(draw(st.lists(st.lists(st.booleans(), min_size=nd, max_size=nd), min_size=nw, max_size=nw))) for p in sigma}
    access = None
    if not s5:
        access = np.array(draw(st.lists(st.lists(st.booleans(), min_size=nw, max_size=nw), min_size=nw, max_size=nw)))
    return KripkeModel([f"w{i}" for i in range(nw)], [f"d{i}" for i in range(nd)], tables, access)


# --------------------------------------------------------------------------
# oracles


def naive_holds(model: KripkeModel, w: int, d: int, f) -> bool:
    """Direct recursive reading of the truth conditions."""
    W, D = range(len(model.worlds)), range(len(model.domain))
    R = model.R
    if isinstance(f, Top):
        return True
    if isinstance(f, Bottom):
        return False
    if isinstance(f, Atom):
        table = model.valuation.get(f.name)
        return bool(table[w, d]) if table is not None else False
    if isinstance(f, Not):
        return not naive_holds(model, w, d, f.arg)
    if isinstance(f, And):
        return naive_holds(model, w, d, f.left) and naive_holds(model, w, d, f.right)
    if isinstance(f, Or):
        return naive_holds(model, w, d, f.left) or naive_holds(model, w, d, f.right)
    if isinstance(f, Implies):
        return (not naive_holds(model, w, d, f.left)) or naive_holds(model, w, d, f.right)
    if isinstance(f, Iff):
        return naive_holds(model, w, d, f.left) == naive_holds(model, w, d, f.right)
    if isinstance(f, Exists):
        return any(naive_holds(model, w, e, f.arg) for e in D)
    if isinstance(f, Forall):
        return all(naive_holds(model, w, e, f.arg) for e in D)
    if isinstance(f, Diamond):
        return any(R[w, v] and naive_holds(model, v, d, f.arg) for v in W)
    if isinstance(f, Box):
        return all((not R[w, v]) or naive_holds(model, v, d, f.arg) for v in W)
    raise TypeError(type(f))


def _points(m: KripkeModel):
    return list(itertools.product(range(len(m.worlds)), range(len(m.domain))))


def naive_bisim(m1: KripkeModel, m2: KripkeModel, sigma, k: int | None = None) -> set:
    """Greatest sigma-bisimulation on points by pair-deletion, or the k-th
    approximant when ``k`` is given.  Returns a set of ((w,d),(v,e))."""
    sigma = sorted(sigma)

    def lit(m, w, d):
        return tuple(bool(m.valuation[p][w, d]) if p in m.valuation else False for p in sigma)

    rel = {(p, q) for p in _points(m1) for q in _points(m2) if lit(m1, *p) == lit(m2, *q)}
    R1, R2 = m1.R, m2.R
    D1, D2 = range(len(m1.domain)), range(len(m2.domain))
    W1, W2 = range(len(m1.worlds)), range(len(m2.worlds))

    def ok(p, q, prev, rel_now):
        (w, d), (v, e) = p, q
        # element steps stay within the same level
        if not all(any(((w, d2), (v, e2)) in rel_now for e2 in D2) for d2 in D1):
            return False
        if not all(any(((w, d2), (v, e2)) in rel_now for d2 in D1) for e2 in D2):
            return False
        if prev is None:
            return True
        if not all(any(R2[v, v2] and ((w2, d), (v2, e)) in prev for v2 in W2) for w2 in W1 if R1[w, w2]):
            return False
        return all(any(R1[w, w2] and ((w2, d), (v2, e)) in prev for w2 in W1) for v2 in W2 if R2[v, v2])

    def domain_gfp(rel_now, prev):
        while True:
            keep = {pq for pq in rel_now if ok(*pq, prev, rel_now)}
            if keep == rel_now:
                return keep
            rel_now = keep

    if k is None:
        while True:
            nxt = domain_gfp(rel, rel)
            if nxt == rel:
                return rel
            rel = nxt
    level = domain_gfp(rel, None)
    base = rel
    for _ in range(k):
        level = domain_gfp(base, level)
    return level


def naive_dl_holds(model: DLModel, w: int, d: int, c) -> bool:
    D = range(len(model.domain))
    W = range(len(model.worlds))
    if isinstance(c, C.CTop):
        return True
    if isinstance(c, C.CBottom):
        return False
    if isinstance(c, C.CName):
        t = model.concepts.get(c.name)
        return bool(t[w, d]) if t is not None else False
    if isinstance(c, C.CNot):
        return not naive_dl_holds(model, w, d, c.arg)
    if isinstance(c, C.CAnd):
        return naive_dl_holds(model, w, d, c.left) and naive_dl_holds(model, w, d, c.right)
    if isinstance(c, C.COr):
        return naive_dl_holds(model, w, d, c.left) or naive_dl_holds(model, w, d, c.right)
    if isinstance(c, (C.CSome, C.CAll)):

        def edge(e):
            if c.role == C.UNIVERSAL:
                return True
            t = model.roles.get(c.role)
            return bool(t[w, d, e]) if t is not None else False

        if isinstance(c, C.CSome):
            return any(edge(e) and naive_dl_holds(model, w, e, c.arg) for e in D)
        return all((not edge(e)) or naive_dl_holds(model, w, e, c.arg) for e in D)
    if isinstance(c, C.CDiamond):
        return any(naive_dl_holds(model, v, d, c.arg) for v in W)
    if isinstance(c, C.CBox):
        return all(naive_dl_holds(model, v, d, c.arg) for v in W)
    raise TypeError(type(c))
