"""Propositional encodings of bounded model search, solved with z3.

A :class:`SymbolicModel` has a fixed number of worlds and elements and one
Boolean unknown per (predicate, world, element); :meth:`SymbolicModel.truth`
unfolds the truth clauses of a formula into a z3 expression over those
unknowns.  Frames are either total (S5) or a full tree of bounded depth and
branching whose non-root nodes carry an "exists" unknown, so that one
encoding covers every tree of at most that shape.

On top of that sit the consistency searches used by the deciders: a model
pair plus an unknown S5 bisimulation, or a tree pair plus an unknown
k-bisimulation.  Whatever the solver returns is decoded into ordinary
models and relations and checked again by the caller with the explicit
checkers; the solver is only ever trusted for *not* finding anything.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
import z3

from .bisim import S5Bisim
from .formula import And, Atom, Bottom, Box, Diamond, Exists, Forall, Formula, Iff, Implies, Not, Or, Top
from .kripke import KripkeModel, Point


class SearchTimeout(RuntimeError):
    pass


def _solver(timeout_ms: int | None) -> z3.Solver:
    s = z3.Solver()
    s.set("random_seed", 0)
    if timeout_ms:
        s.set("timeout", int(timeout_ms))
    return s


def _check(solver: z3.Solver) -> bool:
    result = solver.check()
    if result == z3.unknown:
        raise SearchTimeout(solver.reason_unknown())
    return result == z3.sat


@dataclass(frozen=True)
class TreeShape:
    depth: int
    branching: int

    def nodes(self) -> tuple[list[int], list[list[int]], list[int]]:
        """parent, children and depth lists of the full tree, in BFS order."""
        parent, children, level = [-1], [[]], [0]
        frontier = [0]
        for lvl in range(1, self.depth + 1):
            nxt = []
            for u in frontier:
                for _ in range(self.branching):
                    v = len(parent)
                    parent.append(u)
                    children.append([])
                    level.append(lvl)
                    children[u].append(v)
                    nxt.append(v)
            frontier = nxt
        return parent, children, level


class SymbolicModel:
    def __init__(
        self, tag: str, n_worlds: int | None, n_domain: int, tree: TreeShape | None = None, element_tag: str = "d"
    ) -> None:
        self.tag = tag
        self.element_tag = element_tag
        self.tree = tree
        if tree is None:
            assert n_worlds is not None
            self.n_worlds = n_worlds
            self.parent: list[int] = []
            self.children: list[list[int]] = []
            self.level: list[int] = []
            self.alive = [z3.BoolVal(True)] * n_worlds
        else:
            self.parent, self.children, self.level = tree.nodes()
            self.n_worlds = len(self.parent)
            self.alive = [z3.BoolVal(True)] + [z3.Bool(f"{tag}_alive_{u}") for u in range(1, self.n_worlds)]
        self.n_domain = n_domain
        self.vars: dict[tuple[str, int, int], z3.BoolRef] = {}
        self._memo: dict[tuple, z3.BoolRef] = {}

    def frame_constraints(self) -> list[z3.BoolRef]:
        if self.tree is None:
            return []
        return [z3.Implies(self.alive[u], self.alive[self.parent[u]]) for u in range(1, self.n_worlds)]

    def atom(self, p: str, w: int, d: int) -> z3.BoolRef:
        key = (p, w, d)
        var = self.vars.get(key)
        if var is None:
            var = self.vars[key] = z3.Bool(f"{self.tag}_{p}_{w}_{d}")
        return var

    def truth(self, f: Formula, w: int, d: int) -> z3.BoolRef:
        # Exists-formulas do not depend on d and Diamond-formulas (in S5) not on w
        if isinstance(f, (Exists, Forall)):
            key = (f, w, None)
        elif isinstance(f, (Diamond, Box)) and self.tree is None:
            key = (f, None, d)
        else:
            key = (f, w, d)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        out = self._truth(f, w, d)
        self._memo[key] = out
        return out

    def _truth(self, f: Formula, w: int, d: int) -> z3.BoolRef:
        if isinstance(f, Top):
            return z3.BoolVal(True)
        if isinstance(f, Bottom):
            return z3.BoolVal(False)
        if isinstance(f, Atom):
            return self.atom(f.name, w, d)
        if isinstance(f, Not):
            return z3.Not(self.truth(f.arg, w, d))
        if isinstance(f, And):
            return z3.And(self.truth(f.left, w, d), self.truth(f.right, w, d))
        if isinstance(f, Or):
            return z3.Or(self.truth(f.left, w, d), self.truth(f.right, w, d))
        if isinstance(f, Implies):
            return z3.Implies(self.truth(f.left, w, d), self.truth(f.right, w, d))
        if isinstance(f, Iff):
            return self.truth(f.left, w, d) == self.truth(f.right, w, d)
        if isinstance(f, Exists):
            return z3.Or([self.truth(f.arg, w, e) for e in range(self.n_domain)])
        if isinstance(f, Forall):
            return z3.And([self.truth(f.arg, w, e) for e in range(self.n_domain)])
        if isinstance(f, Diamond):
            return z3.Or([z3.And(live, self.truth(f.arg, v, d)) for v, live in self._successors(w)] or [z3.BoolVal(False)])
        if isinstance(f, Box):
            return z3.And([z3.Implies(live, self.truth(f.arg, v, d)) for v, live in self._successors(w)] or [z3.BoolVal(True)])
        raise TypeError(f"not a formula: {f!r}")

    def _successors(self, w: int) -> list[tuple[int, z3.BoolRef]]:
        if self.tree is None:
            return [(v, z3.BoolVal(True)) for v in range(self.n_worlds)]
        return [(v, self.alive[v]) for v in self.children[w]]

    def world_ids(self) -> list[str]:
        return [f"{self.tag}{u}" for u in range(self.n_worlds)]

    def element_ids(self) -> list[str]:
        return [f"{self.element_tag}{d}" for d in range(self.n_domain)]

    def decode(self, m: z3.ModelRef, predicates: Iterable[str] = ()) -> tuple[KripkeModel, list[int]]:
        """Concrete model from a solver model, plus the kept world indices."""
        keep = [u for u in range(self.n_worlds) if z3.is_true(m.eval(self.alive[u], model_completion=True))]
        names = sorted({p for p, _, _ in self.vars} | set(predicates))
        val = {}
        for p in names:
            table = np.zeros((len(keep), self.n_domain), dtype=bool)
            for i, u in enumerate(keep):
                for d in range(self.n_domain):
                    var = self.vars.get((p, u, d))
                    if var is not None:
                        table[i, d] = z3.is_true(m.eval(var, model_completion=True))
            val[p] = table
        worlds = [self.world_ids()[u] for u in keep]
        access = None
        if self.tree is not None:
            pos = {u: i for i, u in enumerate(keep)}
            access = np.zeros((len(keep), len(keep)), dtype=bool)
            for u in keep[1:]:
                access[pos[self.parent[u]], pos[u]] = True
        return KripkeModel(worlds, self.element_ids(), val, access), keep


def find_model(phi: Formula, n_worlds: int, n_domain: int, tree: TreeShape | None = None, timeout_ms: int | None = None):
    """A model satisfying phi at world 0, element 0, or None if there is none of this shape."""
    sm = SymbolicModel("w", n_worlds, n_domain, tree)
    s = _solver(timeout_ms)
    s.add(sm.frame_constraints())
    s.add(sm.truth(phi, 0, 0))
    if not _check(s):
        return None
    model, _ = sm.decode(s.model())
    return model, model.point(0, 0)


def _literal_eq(m1: SymbolicModel, m2: SymbolicModel, sigma: list[str], cache: dict) -> callable:
    def eq(w: int, d: int, v: int, e: int) -> z3.BoolRef:
        key = (w, d, v, e)
        hit = cache.get(key)
        if hit is None:
            hit = cache[key] = z3.And([m1.atom(p, w, d) == m2.atom(p, v, e) for p in sigma]) if sigma else z3.BoolVal(True)
        return hit

    return eq


def find_s5_bisimilar_pair(
    left: Formula,
    right: Formula,
    sigma: Iterable[str],
    shape1: tuple[int, int],
    shape2: tuple[int, int],
    timeout_ms: int | None = None,
):
    """S5 models M1 |= left at (0,0), M2 |= right at (0,0), with the points sigma-S5-bisimilar."""
    sigma = sorted(set(sigma))
    m1 = SymbolicModel("u", shape1[0], shape1[1])
    m2 = SymbolicModel("v", shape2[0], shape2[1], element_tag="e")
    W1, D1 = shape1
    W2, D2 = shape2
    b1 = [[z3.Bool(f"bw_{w}_{v}") for v in range(W2)] for w in range(W1)]
    b2 = [[z3.Bool(f"bd_{d}_{e}") for e in range(D2)] for d in range(D1)]
    eq = _literal_eq(m1, m2, sigma, {})
    s = _solver(timeout_ms)
    s.add(m1.truth(left, 0, 0), m2.truth(right, 0, 0))
    s.add(b1[0][0], b2[0][0], eq(0, 0, 0, 0))
    for w in range(W1):
        for v in range(W2):
            forth = [z3.Or([z3.And(b2[d][e], eq(w, d, v, e)) for e in range(D2)]) for d in range(D1)]
            back = [z3.Or([z3.And(b2[d][e], eq(w, d, v, e)) for d in range(D1)]) for e in range(D2)]
            s.add(z3.Implies(b1[w][v], z3.And(forth + back)))
    for d in range(D1):
        for e in range(D2):
            forth = [z3.Or([z3.And(b1[w][v], eq(w, d, v, e)) for v in range(W2)]) for w in range(W1)]
            back = [z3.Or([z3.And(b1[w][v], eq(w, d, v, e)) for w in range(W1)]) for v in range(W2)]
            s.add(z3.Implies(b2[d][e], z3.And(forth + back)))
    if not _check(s):
        return None
    m = s.model()
    M1, _ = m1.decode(m, sigma)
    M2, _ = m2.decode(m, sigma)
    worlds = np.array([[z3.is_true(m.eval(b1[w][v], model_completion=True)) for v in range(W2)] for w in range(W1)])
    elements = np.array([[z3.is_true(m.eval(b2[d][e], model_completion=True)) for e in range(D2)] for d in range(D1)])
    return M1, M1.point(0, 0), M2, M2.point(0, 0), S5Bisim(worlds, elements)


def find_k_bisimilar_trees(
    left: Formula,
    right: Formula,
    sigma: Iterable[str],
    k: int,
    shape1: tuple[TreeShape, int],
    shape2: tuple[TreeShape, int],
    timeout_ms: int | None = None,
):
    """Tree models with left / right at the roots and the roots sigma-k-bisimilar.

    Level i of the k-bisimulation only ever relates nodes at depth k - i, so
    unknowns are created for same-depth node pairs only.
    """
    sigma = sorted(set(sigma))
    (t1, D1), (t2, D2) = shape1, shape2
    m1 = SymbolicModel("u", None, D1, t1)
    m2 = SymbolicModel("v", None, D2, t2, element_tag="e")
    eq = _literal_eq(m1, m2, sigma, {})
    B: dict[tuple[int, int, int, int], z3.BoolRef] = {}

    def rel(u: int, d: int, v: int, e: int) -> z3.BoolRef:
        key = (u, d, v, e)
        if key not in B:
            B[key] = z3.Bool(f"kb_{u}_{d}_{v}_{e}")
        return B[key]

    s = _solver(timeout_ms)
    s.add(m1.frame_constraints() + m2.frame_constraints())
    s.add(m1.truth(left, 0, 0), m2.truth(right, 0, 0), rel(0, 0, 0, 0))
    for depth in range(0, k + 1):
        us = [u for u in range(m1.n_worlds) if m1.level[u] == depth]
        vs = [v for v in range(m2.n_worlds) if m2.level[v] == depth]
        for u in us:
            for v in vs:
                for d in range(D1):
                    for e in range(D2):
                        conds = [eq(u, d, v, e)]
                        conds += [z3.Or([rel(u, d2, v, e2) for e2 in range(D2)]) for d2 in range(D1)]
                        conds += [z3.Or([rel(u, d2, v, e2) for d2 in range(D1)]) for e2 in range(D2)]
                        if depth < k:
                            for c in m1.children[u]:
                                conds.append(
                                    z3.Implies(m1.alive[c], z3.Or([z3.And(m2.alive[c2], rel(c, d, c2, e)) for c2 in m2.children[v]] or [z3.BoolVal(False)]))
                                )
                            for c2 in m2.children[v]:
                                conds.append(
                                    z3.Implies(m2.alive[c2], z3.Or([z3.And(m1.alive[c], rel(c, d, c2, e)) for c in m1.children[u]] or [z3.BoolVal(False)]))
                                )
                        s.add(z3.Implies(rel(u, d, v, e), z3.And(conds)))
    if not _check(s):
        return None
    m = s.model()
    M1, _ = m1.decode(m, sigma)
    M2, _ = m2.decode(m, sigma)
    return M1, M1.point(0, 0), M2, M2.point(0, 0)


def propositionally_unsat(constraints: list[z3.BoolRef], timeout_ms: int | None = None) -> bool:
    s = _solver(timeout_ms)
    s.add(constraints)
    return not _check(s)
