"""Characteristic formulas for Q1K points up to sigma-k-bisimulation.

``char_formula(M, w, d, sigma, k)`` is the strongest formula of modal depth
k true at (w, d).  Another pointed model satisfies it exactly when it is
related to (w, d) at level k of the greatest sigma-k-bisimulation.

Sub-formulas are memoized per (world, element, level) so the result is a
DAG; duplicate conjuncts and disjuncts are dropped, which keeps outputs for
small models readable without changing their meaning.
"""

from __future__ import annotations

from typing import Iterable

from .formula import Atom, Box, Diamond, Exists, Forall, Formula, Not, Signature, conj, disj
from .kripke import KripkeModel


def _unique(parts: Iterable[Formula]) -> list[Formula]:
    return list(dict.fromkeys(parts))


class _Builder:
    def __init__(self, model: KripkeModel, sigma: Iterable[str]) -> None:
        self.model = model
        self.sigma = sorted(Signature(sigma))
        self.table = model.literal_table(self.sigma)
        self.memo: dict[tuple[int, int, int], Formula] = {}
        self.step_memo: dict[tuple[int, int, int], Formula] = {}

    def literal(self, w: int, d: int) -> Formula:
        """t0: the sigma-literals true at (w, d)."""
        return conj(Atom(p) if self.table[i, w, d] else Not(Atom(p)) for i, p in enumerate(self.sigma))

    def step(self, w: int, d: int, k: int) -> Formula:
        """t0(w,d) & every successor's tau^k is possible & nothing else is."""
        key = (w, d, k)
        if key not in self.step_memo:
            succ = _unique(self.tau(v, d, k) for v in self.model.successors(w))
            self.step_memo[key] = conj([self.literal(w, d)] + [Diamond(s) for s in succ] + [Box(disj(succ))])
        return self.step_memo[key]

    def tau(self, w: int, d: int, k: int) -> Formula:
        key = (w, d, k)
        if key in self.memo:
            return self.memo[key]
        elements = range(len(self.model.domain))
        if k == 0:
            local = [self.literal(w, e) for e in elements]
            head = self.literal(w, d)
        else:
            local = [self.step(w, e, k - 1) for e in elements]
            head = self.step(w, d, k - 1)
        local = _unique(local)
        result = conj([head] + [Exists(f) for f in local] + [Forall(disj(local))])
        self.memo[key] = result
        return result


def char_formula(model: KripkeModel, w: str, d: str, sigma: Iterable[str], k: int) -> Formula:
    if k < 0:
        raise ValueError("k must be non-negative")
    return _Builder(model, sigma).tau(model.world_index(w), model.element_index(d), k)
