"""Greatest sigma-bisimulations between finite models, and a checker for them.

Three notions live here:

* general bisimulations between points, with conditions (a) atoms agree,
  (w) accessibility steps match, (d) domain steps match;
* S5 bisimulations, a pair of relations on worlds and on elements whose
  matches must agree on literal sigma-types;
* k-bisimulations, a sequence beta_0..beta_k where the world step at level i
  lands in level i-1.

Relations are dense boolean arrays.  A general relation has shape
``(W, D, W', D')``; the greatest one is reached by repeated vectorized
removal of violating pairs starting from the atom-agreeing seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .kripke import KripkeModel, Point


class BisimError(ValueError):
    pass


@dataclass(frozen=True)
class Violation:
    condition: str
    pair: tuple
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.condition} {self.pair} {self.detail}".rstrip()


@dataclass(frozen=True)
class GeneralBisim:
    pairs: np.ndarray  # (W, D, W', D')

    def related(self, p: tuple[int, int], q: tuple[int, int]) -> bool:
        return bool(self.pairs[p[0], p[1], q[0], q[1]])

    def __len__(self) -> int:
        return int(self.pairs.sum())

    def tuples(self) -> list[tuple[tuple[int, int], tuple[int, int]]]:
        return [((w, d), (v, e)) for w, d, v, e in zip(*np.nonzero(self.pairs))]


@dataclass(frozen=True)
class S5Bisim:
    worlds: np.ndarray  # (W, W')
    elements: np.ndarray  # (D, D')

    def point_relation(self, m1: KripkeModel, m2: KripkeModel, sigma: Iterable[str]) -> GeneralBisim:
        same = literal_agreement(m1, m2, sigma)
        return GeneralBisim(same & self.worlds[:, None, :, None] & self.elements[None, :, None, :])

    def related(self, m1: KripkeModel, m2: KripkeModel, sigma: Iterable[str], p: tuple[int, int], q: tuple[int, int]) -> bool:
        same = literal_agreement(m1, m2, sigma)[p[0], p[1], q[0], q[1]]
        return bool(self.worlds[p[0], q[0]] and self.elements[p[1], q[1]] and same)


@dataclass(frozen=True)
class KBisim:
    levels: tuple[np.ndarray, ...]  # each (W, D, W', D')

    @property
    def k(self) -> int:
        return len(self.levels) - 1

    def related(self, level: int, p: tuple[int, int], q: tuple[int, int]) -> bool:
        return bool(self.levels[level][p[0], p[1], q[0], q[1]])


def literal_agreement(m1: KripkeModel, m2: KripkeModel, sigma: Iterable[str]) -> np.ndarray:
    """same[w, d, w', d'] iff the two points satisfy the same sigma-atoms."""
    a = m1.literal_table(sigma)
    b = m2.literal_table(sigma)
    same = np.ones((*m1.shape, *m2.shape), dtype=bool)
    for x, y in zip(a, b):
        same &= x[:, :, None, None] == y[None, None, :, :]
    return same


# --------------------------------------------------------------------------
# condition kernels (shared by the fixpoints and the checker)


def _domain_ok(B: np.ndarray) -> np.ndarray:
    """(W, W') mask: every element on either side has a partner under B."""
    forth = B.any(axis=3).all(axis=1)
    back = B.any(axis=1).all(axis=2)
    return forth & back


def _world_ok(B: np.ndarray, R1: np.ndarray, R2: np.ndarray) -> np.ndarray:
    """(W, D, W', D') mask: every R-successor on either side has a partner in B."""
    Bi = B.astype(np.int32)
    R1i = R1.astype(np.int32)
    R2i = R2.astype(np.int32)
    # matched_right[v, d, x, e]: some R2-successor of x is B-related to (v, d)
    matched_right = np.einsum("xy,vdye->vdxe", R2i, Bi) > 0
    forth = np.einsum("wv,vdxe->wdxe", R1i, (~matched_right).astype(np.int32)) == 0
    matched_left = np.einsum("wv,vdye->wdye", R1i, Bi) > 0
    back = np.einsum("xy,wdye->wdxe", R2i, (~matched_left).astype(np.int32)) == 0
    return forth & back


def _check_kind(m1: KripkeModel, m2: KripkeModel) -> None:
    if m1.is_s5 != m2.is_s5:
        raise BisimError("models must be of the same kind")


# --------------------------------------------------------------------------
# greatest fixpoints


def max_bisim_general(m1: KripkeModel, m2: KripkeModel, sigma: Iterable[str]) -> GeneralBisim:
    _check_kind(m1, m2)
    B = literal_agreement(m1, m2, sigma)
    while True:
        nxt = B & _domain_ok(B)[:, None, :, None] & _world_ok(B, m1.R, m2.R)
        if np.array_equal(nxt, B):
            return GeneralBisim(B)
        B = nxt


def _s5_world_ok(same: np.ndarray, elements: np.ndarray) -> np.ndarray:
    C = same & elements[None, :, None, :]
    return C.any(axis=3).all(axis=1) & C.any(axis=1).all(axis=2)


def _s5_element_ok(same: np.ndarray, worlds: np.ndarray) -> np.ndarray:
    C = same & worlds[:, None, :, None]
    return C.any(axis=2).all(axis=0) & C.any(axis=0).all(axis=1)


def max_bisim_s5(m1: KripkeModel, m2: KripkeModel, sigma: Iterable[str]) -> S5Bisim:
    if not (m1.is_s5 and m2.is_s5):
        raise BisimError("S5 bisimulations need S5 models")
    same = literal_agreement(m1, m2, sigma)
    worlds = np.ones((len(m1.worlds), len(m2.worlds)), dtype=bool)
    elements = np.ones((len(m1.domain), len(m2.domain)), dtype=bool)
    while True:
        new_worlds = worlds & _s5_world_ok(same, elements)
        new_elements = elements & _s5_element_ok(same, new_worlds)
        if np.array_equal(new_worlds, worlds) and np.array_equal(new_elements, elements):
            return S5Bisim(worlds, elements)
        worlds, elements = new_worlds, new_elements


def _domain_gfp(B: np.ndarray) -> np.ndarray:
    while True:
        nxt = B & _domain_ok(B)[:, None, :, None]
        if np.array_equal(nxt, B):
            return B
        B = nxt


def max_k_bisim(m1: KripkeModel, m2: KripkeModel, sigma: Iterable[str], k: int) -> KBisim:
    """Greatest sequence: beta_0 from (a)+(d), then (w') into the previous level."""
    if k < 0:
        raise ValueError("k must be non-negative")
    same = literal_agreement(m1, m2, sigma)
    levels = [_domain_gfp(same)]
    for _ in range(k):
        levels.append(_domain_gfp(same & _world_ok(levels[-1], m1.R, m2.R)))
    return KBisim(tuple(levels))


def bisimilar(m1: KripkeModel, p1: Point, m2: KripkeModel, p2: Point, sigma: Iterable[str]) -> bool:
    """p1 ~_sigma p2, via the S5 pair relation when possible."""
    a, b = m1.index(p1), m2.index(p2)
    if m1.is_s5 and m2.is_s5:
        return max_bisim_s5(m1, m2, sigma).related(m1, m2, sigma, a, b)
    return max_bisim_general(m1, m2, sigma).related(a, b)


# --------------------------------------------------------------------------
# verification


def verify_bisimulation(
    candidate: GeneralBisim | S5Bisim | KBisim, m1: KripkeModel, m2: KripkeModel, sigma: Iterable[str]
) -> list[Violation]:
    """Every violated defining condition, with the offending tuple (ids, not indices)."""
    sigma = sorted(set(sigma))
    same = literal_agreement(m1, m2, sigma)

    def pid(m: KripkeModel, w: int, d: int) -> Point:
        return m.point(int(w), int(d))

    report: list[Violation] = []
    if isinstance(candidate, S5Bisim):
        W, E = candidate.worlds, candidate.elements
        if W.shape != (len(m1.worlds), len(m2.worlds)) or E.shape != (len(m1.domain), len(m2.domain)):
            raise BisimError("relation shape does not match the models")
        bad_w = W & ~_s5_world_ok(same, E)
        for w, v in zip(*np.nonzero(bad_w)):
            report.append(Violation("s5_1", (m1.worlds[w], m2.worlds[v]), "an element has no partner with equal literal type"))
        bad_e = E & ~_s5_element_ok(same, W)
        for d, e in zip(*np.nonzero(bad_e)):
            report.append(Violation("s5_2", (m1.domain[d], m2.domain[e]), "a world has no partner with equal literal type"))
        return report

    if isinstance(candidate, GeneralBisim):
        levels, k_mode = [candidate.pairs], False
    else:
        levels, k_mode = list(candidate.levels), True
    for i, B in enumerate(levels):
        if B.shape != (*m1.shape, *m2.shape):
            raise BisimError("relation shape does not match the models")
        tag = f"[{i}]" if k_mode else ""
        for w, d, v, e in zip(*np.nonzero(B & ~same)):
            report.append(Violation("a" + tag, (pid(m1, w, d), pid(m2, v, e)), "atoms disagree"))
        dom = B & ~_domain_ok(B)[:, None, :, None]
        for w, d, v, e in zip(*np.nonzero(dom)):
            report.append(Violation("d" + tag, (pid(m1, w, d), pid(m2, v, e)), "an element step is unmatched"))
        if k_mode and i == 0:
            continue
        target = levels[i - 1] if k_mode else B
        wor = B & ~_world_ok(target, m1.R, m2.R)
        for w, d, v, e in zip(*np.nonzero(wor)):
            name = "w'" + tag if k_mode else "w"
            report.append(Violation(name, (pid(m1, w, d), pid(m2, v, e)), "an accessibility step is unmatched"))
    return report


# --------------------------------------------------------------------------
# dump format


def dump(candidate: GeneralBisim | S5Bisim | KBisim, m1: KripkeModel, m2: KripkeModel) -> str:
    def points(B: np.ndarray) -> list:
        return [[list(m1.point(w, d)), list(m2.point(v, e))] for w, d, v, e in zip(*np.nonzero(B))]

    if isinstance(candidate, S5Bisim):
        data = {
            "worlds": [[m1.worlds[a], m2.worlds[b]] for a, b in zip(*np.nonzero(candidate.worlds))],
            "elements": [[m1.domain[a], m2.domain[b]] for a, b in zip(*np.nonzero(candidate.elements))],
        }
    elif isinstance(candidate, GeneralBisim):
        data = {"points": points(candidate.pairs)}
    else:
        data = {"levels": [points(B) for B in candidate.levels]}
    return json.dumps(data)


def identity_s5(model: KripkeModel) -> S5Bisim:
    return S5Bisim(np.eye(len(model.worlds), dtype=bool), np.eye(len(model.domain), dtype=bool))


def identity_points(model: KripkeModel) -> GeneralBisim:
    nw, nd = model.shape
    eye = np.eye(nw, dtype=bool)[:, None, :, None] & np.eye(nd, dtype=bool)[None, :, None, :]
    return GeneralBisim(eye)
