"""Triple bisimulations (beta1 on worlds, beta2 on elements, beta on points).

Conditions, for a signature sigma of concept and role names:

* (w) a beta1 pair of worlds matches every element on either side inside beta;
* (d) a beta2 pair of elements matches every world on either side inside beta;
* (c) beta only relates points whose world pair is in beta1 and element pair in beta2;
* (a) related points agree on concept names in sigma;
* (r) every sigma-role edge out of a related point is matched by one out of its partner.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from ..bisim import Violation
from ..kripke import Point
from .concept import UNIVERSAL
from .model import DLModel


@dataclass(frozen=True)
class TripleBisim:
    worlds: np.ndarray  # (W, W')
    elements: np.ndarray  # (D, D')
    points: np.ndarray  # (W, D, W', D')

    def related(self, p: tuple[int, int], q: tuple[int, int]) -> bool:
        return bool(self.points[p[0], p[1], q[0], q[1]])


def _split(sigma: Iterable[str], m1: DLModel, m2: DLModel) -> tuple[list[str], list[str]]:
    sigma = set(sigma) - {UNIVERSAL}
    role_names = set(m1.roles) | set(m2.roles)
    roles = sorted(s for s in sigma if s in role_names)
    names = sorted(s for s in sigma if s not in role_names)
    return names, roles


def _agreement(m1: DLModel, m2: DLModel, names: list[str]) -> np.ndarray:
    same = np.ones((*m1.shape, *m2.shape), dtype=bool)
    for a in names:
        same &= m1.holds(a)[:, :, None, None] == m2.holds(a)[None, None, :, :]
    return same


def _role_ok(B: np.ndarray, r1: np.ndarray, r2: np.ndarray) -> np.ndarray:
    """(W, D, W', D') mask: edges of r out of (w, d) and (w', d') are matched in B."""
    Bi = B.astype(np.int32)
    r1i, r2i = r1.astype(np.int32), r2.astype(np.int32)
    # hit2[w, e1, v, d2]: some r2-successor e2 of d2 at v has B((w, e1), (v, e2))
    hit2 = np.einsum("vde,wxve->wxvd", r2i, Bi) > 0
    forth = np.einsum("wdx,wxve->wdve", r1i, (~hit2).astype(np.int32)) == 0
    hit1 = np.einsum("wdx,wxve->wdve", r1i, Bi) > 0
    back = np.einsum("vey,wdvy->wdve", r2i, (~hit1).astype(np.int32)) == 0
    return forth & back


def _w_ok(B: np.ndarray) -> np.ndarray:
    return B.any(axis=3).all(axis=1) & B.any(axis=1).all(axis=2)


def _d_ok(B: np.ndarray) -> np.ndarray:
    return B.any(axis=2).all(axis=0) & B.any(axis=0).all(axis=1)


def max_bisim_alcu(m1: DLModel, m2: DLModel, sigma: Iterable[str]) -> TripleBisim:
    names, roles = _split(sigma, m1, m2)
    B = _agreement(m1, m2, names)
    W = np.ones((len(m1.worlds), len(m2.worlds)), dtype=bool)
    E = np.ones((len(m1.domain), len(m2.domain)), dtype=bool)
    while True:
        nB = B & W[:, None, :, None] & E[None, :, None, :]
        for r in roles:
            nB &= _role_ok(nB, m1.role(r), m2.role(r))
        nW = W & _w_ok(nB)
        nE = E & _d_ok(nB)
        if np.array_equal(nB, B) and np.array_equal(nW, W) and np.array_equal(nE, E):
            return TripleBisim(W, E, B)
        B, W, E = nB, nW, nE


def verify_triple(candidate: TripleBisim, m1: DLModel, m2: DLModel, sigma: Iterable[str]) -> list[Violation]:
    names, roles = _split(sigma, m1, m2)
    W, E, B = candidate.worlds, candidate.elements, candidate.points
    if W.shape != (len(m1.worlds), len(m2.worlds)) or E.shape != (len(m1.domain), len(m2.domain)):
        raise ValueError("relation shape does not match the models")
    if B.shape != (*m1.shape, *m2.shape):
        raise ValueError("relation shape does not match the models")
    report = []

    def pid(m: DLModel, w, d) -> Point:
        return m.point(int(w), int(d))

    for w, v in zip(*np.nonzero(W & ~_w_ok(B))):
        report.append(Violation("w", (m1.worlds[w], m2.worlds[v]), "an element has no partner in beta"))
    for d, e in zip(*np.nonzero(E & ~_d_ok(B))):
        report.append(Violation("d", (m1.domain[d], m2.domain[e]), "a world has no partner in beta"))
    bad_c = B & ~(W[:, None, :, None] & E[None, :, None, :])
    for w, d, v, e in zip(*np.nonzero(bad_c)):
        report.append(Violation("c", (pid(m1, w, d), pid(m2, v, e)), "component pair missing from beta1 or beta2"))
    for w, d, v, e in zip(*np.nonzero(B & ~_agreement(m1, m2, names))):
        report.append(Violation("a", (pid(m1, w, d), pid(m2, v, e)), "concept names disagree"))
    for r in roles:
        for w, d, v, e in zip(*np.nonzero(B & ~_role_ok(B, m1.role(r), m2.role(r)))):
            report.append(Violation("r", (pid(m1, w, d), pid(m2, v, e)), f"an edge of {r} is unmatched"))
    return report


def dump_triple(candidate: TripleBisim, m1: DLModel, m2: DLModel) -> str:
    return json.dumps(
        {
            "worlds": [[m1.worlds[a], m2.worlds[b]] for a, b in zip(*np.nonzero(candidate.worlds))],
            "elements": [[m1.domain[a], m2.domain[b]] for a, b in zip(*np.nonzero(candidate.elements))],
            "points": [
                [list(m1.point(w, d)), list(m2.point(v, e))] for w, d, v, e in zip(*np.nonzero(candidate.points))
            ],
        }
    )


def identity_triple(model: DLModel) -> TripleBisim:
    W, D = model.shape
    eye_w, eye_d = np.eye(W, dtype=bool), np.eye(D, dtype=bool)
    return TripleBisim(eye_w, eye_d, eye_w[:, None, :, None] & eye_d[None, :, None, :])
