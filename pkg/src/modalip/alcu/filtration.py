"""Pair filtration for S5_ALC^u through full mosaics.

Given models with C at p1 and ~D at p2, sigma-bisimilar for
sigma = sig(C) & sig(D), every point (w, d) gets

* its full type ft (closure members true there),
* its full mosaic fm = (F1, F2): the full types of all sigma-bisimilar points
  in each model,
* its full point (ft, fm),

next to the world/domain points of the one-variable construction (built
from the world and element components of the greatest triple bisimulation).
World copies carry a sequence pi from Pi and element copies an index k; the
point (wp^pi, dp^k) takes the full point pi_{wp,dp}(k).  Role edges inside a
world join full points whose types are R-witnessing, and for sigma-roles the
mosaics must also satisfy fm <=_R fm'.

The report re-checks everything from the output models: closure membership
at every point, the triple bisimulation, relatedness of the distinguished
points, and the mosaic coherence fm^wt = wm, fm^dt = dm.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..formula import Signature
from ..kripke import Point
from ..mosaics import FiltrationReport, PreconditionError
from .bisim import TripleBisim, max_bisim_alcu, verify_triple
from .concept import CName, CNot, Concept, ConceptClosure, concept_closure, concept_signature, cnormalize
from .model import DLModel, dl_extent

Mosaic = tuple[frozenset[int], ...]
FullPoint = tuple[int, Mosaic]


def closure_types(model: DLModel, closure: ConceptClosure) -> np.ndarray:
    """(W, D) object array of closure bitsets."""
    memo: dict = {}
    table = np.stack([dl_extent(model, c, memo) for c in closure.members])
    out = np.empty(model.shape, dtype=object)
    for w in range(model.shape[0]):
        for d in range(model.shape[1]):
            out[w, d] = sum(1 << int(i) for i in np.flatnonzero(table[:, w, d]))
    return out


def _order(key) -> tuple:
    t, mosaic = key
    return (t, tuple(tuple(sorted(s)) for s in mosaic))


@dataclass(frozen=True)
class FullTypeTable:
    closure: ConceptClosure
    sigma: Signature
    full: tuple[np.ndarray, ...]
    world_type: tuple[tuple[int, ...], ...]
    domain_type: tuple[tuple[int, ...], ...]
    world_mosaic: tuple[tuple[Mosaic, ...], ...]
    domain_mosaic: tuple[tuple[Mosaic, ...], ...]
    full_mosaic: tuple[np.ndarray, ...]
    bisims: dict = field(repr=False, compare=False)

    def world_point(self, i: int, w: int):
        return self.world_type[i][w], self.world_mosaic[i][w]

    def domain_point(self, i: int, d: int):
        return self.domain_type[i][d], self.domain_mosaic[i][d]

    def full_point(self, i: int, w: int, d: int) -> FullPoint:
        return int(self.full[i][w, d]), self.full_mosaic[i][w, d]

    def project(self, mosaic: Mosaic, mask: int) -> Mosaic:
        return tuple(frozenset(t & mask for t in part) for part in mosaic)


def compute_full_types(
    m1: DLModel, m2: DLModel, c: Concept, d: Concept, sigma=None
) -> FullTypeTable:
    models = (m1, m2)
    sigma = concept_signature(c) & concept_signature(d) if sigma is None else Signature(sigma)
    closure = concept_closure(c, d)
    full = tuple(closure_types(m, closure) for m in models)
    emask, dmask = closure.mask(closure.exists_u), closure.mask(closure.diamond)
    wt = tuple(tuple(int(t[w, 0]) & emask for w in range(t.shape[0])) for t in full)
    dt = tuple(tuple(int(t[0, e]) & dmask for e in range(t.shape[1])) for t in full)
    bisims = {(i, j): max_bisim_alcu(models[i], models[j], sigma) for i in range(2) for j in range(2)}
    wm = tuple(
        tuple(
            tuple(frozenset(wt[j][v] for v in np.flatnonzero(bisims[i, j].worlds[w])) for j in range(2))
            for w in range(len(models[i].worlds))
        )
        for i in range(2)
    )
    dm = tuple(
        tuple(
            tuple(frozenset(dt[j][e] for e in np.flatnonzero(bisims[i, j].elements[x])) for j in range(2))
            for x in range(len(models[i].domain))
        )
        for i in range(2)
    )
    fms = []
    for i in range(2):
        W, D = models[i].shape
        fm = np.empty((W, D), dtype=object)
        for w in range(W):
            for x in range(D):
                fm[w, x] = tuple(
                    frozenset(int(full[j][v, e]) for v, e in zip(*np.nonzero(bisims[i, j].points[w, x]))) for j in range(2)
                )
        fms.append(fm)
    return FullTypeTable(closure, sigma, full, wt, dt, wm, dm, tuple(fms), bisims)


# --------------------------------------------------------------------------
# role edges


class _RoleRule:
    def __init__(self, closure: ConceptClosure, emask: int) -> None:
        self.emask = emask
        self.by_role: dict[str, list[tuple[int, int]]] = {}
        for i in closure.roles:
            c = closure.members[i]
            self.by_role.setdefault(c.role, []).append((i, closure.ids[c.arg]))

    def coherent(self, role: str, t1: int, t2: int) -> bool:
        return all(t1 >> some & 1 or not t2 >> arg & 1 for some, arg in self.by_role.get(role, ()))

    def witnessing(self, role: str, t1: int, t2: int) -> bool:
        return (t1 & self.emask) == (t2 & self.emask) and self.coherent(role, t1, t2)

    def below(self, role: str, fm: Mosaic, fm2: Mosaic) -> bool:
        """fm <=_R fm2: every type of each component has an R-witnessing partner in fm2."""
        return all(any(self.witnessing(role, t, u) for u in part2) for part, part2 in zip(fm, fm2) for t in part)

    def edge(self, role: str, in_sigma: bool, p: FullPoint, q: FullPoint) -> bool:
        if not self.witnessing(role, p[0], q[0]):
            return False
        return not in_sigma or self.below(role, p[1], q[1])


# --------------------------------------------------------------------------
# construction


@dataclass
class DLFiltration:
    models: tuple[DLModel, DLModel]
    closure: ConceptClosure
    claimed: tuple[np.ndarray, np.ndarray]  # full point per output point
    bisim: TripleBisim
    sigma: Signature
    points: tuple[Point, Point]
    targets: tuple[Concept, Concept]
    n: int
    pi_size: int
    coherence: list[str] = field(default_factory=list)
    mapping: dict = field(default_factory=dict)

    @property
    def report(self) -> FiltrationReport:
        return verify_dl_filtration(self)


def filtrate_pair_alcu(m1: DLModel, p1: Point, m2: DLModel, p2: Point, c: Concept, d: Concept) -> DLFiltration:
    sigma = concept_signature(c) & concept_signature(d)
    a, b = m1.index(p1), m2.index(p2)
    if not dl_extent(m1, c)[a]:
        raise PreconditionError(f"precondition failed: M1 does not satisfy C at {tuple(p1)}")
    if dl_extent(m2, d)[b]:
        raise PreconditionError(f"precondition failed: M2 does not satisfy ~D at {tuple(p2)}")
    table = compute_full_types(m1, m2, c, d, sigma)
    if not table.bisims[0, 1].related(a, b):
        raise PreconditionError("precondition failed: the distinguished points are not sigma-bisimilar")
    closure = table.closure
    models = (m1, m2)
    emask, dmask = closure.mask(closure.exists_u), closure.mask(closure.diamond)

    coherence = []
    for i, m in enumerate(models):
        for w in range(m.shape[0]):
            for x in range(m.shape[1]):
                fm = table.full_mosaic[i][w, x]
                if table.project(fm, emask) != table.world_mosaic[i][w]:
                    coherence.append(f"model {i + 1} point {tuple(m.point(w, x))}: fm^wt differs from wm")
                if table.project(fm, dmask) != table.domain_mosaic[i][x]:
                    coherence.append(f"model {i + 1} point {tuple(m.point(w, x))}: fm^dt differs from dm")

    wkeys = [sorted({table.world_point(i, w) for w in range(m.shape[0])}, key=_order) for i, m in enumerate(models)]
    dkeys = [sorted({table.domain_point(i, x) for x in range(m.shape[1])}, key=_order) for i, m in enumerate(models)]
    ranges: dict[tuple[int, int, int], list[FullPoint]] = {}
    for i, m in enumerate(models):
        for w in range(m.shape[0]):
            for x in range(m.shape[1]):
                key = (i, wkeys[i].index(table.world_point(i, w)), dkeys[i].index(table.domain_point(i, x)))
                ranges.setdefault(key, set()).add(table.full_point(i, w, x))  # type: ignore[arg-type]
    ranges = {key: sorted(v, key=_order) for key, v in ranges.items()}
    # cyclic shifts pi^s(k) = range[(k + s) mod |range|] cover every (full point, k)
    pi_size = max(len(r) for r in ranges.values())
    n = pi_size

    rule = _RoleRule(closure, emask)
    role_list = sorted({closure.members[i].role for i in closure.roles})
    names = [(closure.ids[x], x.name) for x in closure.members if isinstance(x, CName)]
    out_models, claimed_all, world_ids, element_ids = [], [], [], []
    for i in range(2):
        worlds = [(p, s) for p in range(len(wkeys[i])) for s in range(pi_size)]
        elements = [(q, k) for q in range(len(dkeys[i])) for k in range(n)]
        claimed = np.empty((len(worlds), len(elements)), dtype=object)
        for x, (p, s) in enumerate(worlds):
            for y, (q, k) in enumerate(elements):
                r = ranges[i, p, q]
                claimed[x, y] = r[(k + s) % len(r)]
        concepts = {
            name: np.array([[bool(claimed[x, y][0] >> j & 1) for y in range(len(elements))] for x in range(len(worlds))])
            for j, name in names
        }
        distinct = sorted({fp for fp in claimed.flat}, key=_order)
        index = {fp: z for z, fp in enumerate(distinct)}
        ids = np.array([[index[fp] for fp in row] for row in claimed], dtype=int)
        roles = {}
        for role in role_list:
            ok = np.array([[rule.edge(role, role in sigma, p, q) for q in distinct] for p in distinct], dtype=bool)
            roles[role] = ok[ids[:, :, None], ids[:, None, :]]
        tag = f"{i + 1}."
        out_models.append(
            DLModel(
                [f"{tag}wp{p}^pi{s}" for p, s in worlds],
                [f"{tag}dp{q}^k{k}" for q, k in elements],
                concepts,
                roles,
            )
        )
        claimed_all.append(claimed)
        world_ids.append(worlds)
        element_ids.append(elements)

    def mosaic_of(keys, ids):
        return [keys[p][1] for p, _ in ids]

    wm = [mosaic_of(wkeys[i], world_ids[i]) for i in range(2)]
    dm = [mosaic_of(dkeys[i], element_ids[i]) for i in range(2)]
    beta1 = np.array([[x == y for y in wm[1]] for x in wm[0]], dtype=bool)
    beta2 = np.array([[x == y for y in dm[1]] for x in dm[0]], dtype=bool)
    fm1 = np.vectorize(lambda fp: fp[1], otypes=[object])(claimed_all[0])
    fm2 = np.vectorize(lambda fp: fp[1], otypes=[object])(claimed_all[1])
    same_fm = np.array(
        [[[[fm1[x, y] == fm2[u, v] for v in range(fm2.shape[1])] for u in range(fm2.shape[0])] for y in range(fm1.shape[1])] for x in range(fm1.shape[0])],
        dtype=bool,
    )
    beta = same_fm & beta1[:, None, :, None] & beta2[None, :, None, :]

    points = []
    for i, (w, x) in enumerate((a, b)):
        p = wkeys[i].index(table.world_point(i, w))
        q = dkeys[i].index(table.domain_point(i, x))
        s = ranges[i, p, q].index(table.full_point(i, w, x))
        points.append(out_models[i].point(p * pi_size + s, q * n))
    return DLFiltration(
        models=(out_models[0], out_models[1]),
        closure=closure,
        claimed=(claimed_all[0], claimed_all[1]),
        bisim=TripleBisim(beta1, beta2, beta),
        sigma=sigma,
        points=(points[0], points[1]),
        targets=(cnormalize(c), cnormalize(CNot(d))),
        n=n,
        pi_size=pi_size,
        coherence=coherence,
        mapping={"world_points": len(wkeys[0]) + len(wkeys[1]), "domain_points": len(dkeys[0]) + len(dkeys[1])},
    )


def verify_dl_filtration(art: DLFiltration) -> FiltrationReport:
    checks: dict[str, list[str]] = {"types": [], "targets": [], "coherence": list(art.coherence), "pi_bound": []}
    for i, (model, claimed) in enumerate(zip(art.models, art.claimed)):
        actual = closure_types(model, art.closure)
        for w in range(model.shape[0]):
            for d in range(model.shape[1]):
                diff = int(actual[w, d]) ^ claimed[w, d][0]
                for j in range(len(art.closure)):
                    if diff >> j & 1:
                        checks["types"].append(
                            f"model {i + 1} point {tuple(model.point(w, d))}: {art.closure.members[j]} disagrees with the assigned type"
                        )
    for i, (model, point, target) in enumerate(zip(art.models, art.points, art.targets)):
        if not dl_extent(model, target)[model.index(point)]:
            checks["targets"].append(f"model {i + 1} point {tuple(point)} does not satisfy {target}")
    if art.pi_size > art.n * art.n:
        checks["pi_bound"].append(f"|Pi| = {art.pi_size} exceeds n^2 = {art.n * art.n}")
    m1, m2 = art.models
    checks["bisimulation"] = [str(v) for v in verify_triple(art.bisim, m1, m2, art.sigma)]
    related = art.bisim.related(m1.index(art.points[0]), m2.index(art.points[1]))
    checks["related"] = [] if related else ["distinguished points are not related"]
    return FiltrationReport(checks)
