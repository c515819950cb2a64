"""Types, mosaics and the filtrations of finite S5 models.

For a closure sub(phi, psi), the full type of a point is the set of members
true there; its world type keeps the members of shape (~)E xi and its domain
type those of shape (~)<> xi.  Given two models and a signature sigma, the
world mosaic of w collects the world types of everything sigma-bisimilar to w
in each model, and the world point of w pairs its type with its mosaic
(dually for elements).

The filtrations rebuild models out of copies of these points:

* :func:`filtrate_sat` keeps n copies of every domain type and one world
  per (world type, sequence in Pi); a point's atoms are read off the full type
  that its sequence assigns to the copy index.
* :func:`filtrate_pair` does the same with world/domain *points* for two
  sigma-bisimilar models and relates copies whose mosaics agree.

Types are Python ints used as bitsets over closure ids.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .bisim import S5Bisim, max_bisim_s5, verify_bisimulation
from .formula import Atom, ClosureIndex, Formula, Signature, closures, negate, normalize, signature_of
from .kripke import KripkeModel, Point, extent

Mosaic = tuple[frozenset[int], ...]
PointKey = tuple[int, Mosaic]


class PreconditionError(ValueError):
    pass


def closure_extents(model: KripkeModel, closure: ClosureIndex) -> np.ndarray:
    """Shape (|sub|, W, D): truth of every closure member at every point."""
    memo: dict[Formula, np.ndarray] = {}
    return np.stack([extent(model, f, memo) for f in closure.members])


def pack_types(table: np.ndarray) -> np.ndarray:
    """Collapse the closure axis of ``closure_extents`` into int bitsets (object array)."""
    _, nw, nd = table.shape
    out = np.empty((nw, nd), dtype=object)
    for w in range(nw):
        for d in range(nd):
            out[w, d] = sum(1 << int(i) for i in np.flatnonzero(table[:, w, d]))
    return out


@dataclass(frozen=True)
class TypeTable:
    """Types, mosaics and points of one or two models over a fixed closure."""

    closure: ClosureIndex
    sigma: Signature
    full: tuple[np.ndarray, ...]
    world_type: tuple[tuple[int, ...], ...]
    domain_type: tuple[tuple[int, ...], ...]
    world_mosaic: tuple[tuple[Mosaic, ...], ...]
    domain_mosaic: tuple[tuple[Mosaic, ...], ...]
    bisims: dict = field(repr=False, compare=False)

    def world_point(self, i: int, w: int) -> PointKey:
        return self.world_type[i][w], self.world_mosaic[i][w]

    def domain_point(self, i: int, d: int) -> PointKey:
        return self.domain_type[i][d], self.domain_mosaic[i][d]

    def world_points(self, i: int) -> list[PointKey]:
        return sorted({self.world_point(i, w) for w in range(len(self.world_type[i]))}, key=_point_order)

    def domain_points(self, i: int) -> list[PointKey]:
        return sorted({self.domain_point(i, d) for d in range(len(self.domain_type[i]))}, key=_point_order)

    def realized_full_types(self) -> list[int]:
        return sorted({int(t) for table in self.full for t in table.flat})


def _point_order(key: PointKey) -> tuple:
    t, mosaic = key
    return (t, tuple(tuple(sorted(s)) for s in mosaic))


def _type_table(models: Sequence[KripkeModel], closure: ClosureIndex, sigma: Iterable[str]) -> TypeTable:
    sigma = Signature(sigma)
    full = tuple(pack_types(closure_extents(m, closure)) for m in models)
    emask, dmask = closure.exists_mask, closure.diamond_mask
    wt = tuple(tuple(int(table[w, 0]) & emask for w in range(table.shape[0])) for table in full)
    dt = tuple(tuple(int(table[0, d]) & dmask for d in range(table.shape[1])) for table in full)
    bisims = {(i, j): max_bisim_s5(models[i], models[j], sigma) for i in range(len(models)) for j in range(len(models))}
    wm = tuple(
        tuple(
            tuple(frozenset(wt[j][v] for v in np.flatnonzero(bisims[i, j].worlds[w])) for j in range(len(models)))
            for w in range(len(models[i].worlds))
        )
        for i in range(len(models))
    )
    dm = tuple(
        tuple(
            tuple(frozenset(dt[j][e] for e in np.flatnonzero(bisims[i, j].elements[d])) for j in range(len(models)))
            for d in range(len(models[i].domain))
        )
        for i in range(len(models))
    )
    return TypeTable(closure, sigma, full, wt, dt, wm, dm, bisims)


def compute_types(
    m1: KripkeModel, m2: KripkeModel, phi: Formula, psi: Formula, sigma: Iterable[str] | None = None
) -> TypeTable:
    """Type/mosaic/point tables for both models; sigma defaults to sig(phi) & sig(psi)."""
    if not (m1.is_s5 and m2.is_s5):
        raise PreconditionError("types and mosaics are defined for S5 models")
    if sigma is None:
        sigma = signature_of(phi) & signature_of(psi)
    return _type_table((m1, m2), closures(phi, psi), sigma)


# --------------------------------------------------------------------------
# filtration artifacts


@dataclass
class FiltrationReport:
    checks: dict[str, list[str]]

    @property
    def passed(self) -> bool:
        return all(not failures for failures in self.checks.values())

    def failures(self) -> list[str]:
        return [f"{name}: {msg}" for name, msgs in self.checks.items() for msg in msgs]

    def to_json(self) -> str:
        return json.dumps({name: {"pass": not msgs, "counterexamples": msgs} for name, msgs in self.checks.items()})


@dataclass
class Filtration:
    """Output of a filtration together with everything needed to re-check it.

    ``claimed[i][w, d]`` is the full type (closure bitset) that the
    construction assigns to point (w, d) of ``models[i]``; ``demands`` maps
    every (model, world key, domain key) to the full types the sequences must
    hit at every copy index.
    """

    models: tuple[KripkeModel, ...]
    closure: ClosureIndex
    claimed: tuple[np.ndarray, ...]
    world_keys: tuple[tuple[tuple[int, int], ...], ...]  # (point index, sequence index)
    element_keys: tuple[tuple[tuple[int, int], ...], ...]  # (point index, copy index)
    demands: dict[tuple[int, int, int], frozenset[int]]
    n: int
    pi_size: int
    points: tuple[Point, ...]
    targets: tuple[Formula, ...]
    sigma: Signature = Signature()
    bisim: S5Bisim | None = None
    mapping: dict = field(default_factory=dict)

    @property
    def report(self) -> FiltrationReport:
        return verify_filtration(self)


def verify_filtration(art: Filtration) -> FiltrationReport:
    """Re-derive every claim of a filtration from the output models alone."""
    checks: dict[str, list[str]] = {"types": [], "targets": [], "pi_bound": [], "surjective": []}
    for i, (model, claimed) in enumerate(zip(art.models, art.claimed)):
        table = closure_extents(model, art.closure)
        nw, nd = model.shape
        for w in range(nw):
            for d in range(nd):
                bits = int(claimed[w, d])
                for j in range(len(art.closure)):
                    if bool(table[j, w, d]) != bool(bits >> j & 1):
                        checks["types"].append(
                            f"model {i + 1} point {tuple(model.point(w, d))}: {art.closure.members[j]} "
                            f"is {'true' if table[j, w, d] else 'false'} but the assigned type says otherwise"
                        )
    for i, (model, point, target) in enumerate(zip(art.models, art.points, art.targets)):
        w, d = model.index(point)
        if not extent(model, target)[w, d]:
            checks["targets"].append(f"model {i + 1} point {tuple(point)} does not satisfy {target}")
    if art.pi_size > art.n * art.n:
        checks["pi_bound"].append(f"|Pi| = {art.pi_size} exceeds n^2 = {art.n * art.n}")
    for (i, wp, dp), wanted in sorted(art.demands.items(), key=lambda kv: kv[0]):
        hit: dict[int, set[int]] = {}
        for w, (wkey, _) in enumerate(art.world_keys[i]):
            if wkey != wp:
                continue
            for d, (dkey, k) in enumerate(art.element_keys[i]):
                if dkey == dp:
                    hit.setdefault(k, set()).add(int(art.claimed[i][w, d]))
        for k in range(art.n):
            missing = wanted - hit.get(k, set())
            if missing:
                checks["surjective"].append(f"model {i + 1} points ({wp},{dp}) copy {k}: {len(missing)} full types unreached")
    if art.bisim is not None:
        checks["bisimulation"] = [str(v) for v in verify_bisimulation(art.bisim, art.models[0], art.models[1], art.sigma)]
        related = art.bisim.related(
            art.models[0], art.models[1], art.sigma, art.models[0].index(art.points[0]), art.models[1].index(art.points[1])
        )
        checks["related"] = [] if related else ["distinguished points are not related"]
    return FiltrationReport(checks)


def _cyclic_sequences(ranges: dict[tuple, list[int]]) -> int:
    """|Pi| for the shift family pi^s(k) = range[(k + s) mod |range|].

    Every demand (ft, k) with ft = range[j] is met by s = j - k, so shifts
    0..max|range|-1 cover all demands and each component is onto once n is at
    least the range size.
    """
    return max(len(r) for r in ranges.values())


def _build(
    models: Sequence[KripkeModel],
    closure: ClosureIndex,
    table: TypeTable,
    world_key,
    domain_key,
    world_label: str,
    domain_label: str,
):
    """Shared construction for both filtrations.

    ``world_key(i, w)``/``domain_key(i, d)`` give the type or point a world or
    element is filtrated through.
    """
    n = len(table.realized_full_types())
    wkeys = [sorted({world_key(i, w) for w in range(len(m.worlds))}, key=_point_order) for i, m in enumerate(models)]
    dkeys = [sorted({domain_key(i, d) for d in range(len(m.domain))}, key=_point_order) for i, m in enumerate(models)]
    ranges: dict[tuple[int, int, int], list[int]] = {}
    for i, m in enumerate(models):
        for w in range(len(m.worlds)):
            for d in range(len(m.domain)):
                key = (i, wkeys[i].index(world_key(i, w)), dkeys[i].index(domain_key(i, d)))
                ranges.setdefault(key, set()).add(int(table.full[i][w, d]))  # type: ignore[arg-type]
    ranges = {key: sorted(v) for key, v in ranges.items()}
    pi_size = _cyclic_sequences(ranges)
    atoms = [(closure.id_of(f), f.name) for f in closure.members if isinstance(f, Atom)]

    out_models, claimed_all, world_ids, element_ids = [], [], [], []
    for i in range(len(models)):
        worlds = [(a, s) for a in range(len(wkeys[i])) for s in range(pi_size)]
        elements = [(b, k) for b in range(len(dkeys[i])) for k in range(n)]
        claimed = np.empty((len(worlds), len(elements)), dtype=object)
        for x, (a, s) in enumerate(worlds):
            for y, (b, k) in enumerate(elements):
                r = ranges[i, a, b]
                claimed[x, y] = r[(k + s) % len(r)]
        val = {
            name: np.array([[bool(claimed[x, y] >> j & 1) for y in range(len(elements))] for x in range(len(worlds))])
            for j, name in atoms
        }
        tag = f"{i + 1}." if len(models) > 1 else ""
        model = KripkeModel(
            [f"{tag}{world_label}{a}^pi{s}" for a, s in worlds],
            [f"{tag}{domain_label}{b}^k{k}" for b, k in elements],
            val,
        )
        out_models.append(model)
        claimed_all.append(claimed)
        world_ids.append(tuple(worlds))
        element_ids.append(tuple(elements))
    demands = {key: frozenset(r) for key, r in ranges.items()}
    return out_models, claimed_all, world_ids, element_ids, wkeys, dkeys, ranges, demands, n, pi_size


def _distinguished(model: KripkeModel, wkeys, dkeys, ranges, i, wkey, dkey, ft) -> Point:
    a, b = wkeys.index(wkey), dkeys.index(dkey)
    s = ranges[i, a, b].index(ft)
    return Point(model.worlds[a * _pi_stride(model, wkeys) + s], model.domain[b * _copy_stride(model, dkeys)])


def _pi_stride(model: KripkeModel, wkeys) -> int:
    return len(model.worlds) // len(wkeys)


def _copy_stride(model: KripkeModel, dkeys) -> int:
    return len(model.domain) // len(dkeys)


def filtrate_sat(model: KripkeModel, point: Point, phi: Formula) -> Filtration:
    """Single-model filtration through world and domain types."""
    if not model.is_s5:
        raise PreconditionError("filtration is defined for S5 models")
    w, d = model.index(point)
    if not extent(model, phi)[w, d]:
        raise PreconditionError(f"precondition failed: the point {tuple(point)} does not satisfy phi")
    closure = closures(phi)
    table = _type_table((model,), closure, ())
    built = _build(
        (model,),
        closure,
        table,
        lambda i, v: (table.world_type[i][v], ()),
        lambda i, e: (table.domain_type[i][e], ()),
        "wt",
        "dt",
    )
    models, claimed, world_ids, element_ids, wkeys, dkeys, ranges, demands, n, pi_size = built
    ft = int(table.full[0][w, d])
    target = _distinguished(models[0], wkeys[0], dkeys[0], ranges, 0, (table.world_type[0][w], ()), (table.domain_type[0][d], ()), ft)
    mapping = {
        "world_types": [closure.decode(t) for t, _ in wkeys[0]],
        "domain_types": [closure.decode(t) for t, _ in dkeys[0]],
    }
    return Filtration(
        models=tuple(models),
        closure=closure,
        claimed=tuple(claimed),
        world_keys=tuple(world_ids),
        element_keys=tuple(element_ids),
        demands=demands,
        n=n,
        pi_size=pi_size,
        points=(target,),
        targets=(normalize(phi),),
        mapping=mapping,
    )


def filtrate_pair(
    m1: KripkeModel, p1: Point, m2: KripkeModel, p2: Point, phi: Formula, psi: Formula
) -> Filtration:
    """Pair filtration: bounded models satisfying phi / ~psi at sigma-bisimilar points."""
    if not (m1.is_s5 and m2.is_s5):
        raise PreconditionError("filtration is defined for S5 models")
    sigma = signature_of(phi) & signature_of(psi)
    a, b = m1.index(p1), m2.index(p2)
    if not extent(m1, phi)[a]:
        raise PreconditionError(f"precondition failed: M1 does not satisfy phi at {tuple(p1)}")
    if extent(m2, psi)[b]:
        raise PreconditionError(f"precondition failed: M2 does not satisfy ~psi at {tuple(p2)}")
    table = compute_types(m1, m2, phi, psi, sigma)
    if not table.bisims[0, 1].related(m1, m2, sigma, a, b):
        raise PreconditionError("precondition failed: the distinguished points are not sigma-bisimilar")
    closure = table.closure
    built = _build(
        (m1, m2),
        closure,
        table,
        table.world_point,
        table.domain_point,
        "wp",
        "dp",
    )
    models, claimed, world_ids, element_ids, wkeys, dkeys, ranges, demands, n, pi_size = built
    points = []
    for i, (w, d) in enumerate((a, b)):
        ft = int(table.full[i][w, d])
        points.append(
            _distinguished(models[i], wkeys[i], dkeys[i], ranges, i, table.world_point(i, w), table.domain_point(i, d), ft)
        )
    mosaic_w = [[wkeys[i][key][1] for key, _ in world_ids[i]] for i in range(2)]
    mosaic_d = [[dkeys[i][key][1] for key, _ in element_ids[i]] for i in range(2)]
    beta1 = np.array([[x == y for y in mosaic_w[1]] for x in mosaic_w[0]], dtype=bool)
    beta2 = np.array([[x == y for y in mosaic_d[1]] for x in mosaic_d[0]], dtype=bool)
    return Filtration(
        models=tuple(models),
        closure=closure,
        claimed=tuple(claimed),
        world_keys=tuple(world_ids),
        element_keys=tuple(element_ids),
        demands=demands,
        n=n,
        pi_size=pi_size,
        points=tuple(points),
        targets=(normalize(phi), negate(normalize(psi))),
        sigma=sigma,
        bisim=S5Bisim(beta1, beta2),
        mapping={"world_points": wkeys, "domain_points": dkeys},
    )
