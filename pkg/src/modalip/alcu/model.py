"""S5_ALC^u models: a constant domain, per-world concept extensions and
per-world role edges.  The universal role is never stored.

JSON extends the Q1S5 model format with
``"roles": {"r": {"w": [[d, e], ...]}}`` and ``"kind": "s5alcu"``.
"""

from __future__ import annotations

import json
from typing import Iterable, Mapping, Sequence

import numpy as np

from ..formula import Signature
from ..kripke import KripkeModel, ModelError, Point, _frozen, _is_pair
from .concept import (
    UNIVERSAL,
    CAll,
    CAnd,
    CBottom,
    CBox,
    CDiamond,
    CName,
    CNot,
    Concept,
    COr,
    CSome,
    CStandpoint,
    CTop,
)


class DLModel:
    def __init__(
        self,
        worlds: Sequence[str],
        domain: Sequence[str],
        concepts: Mapping[str, np.ndarray],
        roles: Mapping[str, np.ndarray] | None = None,
    ) -> None:
        self.worlds = tuple(str(w) for w in worlds)
        self.domain = tuple(str(d) for d in domain)
        if not self.worlds or not self.domain:
            raise ModelError("worlds and domain must be nonempty")
        if len(set(self.worlds)) != len(self.worlds) or len(set(self.domain)) != len(self.domain):
            raise ModelError("duplicate world or element id")
        W, D = len(self.worlds), len(self.domain)
        self.concepts: dict[str, np.ndarray] = {}
        for a, table in sorted(concepts.items()):
            table = _frozen(table)
            if table.shape != (W, D):
                raise ModelError(f"extension of {a!r} has shape {table.shape}, expected {(W, D)}")
            self.concepts[a] = table
        self.roles: dict[str, np.ndarray] = {}
        for r, table in sorted((roles or {}).items()):
            if r == UNIVERSAL:
                raise ModelError("the universal role is implicit and cannot be stored")
            table = _frozen(table)
            if table.shape != (W, D, D):
                raise ModelError(f"role {r!r} has shape {table.shape}, expected {(W, D, D)}")
            self.roles[r] = table
        self._world_ix = {w: i for i, w in enumerate(self.worlds)}
        self._elem_ix = {d: i for i, d in enumerate(self.domain)}

    @classmethod
    def build(
        cls,
        worlds: Sequence[str],
        domain: Sequence[str],
        val: Mapping[str, Iterable[tuple[str, str]]],
        roles: Mapping[str, Mapping[str, Iterable[tuple[str, str]]]] | None = None,
    ) -> DLModel:
        worlds = [str(w) for w in worlds]
        domain = [str(d) for d in domain]
        wix = {w: i for i, w in enumerate(worlds)}
        dix = {d: i for i, d in enumerate(domain)}

        def look(table: dict, key: str, what: str) -> int:
            try:
                return table[str(key)]
            except KeyError:
                raise ModelError(f"{what} mentions unknown id {key!r}") from None

        concepts = {}
        for a, points in val.items():
            t = np.zeros((len(worlds), len(domain)), dtype=bool)
            for w, d in points:
                t[look(wix, w, a), look(dix, d, a)] = True
            concepts[a] = t
        role_tables = {}
        for r, per_world in (roles or {}).items():
            t = np.zeros((len(worlds), len(domain), len(domain)), dtype=bool)
            for w, edges in per_world.items():
                for d, e in edges:
                    t[look(wix, w, r), look(dix, d, r), look(dix, e, r)] = True
            role_tables[r] = t
        return cls(worlds, domain, concepts, role_tables)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.worlds), len(self.domain)

    @property
    def signature(self) -> Signature:
        return Signature(self.concepts) | Signature(self.roles)

    def holds(self, a: str) -> np.ndarray:
        t = self.concepts.get(a)
        return t if t is not None else np.zeros(self.shape, dtype=bool)

    def role(self, r: str) -> np.ndarray:
        if r == UNIVERSAL:
            W, D = self.shape
            return np.ones((W, D, D), dtype=bool)
        t = self.roles.get(r)
        return t if t is not None else np.zeros((*self.shape, self.shape[1]), dtype=bool)

    def world_index(self, w: str) -> int:
        try:
            return self._world_ix[w]
        except KeyError:
            raise ModelError(f"unknown world {w!r}") from None

    def element_index(self, d: str) -> int:
        try:
            return self._elem_ix[d]
        except KeyError:
            raise ModelError(f"unknown element {d!r}") from None

    def index(self, point: Point | tuple[str, str]) -> tuple[int, int]:
        return self.world_index(point[0]), self.element_index(point[1])

    def point(self, w: int, d: int) -> Point:
        return Point(self.worlds[w], self.domain[d])

    def __eq__(self, other: object) -> bool:
        return isinstance(other, DLModel) and to_json(self) == to_json(other)

    def __hash__(self) -> int:
        return hash(to_json(self))

    def __repr__(self) -> str:
        return f"DLModel(|W|={len(self.worlds)}, |D|={len(self.domain)}, sig={sorted(self.signature)})"


def dl_extent(model: DLModel, c: Concept, memo: dict | None = None) -> np.ndarray:
    """(W, D) boolean matrix of points where c holds."""
    memo = {} if memo is None else memo

    def go(x: Concept) -> np.ndarray:
        hit = memo.get(x)
        if hit is not None:
            return hit
        if isinstance(x, CTop):
            out = np.ones(model.shape, dtype=bool)
        elif isinstance(x, CBottom):
            out = np.zeros(model.shape, dtype=bool)
        elif isinstance(x, CName):
            out = model.holds(x.name)
        elif isinstance(x, CNot):
            out = ~go(x.arg)
        elif isinstance(x, CAnd):
            out = go(x.left) & go(x.right)
        elif isinstance(x, COr):
            out = go(x.left) | go(x.right)
        elif isinstance(x, CSome):
            out = _some(model, x.role, go(x.arg))
        elif isinstance(x, CAll):
            out = ~_some(model, x.role, ~go(x.arg))
        elif isinstance(x, CDiamond):
            out = np.broadcast_to(go(x.arg).any(axis=0, keepdims=True), model.shape)
        elif isinstance(x, CBox):
            out = np.broadcast_to(go(x.arg).all(axis=0, keepdims=True), model.shape)
        elif isinstance(x, CStandpoint):
            raise ModelError("standpoint operators need a standpoint structure")
        else:
            raise TypeError(f"not a concept: {x!r}")
        memo[x] = out
        return out

    return go(c)


def _some(model: DLModel, role: str, x: np.ndarray) -> np.ndarray:
    if role == UNIVERSAL:
        return np.broadcast_to(x.any(axis=1, keepdims=True), model.shape)
    edges = model.role(role)
    return np.einsum("wde,we->wd", edges.astype(np.int32), x.astype(np.int32)) > 0


def dl_model_check(model: DLModel, point: Point | tuple[str, str], c: Concept) -> bool:
    w, d = model.index(point)
    return bool(dl_extent(model, c)[w, d])


def holds_inclusion(model: DLModel, world: str, sub: Concept, sup: Concept) -> bool:
    """M, w |= C <= D."""
    w = model.world_index(world)
    return bool((~dl_extent(model, sub)[w] | dl_extent(model, sup)[w]).all())


# --------------------------------------------------------------------------
# embedding and JSON


def from_kripke(model: KripkeModel) -> DLModel:
    if not model.is_s5:
        raise ModelError("only S5 models embed as role-free DL models")
    return DLModel(model.worlds, model.domain, model.valuation)


def to_kripke(model: DLModel) -> KripkeModel:
    if model.roles:
        raise ModelError("model has roles")
    return KripkeModel(model.worlds, model.domain, model.concepts)


def to_dict(model: DLModel) -> dict:
    return {
        "kind": "s5alcu",
        "worlds": list(model.worlds),
        "domain": list(model.domain),
        "val": {
            a: [[model.worlds[w], model.domain[d]] for w, d in zip(*np.nonzero(t))] for a, t in model.concepts.items()
        },
        "roles": {
            r: {
                model.worlds[w]: [[model.domain[d], model.domain[e]] for d, e in zip(*np.nonzero(t[w]))]
                for w in range(len(model.worlds))
                if t[w].any()
            }
            for r, t in model.roles.items()
        },
    }


def to_json(model: DLModel) -> str:
    return json.dumps(to_dict(model), sort_keys=True)


def save(model: DLModel) -> str:
    return json.dumps(to_dict(model), sort_keys=True, indent=1)


def from_dict(data: Mapping) -> DLModel:
    if not isinstance(data, Mapping):
        raise ModelError("model must be a JSON object")
    if data.get("kind") not in ("s5alcu", "q1s5"):
        raise ModelError(f"kind must be 's5alcu', got {data.get('kind')!r}")
    extra = set(data) - {"kind", "worlds", "domain", "val", "roles"}
    if extra:
        raise ModelError(f"unexpected keys {sorted(extra)}")
    for key in ("worlds", "domain"):
        if not isinstance(data.get(key), list) or not all(isinstance(x, str) for x in data[key]):
            raise ModelError(f"{key!r} must be a list of strings")
    val = data.get("val", {})
    if not isinstance(val, Mapping) or not all(
        isinstance(v, list) and all(_is_pair(x) for x in v) for v in val.values()
    ):
        raise ModelError("'val' must map names to lists of [world, element] pairs")
    roles = data.get("roles", {})
    if not isinstance(roles, Mapping):
        raise ModelError("'roles' must be an object")
    for r, per_world in roles.items():
        if not isinstance(per_world, Mapping) or not all(
            isinstance(v, list) and all(_is_pair(x) for x in v) for v in per_world.values()
        ):
            raise ModelError(f"role {r!r} must map worlds to lists of [element, element] pairs")
    return DLModel.build(
        data["worlds"],
        data["domain"],
        {a: [tuple(x) for x in v] for a, v in val.items()},
        {r: {w: [tuple(x) for x in v] for w, v in pw.items()} for r, pw in roles.items()},
    )


def load(text: str) -> DLModel:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"invalid JSON: {exc}") from None
    return from_dict(data)
