"""Finite constant-domain Kripke models, truth, JSON I/O and enumeration.

A model stores one boolean matrix per predicate, indexed ``[world, element]``.
Accessibility is either absent (S5: every world sees every world) or an
explicit boolean matrix.  Truth is computed for all points at once:
:func:`extent` returns the matrix of points where a formula holds.
"""

from __future__ import annotations

import itertools
import json
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence

import numpy as np

from .formula import (
    And,
    Atom,
    Bottom,
    Box,
    Diamond,
    Exists,
    Forall,
    Formula,
    Iff,
    Implies,
    Not,
    Or,
    Signature,
    Top,
)


class ModelError(ValueError):
    pass


class Point(NamedTuple):
    world: str
    element: str


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=bool)
    array.setflags(write=False)
    return array


class KripkeModel:
    """(W, R, D, I) with ids kept as strings and everything else as indices."""

    def __init__(
        self,
        worlds: Sequence[str],
        domain: Sequence[str],
        valuation: Mapping[str, np.ndarray],
        access: np.ndarray | None = None,
    ) -> None:
        self.worlds = tuple(str(w) for w in worlds)
        self.domain = tuple(str(d) for d in domain)
        if not self.worlds or not self.domain:
            raise ModelError("worlds and domain must be nonempty")
        if len(set(self.worlds)) != len(self.worlds) or len(set(self.domain)) != len(self.domain):
            raise ModelError("duplicate world or element id")
        shape = (len(self.worlds), len(self.domain))
        self.valuation: dict[str, np.ndarray] = {}
        for p, table in sorted(valuation.items()):
            table = _frozen(table)
            if table.shape != shape:
                raise ModelError(f"valuation of {p!r} has shape {table.shape}, expected {shape}")
            self.valuation[p] = table
        if access is not None:
            access = _frozen(access)
            if access.shape != (shape[0], shape[0]):
                raise ModelError("accessibility matrix has the wrong shape")
        self.access = access
        self._world_ix = {w: i for i, w in enumerate(self.worlds)}
        self._elem_ix = {d: i for i, d in enumerate(self.domain)}

    @classmethod
    def build(
        cls,
        worlds: Sequence[str],
        domain: Sequence[str],
        val: Mapping[str, Iterable[tuple[str, str]]],
        R: Iterable[tuple[str, str]] | None = None,
    ) -> KripkeModel:
        """Construct from id lists: ``val[p]`` lists the (world, element) points where p holds."""
        worlds = [str(w) for w in worlds]
        domain = [str(d) for d in domain]
        wix = {w: i for i, w in enumerate(worlds)}
        dix = {d: i for i, d in enumerate(domain)}
        tables = {}
        for p, points in val.items():
            table = np.zeros((len(worlds), len(domain)), dtype=bool)
            for w, d in points:
                try:
                    table[wix[str(w)], dix[str(d)]] = True
                except KeyError as exc:
                    raise ModelError(f"valuation of {p!r} mentions unknown id {exc.args[0]!r}") from None
            tables[p] = table
        access = None
        if R is not None:
            access = np.zeros((len(worlds), len(worlds)), dtype=bool)
            for u, v in R:
                try:
                    access[wix[str(u)], wix[str(v)]] = True
                except KeyError as exc:
                    raise ModelError(f"accessibility mentions unknown world {exc.args[0]!r}") from None
        return cls(worlds, domain, tables, access)

    @property
    def is_s5(self) -> bool:
        return self.access is None

    @property
    def kind(self) -> str:
        return "q1s5" if self.is_s5 else "q1k"

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.worlds), len(self.domain)

    @property
    def predicates(self) -> Signature:
        return Signature(self.valuation)

    @property
    def R(self) -> np.ndarray:
        if self.access is None:
            return np.ones((len(self.worlds),) * 2, dtype=bool)
        return self.access

    def holds(self, p: str) -> np.ndarray:
        table = self.valuation.get(p)
        return table if table is not None else np.zeros(self.shape, dtype=bool)

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

    def successors(self, w: int) -> list[int]:
        return [int(v) for v in np.flatnonzero(self.R[w])]

    def restrict(self, sigma: Iterable[str]) -> KripkeModel:
        keep = set(sigma)
        return KripkeModel(self.worlds, self.domain, {p: t for p, t in self.valuation.items() if p in keep}, self.access)

    def literal_table(self, sigma: Iterable[str]) -> np.ndarray:
        """Shape (|sigma|, W, D): the literal sigma-type of every point."""
        names = sorted(set(sigma))
        if not names:
            return np.zeros((0, *self.shape), dtype=bool)
        return np.stack([self.holds(p) for p in names])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KripkeModel):
            return NotImplemented
        return to_json(self) == to_json(other)

    def __hash__(self) -> int:
        return hash(to_json(self))

    def __repr__(self) -> str:
        return f"<KripkeModel {self.kind} |W|={len(self.worlds)} |D|={len(self.domain)} preds={sorted(self.valuation)}>"


# --------------------------------------------------------------------------
# truth


def extent(model: KripkeModel, phi: Formula, memo: dict[Formula, np.ndarray] | None = None) -> np.ndarray:
    """Boolean matrix of the points (w, d) with model, w, d |= phi."""
    memo = {} if memo is None else memo
    R = None if model.is_s5 else model.R.astype(np.int32)

    def diamond(x: np.ndarray) -> np.ndarray:
        if R is None:
            return np.broadcast_to(x.any(axis=0, keepdims=True), x.shape)
        return (R @ x.astype(np.int32)) > 0

    def exists(x: np.ndarray) -> np.ndarray:
        return np.broadcast_to(x.any(axis=1, keepdims=True), x.shape)

    def go(f: Formula) -> np.ndarray:
        hit = memo.get(f)
        if hit is not None:
            return hit
        if isinstance(f, Top):
            out = np.ones(model.shape, dtype=bool)
        elif isinstance(f, Bottom):
            out = np.zeros(model.shape, dtype=bool)
        elif isinstance(f, Atom):
            out = model.holds(f.name)
        elif isinstance(f, Not):
            out = ~go(f.arg)
        elif isinstance(f, And):
            out = go(f.left) & go(f.right)
        elif isinstance(f, Or):
            out = go(f.left) | go(f.right)
        elif isinstance(f, Implies):
            out = ~go(f.left) | go(f.right)
        elif isinstance(f, Iff):
            out = go(f.left) == go(f.right)
        elif isinstance(f, Exists):
            out = exists(go(f.arg))
        elif isinstance(f, Forall):
            out = ~exists(~go(f.arg))
        elif isinstance(f, Diamond):
            out = diamond(go(f.arg))
        elif isinstance(f, Box):
            out = ~diamond(~go(f.arg))
        else:
            raise TypeError(f"not a formula: {f!r}")
        out = np.ascontiguousarray(out)
        memo[f] = out
        return out

    return go(phi)


def model_check(model: KripkeModel, point: Point | tuple[str, str], phi: Formula) -> bool:
    w, d = model.index(point)
    return bool(extent(model, phi)[w, d])


# --------------------------------------------------------------------------
# JSON


def to_json(model: KripkeModel) -> str:
    """Canonical JSON text (stable key and pair order)."""
    return json.dumps(to_dict(model), sort_keys=True)


def to_dict(model: KripkeModel) -> dict:
    data: dict = {
        "kind": model.kind,
        "worlds": list(model.worlds),
        "domain": list(model.domain),
        "val": {
            p: [[model.worlds[w], model.domain[d]] for w, d in zip(*np.nonzero(table))]
            for p, table in model.valuation.items()
        },
    }
    if not model.is_s5:
        data["R"] = [[model.worlds[u], model.worlds[v]] for u, v in zip(*np.nonzero(model.R))]
    return data


def from_dict(data: Mapping) -> KripkeModel:
    if not isinstance(data, Mapping):
        raise ModelError("model must be a JSON object")
    kind = data.get("kind")
    if kind not in ("q1s5", "q1k"):
        raise ModelError(f"kind must be 'q1s5' or 'q1k', got {kind!r}")
    allowed = {"kind", "worlds", "domain", "val", "R"}
    extra = set(data) - allowed
    if extra:
        raise ModelError(f"unexpected keys {sorted(extra)}")
    for key in ("worlds", "domain"):
        if not isinstance(data.get(key), list) or not all(isinstance(x, str) for x in data[key]):
            raise ModelError(f"{key!r} must be a list of strings")
    val = data.get("val", {})
    if not isinstance(val, Mapping):
        raise ModelError("'val' must be an object")
    for p, pairs in val.items():
        if not isinstance(pairs, list) or not all(_is_pair(x) for x in pairs):
            raise ModelError(f"valuation of {p!r} must be a list of [world, element] pairs")
    if kind == "q1s5" and "R" in data:
        raise ModelError("'R' is forbidden for kind q1s5")
    if kind == "q1k":
        if "R" not in data:
            raise ModelError("'R' is required for kind q1k")
        if not isinstance(data["R"], list) or not all(_is_pair(x) for x in data["R"]):
            raise ModelError("'R' must be a list of [world, world] pairs")
    R = [tuple(x) for x in data["R"]] if kind == "q1k" else None
    return KripkeModel.build(data["worlds"], data["domain"], {p: [tuple(x) for x in v] for p, v in val.items()}, R)


def _is_pair(x: object) -> bool:
    return isinstance(x, list) and len(x) == 2 and all(isinstance(y, str) for y in x)


def load(text: str) -> KripkeModel:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"invalid JSON: {exc}") from None
    return from_dict(data)


def save(model: KripkeModel) -> str:
    return json.dumps(to_dict(model), sort_keys=True, indent=1)


# --------------------------------------------------------------------------
# enumeration


def enumerate_models(
    sigma: Iterable[str],
    max_worlds: int,
    max_domain: int,
    s5: bool = True,
    prune: bool = False,
    min_worlds: int = 1,
    min_domain: int = 1,
) -> Iterator[KripkeModel]:
    """Every model with min <= |W| <= max_worlds, min <= |D| <= max_domain.

    Order: by (|W|, |D|), then accessibility bitmask (K only), then valuation
    bitmask.  With ``prune`` only the lexicographically least member of each
    orbit under independent world and element permutations is produced.
    """
    if max_worlds < 1 or max_domain < 1:
        raise ValueError("bounds must be at least 1")
    names = sorted(set(sigma))
    for nw in range(max(1, min_worlds), max_worlds + 1):
        for nd in range(max(1, min_domain), max_domain + 1):
            worlds = [f"w{i}" for i in range(nw)]
            domain = [f"d{i}" for i in range(nd)]
            perms = (
                [(pw, pd) for pw in itertools.permutations(range(nw)) for pd in itertools.permutations(range(nd))]
                if prune
                else []
            )
            relations = [None] if s5 else list(_all_relations(nw))
            cells = len(names) * nw * nd
            for access in relations:
                for mask in range(1 << cells):
                    bits = np.array([(mask >> i) & 1 for i in range(cells)], dtype=bool).reshape(len(names), nw, nd)
                    if prune and not _is_canonical(bits, access, perms):
                        continue
                    yield KripkeModel(worlds, domain, {p: bits[i] for i, p in enumerate(names)}, access)


def _all_relations(n: int) -> Iterator[np.ndarray]:
    for mask in range(1 << (n * n)):
        yield np.array([(mask >> i) & 1 for i in range(n * n)], dtype=bool).reshape(n, n)


def _encode(bits: np.ndarray, access: np.ndarray | None) -> tuple[int, ...]:
    code = tuple(int(b) for b in bits.flat)
    return code if access is None else tuple(int(b) for b in access.flat) + code


def _is_canonical(bits: np.ndarray, access: np.ndarray | None, perms: list) -> bool:
    mine = _encode(bits, access)
    for pw, pd in perms:
        permuted = bits[:, list(pw), :][:, :, list(pd)]
        perm_access = None if access is None else access[np.ix_(pw, pw)]
        if _encode(permuted, perm_access) < mine:
            return False
    return True
