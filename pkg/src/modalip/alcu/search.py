"""Bounded search for S5_ALC^u: countermodels to entailments and pairs of
models with triple-bisimilar points.

As in the one-variable deciders, solver answers are decoded and re-checked
with :func:`dl_extent` and :func:`verify_triple` before they are reported,
and ``yes`` comes only from a candidate passing the propositional fast path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

import numpy as np
import z3

from ..decide import Candidate, Outcome, SearchBounds, SignatureViolation, Verdict, _require
from ..encode import SearchTimeout, _check, _solver
from ..formula import Signature
from ..kripke import Point
from .bisim import TripleBisim, dump_triple, identity_triple, verify_triple
from .concept import (
    BOTTOM_C,
    TOP_C,
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
    CTop,
    cnormalize,
    concept_closure,
    concept_signature,
    role_names,
)
from .model import DLModel, dl_extent, to_dict
from .ontology import Ontology, ontology_to_concept


class SymbolicDL:
    def __init__(self, tag: str, n_worlds: int, n_domain: int, element_tag: str = "d") -> None:
        self.tag, self.element_tag = tag, element_tag
        self.n_worlds, self.n_domain = n_worlds, n_domain
        self.names: dict[tuple[str, int, int], z3.BoolRef] = {}
        self.edges: dict[tuple[str, int, int, int], z3.BoolRef] = {}
        self._memo: dict[tuple, z3.BoolRef] = {}

    def name(self, a: str, w: int, d: int) -> z3.BoolRef:
        key = (a, w, d)
        if key not in self.names:
            self.names[key] = z3.Bool(f"{self.tag}_{a}_{w}_{d}")
        return self.names[key]

    def edge(self, r: str, w: int, d: int, e: int) -> z3.BoolRef:
        key = (r, w, d, e)
        if key not in self.edges:
            self.edges[key] = z3.Bool(f"{self.tag}_r_{r}_{w}_{d}_{e}")
        return self.edges[key]

    def truth(self, c: Concept, w: int, d: int) -> z3.BoolRef:
        key = (c, w, d)
        hit = self._memo.get(key)
        if hit is None:
            hit = self._memo[key] = self._truth(c, w, d)
        return hit

    def _truth(self, c: Concept, w: int, d: int) -> z3.BoolRef:
        D = range(self.n_domain)
        if isinstance(c, CTop):
            return z3.BoolVal(True)
        if isinstance(c, CBottom):
            return z3.BoolVal(False)
        if isinstance(c, CName):
            return self.name(c.name, w, d)
        if isinstance(c, CNot):
            return z3.Not(self.truth(c.arg, w, d))
        if isinstance(c, CAnd):
            return z3.And(self.truth(c.left, w, d), self.truth(c.right, w, d))
        if isinstance(c, COr):
            return z3.Or(self.truth(c.left, w, d), self.truth(c.right, w, d))
        if isinstance(c, CSome):
            if c.role == UNIVERSAL:
                return z3.Or([self.truth(c.arg, w, e) for e in D])
            return z3.Or([z3.And(self.edge(c.role, w, d, e), self.truth(c.arg, w, e)) for e in D])
        if isinstance(c, CAll):
            if c.role == UNIVERSAL:
                return z3.And([self.truth(c.arg, w, e) for e in D])
            return z3.And([z3.Implies(self.edge(c.role, w, d, e), self.truth(c.arg, w, e)) for e in D])
        if isinstance(c, CDiamond):
            return z3.Or([self.truth(c.arg, v, d) for v in range(self.n_worlds)])
        if isinstance(c, CBox):
            return z3.And([self.truth(c.arg, v, d) for v in range(self.n_worlds)])
        raise TypeError(f"cannot encode {c!r}")

    def decode(self, m: z3.ModelRef, names: Iterable[str] = (), roles: Iterable[str] = ()) -> DLModel:
        W, D = self.n_worlds, self.n_domain
        val = lambda var: z3.is_true(m.eval(var, model_completion=True))  # noqa: E731
        concepts = {}
        for a in sorted({k[0] for k in self.names} | set(names)):
            t = np.zeros((W, D), dtype=bool)
            for (b, w, d), var in self.names.items():
                if b == a:
                    t[w, d] = val(var)
            concepts[a] = t
        role_tables = {}
        for r in sorted({k[0] for k in self.edges} | set(roles)):
            t = np.zeros((W, D, D), dtype=bool)
            for (s, w, d, e), var in self.edges.items():
                if s == r:
                    t[w, d, e] = val(var)
            role_tables[r] = t
        worlds = [f"{self.tag}{w}" for w in range(W)]
        domain = [f"{self.element_tag}{d}" for d in range(D)]
        return DLModel(worlds, domain, concepts, role_tables)


def _shape(concepts: Iterable[Concept], worlds: int, domain: int) -> tuple[int, int]:
    nodes = [n for c in concepts for n in c.walk()]
    modal = any(isinstance(n, (CDiamond, CBox)) for n in nodes)
    quant = any(isinstance(n, (CSome, CAll)) for n in nodes)
    return (worlds if modal else 1), (domain if quant else 1)


def find_dl_model(c: Concept, n_worlds: int, n_domain: int, timeout_ms: int | None = None):
    sm = SymbolicDL("w", n_worlds, n_domain)
    s = _solver(timeout_ms)
    s.add(sm.truth(c, 0, 0))
    if not _check(s):
        return None
    model = sm.decode(s.model())
    return model, model.point(0, 0)


def find_triple_bisimilar_pair(
    left: Concept,
    right: Concept,
    sigma: Iterable[str],
    shape1: tuple[int, int],
    shape2: tuple[int, int],
    timeout_ms: int | None = None,
):
    """Models with left at (0,0) of the first, right at (0,0) of the second, points related."""
    sigma = Signature(sigma) - {UNIVERSAL}
    roles = sorted(sigma & role_names(left, right))
    names = sorted(sigma - set(roles))
    m1 = SymbolicDL("u", *shape1)
    m2 = SymbolicDL("v", *shape2, element_tag="e")
    (W1, D1), (W2, D2) = shape1, shape2
    b1 = [[z3.Bool(f"tw_{w}_{v}") for v in range(W2)] for w in range(W1)]
    b2 = [[z3.Bool(f"td_{d}_{e}") for e in range(D2)] for d in range(D1)]
    b = [[[[z3.Bool(f"tp_{w}_{d}_{v}_{e}") for e in range(D2)] for v in range(W2)] for d in range(D1)] for w in range(W1)]
    s = _solver(timeout_ms)
    s.add(m1.truth(left, 0, 0), m2.truth(right, 0, 0), b[0][0][0][0])
    for w in range(W1):
        for v in range(W2):
            forth = [z3.Or([b[w][d][v][e] for e in range(D2)]) for d in range(D1)]
            back = [z3.Or([b[w][d][v][e] for d in range(D1)]) for e in range(D2)]
            s.add(z3.Implies(b1[w][v], z3.And(forth + back)))
    for d in range(D1):
        for e in range(D2):
            forth = [z3.Or([b[w][d][v][e] for v in range(W2)]) for w in range(W1)]
            back = [z3.Or([b[w][d][v][e] for w in range(W1)]) for v in range(W2)]
            s.add(z3.Implies(b2[d][e], z3.And(forth + back)))
    for w in range(W1):
        for d in range(D1):
            for v in range(W2):
                for e in range(D2):
                    conds = [b1[w][v], b2[d][e]]
                    conds += [m1.name(a, w, d) == m2.name(a, v, e) for a in names]
                    for r in roles:
                        for x in range(D1):
                            conds.append(
                                z3.Implies(m1.edge(r, w, d, x), z3.Or([z3.And(m2.edge(r, v, e, y), b[w][x][v][y]) for y in range(D2)]))
                            )
                        for y in range(D2):
                            conds.append(
                                z3.Implies(m2.edge(r, v, e, y), z3.Or([z3.And(m1.edge(r, w, d, x), b[w][x][v][y]) for x in range(D1)]))
                            )
                    s.add(z3.Implies(b[w][d][v][e], z3.And(conds)))
    if not _check(s):
        return None
    m = s.model()
    M1 = m1.decode(m, names, roles)
    M2 = m2.decode(m, names, roles)
    ev = lambda var: z3.is_true(m.eval(var, model_completion=True))  # noqa: E731
    bw = np.array([[ev(x) for x in row] for row in b1], dtype=bool)
    bd = np.array([[ev(x) for x in row] for row in b2], dtype=bool)
    bp = np.array([[[[ev(b[w][d][v][e]) for e in range(D2)] for v in range(W2)] for d in range(D1)] for w in range(W1)], dtype=bool)
    return M1, M1.point(0, 0), M2, M2.point(0, 0), TripleBisim(bw, bd, bp)


# --------------------------------------------------------------------------
# witnesses


@dataclass(frozen=True)
class DLPointedModel:
    model: DLModel
    point: Point

    def to_json(self) -> dict:
        return {"model": to_dict(self.model), "point": list(self.point)}


@dataclass(frozen=True)
class DLBisimilarPair:
    left: DLPointedModel
    right: DLPointedModel
    sigma: Signature
    bisim: TripleBisim

    def to_json(self) -> dict:
        return {
            "left": self.left.to_json(),
            "right": self.right.to_json(),
            "sigma": list(self.sigma),
            "bisimulation": json.loads(dump_triple(self.bisim, self.left.model, self.right.model)),
        }


@dataclass(frozen=True)
class ConceptCandidate:
    concept: Concept

    def to_json(self) -> dict:
        return {"candidate": str(self.concept)}


def _verify_pair(pair: DLBisimilarPair, left: Concept, right: Concept) -> None:
    m1, m2 = pair.left.model, pair.right.model
    a, b = m1.index(pair.left.point), m2.index(pair.right.point)
    _require(bool(dl_extent(m1, left)[a]), "left concept fails")
    _require(bool(dl_extent(m2, right)[b]), "right concept fails")
    _require(not verify_triple(pair.bisim, m1, m2, pair.sigma), "relation is not a triple bisimulation")
    _require(pair.bisim.related(a, b), "points are not related")


# --------------------------------------------------------------------------
# deciders


def dl_quick_valid(c: Concept, timeout_ms: int | None = None) -> bool:
    """Sound validity test: propositional reasoning with every some r.X and <>X
    as a letter, plus the valid instances X -> some U.X and X -> <>X."""
    f = cnormalize(c)
    closure = concept_closure(f)
    letters: dict[Concept, z3.BoolRef] = {}

    def prop(g: Concept) -> z3.BoolRef:
        if isinstance(g, CTop):
            return z3.BoolVal(True)
        if isinstance(g, CNot):
            return z3.Not(prop(g.arg))
        if isinstance(g, CAnd):
            return z3.And(prop(g.left), prop(g.right))
        if g not in letters:
            letters[g] = z3.Bool(f"q{len(letters)}")
        return letters[g]

    premises = [
        z3.Implies(prop(g.arg), prop(g))
        for g in closure.members
        if isinstance(g, CDiamond) or (isinstance(g, CSome) and g.role == UNIVERSAL)
    ]
    s = _solver(timeout_ms)
    s.add(premises + [z3.Not(prop(f))])
    try:
        return not _check(s)
    except SearchTimeout:
        return False


def _implication(a: Concept, b: Concept) -> Concept:
    return COr(CNot(a), b)


def entails_bounded(
    onto: Ontology, sub: Concept, sup: Concept, bounds: SearchBounds = SearchBounds()
) -> Verdict:
    """onto |= sub <= sup?  ``no`` with a countermodel, ``yes`` only from the
    fast path, otherwise ``unknown`` with the bound that was searched."""
    oc = ontology_to_concept(onto)
    if dl_quick_valid(_implication(CAnd(oc, sub), sup)):
        return Verdict(Outcome.YES, None, bounds, None, "valid by propositional reasoning with T-instances")
    target = CAnd(CAnd(oc, sub), CNot(sup))
    shape = _shape([target], bounds.worlds1, bounds.domain1)
    try:
        found = find_dl_model(target, *shape, bounds.timeout_ms)
    except SearchTimeout:
        return Verdict(Outcome.UNKNOWN, None, bounds, None, "solver timeout")
    if found is not None:
        model, point = found
        _require(bool(dl_extent(model, target)[model.index(point)]), "countermodel fails")
        return Verdict(Outcome.NO, DLPointedModel(model, point), bounds, None, "countermodel")
    return Verdict(
        Outcome.UNKNOWN,
        None,
        bounds,
        None,
        f"no countermodel up to |W| <= {shape[0]}, |D| <= {shape[1]} (no completeness bound is implemented)",
    )


def _sigma_subconcepts(concepts: Iterable[Concept], sigma: Signature, limit: int = 64) -> list[Concept]:
    out = []
    for c in concept_closure(*concepts).members:
        if not isinstance(c, CNot) and concept_signature(c) <= sigma:
            out.append(c)
            if len(out) == limit:
                break
    return out


def decide_iep_alcu(
    left: Concept,
    right: Concept,
    bounds: SearchBounds = SearchBounds(),
    candidates: Iterable[Concept] = (),
    sigma: Iterable[str] | None = None,
) -> Verdict:
    """Is there an interpolant for left <= right (over sigma, default the shared signature)?"""
    sigma = concept_signature(left) & concept_signature(right) if sigma is None else Signature(sigma)
    pool = list(candidates) + [left, right, TOP_C, BOTTOM_C] + _sigma_subconcepts([left, right], sigma)
    seen = set()
    for e in pool:
        if e in seen or not concept_signature(e) <= sigma:
            continue
        seen.add(e)
        if dl_quick_valid(_implication(left, e)) and dl_quick_valid(_implication(e, right)):
            return Verdict(Outcome.YES, ConceptCandidate(e), bounds, None, "candidate interpolant verified")
    neg = CNot(right)
    s1 = _shape([left, right], bounds.worlds1, bounds.domain1)
    s2 = _shape([left, right], bounds.worlds2, bounds.domain2)
    try:
        counter = find_dl_model(CAnd(left, neg), *s1, bounds.timeout_ms)
        if counter is not None:
            model, point = counter
            pair = DLBisimilarPair(DLPointedModel(model, point), DLPointedModel(model, point), sigma, identity_triple(model))
            _verify_pair(pair, left, neg)
            return Verdict(Outcome.NO, pair, bounds, None, "left <= right has a countermodel")
        found = find_triple_bisimilar_pair(left, neg, sigma, s1, s2, bounds.timeout_ms)
    except SearchTimeout:
        return Verdict(Outcome.UNKNOWN, None, bounds, None, "solver timeout")
    if found is not None:
        m1, p1, m2, p2, bisim = found
        pair = DLBisimilarPair(DLPointedModel(m1, p1), DLPointedModel(m2, p2), sigma, bisim)
        _verify_pair(pair, left, neg)
        return Verdict(Outcome.NO, pair, bounds, None, "left and ~right are bisimulation consistent")
    return Verdict(
        Outcome.UNKNOWN,
        None,
        bounds,
        None,
        "no bisimilar pair within bounds; witnesses may need double-exponential size, which is not searched",
    )


def verify_dl_candidate(
    kind: str,
    candidate: Concept,
    onto: Ontology,
    sub: Concept,
    sup: Concept | None = None,
    sigma: Iterable[str] | None = None,
    bounds: SearchBounds = SearchBounds(),
) -> Verdict:
    """Check an interpolant for sub <= sup, or a definition of ``sub`` (a
    concept name) over sigma, relative to ``onto``.

    Every entailment is also searched for countermodels within bounds; the
    note records that bound whatever the outcome.
    """
    if kind == "interpolant":
        if sup is None:
            raise ValueError("an interpolant needs both sides")
        allowed = concept_signature(sub) & concept_signature(sup) if sigma is None else Signature(sigma)
        legs = [(sub, candidate), (candidate, sup)]
    elif kind == "definition":
        if sigma is None:
            raise ValueError("a definition needs a signature")
        allowed = Signature(sigma)
        legs = [(sub, candidate), (candidate, sub)]
    else:
        raise ValueError(f"unknown candidate kind {kind!r}")
    extra = concept_signature(candidate) - allowed
    if extra:
        return Verdict(Outcome.NO, SignatureViolation(extra, allowed), bounds, None, f"symbols outside the signature: {extra!r}")
    oc = ontology_to_concept(onto)
    proven = True
    notes = []
    for a, b in legs:
        target = CAnd(CAnd(oc, a), CNot(b))
        shape = _shape([target], bounds.worlds1, bounds.domain1)
        try:
            found = find_dl_model(target, *shape, bounds.timeout_ms)
        except SearchTimeout:
            return Verdict(Outcome.UNKNOWN, ConceptCandidate(candidate), bounds, None, "solver timeout")
        if found is not None:
            model, point = found
            _require(bool(dl_extent(model, target)[model.index(point)]), "countermodel fails")
            return Verdict(Outcome.NO, DLPointedModel(model, point), bounds, None, f"countermodel to {a} <= {b}")
        notes.append(f"no countermodel to {a} <= {b} up to |W| <= {shape[0]}, |D| <= {shape[1]}")
        proven = proven and dl_quick_valid(_implication(CAnd(oc, a), b))
    outcome = Outcome.YES if proven else Outcome.UNKNOWN
    tail = "; all legs valid by propositional reasoning with T-instances" if proven else ""
    return Verdict(outcome, ConceptCandidate(candidate), bounds, None, "; ".join(notes) + tail)
