"""Bounded deciders for satisfiability, validity, interpolant existence (IEP)
and explicit-definition existence (EDEP) in Q1S5 and Q1K.

Answers are three-valued.  ``no`` always comes with a witness that has been
re-checked by the explicit model checker and bisimulation checker.  ``yes``
comes from one of two places:

* a candidate interpolant/definition whose validity conditions pass the
  syntactic fast path (:func:`quick_valid`), or
* an exhausted search at bounds covering the completeness bound, which for
  anything but toy inputs is astronomically large.

Everything else is ``unknown``, together with the bounds that were searched.
Searches run one solver call at the largest shape allowed by the bounds: in
S5, duplicating a world or an element yields a bisimilar model (for the full
signature), so a witness of any smaller size can be padded up to the
maximal shape and nothing is lost.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Sequence

import z3

from .bisim import KBisim, S5Bisim, identity_s5, max_k_bisim, verify_bisimulation
from .encode import (
    SearchTimeout,
    TreeShape,
    find_k_bisimilar_trees,
    find_model,
    find_s5_bisimilar_pair,
    propositionally_unsat,
)
from .formula import (
    BOTTOM,
    TOP,
    And,
    Box,
    Diamond,
    Exists,
    Forall,
    Formula,
    Iff,
    Implies,
    Not,
    Signature,
    Top,
    closures,
    fresh_renaming,
    has_operator,
    modal_depth,
    normalize,
    signature_of,
    substitute,
)
from .kripke import KripkeModel, Point, extent, to_dict


class Outcome(str, Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class SearchBounds:
    worlds1: int = 2
    domain1: int = 2
    worlds2: int = 2
    domain2: int = 2
    depth: int | None = None
    branching: int = 2
    timeout_ms: int | None = None

    def __post_init__(self) -> None:
        for name in ("worlds1", "domain1", "worlds2", "domain2", "branching"):
            if getattr(self, name) < 1:
                raise ValueError(f"bound {name} must be at least 1")
        if self.depth is not None and self.depth < 0:
            raise ValueError("depth must be non-negative")

    @classmethod
    def parse(cls, text: str, **extra) -> SearchBounds:
        """``"W1,D1"`` or ``"W1,D1,W2,D2"``; a two-number form is reused for both models."""
        try:
            nums = [int(x) for x in text.split(",")]
        except ValueError:
            raise ValueError(f"bounds must be comma-separated integers, got {text!r}") from None
        if len(nums) == 2:
            nums = nums * 2
        if len(nums) != 4:
            raise ValueError("bounds take 2 or 4 numbers")
        return cls(*nums, **extra)

    def as_dict(self) -> dict:
        out = {"W1": self.worlds1, "D1": self.domain1, "W2": self.worlds2, "D2": self.domain2}
        if self.depth is not None:
            out["depth"] = self.depth
        out["branching"] = self.branching
        return out


@dataclass(frozen=True)
class SizeBound:
    """A pair of powers of two, stored by exponent so huge bounds stay exact."""

    worlds_log2: int
    domain_log2: int

    @staticmethod
    def _render(exp: int) -> str:
        return str(2**exp) if exp <= 64 else f"2^{exp}"

    def __str__(self) -> str:
        return f"|W| <= {self._render(self.worlds_log2)}, |D| <= {self._render(self.domain_log2)}"

    def covers_worlds(self, worlds: int) -> bool:
        return worlds.bit_length() > self.worlds_log2

    def covers_domain(self, domain: int) -> bool:
        return domain.bit_length() > self.domain_log2

    def covered_by(self, worlds: int, domain: int) -> bool:
        return self.covers_worlds(worlds) and self.covers_domain(domain)

    def to_json(self) -> dict:
        return {"worlds": self._render(self.worlds_log2), "domain": self._render(self.domain_log2)}


def completeness_bound(phi: Formula, psi: Formula | None = None, problem: str = "sat") -> SizeBound:
    """Model size after which an exhausted search settles the question.

    Abstract counts are used: with s = |sub| there are at most n = 2^s full
    types, and at most n world and n domain types.

    * sat: |Pi| <= n^2 world sequences, so |W'| <= n^2 * n and |D'| <= n * n.
    * iep_s5: a mosaic is a pair of type sets, so there are at most
      n * 2^(2n) world (or domain) points; |D'| <= n * #points and
      |W'| <= n^2 * #points.
    """
    s = len(closures(phi)) if psi is None or problem == "sat" else len(closures(phi, psi))
    if problem == "sat":
        return SizeBound(3 * s, 2 * s)
    if problem == "iep_s5":
        n_log2 = s
        points_log2 = s + 2 * (1 << s)
        return SizeBound(2 * n_log2 + points_log2, n_log2 + points_log2)
    raise ValueError(f"unknown problem {problem!r}")


# --------------------------------------------------------------------------
# witnesses and verdicts


@dataclass(frozen=True)
class PointedModel:
    model: KripkeModel
    point: Point

    def to_json(self) -> dict:
        return {"model": to_dict(self.model), "point": list(self.point)}


@dataclass(frozen=True)
class BisimilarPair:
    """Models satisfying the two targets at points related by ``bisim``."""

    left: PointedModel
    right: PointedModel
    sigma: Signature
    bisim: S5Bisim | KBisim

    def to_json(self) -> dict:
        from .bisim import dump

        return {
            "left": self.left.to_json(),
            "right": self.right.to_json(),
            "sigma": list(self.sigma),
            "bisimulation": json.loads(dump(self.bisim, self.left.model, self.right.model)),
        }


@dataclass(frozen=True)
class Candidate:
    formula: Formula

    def to_json(self) -> dict:
        return {"candidate": str(self.formula)}


@dataclass(frozen=True)
class SignatureViolation:
    symbols: Signature
    allowed: Signature

    def to_json(self) -> dict:
        return {"signature_violation": list(self.symbols), "allowed": list(self.allowed)}


@dataclass(frozen=True)
class Exhaustion:
    bound: SizeBound

    def to_json(self) -> dict:
        return {"exhausted_at": self.bound.to_json()}


Witness = PointedModel | BisimilarPair | Candidate | SignatureViolation | Exhaustion


@dataclass(frozen=True)
class Verdict:
    outcome: Outcome
    witness: Witness | None = None
    bounds: SearchBounds | None = None
    completeness: SizeBound | None = None
    note: str = ""

    @property
    def decisive(self) -> bool:
        return self.outcome is not Outcome.UNKNOWN

    def to_json(self) -> dict:
        out: dict = {"outcome": self.outcome.value}
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        out["bounds"] = self.bounds.as_dict() if self.bounds else {}
        out["completeness_bound"] = self.completeness.to_json() if self.completeness else None
        if self.note:
            out["note"] = self.note
        return out


# --------------------------------------------------------------------------
# syntactic validity


def quick_valid(phi: Formula, reflexive: bool = True, timeout_ms: int | None = None) -> bool:
    """Sound, incomplete validity test.

    phi is valid if it is a propositional tautology once every E xi and <> xi
    is treated as a fresh letter, with the instances xi -> E xi added as
    premises (and xi -> <> xi when accessibility is reflexive).  Both kinds
    of premise are valid, so nothing unsound can slip through.
    """
    f = normalize(phi)
    closure = closures(f)
    letters: dict[Formula, z3.BoolRef] = {}

    def prop(g: Formula) -> z3.BoolRef:
        if isinstance(g, Top):
            return z3.BoolVal(True)
        if isinstance(g, Not):
            return z3.Not(prop(g.arg))
        if isinstance(g, And):
            return z3.And(prop(g.left), prop(g.right))
        if g not in letters:
            letters[g] = z3.Bool(f"q{len(letters)}")
        return letters[g]

    premises = [
        z3.Implies(prop(g.arg), prop(g))
        for g in closure.members
        if isinstance(g, Exists) or (reflexive and isinstance(g, Diamond))
    ]
    try:
        return propositionally_unsat(premises + [z3.Not(prop(f))], timeout_ms)
    except SearchTimeout:
        return False


# --------------------------------------------------------------------------
# bounded satisfiability / validity


def _s5_shape(formulas: Sequence[Formula], worlds: int, domain: int) -> tuple[int, int]:
    """Truth at a point only looks at other worlds through <> and at other
    elements through E; when an operator is absent one row/column suffices."""
    modal = any(has_operator(f, (Diamond, Box)) for f in formulas)
    quant = any(has_operator(f, (Exists, Forall)) for f in formulas)
    return (worlds if modal else 1), (domain if quant else 1)


def _tree(bounds: SearchBounds, default_depth: int) -> TreeShape:
    return TreeShape(bounds.depth if bounds.depth is not None else default_depth, bounds.branching)


def check_sat_bounded(phi: Formula, logic: str = "q1s5", bounds: SearchBounds = SearchBounds()) -> Verdict:
    """Look for a model of phi within bounds (W1, D1; depth/branching for q1k)."""
    if logic == "q1s5":
        cb = completeness_bound(phi, problem="sat")
        shape = _s5_shape([phi], bounds.worlds1, bounds.domain1)
        try:
            found = find_model(phi, *shape, timeout_ms=bounds.timeout_ms)
        except SearchTimeout:
            return Verdict(Outcome.UNKNOWN, None, bounds, cb, "solver timeout")
        if found is not None:
            model, point = found
            _require(extent(model, phi)[model.index(point)], "decoded model fails phi")
            return Verdict(Outcome.YES, PointedModel(model, point), bounds, cb)
        # a collapsed dimension is searched completely at size 1
        w_ok = not has_operator(phi, (Diamond, Box)) or cb.covers_worlds(bounds.worlds1)
        d_ok = not has_operator(phi, (Exists, Forall)) or cb.covers_domain(bounds.domain1)
        if w_ok and d_ok:
            return Verdict(Outcome.NO, Exhaustion(cb), bounds, cb, "no model up to the completeness bound")
        return Verdict(Outcome.UNKNOWN, None, bounds, cb, "no model within bounds")
    if logic == "q1k":
        tree = _tree(bounds, modal_depth(phi))
        try:
            found = find_model(phi, None, bounds.domain1, tree, bounds.timeout_ms)
        except SearchTimeout:
            return Verdict(Outcome.UNKNOWN, None, bounds, None, "solver timeout")
        if found is not None:
            model, point = found
            _require(extent(model, phi)[model.index(point)], "decoded model fails phi")
            return Verdict(Outcome.YES, PointedModel(model, point), bounds)
        return Verdict(Outcome.UNKNOWN, None, bounds, None, "no tree model within bounds (no completeness bound is implemented for Q1K)")
    raise ValueError(f"unknown logic {logic!r}")


def check_valid_bounded(phi: Formula, logic: str = "q1s5", bounds: SearchBounds = SearchBounds()) -> Verdict:
    if quick_valid(phi, reflexive=(logic == "q1s5")):
        return Verdict(Outcome.YES, None, bounds, None, "propositionally valid with reflexivity instances")
    sat = check_sat_bounded(Not(phi), logic, bounds)
    if sat.outcome is Outcome.YES:
        return Verdict(Outcome.NO, sat.witness, bounds, sat.completeness, "countermodel")
    if sat.outcome is Outcome.NO:
        return Verdict(Outcome.YES, sat.witness, bounds, sat.completeness, "no countermodel up to the completeness bound")
    return Verdict(Outcome.UNKNOWN, None, bounds, sat.completeness, "no countermodel within bounds")


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise AssertionError(f"witness re-verification failed: {message}")


# --------------------------------------------------------------------------
# candidates


def _sigma_subformulas(formulas: Iterable[Formula], sigma: Signature, limit: int = 64) -> list[Formula]:
    out = []
    for f in closures(*formulas).members:
        if signature_of(f) <= sigma and not isinstance(f, Not):
            out.append(f)
            if len(out) == limit:
                break
    return out


def _interpolant_candidates(phi: Formula, psi: Formula, sigma: Signature, extra: Iterable[Formula]) -> list[Formula]:
    cands = list(extra) + [phi, psi, TOP, BOTTOM] + _sigma_subformulas([phi, psi], sigma)
    seen, out = set(), []
    for c in cands:
        if c not in seen and signature_of(c) <= sigma:
            seen.add(c)
            out.append(c)
    return out


def _verify_pair(pair: BisimilarPair, left: Formula, right: Formula) -> None:
    m1, m2 = pair.left.model, pair.right.model
    a, b = m1.index(pair.left.point), m2.index(pair.right.point)
    _require(bool(extent(m1, left)[a]), "left target fails")
    _require(bool(extent(m2, right)[b]), "right target fails")
    _require(not verify_bisimulation(pair.bisim, m1, m2, pair.sigma), "relation is not a bisimulation")
    if isinstance(pair.bisim, S5Bisim):
        _require(pair.bisim.related(m1, m2, pair.sigma, a, b), "points are not related")
    else:
        _require(pair.bisim.related(pair.bisim.k, a, b), "points are not related at the top level")


def _s5_consistency(left: Formula, right: Formula, sigma: Signature, bounds: SearchBounds) -> BisimilarPair | None:
    shape1 = _s5_shape([left, right], bounds.worlds1, bounds.domain1)
    shape2 = _s5_shape([left, right], bounds.worlds2, bounds.domain2)
    found = find_s5_bisimilar_pair(left, right, sigma, shape1, shape2, bounds.timeout_ms)
    if found is None:
        return None
    m1, p1, m2, p2, bisim = found
    pair = BisimilarPair(PointedModel(m1, p1), PointedModel(m2, p2), sigma, bisim)
    _verify_pair(pair, left, right)
    return pair


def _countermodel_pair(model: KripkeModel, point: Point, sigma: Signature, k: int | None = None) -> BisimilarPair:
    """A single model satisfying phi & ~psi, paired with itself."""
    bisim = identity_s5(model) if k is None else max_k_bisim(model, model, sigma, k)
    return BisimilarPair(PointedModel(model, point), PointedModel(model, point), sigma, bisim)


def decide_iep_s5(
    phi: Formula, psi: Formula, bounds: SearchBounds = SearchBounds(), candidates: Iterable[Formula] = ()
) -> Verdict:
    """Does phi -> psi have a Q1S5 interpolant?

    No iff phi and ~psi are sig(phi)&sig(psi)-bisimulation consistent.
    """
    sigma = signature_of(phi) & signature_of(psi)
    cb = completeness_bound(phi, psi, "iep_s5")
    for chi in _interpolant_candidates(phi, psi, sigma, candidates):
        if quick_valid(Implies(phi, chi)) and quick_valid(Implies(chi, psi)):
            return Verdict(Outcome.YES, Candidate(chi), bounds, cb, "candidate interpolant verified")
    try:
        counter = check_sat_bounded(And(phi, Not(psi)), "q1s5", bounds)
        if counter.outcome is Outcome.YES:
            w = counter.witness
            pair = _countermodel_pair(w.model, w.point, sigma)
            _verify_pair(pair, phi, Not(psi))
            return Verdict(Outcome.NO, pair, bounds, cb, "phi -> psi has a countermodel")
        pair = _s5_consistency(phi, Not(psi), sigma, bounds)
    except SearchTimeout:
        return Verdict(Outcome.UNKNOWN, None, bounds, cb, "solver timeout")
    if pair is not None:
        return Verdict(Outcome.NO, pair, bounds, cb, "phi and ~psi are bisimulation consistent")
    if cb.covered_by(min(bounds.worlds1, bounds.worlds2), min(bounds.domain1, bounds.domain2)):
        return Verdict(Outcome.YES, Exhaustion(cb), bounds, cb, "no bisimilar pair up to the completeness bound")
    return Verdict(Outcome.UNKNOWN, None, bounds, cb, "no bisimilar pair within bounds")


def decide_edep_s5(
    phi: Formula,
    psi: Formula,
    sigma: Iterable[str],
    bounds: SearchBounds = SearchBounds(),
    candidates: Iterable[Formula] = (),
) -> Verdict:
    """Does psi have an explicit sigma-definition modulo phi?

    No iff phi & psi and phi & ~psi are sigma-bisimulation consistent.
    """
    sigma = Signature(sigma)
    left, right = And(phi, psi), And(phi, Not(psi))
    cb = completeness_bound(left, right, "iep_s5")
    pool = list(candidates) + [psi, TOP, BOTTOM] + _sigma_subformulas([phi, psi], sigma)
    seen = set()
    for chi in pool:
        if chi in seen or not signature_of(chi) <= sigma:
            continue
        seen.add(chi)
        if quick_valid(Implies(phi, Iff(psi, chi))):
            return Verdict(Outcome.YES, Candidate(chi), bounds, cb, "candidate definition verified")
    try:
        pair = _s5_consistency(left, right, sigma, bounds)
    except SearchTimeout:
        return Verdict(Outcome.UNKNOWN, None, bounds, cb, "solver timeout")
    if pair is not None:
        return Verdict(Outcome.NO, pair, bounds, cb, "phi & psi and phi & ~psi are bisimulation consistent")
    if cb.covered_by(min(bounds.worlds1, bounds.worlds2), min(bounds.domain1, bounds.domain2)):
        return Verdict(Outcome.YES, Exhaustion(cb), bounds, cb, "no bisimilar pair up to the completeness bound")
    return Verdict(Outcome.UNKNOWN, None, bounds, cb, "no bisimilar pair within bounds")


def decide_iep_k(
    phi: Formula, psi: Formula, bounds: SearchBounds = SearchBounds(), candidates: Iterable[Formula] = ()
) -> Verdict:
    """Q1K interpolant existence via n-bisimilar tree models, n = max modal depth."""
    sigma = signature_of(phi) & signature_of(psi)
    n = max(modal_depth(phi), modal_depth(psi))
    for chi in _interpolant_candidates(phi, psi, sigma, candidates):
        if quick_valid(Implies(phi, chi), reflexive=False) and quick_valid(Implies(chi, psi), reflexive=False):
            return Verdict(Outcome.YES, Candidate(chi), bounds, None, "candidate interpolant verified")
    tree = TreeShape(n, bounds.branching)
    try:
        counter = find_model(And(phi, Not(psi)), None, bounds.domain1, tree, bounds.timeout_ms)
        if counter is not None:
            pair = _countermodel_pair(*counter, sigma, k=n)
            _verify_pair(pair, phi, Not(psi))
            return Verdict(Outcome.NO, pair, bounds, None, "phi -> psi has a countermodel")
        found = find_k_bisimilar_trees(
            phi, Not(psi), sigma, n, (tree, bounds.domain1), (tree, bounds.domain2), bounds.timeout_ms
        )
    except SearchTimeout:
        return Verdict(Outcome.UNKNOWN, None, bounds, None, "solver timeout")
    if found is not None:
        m1, p1, m2, p2 = found
        pair = BisimilarPair(PointedModel(m1, p1), PointedModel(m2, p2), sigma, max_k_bisim(m1, m2, sigma, n))
        _verify_pair(pair, phi, Not(psi))
        return Verdict(Outcome.NO, pair, bounds, None, f"phi and ~psi are {n}-bisimulation consistent")
    return Verdict(
        Outcome.UNKNOWN, None, bounds, None, f"no {n}-bisimilar tree pair within bounds (completeness bound is non-elementary)"
    )


def verify_candidate(
    kind: str,
    chi: Formula,
    phi: Formula,
    psi: Formula,
    sigma: Iterable[str] | None = None,
    bounds: SearchBounds = SearchBounds(),
    logic: str = "q1s5",
) -> Verdict:
    """Check chi as an interpolant for phi -> psi, or as a sigma-definition of psi modulo phi."""
    if kind == "interpolant":
        allowed = signature_of(phi) & signature_of(psi)
        legs = [Implies(phi, chi), Implies(chi, psi)]
    elif kind == "definition":
        if sigma is None:
            raise ValueError("a definition needs a signature")
        allowed = Signature(sigma)
        legs = [Implies(phi, Iff(psi, chi))]
    else:
        raise ValueError(f"unknown candidate kind {kind!r}")
    extra = signature_of(chi) - allowed
    if extra:
        return Verdict(Outcome.NO, SignatureViolation(extra, allowed), bounds, None, f"symbols outside the signature: {extra!r}")
    verdicts = [check_valid_bounded(leg, logic, bounds) for leg in legs]
    for v in verdicts:
        if v.outcome is Outcome.NO:
            return replace(v, note="validity condition fails: " + v.note)
    if all(v.outcome is Outcome.YES for v in verdicts):
        return Verdict(Outcome.YES, Candidate(chi), bounds, None, "all conditions valid")
    return Verdict(Outcome.UNKNOWN, Candidate(chi), bounds, None, "no counterexample to any condition within bounds")


# --------------------------------------------------------------------------
# reductions between the two problems


@dataclass(frozen=True)
class IEPInstance:
    left: Formula
    right: Formula

    @property
    def sigma(self) -> Signature:
        return signature_of(self.left) & signature_of(self.right)


@dataclass(frozen=True)
class EDEPInstance:
    kb: Formula
    target: Formula
    sigma: Signature
    side_condition: Formula | None = None  # must be valid as well


def reduce_between(direction: str, phi: Formula, psi: Formula, sigma: Iterable[str] | None = None) -> IEPInstance | EDEPInstance:
    """edep_to_iep: (phi & psi, phi' -> psi'), non-sigma symbols primed in lockstep.
    iep_to_edep: define psi modulo psi -> phi over the shared signature, given phi -> psi is valid.
    """
    if direction == "edep_to_iep":
        if sigma is None:
            raise ValueError("edep_to_iep needs a signature")
        mapping = fresh_renaming(signature_of(phi, psi), sigma)
        return IEPInstance(And(phi, psi), Implies(substitute(phi, mapping), substitute(psi, mapping)))
    if direction == "iep_to_edep":
        shared = signature_of(phi) & signature_of(psi)
        return EDEPInstance(Implies(psi, phi), psi, shared, Implies(phi, psi))
    raise ValueError(f"unknown direction {direction!r}")


def decide_instance(instance: IEPInstance | EDEPInstance, bounds: SearchBounds = SearchBounds()) -> Verdict:
    """Solve a reduced instance; an EDEP instance also needs its side condition."""
    if isinstance(instance, IEPInstance):
        return decide_iep_s5(instance.left, instance.right, bounds)
    side = None
    if instance.side_condition is not None:
        side = check_valid_bounded(instance.side_condition, "q1s5", bounds)
        if side.outcome is Outcome.NO:
            return replace(side, note="side condition fails: " + side.note)
    verdict = decide_edep_s5(instance.kb, instance.target, instance.sigma, bounds)
    if verdict.outcome is Outcome.YES and side is not None and side.outcome is not Outcome.YES:
        return Verdict(Outcome.UNKNOWN, verdict.witness, bounds, verdict.completeness, "definition found but side condition unproven")
    return verdict
