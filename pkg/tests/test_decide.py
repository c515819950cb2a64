import json
import random

import pytest
from hypothesis import given, settings

from helpers import formulas, naive_bisim, naive_holds, random_formula
from modalip import gallery
from modalip.bisim import verify_bisimulation
from modalip.decide import (
    BisimilarPair,
    Candidate,
    EDEPInstance,
    Exhaustion,
    IEPInstance,
    Outcome,
    PointedModel,
    SearchBounds,
    SignatureViolation,
    check_sat_bounded,
    check_valid_bounded,
    completeness_bound,
    decide_edep_s5,
    decide_iep_k,
    decide_iep_s5,
    decide_instance,
    quick_valid,
    reduce_between,
    verify_candidate,
)
from modalip.formula import Not, Signature, parse, signature_of
from modalip.kripke import enumerate_models, extent

B22 = SearchBounds(2, 2, 2, 2)


def brute_sat(phi, worlds, domain, s5=True):
    for m in enumerate_models(sorted(signature_of(phi)) or ["p"], worlds, domain, s5=s5):
        if extent(m, phi).any():
            return True
    return False


def test_bounds_parsing():
    assert SearchBounds.parse("3,3") == SearchBounds(3, 3, 3, 3)
    assert SearchBounds.parse("3,2,1,4", depth=2) == SearchBounds(3, 2, 1, 4, depth=2)
    with pytest.raises(ValueError):
        SearchBounds.parse("3")
    with pytest.raises(ValueError):
        SearchBounds.parse("3,x")
    with pytest.raises(ValueError):
        SearchBounds(0, 1, 1, 1)


def test_completeness_bound_is_exact_for_large_exponents():
    cb = completeness_bound(parse("<>E p"))
    assert cb.covered_by(2**cb.worlds_log2, 2**cb.domain_log2)
    assert not cb.covered_by(2**cb.worlds_log2 - 1, 2**cb.domain_log2)
    assert "2^" in str(completeness_bound(parse("<>E p & A q"), parse("E q"), "iep_s5"))


@settings(max_examples=60, deadline=None)
@given(formulas(("p", "q"), max_leaves=8))
def test_bounded_sat_agrees_with_enumeration(phi):
    v = check_sat_bounded(phi, "q1s5", B22)
    assert (v.outcome is Outcome.YES) == brute_sat(phi, 2, 2)
    if v.outcome is Outcome.YES:
        m, p = v.witness.model, v.witness.point
        assert naive_holds(m, *m.index(p), phi)


def test_q1k_sat_finds_tree_models():
    v = check_sat_bounded(parse("<>p & <>~p & []E q"), "q1k", SearchBounds(2, 2, depth=1, branching=2))
    assert v.outcome is Outcome.YES
    m = v.witness.model
    assert not m.is_s5
    assert naive_holds(m, *m.index(v.witness.point), parse("<>p & <>~p & []E q"))
    # a one-branch tree cannot host both successors
    v = check_sat_bounded(parse("<>p & <>~p"), "q1k", SearchBounds(2, 2, depth=1, branching=1))
    assert v.outcome is Outcome.UNKNOWN


def test_unsat_closes_at_the_completeness_bound():
    v = check_sat_bounded(parse("p & ~p"), "q1s5", B22)
    assert v.outcome is Outcome.NO and isinstance(v.witness, Exhaustion)


def test_validity():
    assert check_valid_bounded(parse("A p -> p"), bounds=B22).outcome is Outcome.YES
    assert check_valid_bounded(parse("[]p -> p"), bounds=B22).outcome is Outcome.YES
    v = check_valid_bounded(parse("E p -> A p"), bounds=B22)
    assert v.outcome is Outcome.NO
    m = v.witness.model
    assert not naive_holds(m, *m.index(v.witness.point), parse("E p -> A p"))
    # reflexivity is not available in K
    assert check_valid_bounded(parse("[]p -> p"), "q1k", SearchBounds(2, 2, depth=1)).outcome is Outcome.NO


def test_quick_valid_is_sound_on_random_formulas():
    rng = random.Random(8)
    for _ in range(300):
        phi = random_formula(rng, ["p", "q"], 3)
        if quick_valid(phi):
            assert not brute_sat(Not(phi), 2, 2)


def test_iep_yes_with_a_shared_candidate():
    v = decide_iep_s5(parse("p & q"), parse("p | r"), B22)
    assert v.outcome is Outcome.YES
    assert isinstance(v.witness, Candidate)
    assert signature_of(v.witness.formula) <= {"p"}


def test_iep_no_when_the_implication_fails():
    v = decide_iep_s5(parse("p"), parse("q"), B22)
    assert v.outcome is Outcome.NO
    assert isinstance(v.witness, BisimilarPair)


def test_iep_no_witness_is_a_real_bisimilar_pair():
    item = gallery.build("marx_areces")
    phi, psi = item.get("phi"), item.get("psi")
    v = decide_iep_s5(phi, psi, SearchBounds(3, 3, 2, 2))
    assert v.outcome is Outcome.NO
    w = v.witness
    assert verify_bisimulation(w.bisim, w.left.model, w.right.model, w.sigma) == []
    p1, p2 = w.left.model.index(w.left.point), w.right.model.index(w.right.point)
    assert (p1, p2) in naive_bisim(w.left.model, w.right.model, w.sigma)
    assert naive_holds(w.left.model, *p1, phi)
    assert not naive_holds(w.right.model, *p2, psi)


def test_edep_yes_when_a_definition_is_forced():
    v = decide_edep_s5(parse("[]A (p <-> q)"), parse("p"), {"q"}, B22)
    assert v.outcome is Outcome.YES
    assert signature_of(v.witness.formula) <= {"q"}


def test_edep_no_when_the_target_floats():
    v = decide_edep_s5(parse("q"), parse("p"), {"q"}, B22)
    assert v.outcome is Outcome.NO


def test_iep_k():
    v = decide_iep_k(parse("p & q"), parse("p | r"), SearchBounds(2, 2, depth=1))
    assert v.outcome is Outcome.YES
    v = decide_iep_k(parse("<>p"), parse("p"), SearchBounds(2, 2, depth=1))
    assert v.outcome is Outcome.NO
    w = v.witness
    assert not w.left.model.is_s5


def test_verify_candidate():
    phi, psi = parse("p & q"), parse("p | r")
    assert verify_candidate("interpolant", parse("p"), phi, psi, bounds=B22).outcome is Outcome.YES
    v = verify_candidate("interpolant", parse("q"), phi, psi, bounds=B22)
    assert v.outcome is Outcome.NO and isinstance(v.witness, SignatureViolation)
    v = verify_candidate("interpolant", parse("~p"), phi, psi, bounds=B22)
    assert v.outcome is Outcome.NO and isinstance(v.witness, PointedModel)
    v = verify_candidate("definition", parse("q"), parse("[]A (p <-> q)"), parse("p"), {"q"}, B22)
    assert v.outcome is Outcome.YES
    with pytest.raises(ValueError):
        verify_candidate("definition", parse("q"), phi, psi)
    with pytest.raises(ValueError):
        verify_candidate("bogus", parse("q"), phi, psi)


def test_reductions_produce_the_expected_shapes():
    inst = reduce_between("edep_to_iep", parse("[]A(p <-> q)"), parse("p"), {"q"})
    assert isinstance(inst, IEPInstance)
    assert inst.sigma == Signature({"q"})
    inst = reduce_between("iep_to_edep", parse("p & q"), parse("p | r"))
    assert isinstance(inst, EDEPInstance)
    assert inst.sigma == {"p"}
    with pytest.raises(ValueError):
        reduce_between("sideways", parse("p"), parse("q"))


def test_reduced_instances_agree_on_simple_cases():
    phi, psi = parse("[]A(p <-> q)"), parse("p")
    direct = decide_edep_s5(phi, psi, {"q"}, B22)
    reduced = decide_instance(reduce_between("edep_to_iep", phi, psi, {"q"}), B22)
    assert direct.outcome is reduced.outcome is Outcome.YES
    phi, psi = parse("q"), parse("p")
    direct = decide_edep_s5(phi, psi, {"q"}, B22)
    reduced = decide_instance(reduce_between("edep_to_iep", phi, psi, {"q"}), B22)
    assert direct.outcome is reduced.outcome is Outcome.NO


def test_verdict_json():
    v = decide_iep_s5(parse("p"), parse("q"), B22)
    data = json.loads(json.dumps(v.to_json()))
    assert data["outcome"] == "no"
    assert set(data["witness"]) == {"left", "right", "sigma", "bisimulation"}
    assert data["bounds"]["W1"] == 2


def test_a_unit_bound_is_not_mistaken_for_exhaustion():
    v = check_sat_bounded(parse("<>p & <>~p"), "q1s5", SearchBounds(1, 1, 1, 1))
    assert v.outcome is Outcome.UNKNOWN
