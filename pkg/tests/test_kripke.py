import numpy as np
import pytest
from hypothesis import given, settings

from helpers import formulas, models, naive_holds
from modalip.formula import parse
from modalip.kripke import KripkeModel, ModelError, Point, enumerate_models, extent, load, model_check, save


@pytest.fixture
def small():
    return KripkeModel.build(["u", "v"], ["a", "b"], {"p": [("u", "a"), ("v", "b")], "q": [("v", "a")]})


def test_s5_operators(small):
    assert model_check(small, ("u", "a"), parse("p & E ~p"))
    assert model_check(small, ("u", "a"), parse("<>q"))
    assert not model_check(small, ("u", "a"), parse("[]p"))
    assert model_check(small, ("v", "b"), parse("<>(~p & ~E q)"))
    assert not model_check(small, ("v", "b"), parse("<>(p & ~E q)"))
    assert model_check(small, ("u", "b"), parse("A (p | q) | A ~q"))


def test_k_operators():
    m = KripkeModel.build(["u", "v", "x"], ["a"], {"p": [("v", "a")]}, R=[("u", "v"), ("v", "v")])
    assert m.kind == "q1k"
    assert model_check(m, ("u", "a"), parse("<>p & []p"))
    assert model_check(m, ("x", "a"), parse("[]false"))
    assert not model_check(m, ("x", "a"), parse("<>true"))


def test_unknown_predicates_are_false(small):
    assert not model_check(small, ("u", "a"), parse("zz"))


def test_build_rejects_bad_input():
    with pytest.raises(ModelError):
        KripkeModel.build(["u"], ["a"], {"p": [("v", "a")]})
    with pytest.raises(ModelError):
        KripkeModel.build([], ["a"], {})
    with pytest.raises(ModelError):
        KripkeModel.build(["u", "u"], ["a"], {})
    with pytest.raises(ModelError):
        KripkeModel.build(["u"], ["a"], {}, R=[("u", "v")])


@settings(max_examples=200)
@given(formulas(), models())
def test_extent_matches_pointwise_oracle_s5(phi, model):
    table = extent(model, phi)
    for w in range(len(model.worlds)):
        for d in range(len(model.domain)):
            assert table[w, d] == naive_holds(model, w, d, phi)


@settings(max_examples=200)
@given(formulas(), models(s5=False))
def test_extent_matches_pointwise_oracle_k(phi, model):
    table = extent(model, phi)
    for w in range(len(model.worlds)):
        for d in range(len(model.domain)):
            assert table[w, d] == naive_holds(model, w, d, phi)


@given(models(s5=False))
def test_save_load_round_trip(model):
    back = load(save(model))
    assert back.worlds == model.worlds and back.domain == model.domain
    assert (back.R == model.R).all()
    for p, t in model.valuation.items():
        assert (back.valuation.get(p, np.zeros_like(t)) == t).all()


def test_load_reports_bad_json():
    with pytest.raises(ModelError):
        load('{"kind": "q1s5", "worlds": ["u"], "domain": ["a"], "val": {"p": [["v", "a"]]}}')


def test_enumeration_counts():
    # every valuation of one predicate: sum of 2^(|W||D|)
    assert sum(1 for _ in enumerate_models(["p"], 2, 2)) == 2 + 4 + 4 + 16
    # K models also range over every accessibility relation
    assert sum(1 for _ in enumerate_models(["p"], 2, 1, s5=False)) == 2 * 2 + 16 * 4


def test_pruned_enumeration_counts_orbits():
    # 1 predicate on a 2x2 grid under row and column swaps: 7 orbits
    pruned = list(enumerate_models(["p"], 2, 2, prune=True, min_worlds=2, min_domain=2))
    assert len(pruned) == 7


def test_point_lookup(small):
    assert small.index(Point("v", "b")) == (1, 1)
    assert small.point(0, 1) == Point("u", "b")
    with pytest.raises(ModelError):
        small.index(("z", "a"))
