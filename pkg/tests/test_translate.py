import random

import numpy as np
import pytest
from hypothesis import given, settings

from helpers import formulas, models, naive_holds, random_formula
from modalip.formula import parse
from modalip.kripke import KripkeModel
from modalip.translate import (
    FAtom,
    TranslationError,
    dagger_translation,
    fo_evaluate,
    fo_to_square,
    free_variables,
    kripke_to_fo,
    predicates,
    square_to_fo,
    standard_translation,
    to_prefix,
    to_tptp,
)


def square(rng: random.Random, n: int, sigma=("p", "q")) -> KripkeModel:
    tables = {p: np.array([[rng.random() < 0.5 for _ in range(n)] for _ in range(n)]) for p in sigma}
    return KripkeModel([f"w{i}" for i in range(n)], [f"e{i}" for i in range(n)], tables)


def test_dagger_shape():
    f = dagger_translation(parse("<>E p"))
    assert to_prefix(f) == "(exists y (exists x (p y x)))"
    assert free_variables(dagger_translation(parse("p & <>q"))) == {"x", "y"}


def test_dagger_uses_only_two_variables_in_fixed_order():
    rng = random.Random(2)
    for _ in range(200):
        f = dagger_translation(random_formula(rng, ["p", "q"], 4))
        for node in f.walk():
            if isinstance(node, FAtom):
                assert node.args == ("y", "x")
        assert free_variables(f) <= {"x", "y"}


def test_tptp_rendering():
    assert to_tptp(dagger_translation(parse("E p"))) == "fof(goal, axiom, (?[X] : p(Y,X)))."
    assert "~" in to_tptp(dagger_translation(parse("~p")))


def test_co_evaluation_on_square_models():
    rng = random.Random(31)
    for _ in range(100):
        n = rng.randint(1, 3)
        m = square(rng, n)
        phi = random_formula(rng, ["p", "q"], 4)
        perm = rng.sample(m.worlds, n)
        f = dict(zip(m.domain, perm))
        structure = square_to_fo(m, f)
        dag = dagger_translation(phi)
        for a in m.domain:
            for b in m.domain:
                expected = naive_holds(m, m.world_index(f[a]), m.element_index(b), phi)
                assert fo_evaluate(structure, dag, {"y": a, "x": b}) == expected


def test_structures_round_trip_through_square_models():
    rng = random.Random(32)
    for _ in range(30):
        m = square(rng, rng.randint(1, 3))
        structure = square_to_fo(m)
        back = square_to_fo(fo_to_square(structure), {d: d for d in structure.domain})
        assert back.relations == structure.relations


@settings(max_examples=100, deadline=None)
@given(formulas(("p", "q")), models(("p", "q"), 3, 3, s5=False))
def test_standard_translation_agrees_with_kripke_semantics(phi, model):
    structure = kripke_to_fo(model)
    st_phi = standard_translation(phi)
    assert free_variables(st_phi) <= {"z", "x"}
    for w in range(len(model.worlds)):
        for d in range(len(model.domain)):
            got = fo_evaluate(structure, st_phi, {"z": model.worlds[w], "x": model.domain[d]})
            assert got == naive_holds(model, w, d, phi)


def test_errors():
    with pytest.raises(TranslationError):
        square_to_fo(KripkeModel.build(["u"], ["a", "b"], {}))
    with pytest.raises(TranslationError):
        square_to_fo(KripkeModel.build(["u"], ["a"], {}, R=[]))
    with pytest.raises(TranslationError):
        square_to_fo(KripkeModel.build(["u"], ["a"], {}), {"a": "zz"})
    with pytest.raises(TranslationError):
        standard_translation(parse("R & p"))
    with pytest.raises(TranslationError):
        fo_evaluate(square_to_fo(KripkeModel.build(["u"], ["a"], {})), dagger_translation(parse("p")), {"x": "a"})


@pytest.mark.parametrize("text, preds", [("p", {"p"}), ("<>p", {"p"}), ("E ~q", {"q"}), ("[]A (p -> q)", {"p", "q"})])
def test_predicates_are_preserved(text, preds):
    assert predicates(dagger_translation(parse(text))) == preds
