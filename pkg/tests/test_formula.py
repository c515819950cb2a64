import random

import pytest
from hypothesis import given, settings

from helpers import formulas, models, naive_holds
from modalip.formula import (
    And,
    Atom,
    Diamond,
    Exists,
    Iff,
    Implies,
    Not,
    Or,
    ParseError,
    Signature,
    closures,
    fresh_renaming,
    iff_chain,
    modal_depth,
    normalize,
    parse,
    signature_of,
    substitute,
    to_text,
)
from modalip.kripke import extent


def test_precedence():
    p, q, r = Atom("p"), Atom("q"), Atom("r")
    assert parse("p | q & r") == Or(p, And(q, r))
    assert parse("~p & q") == And(Not(p), q)
    assert parse("p -> q -> r") == Implies(p, Implies(q, r))
    assert parse("p <-> q -> r") == Iff(p, Implies(q, r))
    assert parse("<>E p") == Diamond(Exists(p))


def test_iff_parses_right_associated_and_chains_are_explicit():
    p, q, r = Atom("p"), Atom("q"), Atom("r")
    assert parse("p <-> q <-> r") == Iff(p, Iff(q, r))
    assert iff_chain(p, q, r) == And(Iff(p, q), Iff(q, r))
    assert iff_chain(p, q) == Iff(p, q)


def test_canonical_print():
    assert to_text(parse("E p")) == "E p"
    # binary connectives are always bracketed
    assert to_text(parse("p & q & r")) == "((p & q) & r)"
    assert to_text(parse("p -> q -> r")) == "(p -> (q -> r))"
    assert to_text(parse("(p -> q) -> r")) == "((p -> q) -> r)"
    assert to_text(parse("[] ~ <> p")) == "[]~<>p"


@pytest.mark.parametrize(
    "text, line, col",
    [
        ("p &", 1, 4),
        ("p\n& & q", 2, 3),
        ("(p", 1, 3),
        ("p $ q", 1, 3),
    ],
)
def test_parse_errors_carry_position(text, line, col):
    with pytest.raises(ParseError) as info:
        parse(text)
    assert (info.value.line, info.value.column) == (line, col)


def test_keywords_are_not_predicates():
    with pytest.raises(ValueError):
        Atom("E")


@given(formulas())
def test_print_parse_round_trip(phi):
    assert parse(to_text(phi)) == phi


@settings(max_examples=150)
@given(formulas(), models())
def test_normalize_preserves_truth(phi, model):
    assert (extent(model, normalize(phi)) == extent(model, phi)).all()


@settings(max_examples=150)
@given(formulas(), models(s5=False))
def test_normalize_preserves_truth_on_k_models(phi, model):
    assert (extent(model, normalize(phi)) == extent(model, phi)).all()


@given(formulas())
def test_normalize_is_idempotent(phi):
    once = normalize(phi)
    assert normalize(once) == once


def test_modal_depth():
    assert modal_depth(parse("E p")) == 0
    assert modal_depth(parse("<>(p & []q)")) == 2
    assert modal_depth(parse("<>p | [](q -> <>r)")) == 2


def test_closure_is_closed_under_single_negation():
    c = closures(parse("<>E p -> A q"))
    for f in c.members:
        assert Not(f) in c.ids or isinstance(f, Not)
    assert {to_text(f) for f in c.sub_exists} >= {"E p"}
    assert {to_text(f) for f in c.sub_diamond} >= {"<>E p"}


def test_fresh_renaming_keeps_sigma_and_avoids_clashes():
    m = fresh_renaming({"p", "q", "r"}, keep={"p"}, avoid={"q_1"})
    assert "p" not in m
    assert set(m) == {"q", "r"}
    assert not set(m.values()) & {"p", "q", "r", "q_1"}
    phi = substitute(parse("p & E q"), m)
    assert signature_of(phi) == Signature({"p", m["q"]})


def test_signature_is_a_frozenset():
    assert signature_of(parse("p & <>E q")) == {"p", "q"}
    assert Signature(["a", "b"]) & Signature(["b"]) == {"b"}


def test_naive_oracle_agrees_with_extent():
    rng = random.Random(5)
    from helpers import random_formula, random_model

    for _ in range(100):
        phi = random_formula(rng, ["p", "q"], 4)
        m = random_model(rng, ["p", "q"], 3, 3, s5=rng.random() < 0.5)
        table = extent(m, phi)
        for w in range(len(m.worlds)):
            for d in range(len(m.domain)):
                assert table[w, d] == naive_holds(m, w, d, phi)
