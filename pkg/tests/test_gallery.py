import json

import pytest

from helpers import naive_holds
from modalip import gallery
from modalip.formula import Formula, parse, to_text
from modalip.kripke import KripkeModel, load


@pytest.mark.parametrize("name", list(gallery.ITEMS))
def test_every_fact_holds(name):
    for fact, ok, detail in gallery.build(name).run():
        assert ok, f"{name}: {fact.name}: {detail}"


@pytest.mark.parametrize("name", list(gallery.ITEMS))
def test_attributes_resolve(name):
    item = gallery.build(name)
    for attr in item.attributes():
        assert gallery.resolve(f"gallery:{name}:{attr}") is not None


def test_resolve_errors():
    with pytest.raises(gallery.GalleryError):
        gallery.resolve("gallery:nope:phi")
    with pytest.raises(gallery.GalleryError):
        gallery.resolve("gallery:fine:nope")
    with pytest.raises(gallery.GalleryError):
        gallery.resolve("fine")


def test_chain_formulas():
    assert to_text(gallery.ex6_chain(0)) == "true"
    assert gallery.ex6_chain(2) == parse("p1 & E (p2 & <> (p1 & E (p2 & <> true)))")
    with pytest.raises(ValueError):
        gallery.ex6_chain(-1)
    with pytest.raises(ValueError):
        gallery.ex6_model(0)


def test_fine_models_witness_the_failure_of_definability():
    item = gallery.build("fine")
    phi, psi = item.get("phi"), item.get("psi")
    m, m2 = item.get("M"), item.get("M2")
    p, p2 = item.get("M_point"), item.get("M2_point")
    assert naive_holds(m, *m.index(p), phi) and naive_holds(m, *m.index(p), psi)
    assert naive_holds(m2, *m2.index(p2), phi) and not naive_holds(m2, *m2.index(p2), psi)


def test_fine_propositions_are_world_constant():
    item = gallery.build("fine")
    for m in (item.get("M"), item.get("M2")):
        rep = m.valuation["rep"]
        assert all(row.all() or not row.any() for row in rep)


def test_export_round_trips(tmp_path):
    item = gallery.build("marx_areces")
    written = gallery.export(item, tmp_path)
    names = {p.name for p in written}
    assert {"marx_areces.phi", "marx_areces.M1.json", "marx_areces.points.json"} <= names
    assert parse((tmp_path / "marx_areces.phi").read_text()) == item.get("phi")
    m = load((tmp_path / "marx_areces.M1.json").read_text())
    assert isinstance(m, KripkeModel) and m.shape == item.get("M1").shape
    points = json.loads((tmp_path / "marx_areces.points.json").read_text())
    assert tuple(points["M1_point"]) == tuple(item.get("M1_point"))


def test_items_have_formulas_or_concepts():
    for name in gallery.ITEMS:
        item = gallery.build(name)
        assert item.formulas or item.concepts
        assert all(isinstance(f, Formula) for f in item.formulas.values())
