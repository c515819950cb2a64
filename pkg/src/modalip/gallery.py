"""Worked examples as data, each with facts that can be re-derived on demand.

Items are built by name (``build("fine")``); ``ex6_chain`` and
``ex6_model`` also come as parametric builders.  A fact is a named check
that runs the relevant operation and reports whether the expected outcome
came out.  Propositions such as ``rep`` or ``p`` are unary predicates whose
models make them constant on each world.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .alcu.concept import Concept, CName, ciff, parse_concept
from .alcu.concept import to_text as concept_text
from .alcu.model import DLModel, dl_extent
from .alcu.model import save as save_dl
from .alcu.ontology import ontology_to_concept
from .alcu.search import dl_quick_valid, verify_dl_candidate
from .alcu.standpoint import StandpointOntology, encode_standpoint, parse_standpoint_ontology
from .bisim import max_bisim_s5, max_k_bisim
from .decide import Outcome, SearchBounds, check_valid_bounded, decide_edep_s5, decide_iep_s5
from .formula import Formula, Implies, Signature, conj, iff_chain, parse, to_text
from .kripke import KripkeModel, Point, model_check
from .kripke import save as save_model
from .mosaics import compute_types


class GalleryError(KeyError):
    pass


@dataclass(frozen=True)
class Fact:
    name: str
    operation: str
    expected: str
    check: Callable[[], tuple[bool, str]] = field(repr=False, compare=False)

    def run(self) -> tuple[bool, str]:
        return self.check()


@dataclass
class GalleryItem:
    name: str
    description: str
    formulas: dict[str, Formula] = field(default_factory=dict)
    concepts: dict[str, Concept] = field(default_factory=dict)
    models: dict[str, KripkeModel | DLModel] = field(default_factory=dict)
    points: dict[str, Point] = field(default_factory=dict)
    texts: dict[str, str] = field(default_factory=dict)
    sigma: Signature = Signature()
    facts: list[Fact] = field(default_factory=list)

    def get(self, attr: str):
        for table in (self.formulas, self.concepts, self.models, self.points, self.texts):
            if attr in table:
                return table[attr]
        if attr == "sigma":
            return self.sigma
        raise GalleryError(f"item {self.name!r} has no attribute {attr!r}")

    def attributes(self) -> list[str]:
        return [*self.formulas, *self.concepts, *self.models, *self.points, *self.texts, "sigma"]

    def run(self) -> list[tuple[Fact, bool, str]]:
        out = []
        for fact in self.facts:
            ok, detail = fact.run()
            out.append((fact, ok, detail))
        return out


def _fact(name: str, operation: str, expected: str):
    def wrap(fn: Callable[[], tuple[bool, str] | bool]) -> Fact:
        def check() -> tuple[bool, str]:
            got = fn()
            return got if isinstance(got, tuple) else (bool(got), "")

        return Fact(name, operation, expected, check)

    return wrap


def _holds(model: KripkeModel, point: Point, phi: Formula) -> bool:
    return model_check(model, point, phi)


# --------------------------------------------------------------------------
# items


def fine() -> GalleryItem:
    phi = parse(
        "(rep -> <> A (inPower -> [] (rep -> ~inPower)))"
        " & (~rep -> [] E (inPower & [] (~rep -> inPower)))"
        " & [] (A rep | A ~rep)"
    )
    psi = parse("rep")
    m = KripkeModel.build(
        ["a", "b"],
        ["0", "1"],
        {"rep": [("a", "0"), ("a", "1")], "inPower": [("a", "0"), ("b", "1")]},
    )
    m2 = KripkeModel.build(
        ["v0", "v1", "v2"],
        ["c0", "c1", "c2"],
        {
            "rep": [(w, c) for w in ("v1", "v2") for c in ("c0", "c1", "c2")],
            "inPower": [("v0", "c0"), ("v0", "c2"), ("v1", "c0"), ("v1", "c1"), ("v2", "c1"), ("v2", "c2")],
        },
    )
    p, p2 = Point("a", "0"), Point("v0", "c0")
    sigma = Signature({"inPower"})
    item = GalleryItem(
        "fine",
        "rep is implicitly but not explicitly definable from inPower",
        formulas={"phi": phi, "psi": psi},
        models={"M": m, "M2": m2},
        points={"M_point": p, "M2_point": p2},
        sigma=sigma,
    )

    @_fact("M satisfies phi & rep", "check", "true")
    def f1():
        return _holds(m, p, phi) and _holds(m, p, psi)

    @_fact("M2 satisfies phi & ~rep", "check", "true")
    def f2():
        return _holds(m2, p2, phi) and not _holds(m2, p2, psi)

    @_fact("points are bisimilar iff they agree on inPower", "bisim", "true")
    def f3():
        rel = max_bisim_s5(m, m2, sigma).point_relation(m, m2, sigma).pairs
        agree = m.holds("inPower")[:, :, None, None] == m2.holds("inPower")[None, None, :, :]
        return bool(np.array_equal(rel, agree))

    @_fact("no explicit definition of rep via inPower", "edep", "no")
    def f4():
        v = decide_edep_s5(phi, psi, sigma, SearchBounds(2, 2, 3, 3))
        return v.outcome is Outcome.NO, v.note

    item.facts = [f1, f2, f3, f4]
    return item


def marx_areces() -> GalleryItem:
    p0, p1, p2 = "p0", "p1", "p2"
    exclusive = " & ".join(f"({a} -> ~{b})" for a in (p0, p1, p2) for b in (p0, p1, p2) if a != b)
    rigid = " & ".join(f"({a} -> [] (e -> {a}) & A (e -> {a}))" for a in (p0, p1, p2))
    phi = parse(f"p0 & <> E (p1 & <> E p2) & [] A ((e <-> p0 | p1 | p2) & {exclusive} & {rigid})")
    psi = parse(
        "[] A (e <-> b0 | b1) -> <> E (b0 & <> (~e & E b0)) | <> E (b1 & <> (~e & E b1))"
    )
    m1 = KripkeModel.build(
        ["u0", "u1", "u2"],
        ["d0", "d1", "d2"],
        {"e": [(f"u{i}", f"d{i}") for i in range(3)], **{f"p{i}": [(f"u{i}", f"d{i}")] for i in range(3)}},
    )
    m2 = KripkeModel.build(
        ["v0", "v1"],
        ["c0", "c1"],
        {"e": [("v0", "c0"), ("v1", "c1")], "b0": [("v0", "c0")], "b1": [("v1", "c1")]},
    )
    a, b = Point("u0", "d0"), Point("v0", "c0")
    sigma = Signature({"e"})
    item = GalleryItem(
        "marx_areces",
        "phi -> psi is valid but has no interpolant",
        formulas={"phi": phi, "psi": psi},
        models={"M1": m1, "M2": m2},
        points={"M1_point": a, "M2_point": b},
        sigma=sigma,
    )

    @_fact("M1 satisfies phi and M2 refutes psi", "check", "true")
    def f1():
        return _holds(m1, a, phi) and not _holds(m2, b, psi)

    @_fact("the distinguished points are e-bisimilar", "bisim", "true")
    def f2():
        return max_bisim_s5(m1, m2, sigma).related(m1, m2, sigma, m1.index(a), m2.index(b))

    @_fact("no interpolant", "iep", "no")
    def f3():
        v = decide_iep_s5(phi, psi, SearchBounds(3, 3, 2, 2))
        return v.outcome is Outcome.NO, v.note

    @_fact("no countermodel to phi -> psi", "valid", "not no")
    def f4():
        v = check_valid_bounded(Implies(phi, psi), bounds=SearchBounds(3, 3))
        return v.outcome is not Outcome.NO, v.note

    item.facts = [f1, f2, f3, f4]
    return item


KR_STANDPOINTS = """\
standpoints s1, s2
box[~s1 & ~s2] Top <= ~Top
KR | Databases | Verification == CS & some uses.Logic
Databases | Verification <= ~some historicAreaOf.AI
box[s1] KR == CS & some areaOf.AI & some uses.Logic
box[s2] KR <= some historicAreaOf.AI
box[s2] some areaOf.AI <= ~some uses.Logic
"""

# the same knowledge base with S1, S2 as concept names; each line is an
# inclusion that holds in every world
KR_DIRECT = [
    ("Top", "S1 | S2"),
    ("KR | Databases | Verification", "CS & some uses.Logic"),
    ("CS & some uses.Logic", "KR | Databases | Verification"),
    ("Databases | Verification", "~some historicAreaOf.AI"),
    ("S1 & KR", "CS & some areaOf.AI & some uses.Logic"),
    ("S1 & (CS & some areaOf.AI & some uses.Logic)", "KR"),
    ("S2 & KR", "some historicAreaOf.AI"),
    ("S2 & some areaOf.AI", "~some uses.Logic"),
]


def kr_model() -> DLModel:
    """Two precisifications that agree on everything except how x relates to a."""
    everywhere = lambda *pairs: [(w, d) for w in ("p1", "p2") for d in pairs]  # noqa: E731
    return DLModel.build(
        ["p1", "p2"],
        ["x", "l", "a"],
        {
            "S1": [("p1", d) for d in ("x", "l", "a")],
            "S2": [("p2", d) for d in ("x", "l", "a")],
            "CS": everywhere("x"),
            "KR": everywhere("x"),
            "Logic": everywhere("l"),
            "AI": everywhere("a"),
        },
        {
            "uses": {"p1": [("x", "l")], "p2": [("x", "l")]},
            "areaOf": {"p1": [("x", "a")]},
            "historicAreaOf": {"p2": [("x", "a")]},
        },
    )


def kr_kb() -> GalleryItem:
    onto = parse_standpoint_ontology(KR_STANDPOINTS)
    definition = parse_concept("CS & some uses.Logic & (some areaOf.AI | some historicAreaOf.AI)")
    sigma = Signature({"CS", "uses", "Logic", "areaOf", "historicAreaOf", "AI"})
    model = kr_model()
    bounds = SearchBounds(2, 4, 2, 4)
    item = GalleryItem(
        "kr_kb",
        "two standpoints on KR; KR is explicitly definable without them",
        concepts={"definition": definition, "target": CName("KR")},
        models={"M": model},
        points={"M_point": Point("p1", "x")},
        texts={"standpoints": KR_STANDPOINTS},
        sigma=sigma,
    )

    @_fact("the encoding matches the knowledge base written with S1, S2", "standpoint-encode", "true")
    def f1():
        encoded, _ = encode_standpoint(onto)
        axioms = list(encoded)[len(onto.standpoints) :]
        if len(axioms) != len(KR_DIRECT):
            return False, f"{len(axioms)} axioms, expected {len(KR_DIRECT)}"
        for ax, (c, d) in zip(axioms, KR_DIRECT):
            inner = ax.sup.arg.arg  # [] all U.X
            direct = parse_concept(f"~({c}) | ({d})")
            if not dl_quick_valid(ciff(inner, direct)):
                return False, f"{concept_text(inner)} differs from {concept_text(direct)}"
        return True, ""

    @_fact("the hand-built model satisfies K and the KR equivalence everywhere", "dl-check", "true")
    def f2():
        encoded, _ = encode_standpoint(onto)
        ok_k = dl_extent(model, ontology_to_concept(encoded)).all()
        ok_def = dl_extent(model, ciff(CName("KR"), definition)).all()
        return bool(ok_k and ok_def)

    @_fact("the KR definition is accepted against the encoded K", "verify", "yes or unknown")
    def f3():
        encoded, _ = encode_standpoint(onto)
        v = verify_dl_candidate("definition", definition, encoded, CName("KR"), sigma=sigma, bounds=bounds)
        return v.outcome is not Outcome.NO, v.note

    @_fact("without the covering axiom the definition fails", "verify", "no")
    def f4():
        encoded, _ = encode_standpoint(onto.without(0))
        v = verify_dl_candidate("definition", definition, encoded, CName("KR"), sigma=sigma, bounds=bounds)
        return v.outcome is Outcome.NO, v.note

    item.facts = [f1, f2, f3, f4]
    return item


def kr_standpoints() -> StandpointOntology:
    return parse_standpoint_ontology(KR_STANDPOINTS)


def example9() -> GalleryItem:
    phi = parse("rep & <> A (inPower -> [] (rep -> ~inPower))")
    psi = parse("[] A (<> inPower & <> ~inPower & E inPower & E ~inPower)")
    psi2 = parse(f"({to_text(psi)}) & (p | ~p)")
    chi = parse("~(p & [] E (inPower & [] (p -> inPower)))")
    model = KripkeModel.build(
        ["w0", "w1", "w2"],
        ["c0", "c1", "c2"],
        {
            "p": [("w0", c) for c in ("c0", "c1", "c2")],
            "inPower": [("w0", "c1"), ("w0", "c2"), ("w1", "c0"), ("w1", "c2"), ("w2", "c1")],
        },
    )
    point = Point("w0", "c0")
    item = GalleryItem(
        "example9",
        "conservativity is lost after adding a tautology over a fresh proposition",
        formulas={"phi": phi, "psi": psi, "psi2": psi2, "chi": chi},
        models={"M": model},
        points={"M_point": point},
        sigma=Signature({"inPower"}),
    )

    @_fact("the model satisfies psi2 & ~chi", "check", "true")
    def f1():
        return _holds(model, point, psi2) and not _holds(model, point, chi)

    @_fact("the Fine model satisfies psi", "check", "true")
    def f2():
        m = fine().models["M"]
        return bool(all(_holds(m, m.point(w, d), psi) for w in range(2) for d in range(2)))

    item.facts = [f1, f2]
    return item


def ex6_chain(r: int) -> Formula:
    if r < 0:
        raise ValueError("r must be non-negative")
    chi = parse("true")
    for _ in range(r):
        chi = parse(f"p1 & E (p2 & <> ({to_text(chi)}))")
    return chi


def ex6_model(r: int) -> KripkeModel:
    if r < 1:
        raise ValueError("r must be at least 1")
    ids = [str(i) for i in range(r)]
    return KripkeModel.build(
        ids,
        ids,
        {
            "a": [("0", "0")],
            "p1": [(str(k), str(k - 1)) for k in range(1, r)],
            "p2": [(str(k), str(k)) for k in range(1, r)],
        },
    )


def ex6() -> GalleryItem:
    phi0 = parse(
        "[] A (a -> <> (p1 & b)) & [] A (p1 & b -> E (p2 & b)) & [] A (p2 & b -> <> (p1 & b))"
    )
    item = GalleryItem(
        "ex6",
        "a & phi0 has no uniform interpolant over {a, p1, p2}",
        formulas={"phi0": phi0, "a_phi0": parse(f"a & {to_text(phi0)}"), **{f"chi{r}": ex6_chain(r) for r in range(4)}},
        models={f"M{r}": ex6_model(r) for r in range(2, 6)},
        points={"origin": Point("0", "0")},
        sigma=Signature({"a", "p1", "p2"}),
    )

    @_fact("M_r, 0, 0 satisfies <>chi_r' for 0 < r' < r but not <>chi_r, r = 2..5", "check", "true")
    def f1():
        for r in range(2, 6):
            m = ex6_model(r)
            for rr in range(1, r + 1):
                got = _holds(m, Point("0", "0"), parse(f"<> ({to_text(ex6_chain(rr))})"))
                if got != (rr < r):
                    return False, f"r={r}, r'={rr}: got {got}"
        return True, ""

    @_fact("no countermodel to a & phi0 -> <>chi_1", "valid", "not no")
    def f2():
        v = check_valid_bounded(parse(f"a & ({to_text(phi0)}) -> <> ({to_text(ex6_chain(1))})"), bounds=SearchBounds(2, 2))
        return v.outcome is not Outcome.NO, v.note

    item.facts = [f1, f2]
    return item


def exK() -> GalleryItem:
    a, b, h = parse("a"), parse("b"), parse("h")
    phi = conj(
        [
            parse("A ((%s) & (%s))" % (to_text(iff_chain(a, b, h)), to_text(iff_chain(h, parse("[] h"), parse("<> h"))))),
            parse("<> A (b <-> h)"),
        ]
    )
    premise = conj([parse("A (%s)" % to_text(iff_chain(a, parse("[][] a"), parse("<><> a")))), parse("[] <> true")])
    psi = parse(f"({to_text(premise)}) -> <> A (b <-> <> a)")
    m = KripkeModel.build(
        ["w", "u", "v"],
        ["d", "c"],
        {"a": [("w", "d")], "b": [("w", "d"), ("u", "c"), ("v", "d")], "h": [("w", "d"), ("u", "d"), ("v", "d")]},
        [("w", "u"), ("w", "v")],
    )
    m2 = KripkeModel.build(
        ["w'", "u'", "v'", "x'", "y'"],
        ["d'", "c2", "c1"],
        {
            "a": [("w'", "d'"), ("x'", "d'"), ("y'", "d'")],
            "b": [("w'", "d'"), ("u'", "c2"), ("v'", "d'"), ("v'", "c1")],
        },
        [("w'", "u'"), ("w'", "v'"), ("u'", "x'"), ("v'", "y'")],
    )
    p, p2 = Point("w", "d"), Point("w'", "d'")
    sigma = Signature({"a", "b"})
    item = GalleryItem(
        "exK",
        "Q1K: phi -> psi is valid, yet phi and ~psi hold at 1-bisimilar points",
        formulas={"phi": phi, "psi": psi},
        models={"M": m, "M2": m2},
        points={"M_point": p, "M2_point": p2},
        sigma=sigma,
    )

    @_fact("M satisfies phi and M2 refutes psi", "check", "true")
    def f1():
        return _holds(m, p, phi) and not _holds(m2, p2, psi)

    @_fact("the points are related at level 1 but not level 2", "kbisim", "true")
    def f2():
        kb = max_k_bisim(m, m2, sigma, 2)
        return kb.related(1, m.index(p), m2.index(p2)) and not kb.related(2, m.index(p), m2.index(p2))

    @_fact("no Q1K countermodel to phi -> psi at depth 2, branching 2, |D| <= 3", "valid", "not no")
    def f3():
        v = check_valid_bounded(
            Implies(phi, psi), "q1k", SearchBounds(1, 3, 1, 3, depth=2, branching=2)
        )
        return v.outcome is not Outcome.NO, v.note

    item.facts = [f1, f2, f3]
    return item


def ex8b() -> GalleryItem:
    phi, psi = parse("<> a & <> ~a"), parse("<> a | <> p")
    m1 = KripkeModel.build(["w0", "w1", "w2"], ["d", "d'"], {"a": [("w0", "d"), ("w1", "d"), ("w1", "d'")]})
    m2 = KripkeModel.build(
        ["v0", "v1", "v2"],
        ["e", "e'"],
        {"a": [("v0", "e"), ("v1", "e"), ("v1", "e'")], "p": [("v0", "e'"), ("v2", "e"), ("v2", "e'")]},
    )
    sigma = Signature({"a"})
    item = GalleryItem(
        "ex8b",
        "non-bisimilar elements with the same domain point",
        formulas={"phi": phi, "psi": psi},
        models={"M1": m1, "M2": m2},
        sigma=sigma,
    )

    @_fact("d and d' have the same domain point", "filtrate", "true")
    def f1():
        t = compute_types(m1, m2, phi, psi, sigma)
        return t.domain_point(0, 0) == t.domain_point(0, 1)

    @_fact("d and d' are not a-bisimilar", "bisim", "true")
    def f2():
        return not max_bisim_s5(m1, m1, sigma).elements[0, 1]

    @_fact("d ~ e and d' ~ e'", "bisim", "true")
    def f3():
        rel = max_bisim_s5(m1, m2, sigma).elements
        return bool(rel[0, 0] and rel[1, 1])

    item.facts = [f1, f2, f3]
    return item


ITEMS: dict[str, Callable[[], GalleryItem]] = {
    "fine": fine,
    "marx_areces": marx_areces,
    "kr_kb": kr_kb,
    "example9": example9,
    "ex6": ex6,
    "exK": exK,
    "ex8b": ex8b,
}


def build(name: str) -> GalleryItem:
    try:
        return ITEMS[name]()
    except KeyError:
        raise GalleryError(f"unknown gallery item {name!r}; known: {', '.join(ITEMS)}") from None


def resolve(ref: str):
    """``item:attr`` (with ``gallery:`` optional) to the stored object."""
    parts = ref.split(":")
    if parts[0] == "gallery":
        parts = parts[1:]
    if len(parts) != 2:
        raise GalleryError(f"gallery reference must look like gallery:item:attr, got {ref!r}")
    return build(parts[0]).get(parts[1])


def export(item: GalleryItem, directory: str | Path) -> list[Path]:
    """Write formulas/concepts as ``<item>.<attr>`` text and models as ``<item>.<attr>.json``."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for attr, f in item.formulas.items():
        written.append(out / f"{item.name}.{attr}")
        written[-1].write_text(to_text(f) + "\n")
    for attr, c in item.concepts.items():
        written.append(out / f"{item.name}.{attr}")
        written[-1].write_text(concept_text(c) + "\n")
    for attr, text in item.texts.items():
        written.append(out / f"{item.name}.{attr}")
        written[-1].write_text(text)
    for attr, m in item.models.items():
        written.append(out / f"{item.name}.{attr}.json")
        written[-1].write_text((save_dl(m) if isinstance(m, DLModel) else save_model(m)) + "\n")
    if item.points:
        written.append(out / f"{item.name}.points.json")
        written[-1].write_text(json.dumps({k: list(p) for k, p in item.points.items()}, indent=1) + "\n")
    return written
