"""Command-line interface: ``modalip <command> ...`` or ``python -m modalip``.

Inputs that name a formula, concept, model or ontology accept a file path, a
gallery reference ``gallery:item:attr``, or inline text.  Exit status: 0 for
a decisive answer (or a plain report), 2 for ``unknown``, 1 for errors and
failed expectations.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Sequence

from . import gallery
from .alcu import concept as dlc
from .alcu import model as dlm
from .alcu.filtration import filtrate_pair_alcu
from .alcu.ontology import Ontology, parse_ontology, reduce_ontology_problem
from .alcu.search import decide_iep_alcu, entails_bounded, verify_dl_candidate
from .alcu.standpoint import encode_standpoint, parse_standpoint_ontology
from .bisim import dump, max_bisim_general, max_bisim_s5, max_k_bisim
from .charform import char_formula
from .decide import (
    Outcome,
    SearchBounds,
    Verdict,
    check_sat_bounded,
    check_valid_bounded,
    decide_edep_s5,
    decide_iep_k,
    decide_iep_s5,
    verify_candidate,
)
from .formula import Formula, ParseError, Signature, normalize, parse, to_text
from .kripke import KripkeModel, ModelError, Point, extent, load
from .mosaics import PreconditionError, filtrate_pair, filtrate_sat
from .translate import dagger_translation, standard_translation, to_prefix, to_tptp


class CLIError(Exception):
    pass


# --------------------------------------------------------------------------
# input resolution


def _source(arg: str) -> tuple[Any, str | None]:
    """(gallery object, None) or (None, text)."""
    if arg.startswith("gallery:"):
        return gallery.resolve(arg), None
    path = Path(arg)
    if len(arg) < 4096 and path.is_file():
        return None, path.read_text()
    return None, arg


def formula_arg(arg: str) -> Formula:
    obj, text = _source(arg)
    if obj is not None:
        if not isinstance(obj, Formula):
            raise CLIError(f"{arg} is not a formula")
        return obj
    return parse(text.strip())


def concept_arg(arg: str) -> dlc.Concept:
    obj, text = _source(arg)
    if obj is not None:
        if isinstance(obj, Formula):
            return dlc.formula_to_concept(obj)
        if not isinstance(obj, dlc.Concept):
            raise CLIError(f"{arg} is not a concept")
        return obj
    return dlc.parse_concept(text.strip())


def model_arg(arg: str) -> KripkeModel:
    obj, text = _source(arg)
    if obj is not None:
        if not isinstance(obj, KripkeModel):
            raise CLIError(f"{arg} is not a Kripke model")
        return obj
    return load(text)


def dl_model_arg(arg: str) -> dlm.DLModel:
    obj, text = _source(arg)
    if obj is not None:
        if isinstance(obj, KripkeModel):
            return dlm.from_kripke(obj)
        if not isinstance(obj, dlm.DLModel):
            raise CLIError(f"{arg} is not a DL model")
        return obj
    return dlm.load(text)


def point_arg(arg: str) -> Point:
    if arg.startswith("gallery:"):
        obj = gallery.resolve(arg)
        if not isinstance(obj, Point):
            raise CLIError(f"{arg} is not a point")
        return obj
    parts = arg.split(",")
    if len(parts) != 2:
        raise CLIError(f"a point is 'world,element', got {arg!r}")
    return Point(parts[0].strip(), parts[1].strip())


def sigma_arg(arg: str | None) -> Signature | None:
    if arg is None:
        return None
    if arg.startswith("gallery:"):
        return Signature(gallery.resolve(arg))
    return Signature(s.strip() for s in arg.split(",") if s.strip())


def ontology_arg(arg: str) -> Ontology:
    obj, text = _source(arg)
    if obj is not None:
        raise CLIError(f"{arg} is not an ontology")
    return parse_ontology(text.replace(";", "\n"))


def bounds_arg(args: argparse.Namespace) -> SearchBounds:
    extra = {"depth": args.depth, "branching": args.branch}
    if args.bounds is None:
        return SearchBounds(**extra)
    return SearchBounds.parse(args.bounds, **extra)


# --------------------------------------------------------------------------
# output


def emit(args: argparse.Namespace, payload: dict, rows: list[tuple[str, Any]] | None = None) -> None:
    if args.json:
        print(json.dumps(payload, indent=1, default=str))
        return
    for key, value in rows if rows is not None else payload.items():
        if isinstance(value, (dict, list)):
            value = json.dumps(value, default=str)
        print(f"{key:<14} {value}")


def verdict_out(args: argparse.Namespace, verdict: Verdict) -> int:
    data = verdict.to_json()
    rows = [("outcome", verdict.outcome.value), ("note", verdict.note), ("bounds", data["bounds"])]
    if data.get("completeness_bound") is not None:
        rows.append(("complete at", data["completeness_bound"]))
    if verdict.witness is not None:
        rows.append(("witness", data["witness"]))
    emit(args, data, rows)
    return 2 if verdict.outcome is Outcome.UNKNOWN else 0


# --------------------------------------------------------------------------
# commands


def cmd_parse(args) -> int:
    text = args.text if args.text is not None else Path(args.file).read_text()
    if args.concept:
        c = dlc.parse_concept(text.strip())
        emit(args, {"concept": dlc.to_text(c), "normalized": dlc.to_text(dlc.cnormalize(c)) if not _has_standpoint(c) else None})
        return 0
    f = parse(text.strip())
    emit(args, {"formula": to_text(f), "normalized": to_text(normalize(f))})
    return 0


def _has_standpoint(c: dlc.Concept) -> bool:
    return any(isinstance(n, dlc.CStandpoint) for n in c.walk())


def cmd_check(args) -> int:
    model, phi = model_arg(args.model), formula_arg(args.formula)
    table = extent(model, phi)
    if args.point:
        p = point_arg(args.point)
        value = bool(table[model.index(p)])
        emit(args, {"point": list(p), "holds": value})
    else:
        pts = [list(model.point(w, d)) for w, d in zip(*table.nonzero())]
        emit(args, {"holds_at": pts})
    return 0


def cmd_sat(args) -> int:
    return verdict_out(args, check_sat_bounded(formula_arg(args.formula), args.logic, bounds_arg(args)))


def cmd_valid(args) -> int:
    return verdict_out(args, check_valid_bounded(formula_arg(args.formula), args.logic, bounds_arg(args)))


def cmd_bisim(args) -> int:
    m1, m2 = model_arg(args.left), model_arg(args.right)
    sigma = sigma_arg(args.sigma) or (m1.predicates & m2.predicates)
    if m1.is_s5 and m2.is_s5:
        rel = max_bisim_s5(m1, m2, sigma)
        pairs = rel.point_relation(m1, m2, sigma)
    else:
        rel = pairs = max_bisim_general(m1, m2, sigma)
    payload = {"sigma": list(sigma), "relation": json.loads(dump(rel, m1, m2))}
    if args.points:
        p, q = (point_arg(x) for x in args.points)
        payload["related"] = pairs.related(m1.index(p), m2.index(q))
    emit(args, payload)
    return 0


def cmd_kbisim(args) -> int:
    m1, m2 = model_arg(args.left), model_arg(args.right)
    sigma = sigma_arg(args.sigma) or (m1.predicates & m2.predicates)
    k = args.depth if args.depth is not None else 1
    rel = max_k_bisim(m1, m2, sigma, k)
    payload = {"sigma": list(sigma), "k": k, "levels": json.loads(dump(rel, m1, m2))}
    if args.points:
        p, q = (point_arg(x) for x in args.points)
        payload["related_levels"] = [lvl for lvl in range(k + 1) if rel.related(lvl, m1.index(p), m2.index(q))]
    emit(args, payload)
    return 0


def _candidates(args) -> list[Formula]:
    return [formula_arg(c) for c in args.candidate or []]


def cmd_iep(args) -> int:
    return verdict_out(args, decide_iep_s5(formula_arg(args.left), formula_arg(args.right), bounds_arg(args), _candidates(args)))


def cmd_edep(args) -> int:
    sigma = sigma_arg(args.sigma)
    if sigma is None:
        raise CLIError("edep needs --sigma")
    return verdict_out(
        args, decide_edep_s5(formula_arg(args.phi), formula_arg(args.psi), sigma, bounds_arg(args), _candidates(args))
    )


def cmd_kiep(args) -> int:
    return verdict_out(args, decide_iep_k(formula_arg(args.left), formula_arg(args.right), bounds_arg(args), _candidates(args)))


def cmd_filtrate(args) -> int:
    if args.dl:
        m1, m2 = dl_model_arg(args.model), dl_model_arg(args.model2)
        art = filtrate_pair_alcu(
            m1, point_arg(args.point), m2, point_arg(args.point2), concept_arg(args.left), concept_arg(args.right)
        )
    elif args.model2:
        art = filtrate_pair(
            model_arg(args.model),
            point_arg(args.point),
            model_arg(args.model2),
            point_arg(args.point2),
            formula_arg(args.left),
            formula_arg(args.right),
        )
    else:
        art = filtrate_sat(model_arg(args.model), point_arg(args.point), formula_arg(args.left))
    report = art.report
    payload = {
        "sizes": [list(m.shape) for m in art.models],
        "n": art.n,
        "pi": art.pi_size,
        "points": [list(p) for p in art.points],
        "report": json.loads(report.to_json()),
        "passed": report.passed,
    }
    emit(args, payload)
    return 0 if report.passed else 1


def cmd_char(args) -> int:
    model = model_arg(args.model)
    p = point_arg(args.point)
    sigma = sigma_arg(args.sigma) or model.predicates
    f = char_formula(model, p.world, p.element, sigma, args.depth if args.depth is not None else 0)
    emit(args, {"formula": to_text(f)})
    return 0


def cmd_translate(args) -> int:
    phi = formula_arg(args.formula)
    out = dagger_translation(phi) if args.to in ("dagger", "tptp") else standard_translation(phi)
    text = to_tptp(out) if args.to == "tptp" else to_prefix(out)
    emit(args, {"translation": text})
    return 0


def cmd_dl_check(args) -> int:
    model, c = dl_model_arg(args.model), concept_arg(args.concept)
    table = dlm.dl_extent(model, c)
    if args.point:
        p = point_arg(args.point)
        emit(args, {"point": list(p), "holds": bool(table[model.index(p)])})
    else:
        emit(args, {"holds_at": [list(model.point(w, d)) for w, d in zip(*table.nonzero())]})
    return 0


def cmd_dl_entails(args) -> int:
    onto = ontology_arg(args.ontology) if args.ontology else Ontology()
    return verdict_out(args, entails_bounded(onto, concept_arg(args.sub), concept_arg(args.sup), bounds_arg(args)))


def cmd_dl_iep(args) -> int:
    cands = [concept_arg(c) for c in args.candidate or []]
    return verdict_out(
        args,
        decide_iep_alcu(concept_arg(args.left), concept_arg(args.right), bounds_arg(args), cands, sigma_arg(args.sigma)),
    )


def cmd_dl_reduce(args) -> int:
    onto = ontology_arg(args.ontology) if args.ontology else Ontology()
    sigma = sigma_arg(args.sigma) or Signature()
    sub = concept_arg(args.sub) if args.sub else None
    sup = concept_arg(args.sup) if args.sup else None
    inst = reduce_ontology_problem(args.kind, onto, sigma, sub, sup, args.name)
    if hasattr(inst, "left"):
        payload = {"left": dlc.to_text(inst.left), "right": dlc.to_text(inst.right), "sigma": list(inst.sigma)}
    else:
        payload = {
            "ontology": [str(a) for a in inst.onto],
            "sub": dlc.to_text(inst.sub),
            "sup": dlc.to_text(inst.sup),
            "sigma": list(inst.sigma),
        }
    emit(args, payload)
    return 0


def cmd_standpoint_encode(args) -> int:
    obj, text = _source(args.file)
    if obj is not None:
        if not isinstance(obj, str):
            raise CLIError(f"{args.file} is not a standpoint ontology")
        text = obj
    onto = parse_standpoint_ontology(text)
    encoded, _ = encode_standpoint(onto)
    lines = [str(a) for a in encoded]
    if args.json:
        print(json.dumps({"standpoints": list(onto.standpoints), "ontology": lines}, indent=1))
    else:
        print("\n".join(lines))
    return 0


def cmd_gallery(args) -> int:
    if args.export:
        names = list(gallery.ITEMS) if args.item in (None, "all") else [args.item]
        written = [str(p) for n in names for p in gallery.export(gallery.build(n), args.export)]
        emit(args, {"written": written}, [("written", len(written))])
        return 0
    if args.run:
        names = list(gallery.ITEMS) if args.run == "all" else [args.run]
        results, failed = [], 0
        for n in names:
            for fact, ok, detail in gallery.build(n).run():
                failed += not ok
                results.append({"item": n, "fact": fact.name, "operation": fact.operation, "pass": ok, "detail": detail})
        if args.json:
            print(json.dumps({"results": results, "failed": failed}, indent=1))
        else:
            for r in results:
                print(f"{'PASS' if r['pass'] else 'FAIL'}  {r['item']:<12} {r['fact']}")
            print(f"{len(results) - failed}/{len(results)} facts pass")
        return 1 if failed else 0
    if args.item:
        item = gallery.build(args.item)
        rows = [("name", item.name), ("about", item.description), ("sigma", list(item.sigma))]
        rows += [(k, to_text(v)) for k, v in item.formulas.items()]
        rows += [(k, dlc.to_text(v)) for k, v in item.concepts.items()]
        rows += [(k, repr(v)) for k, v in item.models.items()]
        rows += [(k, list(v)) for k, v in item.points.items()]
        rows += [(f"fact", f.name) for f in item.facts]
        emit(args, {"item": item.name, "attributes": item.attributes(), "facts": [f.name for f in item.facts]}, rows)
        return 0
    emit(args, {"items": list(gallery.ITEMS)}, [(n, gallery.build(n).description) for n in gallery.ITEMS])
    return 0


def cmd_verify(args) -> int:
    sigma = sigma_arg(args.sigma)
    bounds = bounds_arg(args)
    if args.dl:
        onto = ontology_arg(args.ontology) if args.ontology else Ontology()
        if args.standpoints:
            obj, text = _source(args.standpoints)
            onto = onto.union(encode_standpoint(parse_standpoint_ontology(obj if obj is not None else text))[0])
        sup = concept_arg(args.right) if args.right else None
        verdict = verify_dl_candidate(
            args.kind, concept_arg(args.candidate), onto, concept_arg(args.left), sup, sigma, bounds
        )
    else:
        if args.right is None:
            raise CLIError("verify needs --right")
        verdict = verify_candidate(
            args.kind, formula_arg(args.candidate), formula_arg(args.left), formula_arg(args.right), sigma, bounds, args.logic
        )
    return verdict_out(args, verdict)


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--bounds", help="W1,D1[,W2,D2] search bounds")
    common.add_argument("--sigma", help="comma-separated signature")
    common.add_argument("--logic", choices=("q1s5", "q1k"), default="q1s5")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized runs")
    common.add_argument("--depth", type=int, help="tree depth (q1k) or bisimulation level")
    common.add_argument("--branch", type=int, default=2, help="tree branching (q1k)")

    parser = argparse.ArgumentParser(prog="modalip", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, fn, help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=[common], help=help)
        p.set_defaults(fn=fn)
        return p

    p = add("parse", cmd_parse, "parse and print canonically")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--text")
    g.add_argument("--file")
    p.add_argument("--concept", action="store_true", help="use the concept grammar")

    p = add("check", cmd_check, "model-check a formula")
    p.add_argument("--model", required=True)
    p.add_argument("--formula", required=True)
    p.add_argument("--point")

    for name, fn, what in (("sat", cmd_sat, "bounded satisfiability"), ("valid", cmd_valid, "bounded validity")):
        p = add(name, fn, what)
        p.add_argument("--formula", required=True)

    for name, fn, what in (("bisim", cmd_bisim, "greatest sigma-bisimulation"), ("kbisim", cmd_kbisim, "sigma-k-bisimulation levels")):
        p = add(name, fn, what)
        p.add_argument("--left", required=True)
        p.add_argument("--right", required=True)
        p.add_argument("--points", nargs=2, metavar=("P1", "P2"))

    for name, fn, what in (("iep", cmd_iep, "Q1S5 interpolant existence"), ("kiep", cmd_kiep, "Q1K interpolant existence")):
        p = add(name, fn, what)
        p.add_argument("--left", required=True)
        p.add_argument("--right", required=True)
        p.add_argument("--candidate", action="append")

    p = add("edep", cmd_edep, "Q1S5 explicit definition existence")
    p.add_argument("--phi", required=True)
    p.add_argument("--psi", required=True)
    p.add_argument("--candidate", action="append")

    p = add("filtrate", cmd_filtrate, "filtrate one model or a bisimilar pair")
    p.add_argument("--model", required=True)
    p.add_argument("--point", required=True)
    p.add_argument("--left", required=True, help="phi (or C with --dl)")
    p.add_argument("--model2")
    p.add_argument("--point2")
    p.add_argument("--right", help="psi (or D with --dl)")
    p.add_argument("--dl", action="store_true")

    p = add("char", cmd_char, "characteristic formula tau^k")
    p.add_argument("--model", required=True)
    p.add_argument("--point", required=True)

    p = add("translate", cmd_translate, "first-order translations")
    p.add_argument("--formula", required=True)
    p.add_argument("--to", choices=("dagger", "standard", "tptp"), default="dagger")

    p = add("dl-check", cmd_dl_check, "model-check a concept")
    p.add_argument("--model", required=True)
    p.add_argument("--concept", required=True)
    p.add_argument("--point")

    p = add("dl-entails", cmd_dl_entails, "bounded ontology entailment")
    p.add_argument("--ontology")
    p.add_argument("--sub", required=True)
    p.add_argument("--sup", required=True)

    p = add("dl-iep", cmd_dl_iep, "S5_ALC^u interpolant existence")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--candidate", action="append")

    p = add("dl-reduce", cmd_dl_reduce, "reduce an ontology problem to interpolant existence")
    p.add_argument("--kind", choices=("iep_modulo", "oiep", "edep_modulo"), required=True)
    p.add_argument("--ontology")
    p.add_argument("--sub")
    p.add_argument("--sup")
    p.add_argument("--name")

    p = add("standpoint-encode", cmd_standpoint_encode, "encode a standpoint ontology")
    p.add_argument("--file", required=True)

    p = add("gallery", cmd_gallery, "list, show, run or export the worked examples")
    p.add_argument("item", nargs="?")
    p.add_argument("--run", metavar="ITEM|all")
    p.add_argument("--export", metavar="DIR")

    p = add("verify", cmd_verify, "check a candidate interpolant or definition")
    p.add_argument("--kind", choices=("interpolant", "definition"), required=True)
    p.add_argument("--candidate", required=True)
    p.add_argument("--left", required=True, help="phi / sub concept (the defined name for definitions)")
    p.add_argument("--right", help="psi / sup concept")
    p.add_argument("--dl", action="store_true")
    p.add_argument("--ontology")
    p.add_argument("--standpoints", help="standpoint ontology, encoded and added to --ontology")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ParseError, ModelError, PreconditionError, CLIError, gallery.GalleryError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
