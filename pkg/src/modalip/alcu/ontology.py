"""Ontologies (finite sets of concept inclusions) and their reductions to
plain interpolant existence.

File format: one inclusion per line, ``C <= D``; ``C == D`` is shorthand for
the two inclusions both ways.  ``#`` starts a comment.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from ..formula import ParseError, Signature, fresh_renaming
from .concept import (
    UNIVERSAL,
    CAll,
    CAnd,
    CName,
    CNot,
    Concept,
    ConceptParser,
    COr,
    cconj,
    concept_signature,
    crename,
)


@dataclass(frozen=True)
class Inclusion:
    sub: Concept
    sup: Concept

    def __str__(self) -> str:
        return f"{self.sub} <= {self.sup}"


@dataclass(frozen=True)
class Ontology:
    axioms: tuple[Inclusion, ...] = ()

    def __iter__(self) -> Iterator[Inclusion]:
        return iter(self.axioms)

    def __len__(self) -> int:
        return len(self.axioms)

    def __str__(self) -> str:
        return "\n".join(str(a) for a in self.axioms)

    @property
    def signature(self) -> Signature:
        return concept_signature(*(c for a in self.axioms for c in (a.sub, a.sup)))

    def union(self, other: Ontology) -> Ontology:
        return Ontology(self.axioms + other.axioms)

    def without(self, index: int) -> Ontology:
        return Ontology(self.axioms[:index] + self.axioms[index + 1 :])


def parse_inclusions(line: str) -> list[Inclusion]:
    p = ConceptParser(line)
    left = p.concept()
    op = p.peek()
    if op not in ("<=", "=="):
        raise p.error("expected '<=' or '=='")
    p.take()
    right = p.concept()
    p.done()
    if op == "<=":
        return [Inclusion(left, right)]
    return [Inclusion(left, right), Inclusion(right, left)]


def parse_ontology(text: str) -> Ontology:
    axioms: list[Inclusion] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            axioms.extend(parse_inclusions(line))
        except ParseError as exc:
            raise ParseError(str(exc).rsplit(" at line", 1)[0], number, exc.column) from None
    return Ontology(tuple(axioms))


def ontology_to_concept(onto: Ontology) -> Concept:
    """O^c: the conjunction of all U.(~C | D) over the inclusions."""
    return cconj(CAll(UNIVERSAL, COr(CNot(a.sub), a.sup)) for a in onto)


@dataclass(frozen=True)
class ConceptIEP:
    """Does left <= right have an interpolant over ``sigma``?"""

    left: Concept
    right: Concept
    sigma: Signature


@dataclass(frozen=True)
class OntologyIEP:
    """Is there a sigma-concept E with onto |= sub <= E and onto |= E <= sup?"""

    onto: Ontology
    sub: Concept
    sup: Concept
    sigma: Signature


def reduce_ontology_problem(
    kind: str,
    onto: Ontology,
    sigma: Iterable[str],
    sub: Concept | None = None,
    sup: Concept | None = None,
    name: str | None = None,
) -> ConceptIEP | OntologyIEP:
    """Map a problem relative to an ontology onto a plain interpolant problem.

    * iep_modulo (C <= D): (O^c & C, ~O^c | D) over sigma.
    * oiep (C <= D): (O^c, ~C | D) over sigma.
    * edep_modulo (concept name A): the interpolant-modulo-ontology problem
      for A <= A' relative to O together with its primed copy O', where every
      symbol outside sigma is renamed.
    """
    sigma = Signature(sigma)
    oc = ontology_to_concept(onto)
    if kind == "iep_modulo":
        if sub is None or sup is None:
            raise ValueError("iep_modulo needs an inclusion")
        return ConceptIEP(CAnd(oc, sub), COr(CNot(oc), sup), sigma)
    if kind == "oiep":
        if sub is None or sup is None:
            raise ValueError("oiep needs an inclusion")
        return ConceptIEP(oc, COr(CNot(sub), sup), sigma)
    if kind == "edep_modulo":
        if name is None:
            raise ValueError("edep_modulo needs a concept name")
        symbols = onto.signature | {name}
        mapping = fresh_renaming(symbols, sigma)
        primed = Ontology(tuple(Inclusion(crename(a.sub, mapping), crename(a.sup, mapping)) for a in onto))
        target = CName(name)
        return OntologyIEP(onto.union(primed), target, crename(target, mapping), sigma)
    raise ValueError(f"unknown ontology problem {kind!r}")

