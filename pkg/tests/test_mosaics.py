import random
from dataclasses import replace

import numpy as np
import pytest

from helpers import naive_bisim, naive_holds, random_formula, random_model
from modalip.encode import find_s5_bisimilar_pair
from modalip.formula import Not, closures, parse, signature_of
from modalip.kripke import KripkeModel, extent
from modalip.mosaics import PreconditionError, compute_types, filtrate_pair, filtrate_sat


def bisim_consistent_pairs(seed: int, count: int, max_closure: int = 10):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        phi = random_formula(rng, ["p", "q"], 3)
        psi = random_formula(rng, ["p", "r"], 3)
        if len(closures(phi, psi)) > max_closure:
            continue
        sigma = signature_of(phi) & signature_of(psi)
        found = find_s5_bisimilar_pair(phi, Not(psi), sigma, (2, 2), (2, 2))
        if found is not None:
            out.append((phi, psi, found))
    return out


def test_type_table_groups_points_by_closure_type():
    m = KripkeModel.build(["u", "v"], ["a", "b"], {"p": [("u", "a"), ("v", "a")]})
    phi = parse("E p & <>~p")
    table = compute_types(m, m, phi, phi, {"p"})
    # a and b differ on p, so two full types are realized
    assert len(table.realized_full_types()) == 2


def test_single_model_filtration_preserves_the_formula():
    rng = random.Random(3)
    done = 0
    while done < 30:
        phi = random_formula(rng, ["p", "q"], 3)
        m = random_model(rng, ["p", "q"], 3, 3)
        hits = np.argwhere(extent(m, phi))
        if not len(hits):
            continue
        w, d = hits[0]
        art = filtrate_sat(m, m.point(w, d), phi)
        assert art.report.passed, art.report.failures()
        out, point = art.models[0], art.points[0]
        assert naive_holds(out, *out.index(point), phi)
        done += 1


def test_pair_filtration_on_random_bisim_consistent_pairs():
    for phi, psi, (m1, p1, m2, p2, _) in bisim_consistent_pairs(seed=21, count=25):
        art = filtrate_pair(m1, p1, m2, p2, phi, psi)
        assert art.report.passed, art.report.failures()
        assert art.pi_size <= art.n**2
        o1, o2 = art.models
        q1, q2 = o1.index(art.points[0]), o2.index(art.points[1])
        assert naive_holds(o1, *q1, phi)
        assert not naive_holds(o2, *q2, psi)
        assert (q1, q2) in naive_bisim(o1, o2, art.sigma)


def test_flipping_a_claimed_type_bit_is_caught():
    phi, psi, (m1, p1, m2, p2, _) = bisim_consistent_pairs(seed=22, count=1)[0]
    art = filtrate_pair(m1, p1, m2, p2, phi, psi)
    claimed = list(art.claimed)
    bad = claimed[0].copy()
    bad[0, 0] ^= 1
    claimed[0] = bad
    assert not replace(art, claimed=tuple(claimed)).report.passed


def test_preconditions_are_checked():
    m = KripkeModel.build(["u"], ["a"], {"p": [("u", "a")]})
    with pytest.raises(PreconditionError):
        filtrate_sat(m, ("u", "a"), parse("~p"))
    with pytest.raises(PreconditionError):
        filtrate_pair(m, ("u", "a"), m, ("u", "a"), parse("p"), parse("p"))
    k = KripkeModel.build(["u"], ["a"], {"p": [("u", "a")]}, R=[])
    with pytest.raises(PreconditionError):
        filtrate_pair(k, ("u", "a"), k, ("u", "a"), parse("p"), parse("~p"))
    n = KripkeModel.build(["u"], ["a"], {})
    with pytest.raises(PreconditionError, match="bisimilar"):
        filtrate_pair(m, ("u", "a"), n, ("u", "a"), parse("p | q"), parse("p | q2"))
