from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import any_corpus, channel_corpus
from macwt.channel import mi_bundle
from macwt.polytope import RateTuple, contains_point, vertices
from macwt.regions import rate_axes, region_r2, region_tekin_r1, region_theorem1
from macwt.splitmap import (
    SplitError,
    check_gap_condition,
    classify,
    counterexample_tuple,
    r2_checks,
    refutes_two_family_region,
    search_counterexample,
    transform,
    xor_witness,
)

AXES = rate_axes(2)
CORPUS = channel_corpus(10, seed=5)
ANY = any_corpus(25, seed=8)


def _caps(mi):
    return (
        mi.eve({1}),
        mi.eve({2}),
        mi.eve_given_rest({1}),
        mi.eve_given_rest({2}),
        mi.eve({1, 2}),
    )


def _point_in_region(mi, weights):
    """Exact convex combination of the region's vertices."""
    verts = vertices(region_theorem1(mi))
    w = [Fraction(weights[i % len(weights)]) for i in range(len(verts))]
    if not any(w):
        w[0] = Fraction(1)
    total = sum(w)
    return RateTuple({a: sum(wi * v[a] for wi, v in zip(w, verts)) / total for a in AXES})


@settings(max_examples=60, deadline=None)
@given(st.integers(0, len(ANY) - 1), st.lists(st.integers(0, 5), min_size=1, max_size=12))
def test_transform_lands_in_r2_and_conserves_totals(idx, weights):
    _, mi = ANY[idx]
    mi = mi.rational()
    t = _point_in_region(mi, weights)
    rep = transform(t, mi)
    assert rep.verified
    assert 1 <= rep.category <= 6
    out = rep.output
    # Second route: the polytope builder, not the named slack list.
    assert contains_point(region_r2(mi), out)
    assert out["R1s"] + out["R1o"] == t["R1s"] + t["R1o"]
    assert out["R2s"] + out["R2o"] == t["R2s"] + t["R2o"]
    assert out["R1o"] <= t["R1o"] and out["R2o"] <= t["R2o"]


@pytest.mark.parametrize("ch_mi", ANY[:10])
def test_every_vertex_is_transformed(ch_mi):
    _, mi = ch_mi
    for v in vertices(region_theorem1(mi)):
        assert transform(v, mi).verified


@settings(max_examples=40, deadline=None)
@given(st.integers(0, len(ANY) - 1), st.lists(st.fractions(0, 2, max_denominator=50), min_size=4, max_size=4))
def test_named_slacks_agree_with_polytope(idx, vals):
    _, mi = ANY[idx]
    mi = mi.rational()
    ok = all(s >= 0 for _, s in r2_checks(vals, mi))
    assert ok == contains_point(region_r2(mi), RateTuple.from_sequence(AXES, vals))


def test_category_predicates_match_definitions():
    _, mi = CORPUS[0]
    mi = mi.rational()
    b1, b2, a1, a2, c = _caps(mi)
    for v in vertices(region_theorem1(mi)):
        r1o, r2o = v["R1o"], v["R2o"]
        cat = classify(v, mi)
        if cat == 1:
            assert r1o <= a1 and r2o <= a2 and r1o + r2o <= c
        elif cat == 2:
            assert r1o > a1 and r2o <= b2
        elif cat == 4:
            assert r1o <= b1 and r2o > a2
        elif cat == 6:
            assert r1o > a1 and r2o > a2


def test_each_category_is_reached():
    seen = set()
    for _, mi in any_corpus(150, seed=8):
        for v in vertices(region_theorem1(mi)):
            seen.add(classify(v, mi))
    assert seen == {1, 2, 3, 4, 5, 6}


def test_category_two_output():
    for _, mi in ANY:
        mi = mi.rational()
        for v in vertices(region_theorem1(mi)):
            if classify(v, mi) == 2:
                rep = transform(v, mi)
                assert rep.output["R1o"] == mi.eve_given_rest({1})
                assert rep.output["R2o"] == v["R2o"]
                return
    pytest.fail("no category-2 vertex found")


def test_float_tuples_are_accepted():
    _, mi = CORPUS[1]
    v = vertices(region_theorem1(mi))[-1]
    rep = transform([float(v[a]) for a in AXES], mi)
    assert rep.verified
    assert rep.to_json()["category"] == rep.category


def test_tuple_outside_region_is_rejected():
    _, mi = CORPUS[2]
    with pytest.raises(SplitError):
        transform((10, 10, 10, 10), mi)
    with pytest.raises(SplitError):
        classify({"R1s": 0, "R1o": 9, "R2s": 0, "R2o": 0}, mi)


def test_xor_witness_counterexample():
    ch, px = xor_witness()
    mi = mi_bundle(ch, px)
    assert check_gap_condition(mi)
    c = counterexample_tuple(mi.rational())
    assert c.aligned(AXES) == (0, 0, 0, 1)
    assert refutes_two_family_region(mi)


def test_gap_condition_consequences():
    rng_hits = 0
    for _, mi in any_corpus(300, seed=13):
        if not check_gap_condition(mi):
            continue
        rng_hits += 1
        ex = mi.rational()
        c = counterexample_tuple(ex)
        assert not contains_point(region_theorem1(ex), c)
        unclipped = ex.main({1}) >= ex.eve({1}) and ex.main_marginal({2}) >= ex.eve_given_rest({2})
        assert contains_point(region_tekin_r1(ex), c) == unclipped
        if unclipped:
            assert c["R1s"] + c["R2s"] == max(ex.main({1, 2}) - ex.eve({1, 2}), Fraction(0))
    assert rng_hits > 20


def test_search_finds_planted_witness_first():
    w = search_counterexample([2, 2], 2, 2, 10, seed=0, planted=[xor_witness()])
    assert w is not None and w.trial == 0
    assert w.tuple.aligned(AXES) == (0, 0, 0, 1)


def test_search_is_deterministic_and_verified():
    a = search_counterexample([2, 2], 2, 2, 200, seed=4)
    b = search_counterexample([2, 2], 2, 2, 200, seed=4)
    assert a is not None and a.trial == b.trial
    np.testing.assert_array_equal(a.channel.transition, b.channel.transition)
    ex = a.mi.rational()
    assert contains_point(region_tekin_r1(ex), a.tuple)
    assert not contains_point(region_theorem1(ex), a.tuple)


def test_search_needs_a_trial():
    with pytest.raises(SplitError):
        search_counterexample([2, 2], 2, 2, 0)
