from fractions import Fraction

import numpy as np
import pytest

from conftest import any_corpus, channel_corpus
from macwt.channel import deterministic_channel, mi_bundle, random_channel, uniform_inputs
from macwt.polytope import PolytopeError, contains_point, equals, is_subset, vertices
from macwt.regions import (
    GUARD_AXES,
    LIFTED_AXES,
    RegionError,
    RegionKind,
    build_region,
    epsilon_strict_region,
    hull_over_inputs,
    lemma1_row_count,
    lifted_region,
    project_lifted,
    project_rate_split,
    rate_axes,
    rate_split_system,
    region_lemma1,
    region_r2,
    region_tekin_r1,
    region_theorem1,
)

SMALL = channel_corpus(12, seed=11)


def _blind_eve():
    """Y = (X1, X2) noiseless, Z constant."""
    ch = deterministic_channel([2, 2], 4, 1, lambda a, b: 2 * a + b, lambda a, b: 0)
    return ch, mi_bundle(ch, uniform_inputs([2, 2]))


def test_constant_eavesdropper_gives_mac_region():
    _, mi = _blind_eve()
    r, r1 = region_theorem1(mi), region_tekin_r1(mi)
    assert equals(r, r1)
    # Unit square of total rates per user; any split between secret and open.
    assert contains_point(r, (Fraction(1), 0, Fraction(1), 0))
    assert contains_point(r, (0, Fraction(1), Fraction(1, 2), Fraction(1, 2)))
    assert not contains_point(r, (Fraction(1), Fraction(1, 100), 0, 0))


def test_axes():
    assert rate_axes(2) == ("R1s", "R1o", "R2s", "R2o")
    assert LIFTED_AXES[-2:] == GUARD_AXES


def test_theorem1_row_values():
    # XOR main channel, Z = X1: every cap is 0 or 1.
    ch = deterministic_channel([2, 2], 2, 2, lambda a, b: a ^ b, lambda a, b: a)
    r = region_theorem1(mi_bundle(ch, uniform_inputs([2, 2])))
    verts = {v.aligned(r.axes) for v in vertices(r)}
    # R1s <= 0 from the secrecy cap and R1s+R2s+R2o <= I(X1,X2;Y) - I(X1;Z) = 0
    # leave only user 1's open rate, capped by the sum rate 1.
    assert verts == {(0, 0, 0, 0), (0, 1, 0, 0)}


@pytest.mark.parametrize("ch_mi", SMALL[:6])
def test_lemma1_two_users_equals_theorem1(ch_mi):
    _, mi = ch_mi
    assert equals(region_lemma1(mi), region_theorem1(mi))


def test_lemma1_three_users_has_every_pair():
    ch = random_channel([2, 2, 2], 2, 2, np.random.default_rng(5))
    mi = mi_bundle(ch, uniform_inputs([2, 2, 2]))
    p = region_lemma1(mi, 3)
    assert p.dim == 6
    assert lemma1_row_count(3) == 26
    assert len([r for r in p.rows if not p.is_nonnegativity(r)]) == 26


def test_lemma1_row_count_formula():
    assert [lemma1_row_count(k) for k in (1, 2, 3, 4)] == [2, 8, 26, 80]


def test_lemma1_rejects_bad_user_counts():
    _, mi = _blind_eve()
    with pytest.raises(RegionError):
        region_lemma1(mi, 3)
    with pytest.raises(RegionError):
        region_lemma1(mi, 5)


def test_two_user_builders_reject_three_users():
    ch = random_channel([2, 2, 2], 2, 2, np.random.default_rng(6))
    mi = mi_bundle(ch, uniform_inputs([2, 2, 2]))
    for f in (region_theorem1, region_tekin_r1, region_r2, lifted_region):
        with pytest.raises(RegionError):
            f(mi)


@pytest.mark.parametrize("ch_mi", any_corpus(10))
def test_theorem1_inside_tekin_region(ch_mi):
    _, mi = ch_mi
    assert is_subset(region_theorem1(mi), region_tekin_r1(mi))


@pytest.mark.parametrize("ch_mi", SMALL)
def test_r2_inside_theorem1_without_clipping(ch_mi):
    _, mi = ch_mi
    assert is_subset(region_r2(mi), region_theorem1(mi))


def test_r2_can_leave_theorem1_when_caps_clip():
    # Counted, not asserted per channel: clipping is what breaks the inclusion.
    hits = sum(not is_subset(region_r2(mi), region_theorem1(mi)) for _, mi in any_corpus(60, seed=3))
    assert hits > 0


def test_eps_strict_at_zero_is_theorem1():
    for _, mi in SMALL[:4]:
        assert equals(epsilon_strict_region(mi, 0), region_theorem1(mi))


def test_eps_strict_shrinks_and_clips():
    _, mi = SMALL[0]
    assert is_subset(epsilon_strict_region(mi, 0.01), region_theorem1(mi))
    huge = epsilon_strict_region(mi, 10)
    assert [v.aligned(huge.axes) for v in vertices(huge)] == [(0, 0, 0, 0)]
    with pytest.raises(RegionError):
        epsilon_strict_region(mi, -0.1)


@pytest.mark.parametrize("ch_mi", SMALL[:8])
def test_lifted_projection_at_zero(ch_mi):
    _, mi = ch_mi
    assert equals(project_lifted(mi, 0), epsilon_strict_region(mi, 0))


def _synergy(mi):
    return float(mi.main({1}) + mi.main({2}) - mi.main({1, 2}))


def test_lifted_projection_with_eps_when_synergy_covers_it():
    eps = 0.01
    checked = 0
    for _, mi in channel_corpus(30, seed=19):
        if _synergy(mi) >= eps:
            assert equals(project_lifted(mi, eps), epsilon_strict_region(mi, eps))
            checked += 1
    assert checked >= 10


def test_lifted_projection_gains_a_sum_row_when_synergy_is_small():
    eps = Fraction(1, 100)
    for _, mi in channel_corpus(200, seed=19):
        if _synergy(mi) < float(eps):
            proj = project_lifted(mi, eps)
            strict = epsilon_strict_region(mi, eps)
            assert is_subset(proj, strict) and not equals(proj, strict)
            ex = mi.rational()
            bound = ex.main({1}) + ex.main({2}) - ex.eve({1, 2}) - 2 * eps
            assert all(v["R1s"] + v["R2s"] <= bound for v in vertices(proj))
            return
    pytest.skip("no low-synergy channel in the sample")


def test_lifted_region_shape():
    _, mi = SMALL[0]
    p = lifted_region(mi, 0)
    assert p.axes == LIFTED_AXES
    assert len(vertices(p)) > 0


@pytest.mark.parametrize("ch_mi", SMALL[:8])
def test_rate_split_projection_is_r2(ch_mi):
    _, mi = ch_mi
    assert equals(project_rate_split(mi), region_r2(mi))


def test_rate_split_full_set_is_equality():
    _, mi = SMALL[1]
    p = rate_split_system(mi)
    ex = mi.rational()
    for v in vertices(p):
        total = v["R1o"] + v["R2o"] + v["R1x"] + v["R2x"]
        assert total == ex.eve_given_rest({1, 2})


def test_build_region_dispatch():
    _, mi = SMALL[2]
    assert equals(build_region("theorem1", mi), region_theorem1(mi))
    assert equals(build_region(RegionKind.DERIVED_R2, mi), region_r2(mi))
    assert build_region("lifted", mi).axes == LIFTED_AXES
    with pytest.raises(ValueError):
        build_region("nope", mi)


def test_hull_over_inputs():
    ch, _ = SMALL[3]
    fam = [uniform_inputs([2, 2]), [np.array([0.2, 0.8]), np.array([0.7, 0.3])]]
    h = hull_over_inputs(ch, fam)
    for px in fam:
        assert is_subset(region_theorem1(mi_bundle(ch, px)), h)
    assert equals(hull_over_inputs(ch, fam[:1]), region_theorem1(mi_bundle(ch, fam[0])))
    with pytest.raises(RegionError):
        hull_over_inputs(ch, [])


def test_four_user_lemma_needs_raised_dimension_cap():
    ch = random_channel([2, 2, 2, 2], 2, 2, np.random.default_rng(9))
    p = region_lemma1(mi_bundle(ch, uniform_inputs([2] * 4)), 4)
    assert p.dim == 8
    with pytest.raises(PolytopeError):
        vertices(p)
