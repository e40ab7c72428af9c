import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from macwt.channel import (
    ChannelError,
    DMWiretapChannel,
    as_rational,
    channel_from_json,
    channel_to_json,
    check_inputs,
    deterministic_channel,
    entropy,
    joint_distribution,
    load_channel,
    mi_bundle,
    mutual_information,
    random_channel,
    save_channel,
    subsets,
    uniform_inputs,
    validate_channel,
)
from oracles import brute_mi_table

seeds = st.integers(0, 2**32 - 1)


def _draw(seed, sizes=(2, 2), y=2, z=2, uniform=True):
    rng = np.random.default_rng(seed)
    ch = random_channel(sizes, y, z, rng)
    px = uniform_inputs(sizes) if uniform else [rng.dirichlet(np.ones(s)) for s in sizes]
    return ch, px


def test_random_channel_is_valid():
    ch, _ = _draw(0, (2, 3), 3, 2)
    assert validate_channel(ch) == []
    assert ch.num_users == 2 and ch.input_sizes == (2, 3)
    assert ch.y_size == 3 and ch.z_size == 2


def test_validation_reports_each_violation():
    t = np.full((2, 2, 2, 2), 0.25)
    t[0, 0, 0, 0] = -0.25
    t[1, 1, 1, 1] = 0.5
    kinds = {v.kind for v in validate_channel(DMWiretapChannel(t))}
    assert kinds == {"negative", "row-sum"}


def test_transition_is_read_only():
    ch, _ = _draw(1)
    with pytest.raises(ValueError):
        ch.transition[0, 0, 0, 0] = 1.0


def test_marginals():
    ch, _ = _draw(2)
    np.testing.assert_allclose(ch.main_channel().sum(axis=-1), 1.0)
    np.testing.assert_allclose(ch.eve_channel().sum(axis=-1), 1.0)


def test_check_inputs_rejects_bad_pmfs():
    ch, _ = _draw(3)
    with pytest.raises(ChannelError):
        check_inputs(ch, [[0.5, 0.5]])
    with pytest.raises(ChannelError):
        check_inputs(ch, [[0.6, 0.6], [0.5, 0.5]])
    with pytest.raises(ChannelError):
        check_inputs(ch, [[0.5, 0.5, 0.0], [0.5, 0.5]])


def test_entropy_of_uniform():
    joint = np.full((4, 2), 1 / 8)
    assert entropy(joint, [0]) == pytest.approx(2.0)
    assert entropy(joint, [0, 1]) == pytest.approx(3.0)
    assert entropy(joint, []) == 0.0


def test_mutual_information_requires_disjoint_sets():
    with pytest.raises(ChannelError):
        mutual_information(np.full((2, 2), 0.25), [0], [0])


def test_noiseless_xor_values():
    ch = deterministic_channel([2, 2], 2, 2, lambda a, b: a ^ b, lambda a, b: a)
    mi = mi_bundle(ch, uniform_inputs([2, 2]))
    assert float(mi.main({1})) == pytest.approx(1.0)
    assert float(mi.main({1, 2})) == pytest.approx(1.0)
    assert float(mi.main_marginal({2})) == pytest.approx(0.0)
    assert float(mi.eve({1})) == pytest.approx(1.0)
    assert float(mi.eve_given_rest({2})) == pytest.approx(0.0)


@settings(max_examples=40, deadline=None)
@given(seeds, st.booleans())
def test_bundle_matches_kl_oracle(seed, uniform):
    ch, px = _draw(seed, uniform=uniform)
    mi = mi_bundle(ch, px)
    for (name, s), v in brute_mi_table(ch.transition, px).items():
        assert float(getattr(mi, name)(s)) == pytest.approx(v, abs=1e-9)


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_chain_rules_hold_exactly_in_rational_form(seed):
    ch, px = _draw(seed, uniform=False)
    mi = mi_bundle(ch, px).rational()
    # I(X1,X2;Y) = I(X1;Y) + I(X2;Y|X1); likewise for Z.
    assert mi.main({1, 2}) == mi.main_marginal({1}) + mi.main({2})
    assert mi.eve({1, 2}) == mi.eve({1}) + mi.eve_given_rest({2})
    assert mi.eve({1, 2}) == mi.eve({2}) + mi.eve_given_rest({1})


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_mutual_informations_nonnegative(seed):
    ch, px = _draw(seed, (2, 2, 2), 2, 2, uniform=False)
    mi = mi_bundle(ch, px)
    for s in subsets(mi.users, nonempty=True):
        for f in (mi.main, mi.eve, mi.eve_given_rest, mi.main_marginal):
            assert f(s) >= 0


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_relabelling_users_permutes_bundle(seed):
    ch, px = _draw(seed, (2, 3), 2, 2, uniform=False)
    a = mi_bundle(ch, px)
    b = mi_bundle(ch.relabel_users([1, 0]), px[::-1])
    swap = {1: 2, 2: 1}
    for s in subsets(a.users, nonempty=True):
        t = {swap[k] for k in s}
        assert float(a.main(s)) == pytest.approx(float(b.main(t)), abs=1e-12)
        assert float(a.eve(s)) == pytest.approx(float(b.eve(t)), abs=1e-12)


def test_joint_distribution_sums_to_one():
    ch, px = _draw(5, (3, 2), 2, 3, uniform=False)
    assert joint_distribution(ch, px).sum() == pytest.approx(1.0)


def test_bundle_user_cap():
    ch, px = _draw(6, (2, 2, 2), 2, 2)
    with pytest.raises(ChannelError):
        mi_bundle(ch, px, max_users=2)


def test_as_rational_grid():
    assert as_rational(0.5) == as_rational(0.5000000000001)
    assert as_rational(3) == 3
    assert as_rational(0.1).denominator <= 10**12


def test_json_round_trip(tmp_path):
    ch, px = _draw(7, uniform=False)
    save_channel(tmp_path / "c.json", ch, px)
    ch2, px2 = load_channel(tmp_path / "c.json")
    np.testing.assert_array_equal(ch.transition, ch2.transition)
    np.testing.assert_array_equal(px[0], px2[0])
    doc = channel_to_json(ch)
    assert "inputs" not in doc
    assert channel_from_json(json.loads(json.dumps(doc)))[1] is None


def test_malformed_channel_documents(tmp_path):
    with pytest.raises(ChannelError):
        channel_from_json({"num_users": 2})
    bad = channel_to_json(deterministic_channel([2, 2], 2, 2, lambda a, b: a, lambda a, b: b))
    bad["transition"][0][0][0][0] = 0.5
    with pytest.raises(ChannelError):
        channel_from_json(bad)
    (tmp_path / "x.json").write_text("{not json")
    with pytest.raises(ChannelError):
        load_channel(tmp_path / "x.json")


def test_bsc_capacity_value():
    p = 0.11
    t = np.zeros((2, 1, 2, 1))
    for x in range(2):
        t[x, 0, x, 0], t[x, 0, 1 - x, 0] = 1 - p, p
    mi = mi_bundle(DMWiretapChannel(t), uniform_inputs([2, 1]))
    h = -p * math.log2(p) - (1 - p) * math.log2(1 - p)
    assert float(mi.main({1})) == pytest.approx(1 - h, abs=1e-12)
