import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csarbandit.core import (
    BanditInstance,
    HorizonReached,
    Noise,
    RegretLedger,
    gap_profile,
    make_instance,
    pull,
    pull_mean,
    record_pull,
)
from csarbandit.exceptions import InvalidArm, InvalidParams, InvalidSubset


def test_zero_noise_pull_is_the_sum():
    inst = BanditInstance([3, 2, 1, 0], 2, "zero")
    assert pull(inst, [1, 3], np.random.default_rng(0)) == 2.0
    # 0-based arms: the subset written {1,3} with 1-based labels is [0, 2]
    assert pull(inst, [0, 2], np.random.default_rng(0)) == 4.0


def test_bernoulli_all_ones_pays_k(rng):
    inst = BanditInstance(np.ones(6), 3, "bernoulli")
    for subset in ([0, 1, 2], [3, 4, 5], [0, 2, 4]):
        assert pull(inst, subset, rng) == 3.0
        assert pull_mean(inst, subset, 17, rng) == 3.0


def test_gaussian_law_of_large_numbers():
    inst = BanditInstance([0.0, 0.0], 1, "gaussian")
    rng = np.random.default_rng(7)
    draws = [pull(inst, [1], rng) for _ in range(10**6 // 10)]
    # 1e5 single pulls plus one batched mean of 9e5 pulls = 1e6 pulls total
    total = sum(draws) + 9 * 10**5 * pull_mean(inst, [1], 9 * 10**5, rng)
    assert abs(total / 10**6) < 0.01


def test_pull_mean_matches_repeated_pulls_in_distribution():
    inst = BanditInstance([0.3, 0.8, 0.1, 0.5], 2, "bernoulli")
    rng = np.random.default_rng(3)
    batched = np.array([pull_mean(inst, [0, 1], 20, rng) for _ in range(4000)])
    looped = np.array([np.mean([pull(inst, [0, 1], rng) for _ in range(20)]) for _ in range(4000)])
    assert abs(batched.mean() - 1.1) < 0.01 and abs(looped.mean() - 1.1) < 0.01
    # variance of the mean of 20 pulls: (0.3*0.7 + 0.8*0.2)/20
    assert batched.var() == pytest.approx(0.37 / 20, rel=0.1)
    assert looped.var() == pytest.approx(0.37 / 20, rel=0.1)


@pytest.mark.parametrize("subset, exc", [([0, 0], InvalidSubset), ([0], InvalidSubset), ([0, 9], InvalidArm)])
def test_bad_subsets(subset, exc, rng):
    inst = BanditInstance([1, 2, 3, 4], 2, "gaussian")
    with pytest.raises(exc):
        pull(inst, subset, rng)


def test_instance_validation():
    with pytest.raises(InvalidParams):
        BanditInstance([1, 2, 3], 2)
    with pytest.raises(InvalidParams):
        BanditInstance([0.5, 1.5], 1, "bernoulli")
    with pytest.raises(InvalidParams):
        BanditInstance([0.5, np.nan], 1)
    with pytest.raises(InvalidParams):
        BanditInstance([0.5, 0.2], 1, "cauchy")
    assert BanditInstance([1, 2], 1, "zero").noise is Noise.ZERO


def test_instance_json_round_trip():
    inst = make_instance("two_gap", 6, 2, delta_plus=1.0, delta_minus=0.25)
    doc = json.loads(inst.to_json())
    assert doc == {"n": 6, "k": 2, "means": [1.0, 0.0, -0.25, -0.25, -0.25, -0.25], "noise": "gaussian"}
    assert BanditInstance.from_json(inst.to_json()) == inst
    with pytest.raises(InvalidParams):
        BanditInstance.from_dict({"n": 5, "k": 2, "means": [1, 2, 3, 4]})


def test_ranking_ties_go_to_lower_index():
    inst = BanditInstance([1, 3, 3, 0], 1)
    assert list(inst.ranking()) == [1, 2, 0, 3]
    assert inst.optimal_subset() == frozenset({1})


@pytest.mark.parametrize(
    "means, k, gaps, min_gap",
    [
        ([5, 4, 3, 2], 2, [2, 1, 1, 2], 1),
        ([1, 1, 1, 1], 2, [0, 0, 0, 0], 0),
        ([0.9, 0.5, 0.3, 0.1], 1, [0.4, 0.4, 0.6, 0.8], 0.4),
    ],
)
def test_gap_profile(means, k, gaps, min_gap):
    prof = gap_profile(BanditInstance(means, k))
    np.testing.assert_allclose(prof.gaps, gaps, atol=1e-15)
    assert prof.min_gap == pytest.approx(min_gap, abs=1e-15)


def test_ledger_examples():
    inst = BanditInstance([5, 4, 3, 2], 2, "zero")
    ledger = RegretLedger(inst)
    record_pull(ledger, inst, [0, 2])  # 9 - 8
    assert ledger.regret == 1.0
    record_pull(ledger, inst, [0, 1])
    assert ledger.regret == 1.0 and ledger.pulls == 2


def test_ledger_tightness_instance():
    n, k, dp, dm = 10, 3, 1.0, 0.1
    inst = make_instance("two_gap", n, k, delta_plus=dp, delta_minus=dm)
    ledger = RegretLedger(inst).record([5, 6, 7])
    assert ledger.regret == pytest.approx((k - 1) * dp + k * dm, abs=1e-12)


def test_ledger_horizon_truncates():
    inst = BanditInstance([1, 0, 0, 0], 1, "zero")
    ledger = RegretLedger(inst, horizon=10)
    ledger.record([1], 4)
    with pytest.raises(HorizonReached):
        ledger.record([2], 100)
    assert ledger.pulls == 10 and ledger.regret == 10.0 and ledger.remaining == 0
    assert ledger.regret_at(2) == 2.0 and ledger.regret_at(10) == 10.0


def test_ledger_rejects_foreign_instance():
    a = BanditInstance([1, 0], 1)
    b = BanditInstance([0, 1], 1)
    with pytest.raises(InvalidParams):
        record_pull(RegretLedger(a), b, [0])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=2, max_size=12), st.data())
def test_ledger_is_monotone(means, data):
    k = data.draw(st.integers(1, len(means) // 2))
    inst = BanditInstance(means, k, "zero")
    ledger = RegretLedger(inst)
    last = 0.0
    for _ in range(5):
        subset = data.draw(st.permutations(range(len(means)))).__getitem__(slice(0, k))
        ledger.record(subset, data.draw(st.integers(1, 4)))
        assert ledger.regret >= last
        last = ledger.regret
    ledger.record(sorted(inst.optimal_subset()))
    assert ledger.regret == last


def test_generators():
    np.testing.assert_allclose(
        make_instance("bernoulli_epsilon_k", 6, 2, eps=0.2).means, [0.6, 0.6, 0.5, 0.5, 0.5, 0.5]
    )
    assert make_instance("bernoulli_epsilon_k", 6, 2, eps=0.2).noise is Noise.BERNOULLI
    np.testing.assert_allclose(make_instance("two_gap", 4, 2, delta_plus=1, delta_minus=0.1).means, [1, 0, -0.1, -0.1])
    planted = make_instance("planted_subset", 4, 2, subset=[0, 1], eps=0.3)
    np.testing.assert_allclose(planted.means, [0.15, 0.15, 0, 0])
    assert planted.noise is Noise.GAUSSIAN
    np.testing.assert_array_equal(make_instance("flat_null", 4, 2).means, 0)
    np.testing.assert_array_equal(make_instance("equal_gap", 4, 1, gap=0.5).means, [0.5, 0, 0, 0])
    uni = make_instance("uniform_bernoulli", 24, 2, np.random.default_rng(0))
    assert uni.noise is Noise.BERNOULLI and uni.means.min() >= 0 and uni.means.max() <= 1
    assert make_instance("uniform_gaussian", 8, 2, 0, noise="zero").noise is Noise.ZERO


@pytest.mark.parametrize(
    "kind, params",
    [
        ("nope", {}),
        ("two_gap", {"delta_plus": 1}),
        ("two_gap", {"delta_plus": 1, "delta_minus": -1}),
        ("bernoulli_epsilon_k", {"eps": 2.0}),
        ("planted_subset", {"subset": [0], "eps": 0.1}),
    ],
)
def test_generator_errors(kind, params):
    with pytest.raises(InvalidParams):
        make_instance(kind, 6, 2, **params)


def test_optimal_value():
    inst = make_instance("two_gap", 8, 3, delta_plus=2, delta_minus=1)
    assert inst.optimal_value == 4.0
    assert math.isclose(inst.subset_mean([0, 1, 2]), 4.0)
