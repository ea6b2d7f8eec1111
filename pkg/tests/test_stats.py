import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import kolmogorov as scipy_kolmogorov

from renewal_immigration import stats as rs
from renewal_immigration.streams import stream

from oracles import brute_force_energy, brute_force_ks


def test_ks_two_sample_trivia():
    assert rs.ks_two_sample([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]).statistic == 0.0
    assert rs.ks_two_sample([1.0, 2.0], [5.0, 6.0, 7.0]).statistic == 1.0


def test_ks_two_sample_enumerated_example():
    res = rs.ks_two_sample([1.0, 2.0, 3.0], [1.5, 2.5])
    assert res.statistic == pytest.approx(1.0 / 3.0, abs=1e-15)
    assert res.statistic == pytest.approx(brute_force_ks([1, 2, 3], [1.5, 2.5]), abs=1e-15)


def test_ks_two_sample_symmetric():
    rng = stream(0)
    a, b = rng.normal(size=40), rng.normal(size=25)
    assert rs.ks_two_sample(a, b).statistic == rs.ks_two_sample(b, a).statistic
    assert rs.ks_two_sample(a, b).p_value == rs.ks_two_sample(b, a).p_value


def test_ks_two_sample_matches_brute_force_on_random_instances():
    rng = stream(1)
    for _ in range(100):
        n, m = rng.integers(1, 21, size=2)
        # Mix continuous values and ties.
        a = np.round(rng.normal(size=n), 1)
        b = np.round(rng.normal(size=m), 1)
        assert rs.ks_two_sample(a, b).statistic == pytest.approx(brute_force_ks(a, b), abs=1e-14)


@given(st.integers(min_value=0, max_value=10**6))
@settings(max_examples=40, deadline=None)
def test_ks_rank_invariance(seed):
    rng = stream(seed)
    a = rng.normal(size=30)
    b = rng.normal(size=20) + 0.3
    base = rs.ks_two_sample(a, b).statistic
    mapped = rs.ks_two_sample(np.expm1(a), np.expm1(b)).statistic
    assert base == pytest.approx(mapped, abs=1e-14)


def test_ks_one_sample_examples():
    res = rs.ks_one_sample([0.0], lambda x: np.full_like(np.asarray(x, dtype=float), 0.5))
    assert res.statistic == 0.5
    n = 10
    samples = np.arange(1, n + 1) / n
    res = rs.ks_one_sample(samples, lambda x: np.asarray(x, dtype=float))
    assert res.statistic == pytest.approx(1.0 / n, abs=1e-15)


def test_ks_one_sample_rejects_flat_zero_cdf():
    with pytest.raises(ValueError):
        rs.ks_one_sample([1.0, 2.0], lambda x: np.zeros_like(np.asarray(x, dtype=float)))


def test_ks_one_sample_rejects_decreasing_cdf():
    with pytest.raises(ValueError):
        rs.ks_one_sample([1.0, 2.0], lambda x: 1.0 - np.asarray(x, dtype=float) / 10.0)


def test_kolmogorov_sf_matches_scipy():
    for x in [0.3, 0.5, 0.8, 1.0, 1.36, 2.0, 3.0]:
        assert rs.kolmogorov_sf(x) == pytest.approx(float(scipy_kolmogorov(x)), abs=1e-12)


def test_energy_distance_trivia():
    rng = stream(2)
    a = rng.normal(size=(20, 2))
    res = rs.energy_distance(a, a.copy(), 30, stream(3))
    assert res.statistic == pytest.approx(0.0, abs=1e-12)
    zeros = np.zeros((15, 1))
    ones = np.ones((15, 1))
    res = rs.energy_distance(zeros, ones, 30, stream(4))
    assert res.statistic == pytest.approx(2.0, abs=1e-12)
    assert res.p_value >= 1.0 / 31.0


def test_energy_distance_matches_brute_force():
    rng = stream(5)
    for _ in range(10):
        a = rng.normal(size=(rng.integers(3, 12), 3))
        b = rng.normal(size=(rng.integers(3, 12), 3)) + 0.5
        res = rs.energy_distance(a, b, 19, stream(6))
        assert res.statistic == pytest.approx(brute_force_energy(a, b), rel=1e-10)


def test_energy_distance_validation():
    rng = stream(7)
    with pytest.raises(ValueError):
        rs.energy_distance(np.zeros((5, 2)), np.zeros((5, 3)), 30, rng)
    with pytest.raises(ValueError):
        rs.energy_distance(np.zeros((5, 2)), np.zeros((5, 2)), 5, rng)


def test_energy_distance_subsamples_beyond_cap(monkeypatch):
    monkeypatch.setattr(rs, "ENERGY_EXACT_ROWS", 100)
    rng = stream(8)
    a = rng.normal(size=(80, 1))
    b = rng.normal(size=(80, 1))
    res = rs.energy_distance(a, b, 19, stream(9))
    assert "subsampled" in res.note
    assert res.n + res.m == 100


def test_energy_permutation_null_calibration():
    # Under exchangeable rows the rejection rate at alpha stays within
    # binomial noise of alpha.
    alpha = 0.05
    trials = 200
    rejections = 0
    for trial in range(trials):
        rng = stream((10, trial))
        a = rng.normal(size=(30, 2))
        b = rng.normal(size=(30, 2))
        res = rs.energy_distance(a, b, 99, rng)
        rejections += res.p_value < alpha
    limit = alpha + 3.0 * math.sqrt(alpha * (1 - alpha) / trials)
    assert rejections / trials <= limit


def test_chisq_gof_examples():
    res = rs.chisq_gof_counts([50, 50], [0.5, 0.5], min_expected=1.0)
    assert res.statistic == 0.0
    assert res.p_value == pytest.approx(1.0, abs=1e-12)
    res = rs.chisq_gof_counts([60, 40], [0.5, 0.5], min_expected=1.0)
    assert res.statistic == pytest.approx(4.0, abs=1e-12)


def test_chisq_gof_impossible_bin():
    res = rs.chisq_gof_counts([5, 5, 3], [0.5, 0.5, 0.0], min_expected=0.0)
    assert math.isinf(res.statistic)
    assert res.p_value == 0.0


def test_chisq_gof_pooling_and_errors():
    # Tail bins with tiny expectations pool into one.
    res = rs.chisq_gof_counts([96, 3, 1, 0], [0.96, 0.02, 0.01, 0.01], min_expected=5.0)
    assert "bins=2" in res.note
    with pytest.raises(ValueError):
        rs.chisq_gof_counts([10], [1.0], min_expected=5.0)
    with pytest.raises(ValueError):
        rs.chisq_gof_counts([5, 5], [0.7, 0.7], min_expected=1.0)


def test_p_value_monotone_in_statistic():
    n, m = 200, 200
    en = math.sqrt(n * m / (n + m))
    stats = [0.05, 0.1, 0.2, 0.4]
    ps = [rs.kolmogorov_sf(en * d) for d in stats]
    assert all(p1 >= p2 for p1, p2 in zip(ps, ps[1:]))
