import math

import numpy as np
import pytest
from scipy.integrate import quad

from renewal_immigration import diagnostics as dg
from renewal_immigration import distributions as dist
from renewal_immigration import kernels as kn
from renewal_immigration.streams import stream

EXP_LAW = dist.Exponential(1.0)
MM_INF = kn.Indicator(dist.Exponential(1.0))
ZERO_KERNEL = kn.DeterministicTable((0.0,), (0.0,))


def test_dri_zero_kernel_convergent():
    report = dg.dri_mean_check(ZERO_KERNEL, 20, 4, 10, stream(0))
    assert np.all(report.terms == 0.0)
    assert report.verdict == dg.CONVERGENT_EVIDENCE
    assert report.residual_estimate == 0.0


def test_dri_partial_sums_nondecreasing():
    for spec in [MM_INF, kn.SpikeTrain(), kn.ScaledExpDecay(dist.PointMass(1.0), 1.0)]:
        report = dg.dri_mean_check(spec, 30, 4, 200, stream(1))
        assert np.all(np.diff(report.partial_sums) >= -1e-15)
        assert np.all(report.terms >= 0.0)


def test_dri_exp_decay_geometric_sum():
    spec = kn.ScaledExpDecay(dist.PointMass(1.0), 1.0)
    report = dg.dri_mean_check(spec, 40, 8, 5, stream(2))
    assert report.verdict == dg.CONVERGENT_EVIDENCE
    # Deterministic kernel with a left-anchored grid: the partial sum is the
    # exact geometric series.
    assert report.partial_sums[-1] == pytest.approx(1.0 / (1.0 - math.exp(-1.0)), rel=1e-12)
    path_report = dg.dri_path_check(spec, 40, 5, stream(3))
    assert path_report.verdict == dg.CONVERGENT_EVIDENCE
    assert path_report.partial_sums[-1] == pytest.approx(1.0 / (1.0 - math.exp(-1.0)), rel=1e-12)


def test_dri_pareto_indicator_divergent():
    spec = kn.Indicator(dist.Pareto(0.8, 1.0))
    report = dg.dri_mean_check(spec, 1000, 4, 500, stream(4))
    assert report.verdict == dg.DIVERGENT_EVIDENCE
    assert report.partial_sums[999] > 5.0
    # Term oracle: P(eta > k) = k^{-0.8} for k >= 1.
    for k in (1, 4, 16):
        se = math.sqrt(report.terms[k] * (1 - report.terms[k]) / 500 + 1e-12)
        assert abs(report.terms[k] - k**-0.8) < 4.0 * se + 0.02


def test_dri_indicator_exponential_terms_and_agreement():
    report_m = dg.dri_mean_check(MM_INF, 25, 8, 4000, stream(5))
    report_p = dg.dri_path_check(MM_INF, 25, 4000, stream(5))
    # Absorbed kernel: both criteria agree (here, both convergent).
    assert report_m.verdict == dg.CONVERGENT_EVIDENCE
    assert report_p.verdict == dg.CONVERGENT_EVIDENCE
    for k in (0, 1, 2, 4):
        target = math.exp(-k)
        se = math.sqrt(target * (1 - target) / 4000) + 1e-9
        assert abs(report_p.terms[k] - target) < 4.0 * se


def test_dri_table_path_terms_exact():
    table = kn.DeterministicTable((0.0, 4.0), (1.0, 0.0))
    report = dg.dri_path_check(table, 8, 3, stream(6))
    assert list(report.terms) == [1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]
    assert report.verdict == dg.CONVERGENT_EVIDENCE


def test_dri_spike_separation():
    # Same seed = same paths: the path term dominates the mean term exactly,
    # and the verdicts split.
    mean_report = dg.dri_mean_check(kn.SpikeTrain(), 400, 4, 1000, stream(7))
    path_report = dg.dri_path_check(kn.SpikeTrain(), 400, 1000, stream(7))
    assert mean_report.verdict == dg.CONVERGENT_EVIDENCE
    assert path_report.verdict == dg.DIVERGENT_EVIDENCE
    assert np.all(path_report.terms >= mean_report.terms - 1e-12)
    assert np.all(path_report.terms[1:] == 1.0)


def test_dri_path_dominates_mean_paired():
    for spec in [MM_INF, kn.ScaledExpDecay(dist.Exponential(1.0), 0.5)]:
        mean_report = dg.dri_mean_check(spec, 20, 8, 500, stream(8))
        path_report = dg.dri_path_check(spec, 20, 500, stream(8))
        assert np.all(path_report.terms >= mean_report.terms - 1e-12)


def test_laplace_zero_function_is_one():
    h = kn.DeterministicTable((0.0, 1.0), (0.0, 0.0))
    res = dg.laplace_functional_compare(EXP_LAW, h, 10.0, 200, stream(9))
    assert res.transient_estimate == 1.0
    assert res.stationary_estimate == 1.0


def test_laplace_poisson_closed_form():
    h = kn.DeterministicTable((0.0, 1.0), (1.0, 0.0))
    res = dg.laplace_functional_compare(EXP_LAW, h, 50.0, 2 * 10**4, stream(28))
    # Poisson Laplace functional: exp(-integral (1 - e^{-h})) over [0, 1).
    integral, err = quad(lambda x: 1.0 - math.exp(-1.0), 0.0, 1.0)
    assert err < 1e-12
    oracle = math.exp(-integral)
    assert abs(res.transient_estimate - oracle) < res.transient_ci
    assert abs(res.stationary_estimate - oracle) < res.stationary_ci
    assert not res.lattice_warning
    # h >= 0 and not identically 0: the functionals live strictly inside (0, 1).
    assert 0.0 < res.transient_estimate < 1.0
    assert 0.0 < res.stationary_estimate < 1.0


def test_laplace_lattice_warning():
    h = kn.DeterministicTable((0.0, 1.0), (1.0, 0.0))
    res = dg.laplace_functional_compare(dist.PointMass(1.0), h, 20.0, 500, stream(11))
    assert res.lattice_warning


def test_laplace_validates_h():
    bad = kn.DeterministicTable((0.0, 1.0), (-1.0, 0.0))
    with pytest.raises(Exception):
        dg.laplace_functional_compare(EXP_LAW, bad, 10.0, 100, stream(12))
    unbounded = kn.DeterministicTable((0.0,), (1.0,))
    with pytest.raises(Exception):
        dg.laplace_functional_compare(EXP_LAW, unbounded, 10.0, 100, stream(12))


def test_convergence_zero_kernel_trivially_non_rejecting():
    reports = dg.convergence_test(EXP_LAW, ZERO_KERNEL, [2.0], [0.0, 1.0], 200, 0.01, 13)
    assert reports[0].decision == "non_reject"


def test_convergence_mminf_rejects_early_accepts_late():
    reports = dg.convergence_test(EXP_LAW, MM_INF, [0.5, 30.0], [0.0, 1.0, 5.0], 4000, 0.01, 14)
    assert reports[0].decision == "reject"
    assert reports[1].decision == "non_reject"
    assert reports[0].t == 0.5 and reports[1].t == 30.0


def test_convergence_heavy_tail_hypothesis_violation():
    reports = dg.convergence_test(EXP_LAW, kn.Indicator(dist.Pareto(0.8, 1.0)), [5.0], [0.0], 100, 0.01, 15)
    assert reports[0].decision == "hypothesis_violation"
    assert any("divergent" in w or "diverges" in w for w in reports[0].warnings)


def test_convergence_lattice_warning():
    reports = dg.convergence_test(dist.PointMass(1.0), MM_INF, [10.0], [0.0], 300, 0.01, 16)
    assert any("lattice" in w for w in reports[0].warnings)


def test_convergence_long_compact_table_not_flagged():
    # Compact support integrates trivially, however long the table is.
    long_table = kn.DeterministicTable((0.0, 80.0), (1.0, 0.0))
    reports = dg.convergence_test(EXP_LAW, long_table, [200.0], [0.0], 200, 0.01, 25)
    assert reports[0].warnings == ()


def test_compare_fdd_null_calibration_light():
    from renewal_immigration.process import fdd_sample

    rejections = 0
    trials = 40
    for trial in range(trials):
        a = fdd_sample(EXP_LAW, MM_INF, "stationary", [0.0, 1.0], 300, seed=(17, trial, 0))
        b = fdd_sample(EXP_LAW, MM_INF, "stationary", [0.0, 1.0], 300, seed=(17, trial, 1))
        rep = dg.compare_fdd_samples(a.values, b.values, [0.0, 1.0], 0.05, 99, stream((18, trial)))
        rejections += rep.decision == "reject"
    assert rejections / trials <= 0.05 + 3.0 * math.sqrt(0.05 * 0.95 / trials)


def test_intensity_check_examples():
    res = dg.intensity_check(dist.Exponential(2.0), [(0.0, 5.0), (1.0, 1.0)], 2 * 10**4, stream(19))
    assert res[0].expected_mean == pytest.approx(10.0)
    assert abs(res[0].z_score) < 4.0
    assert res[1].expected_mean == 0.0
    assert res[1].empirical_mean == 0.0
    assert res[1].z_score == 0.0

    res = dg.intensity_check(dist.Uniform(0.0, 2.0), [(-3.0, 3.0)], 2 * 10**4, stream(20))
    assert res[0].expected_mean == pytest.approx(6.0)
    assert abs(res[0].z_score) < 4.0


def test_overshoot_check_exponential_memoryless():
    report = dg.overshoot_check(EXP_LAW, 30.0, 2 * 10**4, stream(21))
    assert report.result.p_value > 0.01
    assert not report.lattice_warning
    assert report.horizon_warning is None


def test_overshoot_check_uniform_closed_form():
    report = dg.overshoot_check(dist.Uniform(0.0, 1.0), 50.0, 2 * 10**4, stream(22))
    assert report.result.p_value > 0.01


def test_overshoot_check_point_mass_lattice_flag():
    report = dg.overshoot_check(dist.PointMass(1.0), 10.5, 2000, stream(23))
    assert report.lattice_warning
    # Degenerate overshoot 0.5 against the uniform integrated tail: rejected.
    assert report.result.p_value < 0.01
    assert report.horizon_warning is not None  # 10.5 < 20 means


def test_shift_invariance_check():
    res = dg.shift_invariance_check(EXP_LAW, 0.25, (0.0, 1.0), 2 * 10**4, stream(24))
    assert res.p_value > 0.01
