"""Experiment drivers: slope fitting, reports, persistence, reproducibility."""

import numpy as np
import pytest

from conftest import assert_reports_equal
from mercereig import (
    bb_eigenvalue,
    bb_total_trace,
    fit_decay_rate,
    load_report,
    make_kernel,
    random_interval_points,
    run_bb_eigencouples,
    run_bb_power_decay,
    run_greedy_trace,
    run_matern_decay,
    run_matern_sum_gap,
    save_report,
)
from mercereig.experiments import matern_greedy_run, report_passed


class TestFitDecayRate:
    def test_exact_power_law(self):
        xs = np.arange(1, 200, dtype=float)
        assert fit_decay_rate(xs, xs**-2, (10, 100)).slope == pytest.approx(-2.0, abs=1e-12)

    def test_scale_invariance(self):
        xs = np.arange(1, 200, dtype=float)
        fit = fit_decay_rate(xs, 3.0 * xs**-1.5, (10, 100))
        assert fit.slope == pytest.approx(-1.5, abs=1e-12)

    def test_robust_to_multiplicative_noise(self):
        # 1% noise over xs = 10..100: regression sigma ~ 0.002, well under 0.05
        rng = np.random.default_rng(0)
        xs = np.arange(10, 101, dtype=float)
        for _ in range(100):
            ys = xs**-1.5 * (1.0 + 0.01 * rng.standard_normal(xs.size))
            fit = fit_decay_rate(xs, ys, (10, 100))
            assert abs(fit.slope + 1.5) < 0.05

    def test_nonpositive_values_excluded_and_counted(self):
        xs = np.arange(1, 40, dtype=float)
        ys = xs**-1.0
        ys[15] = 0.0
        ys[20] = -1e-3
        fit = fit_decay_rate(xs, ys, (10, 30))
        assert fit.n_excluded == 2
        assert fit.slope == pytest.approx(-1.0, abs=0.05)

    def test_window_too_small_after_exclusion(self):
        xs = np.arange(1, 10, dtype=float)
        ys = -np.ones(9)
        with pytest.raises(ValueError):
            fit_decay_rate(xs, ys, (2, 8))


@pytest.fixture(scope="module")
def small_run():
    return matern_greedy_run(1, grid_m=700, n=80)


@pytest.fixture(scope="module")
def rough_run():
    return run_bb_power_decay(1, 0.0, N=200, n=30, seed=0)


@pytest.fixture(scope="module")
def eig_run():
    return run_bb_eigencouples(1, 0.0, N=80, n=25, seed=0)


class TestMaternRuns:
    def test_decay_report_coherent(self, small_run):
        rep = run_matern_decay(1, run=small_run)
        lam = rep.ys
        assert np.all(lam > 0)
        assert np.all(np.diff(lam) <= 1e-14)
        assert rep.meta["m"] == small_run.quad.size
        assert rep.fit_window == (10, 40)
        assert rep.reference_slope == -1.5

    def test_gap_report_coherent(self, small_run):
        rep = run_matern_sum_gap(1, run=small_run)
        assert np.all(np.diff(rep.ys) <= 1e-14)  # gap never grows
        assert rep.meta["min_gap"] >= -1e-8 * np.pi
        assert rep.meta["proven_slope"] == -0.5
        assert rep.meta["observed_slope"] == -1.0

    def test_gap_equals_weighted_residual_sum(self, small_run):
        rep = run_matern_sum_gap(1, run=small_run)
        expected = small_run.quad.weight * small_run.basis.residual_sum_history
        assert np.allclose(rep.ys, expected, rtol=1e-14)

    def test_trace_identity_residual_small(self, small_run):
        rep = run_matern_decay(1, run=small_run)
        assert rep.trace_residual <= 1e-10

    def test_deterministic_rerun(self):
        a = run_matern_decay(2, grid_m=400, n=50)
        b = run_matern_decay(2, grid_m=400, n=50)
        assert_reports_equal(a, b)


class TestBridgePowerRuns:
    def test_oracle_formula(self, rough_run):
        total = bb_total_trace(1, 0.0)
        lam = bb_eigenvalue(1, 0.0, np.arange(1, 31))
        expected = np.sqrt(total - np.concatenate([[0.0], np.cumsum(lam)]))
        assert np.allclose(rough_run.oracle_true, expected, rtol=1e-12)
        assert rough_run.ns[0] == 0 and rough_run.greedy_linf[0] == np.sqrt(total)

    def test_greedy_curves_dominate_oracle(self, rough_run):
        for key in ("greedy_linf", "greedy_l2"):
            assert rough_run.checks[f"{key}_above_oracle"]
            curve = getattr(rough_run, key)
            assert np.all(curve[~np.isnan(curve)] >= rough_run.oracle_true[~np.isnan(curve)] - 1e-6)

    def test_direct_coincides_with_subspace_oracle(self, rough_run):
        assert np.array_equal(rough_run.direct, rough_run.oracle_subspace, equal_nan=True)

    def test_trace_identity_exact_route(self, rough_run):
        assert rough_run.trace_residual <= 1e-6

    def test_smooth_kernel_flags_instability(self):
        rep = run_bb_power_decay(3, 0.0, N=200, n=25, seed=0)
        assert rep.meta["instability_flagged"]
        assert rep.meta["direct_failed"] or rep.meta["direct_unstable_eigenvalues"] > 0

    def test_reproducible(self, rough_run):
        again = run_bb_power_decay(1, 0.0, N=200, n=30, seed=0)
        assert_reports_equal(rough_run, again)


class TestBridgeEigencoupleRuns:
    def test_exact_column_matches_formula(self, eig_run):
        assert np.allclose(eig_run.lambda_exact, bb_eigenvalue(1, 0.0, eig_run.js), rtol=1e-14)

    def test_gaps_nonnegative(self, eig_run):
        assert eig_run.checks["gap_nonnegative"]
        assert np.all(eig_run.gap >= -1e-10)

    def test_low_modes_resolved_better(self, eig_run):
        assert eig_run.eigenfunction_error[0] < eig_run.eigenfunction_error[-1]

    def test_eigenfunction_error_small_for_leading_mode(self, eig_run):
        assert eig_run.eigenfunction_error[0] < 1e-3

    def test_reproducible(self, eig_run):
        assert_reports_equal(eig_run, run_bb_eigencouples(1, 0.0, N=80, n=25, seed=0))

    def test_direct_method_agrees_with_newton(self, eig_run):
        direct = run_bb_eigencouples(1, 0.0, N=80, n=25, seed=0, method="direct")
        assert np.allclose(direct.lambda_approx, eig_run.lambda_approx, rtol=1e-8)
        assert direct.meta["method"] == "direct"

    def test_discrete_gramian_declares_no_bound_checks(self):
        rep = run_bb_eigencouples(1, 0.0, N=80, n=20, seed=0, gramian="discrete")
        assert rep.checks == {}
        assert rep.trace_residual < 0.05  # quadrature-level identity only


class TestPersistence:
    def test_decay_roundtrip(self, tmp_path):
        rep = run_matern_decay(1, grid_m=400, n=60)
        loaded = load_report(save_report(rep, tmp_path / "decay.csv"))
        assert_reports_equal(rep, loaded)

    def test_power_roundtrip(self, tmp_path):
        rep = run_bb_power_decay(2, 1.0, N=120, n=20, seed=3)
        loaded = load_report(save_report(rep, tmp_path / "power.csv"))
        assert_reports_equal(rep, loaded)

    def test_eigencouple_roundtrip(self, tmp_path):
        rep = run_bb_eigencouples(2, 0.0, N=60, n=15, seed=1)
        loaded = load_report(save_report(rep, tmp_path / "eigs.csv"))
        assert_reports_equal(rep, loaded)

    def test_trace_roundtrip(self, tmp_path):
        quad = random_interval_points(90, seed=2)
        rep = run_greedy_trace(make_kernel("bb", beta=2), quad, 12, criterion="l2")
        loaded = load_report(save_report(rep, tmp_path / "trace.csv"))
        assert_reports_equal(rep, loaded)

    def test_csv_shape(self, tmp_path):
        rep = run_bb_eigencouples(1, 0.0, N=50, n=10, seed=0)
        path = save_report(rep, tmp_path / "table.csv")
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "j,lambda_jn,lambda_exact,gap,eigenfunction_error"
        assert len(lines) == 11


class TestReportPassed:
    def test_all_bool_checks_must_hold(self):
        rep = run_bb_eigencouples(1, 0.0, N=50, n=10, seed=0)
        assert report_passed(rep)
        rep.checks["gap_nonnegative"] = False
        assert not report_passed(rep)
