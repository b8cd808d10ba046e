"""Tests for rate fitting, closed-form bounds, and trace checking."""
import math
from types import SimpleNamespace

import numpy as np
import pytest

import quasarprox as qp
from quasarprox.rates import (
    eventual_linear_ratio,
    linear_ratio_bound,
    regime_of,
    sublinear_envelope,
    superlinear_step_constant,
)


def _trace(dists, values=None, steps=None, terminated="max_iters", inner_tol=0.0):
    values = values if values is not None else [d**2 for d in dists]
    steps = steps if steps is not None else [0.0] + [
        abs(b - a) for a, b in zip(dists, dists[1:])
    ]
    records = [
        qp.TraceRecord(
            k=k,
            x=np.array([d]),
            value=float(v),
            step_norm=float(s),
            dist_to_min=float(d),
        )
        for k, (d, v, s) in enumerate(zip(dists, values, steps))
    ]
    return qp.RunTrace(
        records=records,
        config_digest="abcdef012345",
        terminated_by=terminated,
        meta={"inner_tol": inner_tol},
    )


def _cfg(p, beta, eps_step=1e-8):
    return qp.HippaConfig(prox=qp.ProxConfig(p=p, beta=beta), eps_step=eps_step)


class TestEstimateRate:
    def test_recovers_a_planted_linear_ratio(self):
        dists = [0.5**k for k in range(10)]
        values = [1.0] + [0.3 * k**-2.0 for k in range(1, 10)]
        trace = _trace(dists, values=values)
        fitted = qp.estimate_rate(trace, SimpleNamespace(min_value=0.0), 2.0)
        assert fitted["linear_ratio"] == pytest.approx(0.5, rel=1e-12)
        assert fitted["superlinear_order"] == pytest.approx(1.0, abs=1e-10)
        assert fitted["sublinear_exponent"] == pytest.approx(-2.0, abs=1e-10)

    def test_recovers_a_planted_quadratic_order(self):
        dists = [0.5 ** (2**k) for k in range(6)]
        trace = _trace(dists)
        fitted = qp.estimate_rate(trace, SimpleNamespace(min_value=None), 3.0)
        assert fitted["superlinear_order"] == pytest.approx(2.0, abs=1e-9)
        assert fitted["sublinear_exponent"] is None

    def test_too_short_after_the_floor(self):
        trace = _trace([1.0, 0.1, 1e-13, 1e-14, 1e-14, 1e-14])
        with pytest.raises(qp.InsufficientTrace, match="at least 5"):
            qp.estimate_rate(trace, SimpleNamespace(min_value=0.0), 2.0)

    def test_missing_distances(self):
        records = [
            qp.TraceRecord(k=k, x=np.zeros(1), value=1.0, step_norm=0.0)
            for k in range(6)
        ]
        trace = qp.RunTrace(
            records=records,
            config_digest="abcdef012345",
            terminated_by="max_iters",
            meta={},
        )
        with pytest.raises(qp.InsufficientTrace, match="dist_to_min"):
            qp.estimate_rate(trace, SimpleNamespace(min_value=0.0), 2.0)


class TestClosedFormBounds:
    def test_linear_ratio_bound(self):
        assert linear_ratio_bound(1.0, 2.0, 1.0) == pytest.approx(
            0.4472135954999579, rel=1e-15
        )
        # more curvature or a larger prox weight can only contract harder
        assert linear_ratio_bound(1.0, 4.0, 1.0) < linear_ratio_bound(1.0, 2.0, 1.0)
        assert linear_ratio_bound(1.0, 2.0, 2.0) < linear_ratio_bound(1.0, 2.0, 1.0)

    def test_superlinear_constant_and_basin(self):
        assert superlinear_step_constant(1.0, 2.0, 1.0) == 0.5
        bounds = qp.theorem_bounds(
            qp.certificate(1.0, 2.0, np.zeros(1)), _cfg(3.0, 1.0)
        )
        assert bounds["dist_superlinear_step"] == 0.5
        assert bounds["superlinear_init_radius"] == pytest.approx(2.0, rel=1e-15)

    def test_sublinear_envelopes(self):
        assert sublinear_envelope(1.5, 0.5, 1.0, 1.0) == pytest.approx(
            (1.4142135623730951, -0.5), rel=1e-15
        )
        assert sublinear_envelope(2.0, 0.5, 1.0, 1.0) == (1.0, -1.0)
        const, expo = sublinear_envelope(3.0, 0.5, 1.0, 1.0)
        assert const == pytest.approx(0.38490017945975054, rel=1e-14)
        assert expo == -1.5

    def test_regimes(self):
        assert regime_of(2.0, 0.0) == "gamma_zero"
        assert regime_of(1.5, 1.0) == "p_in_1_2"
        assert regime_of(2.0, 1.0) == "p_eq_2"
        assert regime_of(3.0, 1.0) == "p_gt_2"

    def test_complexity_predictions(self):
        cert = qp.certificate(1.0, 2.0, np.zeros(1))
        bounds = qp.theorem_bounds(cert, _cfg(2.0, 1.0), d0=1.0, eps=1e-3)
        assert bounds["iterate_complexity"] == 10
        bounds = qp.theorem_bounds(cert, _cfg(2.0, 1.0), d0=1.0)  # eps_step 1e-8
        assert bounds["iterate_complexity"] == 24
        assert bounds["value_complexity"] == 13

    def test_small_p_needs_a_radius(self):
        cert = qp.certificate(0.5, 1.0, np.zeros(1))
        with pytest.raises(qp.RadiusRequired):
            qp.theorem_bounds(cert, _cfg(1.5, 1.0))

    def test_small_p_radius_admissibility(self):
        cert = qp.certificate(0.5, 1.0, np.zeros(1))
        # the admissible locality for p = 1.5 is (kappa_p / 4)^2, about 4.3e-5
        with pytest.raises(qp.BadParameter, match="admissible"):
            qp.theorem_bounds(cert, _cfg(1.5, 1.0), radius=1e-3)
        bounds = qp.theorem_bounds(cert, _cfg(1.5, 1.0), radius=4e-5)
        assert bounds["dist_ratio_eventual_linear"] == pytest.approx(
            eventual_linear_ratio(1.5, 4e-5), rel=1e-15
        )
        assert 0.0 < bounds["dist_ratio_eventual_linear"] < 1.0


class TestCheckRateBounds:
    def test_linear_regime_passes_on_a_conforming_trace(self):
        dists = [3.0**-k for k in range(9)]
        trace = _trace(dists)
        cert = qp.certificate(1.0, 2.0, np.zeros(1))
        report = qp.check_rate_bounds(trace, cert, _cfg(2.0, 1.0), h_star=0.0)
        assert report.regime == "p_eq_2"
        assert report.all_passed
        ids = [c.theorem_id for c in report.theorem_checks]
        assert ids == ["dist_ratio_linear", "value_envelope_linear"]
        ratio_check = report.theorem_checks[0]
        assert ratio_check.worst_observed == pytest.approx(1.0 / 3.0, rel=1e-12)
        assert ratio_check.bound_value == pytest.approx(0.4472135954999579)
        assert report.fitted["linear_ratio"] == pytest.approx(1.0 / 3.0, rel=1e-10)
        assert report.predicted_N == {"iterate_complexity": 24, "value_complexity": 13}

    def test_linear_regime_flags_a_slow_trace(self):
        dists = [0.6**k for k in range(9)]
        trace = _trace(dists)
        cert = qp.certificate(1.0, 2.0, np.zeros(1))
        report = qp.check_rate_bounds(trace, cert, _cfg(2.0, 1.0), h_star=0.0)
        assert not report.all_passed
        by_id = {c.theorem_id: c for c in report.theorem_checks}
        assert not by_id["dist_ratio_linear"].passed
        assert by_id["dist_ratio_linear"].worst_observed == pytest.approx(0.6)

    def test_converged_start_is_vacuous(self):
        trace = _trace([0.0], values=[0.0], steps=[0.0])
        cert = qp.certificate(1.0, 2.0, np.zeros(1))
        report = qp.check_rate_bounds(trace, cert, _cfg(2.0, 1.0), h_star=0.0)
        assert report.all_passed
        assert report.fitted == {}
        assert all(c.worst_observed == 0.0 for c in report.theorem_checks)

    def test_superlinear_checks_start_inside_the_basin(self):
        # basin radius is 2; the first two records sit outside it
        dists = [4.0, 2.4, 1.8, 1.2, 0.6, 0.15, 0.01]
        trace = _trace(dists)
        cert = qp.certificate(1.0, 2.0, np.zeros(1))
        report = qp.check_rate_bounds(trace, cert, _cfg(3.0, 1.0), h_star=0.0)
        (check,) = report.theorem_checks
        assert check.theorem_id == "dist_superlinear_step"
        assert check.bound_value == 0.5
        assert check.worst_observed == pytest.approx(0.01 / 0.15**2, rel=1e-12)
        assert check.passed

    def test_superlinear_flags_a_violation_inside_the_basin(self):
        trace = _trace([1.8, 1.7, 1.5])
        cert = qp.certificate(1.0, 2.0, np.zeros(1))
        report = qp.check_rate_bounds(trace, cert, _cfg(3.0, 1.0), h_star=0.0)
        (check,) = report.theorem_checks
        assert check.worst_observed == pytest.approx(1.7 / 1.8**2, rel=1e-12)
        assert not check.passed

    def test_superlinear_without_basin_entry_is_vacuous(self):
        trace = _trace([40.0, 20.0, 10.0, 5.0, 3.0])
        cert = qp.certificate(1.0, 2.0, np.zeros(1))
        report = qp.check_rate_bounds(trace, cert, _cfg(3.0, 1.0), h_star=0.0)
        assert report.theorem_checks[0].worst_observed == 0.0
        assert report.all_passed

    def test_small_p_checks_the_in_radius_tail(self):
        radius = 4e-5
        dists = [3e-3, 1e-3] + [radius * 0.4**k for k in range(8)]
        trace = _trace(dists)
        cert = qp.certificate(0.5, 1.0, np.zeros(1))
        report = qp.check_rate_bounds(
            trace, cert, _cfg(1.5, 1.0), h_star=0.0, radius=radius
        )
        (check,) = report.theorem_checks
        assert check.theorem_id == "dist_ratio_eventual_linear"
        assert check.worst_observed == pytest.approx(0.4, rel=1e-12)
        assert check.passed
        slow = _trace([3e-3] + [radius * 0.9**k for k in range(8)])
        report = qp.check_rate_bounds(
            slow, cert, _cfg(1.5, 1.0), h_star=0.0, radius=radius
        )
        assert not report.all_passed

    def test_gamma_zero_value_envelope(self):
        dists = [1.0] + [k**-0.5 for k in range(1, 9)]
        values = [2.0] + [0.9 / k for k in range(1, 9)]
        trace = _trace(dists, values=values)
        cert = qp.certificate(0.5, 0.0, np.zeros(1))
        report = qp.check_rate_bounds(trace, cert, _cfg(2.0, 1.0), h_star=0.0)
        assert report.regime == "gamma_zero"
        (check,) = report.theorem_checks
        assert check.theorem_id == "value_envelope_p_eq_2"
        assert check.bound_value == 1.0
        assert check.worst_observed == pytest.approx(0.9, rel=1e-12)
        bad = _trace(dists, values=[2.0] + [1.2 / k for k in range(1, 9)])
        report = qp.check_rate_bounds(bad, cert, _cfg(2.0, 1.0), h_star=0.0)
        assert not report.all_passed

    def test_iterate_complexity_checked_on_step_tol_stops(self):
        dists = [3.0**-k for k in range(7)]
        trace = _trace(dists, terminated="step_tol")
        cert = qp.certificate(1.0, 2.0, np.zeros(1))
        report = qp.check_rate_bounds(
            trace, cert, _cfg(2.0, 1.0, eps_step=1e-3), h_star=0.0
        )
        by_id = {c.theorem_id: c for c in report.theorem_checks}
        assert by_id["iterate_complexity"].bound_value == 10.0
        assert by_id["iterate_complexity"].worst_observed == 6.0
        assert by_id["iterate_complexity"].passed

    def test_json_shapes(self):
        trace = _trace([3.0**-k for k in range(9)])
        cert = qp.certificate(1.0, 2.0, np.zeros(1))
        report = qp.check_rate_bounds(trace, cert, _cfg(2.0, 1.0), h_star=0.0)
        js = report.to_json()
        assert set(js) == {"regime", "fitted", "theorem_checks", "predicted_N"}
        assert all(
            set(c) == {"theorem_id", "bound_value", "worst_observed", "pass"}
            for c in js["theorem_checks"]
        )


class TestRunInvariants:
    def test_clean_trace_passes(self):
        dists = [3.0**-k for k in range(8)]
        trace = _trace(dists)
        checks = qp.check_run_invariants(trace, _cfg(2.0, 1.0), h_star=0.0)
        assert [c.theorem_id for c in checks] == [
            "descent",
            "step_summability",
            "fejer_monotonicity",
        ]
        assert all(c.passed for c in checks)

    def test_detects_an_ascent_step(self):
        trace = _trace([1.0, 0.5, 0.6], values=[1.0, 0.25, 0.5])
        checks = qp.check_run_invariants(trace, _cfg(2.0, 1.0), h_star=0.0)
        by_id = {c.theorem_id: c for c in checks}
        assert not by_id["descent"].passed
        assert not by_id["fejer_monotonicity"].passed

    def test_detects_oversized_steps(self):
        trace = _trace([1.0, 0.9, 0.8], steps=[0.0, 5.0, 5.0])
        checks = qp.check_run_invariants(trace, _cfg(2.0, 1.0), h_star=0.0)
        by_id = {c.theorem_id: c for c in checks}
        assert not by_id["step_summability"].passed
        assert by_id["step_summability"].bound_value == pytest.approx(2.0)
        assert by_id["step_summability"].worst_observed == pytest.approx(50.0)

    def test_end_to_end_on_a_real_run(self):
        oracle = qp.make_square_1d()
        cfg = _cfg(2.0, 1.0, eps_step=1e-10)
        trace = qp.run_hippa(oracle, np.array([1.0]), cfg)
        cert = qp.certificate(1.0, 2.0, np.zeros(1))
        report = qp.check_rate_bounds(trace, cert, cfg, h_star=0.0)
        assert report.all_passed
        assert all(c.passed for c in qp.check_run_invariants(trace, cfg, h_star=0.0))
