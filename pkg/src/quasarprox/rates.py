"""Empirical rate fitting and closed-form bound checking for run traces.

Given a trace, a certificate, and the run configuration, this module fits
the observed convergence behavior (linear ratio, superlinear order, sublinear
exponent) and compares each applicable closed-form bound against the worst
observation. Envelope-style bounds that vary with k are normalized so the
reported bound is 1.0 and the observation is the worst gap-to-envelope ratio.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadParameter, InsufficientTrace, RadiusRequired
from .quasar import kappa_p

DIST_FLOOR = 1e-12  # distances at or below this are floating-point noise
REL_SLACK = 1e-6  # multiplicative tolerance on every bound
INNER_SLACK_FACTOR = 10.0  # additive slack is this many inner tolerances


@dataclass(frozen=True)
class TheoremCheck:
    theorem_id: str
    bound_value: float
    worst_observed: float
    passed: bool

    def to_json(self):
        return {
            "theorem_id": self.theorem_id,
            "bound_value": self.bound_value,
            "worst_observed": self.worst_observed,
            "pass": self.passed,
        }


@dataclass
class RateReport:
    regime: str  # p_in_1_2 | p_eq_2 | p_gt_2 | gamma_zero
    fitted: dict = field(default_factory=dict)
    theorem_checks: list = field(default_factory=list)
    predicted_N: dict = field(default_factory=dict)

    @property
    def all_passed(self):
        return all(c.passed for c in self.theorem_checks)

    def to_json(self):
        return {
            "regime": self.regime,
            "fitted": self.fitted,
            "theorem_checks": [c.to_json() for c in self.theorem_checks],
            "predicted_N": self.predicted_N,
        }


def _usable_dists(trace):
    """Leading run of distances above the floating-point floor."""
    dists = []
    for rec in trace.records:
        if rec.dist_to_min is None:
            raise InsufficientTrace("trace records carry no dist_to_min")
        if rec.dist_to_min <= DIST_FLOOR:
            break
        dists.append(rec.dist_to_min)
    return np.asarray(dists)


def estimate_rate(trace, oracle, p):
    """Fit {linear_ratio, superlinear_order, sublinear_exponent} from a trace.

    linear_ratio: geometric mean of consecutive distance ratios over the last
    half. superlinear_order: least-squares slope of log d_{k+1} against
    log d_k. sublinear_exponent: least-squares slope of log value gap against
    log k over the last half of the records.
    """
    ds = _usable_dists(trace)
    if ds.size < 5:
        raise InsufficientTrace(
            f"need at least 5 records above the distance floor, got {ds.size}"
        )
    logs = np.log(ds)
    start = ds.size // 2
    linear_ratio = float(np.exp(np.mean(np.diff(logs[start:]))))
    slope, _ = np.polyfit(logs[:-1], logs[1:], 1)
    fitted = {
        "linear_ratio": linear_ratio,
        "superlinear_order": float(slope),
        "sublinear_exponent": None,
    }
    if oracle.min_value is not None:
        ks, gaps = [], []
        half = len(trace.records) // 2
        for rec in trace.records[half:]:
            gap = rec.value - oracle.min_value
            if rec.k >= 1 and gap > 1e-15:
                ks.append(rec.k)
                gaps.append(gap)
        if len(ks) >= 2:
            expo, _ = np.polyfit(np.log(ks), np.log(gaps), 1)
            fitted["sublinear_exponent"] = float(expo)
    return fitted


# ----------------------------------------------------------------- bounds
def linear_ratio_bound(kappa, gamma, beta_lo):
    return 1.0 / math.sqrt(
        1.0 + kappa * beta_lo * gamma + kappa**2 * beta_lo * gamma / (2.0 - kappa)
    )


def superlinear_step_constant(kappa, gamma, beta_lo):
    return (2.0 - kappa) / (beta_lo * kappa * gamma)


def eventual_linear_ratio(p, radius):
    """Per-step distance ratio claimed after a burn-in, for p in (1,2) with
    gamma > 0 and iterates inside the given radius."""
    kp = kappa_p(p)
    eta = (2.0 * p / (kp * radius ** (p - 2.0))) ** (1.0 / (p - 1.0))
    return eta


def sublinear_envelope(p, kappa, beta_lo, d0):
    """(constant, exponent) with value gap at step k bounded by
    constant * k**exponent, for the gamma = 0 regime."""
    if p < 2.0:
        return d0**p / (2.0 ** (p - 1.0) * beta_lo * kappa), 1.0 - p
    if p == 2.0:
        return d0**2 / (2.0 * kappa * beta_lo), -1.0
    c = (1.0 / (beta_lo * kappa * p)) * ((p - 2.0) / p) ** ((p - 2.0) / 2.0)
    return c * d0**p, -p / 2.0


def regime_of(p, gamma):
    if gamma <= 0.0:
        return "gamma_zero"
    if p < 2.0:
        return "p_in_1_2"
    if p == 2.0:
        return "p_eq_2"
    return "p_gt_2"


def theorem_bounds(cert, cfg, d0=None, eps=None, radius=None):
    """Closed-form constants applicable to a run under the certificate.

    d0 is the initial distance to the relevant minimizer (needed for
    complexity predictions and sublinear envelopes), eps the target accuracy
    (defaults to the config's step tolerance).
    """
    p = cfg.prox.p
    beta_lo, _ = cfg.beta_bounds()
    kappa, gamma = cert.kappa, cert.gamma
    eps = cfg.eps_step if eps is None else eps
    out = {}
    regime = regime_of(p, gamma)
    if regime == "p_in_1_2":
        if radius is None:
            raise RadiusRequired(
                "p in (1,2) with gamma > 0 needs an explicit locality radius"
            )
        max_radius = (kappa_p(p) / 4.0) ** (1.0 / (2.0 - p))
        if radius > max_radius * (1.0 + 1e-12):
            raise BadParameter(
                f"radius {radius} exceeds the admissible {max_radius}"
            )
        out["dist_ratio_eventual_linear"] = eventual_linear_ratio(p, radius)
    elif regime == "p_eq_2":
        r = linear_ratio_bound(kappa, gamma, beta_lo)
        out["dist_ratio_linear"] = r
        if d0 is not None and d0 > 0.0 and eps < d0:
            out["iterate_complexity"] = math.ceil(
                1.0 + math.log(d0 / eps) / math.log(1.0 / r)
            )
            out["value_complexity"] = 1 + math.ceil(
                math.log(d0**p / (p * beta_lo * eps)) / (p * math.log(1.0 / r))
            )
    elif regime == "p_gt_2":
        c = superlinear_step_constant(kappa, gamma, beta_lo)
        out["dist_superlinear_step"] = c
        out["superlinear_init_radius"] = c ** (-1.0 / (p - 2.0))
    else:
        if d0 is not None:
            const, expo = sublinear_envelope(p, kappa, beta_lo, d0)
            out["value_envelope_constant"] = const
            out["value_envelope_exponent"] = expo
            if eps > 0.0 and const > 0.0:
                out["value_complexity"] = math.ceil((const / eps) ** (-1.0 / expo))
    return out


# ------------------------------------------------------------------ checking
def _slack(trace):
    return INNER_SLACK_FACTOR * float(trace.meta.get("inner_tol", 0.0))


def _make_check(trace, theorem_id, bound, worst):
    tol = bound * REL_SLACK + _slack(trace)
    return TheoremCheck(theorem_id, float(bound), float(worst), worst <= bound + tol)


def check_rate_bounds(trace, cert, cfg, h_star, radius=None):
    """Check every applicable closed-form bound against the trace.

    Envelope checks are normalized (bound 1.0, observation the worst
    gap-over-envelope ratio). Traces that never leave the distance floor pass
    vacuously with zero observations.
    """
    p = cfg.prox.p
    beta_lo, _ = cfg.beta_bounds()
    regime = regime_of(p, cert.gamma)
    dists = _usable_dists(trace)
    report = RateReport(regime=regime)
    try:
        report.fitted = estimate_rate(
            trace, _MinValueShim(h_star), p
        )
    except InsufficientTrace:
        report.fitted = {}
    d0 = trace.records[0].dist_to_min
    bounds = theorem_bounds(cert, cfg, d0=d0, radius=radius)
    vacuous = dists.size < 2
    if regime == "p_eq_2":
        r = bounds["dist_ratio_linear"]
        worst = 0.0 if vacuous else float(np.max(dists[1:] / dists[:-1]))
        report.theorem_checks.append(
            _make_check(trace, "dist_ratio_linear", r, worst)
        )
        worst_env = 0.0
        for rec in trace.records[1:]:
            gap = rec.value - h_star
            env = (d0**p / (p * beta_lo)) * r ** (p * (rec.k - 1))
            if env > 0.0:
                worst_env = max(worst_env, gap / env)
        report.theorem_checks.append(
            _make_check(trace, "value_envelope_linear", 1.0, worst_env)
        )
    elif regime == "p_gt_2":
        c = bounds["dist_superlinear_step"]
        basin = bounds["superlinear_init_radius"]
        worst = 0.0
        if not vacuous:
            inside = np.nonzero(dists <= basin)[0]
            # the guarantee is local and its basin forward-invariant, so
            # judge steps from the first iterate inside it
            if inside.size >= 2:
                start = int(inside[0])
                worst = float(
                    np.max(dists[start + 1 :] / dists[start:-1] ** (p - 1.0))
                )
        report.theorem_checks.append(
            _make_check(trace, "dist_superlinear_step", c, worst)
        )
    elif regime == "p_in_1_2":
        eta = bounds["dist_ratio_eventual_linear"]
        worst = 0.0
        if not vacuous:
            inside = np.nonzero(dists <= radius)[0]
            if inside.size >= 2:
                start = int(inside[0])
                ratios = dists[start + 1 :] / dists[start:-1]
                # the claim is eventual, so judge the established tail only
                tail = max(3, ratios.size // 4)
                worst = float(np.max(ratios[-tail:]))
        report.theorem_checks.append(
            _make_check(trace, "dist_ratio_eventual_linear", eta, worst)
        )
    else:
        const, expo = sublinear_envelope(p, cert.kappa, beta_lo, d0 or 0.0)
        worst_env = 0.0
        for rec in trace.records[1:]:
            gap = rec.value - h_star
            env = const * float(rec.k) ** expo
            if env > 0.0:
                worst_env = max(worst_env, gap / env)
        report.theorem_checks.append(
            _make_check(trace, f"value_envelope_{_p_tag(p)}", 1.0, worst_env)
        )
    if "iterate_complexity" in bounds and trace.terminated_by == "step_tol":
        stop_k = trace.records[-1].k
        report.theorem_checks.append(
            _make_check(
                trace, "iterate_complexity", float(bounds["iterate_complexity"]), stop_k
            )
        )
    report.predicted_N = {
        key: int(bounds[key])
        for key in ("iterate_complexity", "value_complexity")
        if key in bounds
    }
    return report


def _p_tag(p):
    if p < 2.0:
        return "p_lt_2"
    if p == 2.0:
        return "p_eq_2"
    return "p_gt_2"


class _MinValueShim:
    """Adapter so estimate_rate can reuse its gap logic with a bare h*."""

    def __init__(self, min_value):
        self.min_value = min_value


def check_run_invariants(trace, cfg, h_star):
    """Descent, step summability, and distance monotonicity checks shared by
    every certified run. Returns TheoremCheck entries with the same pass rule
    as the rate checks."""
    checks = []
    values = [rec.value for rec in trace.records]
    worst_descent = 0.0
    for prev, cur in zip(values[:-1], values[1:]):
        worst_descent = max(
            worst_descent, (cur - prev) / (1.0 + abs(prev))
        )
    checks.append(_make_check(trace, "descent", 1e-8, max(worst_descent, 0.0)))
    p = cfg.prox.p
    _, beta_hi = cfg.beta_bounds()
    step_sum = float(sum(rec.step_norm**p for rec in trace.records))
    budget = p * beta_hi * (values[0] - h_star)
    checks.append(_make_check(trace, "step_summability", budget, step_sum))
    dists = [rec.dist_to_min for rec in trace.records]
    worst_fejer = 0.0
    if all(d is not None for d in dists):
        for prev, cur in zip(dists[:-1], dists[1:]):
            worst_fejer = max(worst_fejer, cur - prev)
    checks.append(_make_check(trace, "fejer_monotonicity", 1e-8, worst_fejer))
    return checks
