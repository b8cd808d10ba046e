"""Outer proximal-point loop with a high-order prox step.

Iterates x^{k+1} = prox(x^k) for the weight schedule beta_k, recording a full
trace. Stopping rules: small step (the exact-equality stop, implemented as a
tolerance), relative distance to the known minimizer (experiments mode), and
an iteration cap.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .core import RunTrace, TraceRecord, as_vector, config_digest
from .errors import BadParameter
from .hope import ProxConfig, hope_solve
from .regions import project_region

DESCENT_SLACK = 1e-9  # per-step tolerance on the nonincreasing-value check


@dataclass(frozen=True)
class HippaConfig:
    prox: ProxConfig
    beta_schedule: str = "constant"  # "constant" or "geometric"
    beta_growth: float = 2.0  # ratio of the geometric schedule
    beta_max: float = None  # upper weight bound; defaults to prox.beta
    eps_step: float = 1e-8
    eps_rel: float = None  # stop when ||x-xbar||/||xbar|| < eps_rel
    max_iters: int = 1000
    region: object = None  # optional RegionDescriptor; iterates are projected
    mc_eval_samples: int = 0  # Monte-Carlo evaluation size for stochastic runs

    def __post_init__(self):
        assert self.beta_schedule in ("constant", "geometric")
        assert self.eps_step > 0.0, "eps_step must be positive"
        assert self.max_iters >= 1, "max_iters must be >= 1"
        if self.beta_schedule == "geometric":
            assert self.beta_growth > 1.0, "geometric schedule needs growth > 1"
            assert self.beta_max is not None and self.beta_max >= self.prox.beta, (
                "geometric schedule needs beta_max >= prox.beta"
            )

    def beta_at(self, k):
        if self.beta_schedule == "constant":
            return self.prox.beta
        return min(self.prox.beta * self.beta_growth**k, self.beta_max)

    def beta_bounds(self):
        """(beta_lo, beta_hi) bracketing every beta_k of the schedule."""
        hi = self.prox.beta if self.beta_max is None else self.beta_max
        return self.prox.beta, hi


def iteration_bound(p, beta_pp, h0, h_star, eps):
    """A-priori bound on the first k with step norm <= eps:
    ceil(p * beta_hi * (h(x0) - h*) / eps^p)."""
    if eps <= 0.0:
        raise BadParameter(f"eps must be positive, got {eps}")
    if beta_pp <= 0.0:
        raise BadParameter(f"beta_pp must be positive, got {beta_pp}")
    if h0 < h_star:
        raise BadParameter(f"h0={h0} is below h_star={h_star}")
    return int(math.ceil(p * beta_pp * (h0 - h_star) / eps**p))


def _rel_err(x, xbar):
    nrm = float(np.linalg.norm(xbar))
    dist = float(np.linalg.norm(x - xbar))
    return dist / nrm if nrm > 0.0 else dist


def run_hippa(oracle, x0, cfg):
    """Run the outer loop from x0 and return the full trace.

    The trace records x^0 through the last accepted iterate; a step that
    already satisfies the step tolerance is not appended (the new point is
    the old one up to the stop rule). Inner-solve budget exhaustion is
    recorded in trace meta, not raised.
    """
    x = as_vector(x0)
    xbar = None if oracle.minimizer is None else as_vector(oracle.minimizer)
    t0 = time.perf_counter()
    h_prev = oracle.value(x)
    records = [
        TraceRecord(
            k=0,
            x=x.copy(),
            value=h_prev,
            step_norm=0.0,
            dist_to_min=None if xbar is None else float(np.linalg.norm(x - xbar)),
            inner_iters=0,
            elapsed_s=0.0,
        )
    ]
    meta = {
        "p": cfg.prox.p,
        "beta_bounds": cfg.beta_bounds(),
        "inner_tol": cfg.prox.inner_tol,
        "oracle": oracle.name,
        "inner_budget_exhausted_at": [],
        "descent_violations": [],
    }
    terminated_by = None
    k = 0
    while True:
        if (
            cfg.eps_rel is not None
            and xbar is not None
            and _rel_err(x, xbar) < cfg.eps_rel
        ):
            terminated_by = "rel_err_tol"
            break
        if k >= cfg.max_iters:
            terminated_by = "max_iters"
            break
        prox_cfg = replace(cfg.prox, beta=cfg.beta_at(k))
        res = hope_solve(oracle, x, prox_cfg)
        if not res.converged:
            meta["inner_budget_exhausted_at"].append(k)
        y = res.y
        if cfg.region is not None:
            y = project_region(cfg.region, y)
        step = float(np.linalg.norm(y - x))
        if step <= cfg.eps_step:
            terminated_by = "step_tol"
            break
        h_new = oracle.value(y)
        slack = DESCENT_SLACK * (1.0 + abs(h_prev))
        if h_new > h_prev + slack:
            if cfg.region is None:
                assert False, (
                    f"value increased at step {k}: {h_prev} -> {h_new}"
                )
            meta["descent_violations"].append((k, h_new - h_prev))
        records.append(
            TraceRecord(
                k=k + 1,
                x=y.copy(),
                value=h_new,
                step_norm=step,
                dist_to_min=None
                if xbar is None
                else float(np.linalg.norm(y - xbar)),
                inner_iters=res.inner_iters,
                elapsed_s=time.perf_counter() - t0,
            )
        )
        x, h_prev = y, h_new
        k += 1
    if oracle.stochastic and cfg.mc_eval_samples > 0 and oracle.mc_value is not None:
        mean, se = oracle.mc_value(x, cfg.mc_eval_samples, 0)
        meta["mc_value_final"] = {
            "mean": float(mean),
            "std_err": float(se),
            "n": cfg.mc_eval_samples,
        }
    return RunTrace(
        records=records,
        config_digest=config_digest(
            {
                "p": cfg.prox.p,
                "beta": cfg.prox.beta,
                "schedule": cfg.beta_schedule,
                "eps_step": cfg.eps_step,
                "eps_rel": cfg.eps_rel,
                "max_iters": cfg.max_iters,
                "oracle": oracle.name,
                "seed": oracle.seed,
            }
        ),
        terminated_by=terminated_by,
        meta=meta,
    )
