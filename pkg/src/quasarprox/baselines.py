"""Projected first-order baselines.

Four methods share one loop: deterministic or stochastic (sub)gradient steps
with a constant or inverse-square-root step size, followed by projection onto
the feasible region. Stochastic methods draw a fresh batch per iteration from
the oracle's seed stream at offset k, so runs reproduce bitwise.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .core import RunTrace, TraceRecord, as_vector, config_digest, subgradient_select
from .errors import BadParameter, MissingSubgradient
from .regions import project_region

METHODS = ("pgd", "psgd", "psg", "pssg")


@dataclass(frozen=True)
class BaselineConfig:
    method: str
    step0: float
    step_rule: str = "constant"  # "constant" or "inv_sqrt_k"
    batch: int = 32
    max_iters: int = 2000
    rel_err_tol: float = 1e-2
    region: object = None  # optional RegionDescriptor

    def __post_init__(self):
        if self.method not in METHODS:
            raise BadParameter(f"method must be one of {METHODS}, got {self.method!r}")
        assert self.step0 > 0.0, "step0 must be positive"
        assert self.step_rule in ("constant", "inv_sqrt_k")
        assert self.batch >= 1 and self.max_iters >= 1

    def step_at(self, k):
        """Step size for the k-th update (k starts at 1 for the decay rule)."""
        if self.step_rule == "constant":
            return self.step0
        return self.step0 / np.sqrt(k)

    @property
    def stochastic(self):
        return self.method in ("psgd", "pssg")


def default_baseline_config(method, region=None, rel_err_tol=None, max_iters=2000):
    """The step sizes and batch sizes the experiments were tuned with."""
    if method == "pgd":
        cfg = BaselineConfig("pgd", 0.12, "constant", 1, max_iters, 1e-2, region)
    elif method == "psgd":
        cfg = BaselineConfig("psgd", 0.07, "constant", 256, max_iters, 1e-2, region)
    elif method == "psg":
        cfg = BaselineConfig("psg", 0.8, "inv_sqrt_k", 1, max_iters, 1e-4, region)
    elif method == "pssg":
        cfg = BaselineConfig("pssg", 0.8, "inv_sqrt_k", 32, max_iters, 1e-4, region)
    else:
        raise BadParameter(f"unknown baseline method {method!r}")
    if rel_err_tol is not None:
        cfg = BaselineConfig(
            cfg.method, cfg.step0, cfg.step_rule, cfg.batch, cfg.max_iters,
            rel_err_tol, cfg.region,
        )
    return cfg


def _gradient(oracle, x, cfg, k):
    if cfg.stochastic:
        if oracle.mc_grad is None:
            raise MissingSubgradient(
                f"oracle {oracle.name!r} has no stochastic gradient"
            )
        return as_vector(oracle.mc_grad(x, cfg.batch, k))
    return subgradient_select(oracle, x)


def run_baseline(oracle, x0, cfg):
    """Run one baseline method from x0 and return the full trace."""
    x = as_vector(x0)
    if cfg.region is not None:
        x = project_region(cfg.region, x)
    xbar = None if oracle.minimizer is None else as_vector(oracle.minimizer)
    xbar_norm = None if xbar is None else float(np.linalg.norm(xbar))
    t0 = time.perf_counter()
    records = [
        TraceRecord(
            k=0,
            x=x.copy(),
            value=oracle.value(x),
            step_norm=0.0,
            dist_to_min=None if xbar is None else float(np.linalg.norm(x - xbar)),
            inner_iters=0,
            elapsed_s=0.0,
        )
    ]
    terminated_by = None
    k = 0
    while True:
        if xbar is not None:
            dist = float(np.linalg.norm(x - xbar))
            rel = dist / xbar_norm if xbar_norm > 0.0 else dist
            if rel < cfg.rel_err_tol:
                terminated_by = "rel_err_tol"
                break
        if k >= cfg.max_iters:
            terminated_by = "max_iters"
            break
        g = _gradient(oracle, x, cfg, k)
        y = x - cfg.step_at(k + 1) * g
        if cfg.region is not None:
            y = project_region(cfg.region, y)
        records.append(
            TraceRecord(
                k=k + 1,
                x=y.copy(),
                value=oracle.value(y),
                step_norm=float(np.linalg.norm(y - x)),
                dist_to_min=None
                if xbar is None
                else float(np.linalg.norm(y - xbar)),
                inner_iters=0,
                elapsed_s=time.perf_counter() - t0,
            )
        )
        x = y
        k += 1
    return RunTrace(
        records=records,
        config_digest=config_digest(
            {
                "method": cfg.method,
                "step0": cfg.step0,
                "step_rule": cfg.step_rule,
                "batch": cfg.batch,
                "max_iters": cfg.max_iters,
                "rel_err_tol": cfg.rel_err_tol,
                "oracle": oracle.name,
                "seed": oracle.seed,
            }
        ),
        terminated_by=terminated_by,
        meta={"method": cfg.method, "oracle": oracle.name},
    )
