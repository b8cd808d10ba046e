"""Vector checks, objective oracles, run traces, and seed streams.

Everything downstream (prox solver, outer loop, benchmarks) goes through the
ObjectiveOracle interface defined here, so stochastic objectives and
closed-form ones are driven identically.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import MissingMinimizer, MissingSubgradient, NonFiniteInput


def as_vector(x):
    """Coerce to a float array and reject NaN/Inf entries."""
    v = np.atleast_1d(np.asarray(x, dtype=float))
    if not np.all(np.isfinite(v)):
        raise NonFiniteInput(f"non-finite entries in vector: {v}")
    return v


def rng_stream(seed, tag, offset=0):
    """Deterministic child generator for (seed, tag, offset).

    The tag is hashed with sha256 so streams are stable across processes
    (builtin hash() is salted). No global RNG is consulted anywhere.
    """
    tag_int = int.from_bytes(hashlib.sha256(str(tag).encode()).digest()[:8], "big")
    return np.random.default_rng((int(seed), tag_int, int(offset)))


def config_digest(obj) -> str:
    """12-hex digest of a canonical JSON encoding of a config-like object."""

    def canon(o):
        if isinstance(o, dict):
            return {str(k): canon(v) for k, v in sorted(o.items())}
        if isinstance(o, (list, tuple)):
            return [canon(v) for v in o]
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, (np.floating, np.integer)):
            return o.item()
        if hasattr(o, "__dict__"):
            return canon(vars(o))
        return o

    blob = json.dumps(canon(obj), sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


@dataclass(frozen=True)
class ObjectiveOracle:
    """Objective h with optional analytic subgradient and known minimizer.

    value_fn / subgrad_fn take a single point. batch_value_fn, when present,
    takes an (m, n) array of rows and returns m values (used to keep sampled
    certificate checks fast). Stochastic oracles expose mc_value/mc_grad
    drawing from an explicit (seed, tag, offset) stream; value_fn must then
    be the deterministic fixed-seed evaluation. smooth_family(mu) returns a
    (value_fn, grad_fn) pair for the mu-smoothed objective, used by the prox
    inner solver on nonsmooth objectives that are not plain atom sums.
    """

    value_fn: object
    subgrad_fn: object = None
    minimizer: object = None
    min_value: object = None
    stochastic: bool = False
    seed: int = 0
    name: str = ""
    batch_value_fn: object = None
    smooth_family: object = None
    atoms: tuple = ()  # declared atom list for the generic smoother
    mc_value: object = None  # (x, n_samples, offset) -> (mean, std_err)
    mc_grad: object = None  # (x, n_samples, offset) -> gradient estimate

    def value(self, x):
        return float(self.value_fn(as_vector(x)))

    def batch_values(self, X):
        X = np.asarray(X, dtype=float)
        if self.batch_value_fn is not None:
            return np.asarray(self.batch_value_fn(X), dtype=float)
        return np.array([self.value_fn(row) for row in X], dtype=float)

    def with_(self, **kw):
        return replace(self, **kw)


def check_oracle_consistency(oracle, n_mc=2000):
    """value_fn(minimizer) must match min_value: 1e-10 for deterministic
    oracles, 3 Monte-Carlo standard errors for stochastic ones."""
    if oracle.minimizer is None or oracle.min_value is None:
        return True
    xbar = as_vector(oracle.minimizer)
    if not oracle.stochastic:
        return abs(oracle.value(xbar) - oracle.min_value) <= 1e-10
    assert oracle.mc_value is not None, "stochastic oracle without mc_value"
    mean, se = oracle.mc_value(xbar, n_mc, 0)
    return abs(mean - oracle.min_value) <= 3.0 * se


def subgradient_select(oracle, x):
    """One element of the analytic subgradient selection.

    The selection convention is fixed at oracle construction: 0 wherever 0 is
    admissible (e.g. |.| at the kink), otherwise the limit from the region of
    larger measure, so traces are reproducible.
    """
    x = as_vector(x)
    if oracle.subgrad_fn is None:
        raise MissingSubgradient(f"oracle {oracle.name!r} has no subgrad_fn")
    g = as_vector(oracle.subgrad_fn(x))
    return g


@dataclass(frozen=True)
class TraceRecord:
    k: int
    x: np.ndarray
    value: float
    step_norm: float  # distance from the previous iterate (0.0 at k=0)
    dist_to_min: object = None
    inner_iters: int = 0
    elapsed_s: float = 0.0


@dataclass
class RunTrace:
    records: list
    config_digest: str
    terminated_by: str  # step_tol | rel_err_tol | max_iters
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        assert self.records, "RunTrace.records must be nonempty"
        ks = [r.k for r in self.records]
        assert ks == list(range(len(ks))), "record indices must be 0,1,2,..."
        assert self.terminated_by in ("step_tol", "rel_err_tol", "max_iters")

    @property
    def final_x(self):
        return self.records[-1].x


def distance_metrics(trace, oracle):
    """Per record: (k, ||x_k - xbar||, h(x_k) - h*)."""
    if oracle.minimizer is None or oracle.min_value is None:
        raise MissingMinimizer(
            f"oracle {oracle.name!r} lacks minimizer/min_value"
        )
    xbar = as_vector(oracle.minimizer)
    out = []
    for rec in trace.records:
        dist = float(np.linalg.norm(rec.x - xbar))
        out.append((rec.k, dist, rec.value - oracle.min_value))
    return out


def fd_gradient(fn, x, h=1e-6):
    """Central finite-difference gradient, used by consistency tests."""
    x = as_vector(x)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (fn(x + e) - fn(x - e)) / (2 * h)
    return g
