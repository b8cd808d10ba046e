"""High-order proximal subproblem solver.

The prox point of h at anchor x with exponent p and weight beta is any

    y  in  argmin_y  h(y) + (1/(p*beta)) * ||x - y||^p .

Nonsmooth objectives are handled by smoothing continuation: minimize the
mu-smoothed model, shrink mu, re-solve from the previous solution, and keep
the candidate with the best TRUE model value. The anchor itself is always a
candidate, so the returned model value never exceeds the anchor's.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import as_vector, subgradient_select
from .errors import (
    InnerBudgetExhausted,
    MissingSubgradient,
    NonFiniteObjective,
    UnsupportedAtom,
)

ANCHOR_SNAP = 1e-14  # below this distance the regularizer gradient is taken as 0
MU_FLOOR = 1e-8  # smoothing continuation stops once mu falls to this level
ARMIJO_C = 1e-4
BACKTRACK = 0.5
MAX_BACKTRACKS = 80
QN_START = 20  # inner iteration after which the quasi-Newton direction kicks in
QN_MEMORY = 10


@dataclass(frozen=True)
class ProxConfig:
    p: float = 2.0
    beta: float = 1.0
    inner_tol: float = 1e-10
    inner_max_iters: int = 2000
    smoothing_mu: float = 1e-3
    smoothing_shrink: float = 0.1

    def __post_init__(self):
        assert self.p > 1.0, f"p must exceed 1, got {self.p}"
        assert self.beta > 0.0, f"beta must be positive, got {self.beta}"
        assert self.inner_tol > 0.0, "inner_tol must be positive"
        assert self.inner_max_iters >= 1, "inner_max_iters must be >= 1"
        assert self.smoothing_mu >= 0.0, "smoothing_mu must be >= 0"
        assert 0.0 < self.smoothing_shrink < 1.0, "smoothing_shrink in (0,1)"


@dataclass(frozen=True)
class ProxResult:
    y: np.ndarray
    model_value: float
    inner_iters: int
    converged: bool


def prox_model_value(oracle, x, y, p, beta):
    """h(y) + (1/(p*beta))*||x-y||^p, the quantity the prox minimizes."""
    return oracle.value(y) + float(np.linalg.norm(x - y)) ** p / (p * beta)


def _regularizer(x, p, beta):
    def value(y):
        return float(np.linalg.norm(x - y)) ** p / (p * beta)

    def grad(y):
        diff = y - x
        nrm = float(np.linalg.norm(diff))
        if nrm < ANCHOR_SNAP:
            return np.zeros_like(diff)
        return (nrm ** (p - 2.0) / beta) * diff

    return value, grad


# --------------------------------------------------------------------- smoothing
def _smoothed_atom(atom, mu):
    kind = atom[0]
    if kind == "norm_affine":
        _, A, b, w = atom
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.atleast_1d(np.asarray(b, dtype=float))

        def val(y):
            r = A @ y + b
            return w * (math.sqrt(float(r @ r) + mu * mu) - mu)

        def grad(y):
            r = A @ y + b
            den = math.sqrt(float(r @ r) + mu * mu)
            if den < 1e-300:
                return np.zeros(A.shape[1])
            return (w / den) * (A.T @ r)

        return val, grad
    if kind == "pospart_affine":
        _, a, b, w = atom
        a = as_vector(a)
        b = float(b)

        def val(y):
            z = float(a @ y) + b
            return w * ((z + math.sqrt(z * z + mu * mu)) / 2.0 - mu / 2.0)

        def grad(y):
            z = float(a @ y) + b
            den = math.sqrt(z * z + mu * mu)
            slope = 0.5 if den < 1e-300 else (1.0 + z / den) / 2.0
            return (w * slope) * a

        return val, grad
    if kind == "smooth":
        _, vfn, gfn = atom
        return vfn, gfn
    raise UnsupportedAtom(f"unknown atom kind {kind!r}")


def smooth_surrogate(oracle, mu):
    """Smoothed oracle built from the declared atom list.

    Each ||r|| atom becomes sqrt(||r||^2 + mu^2) - mu and each max{0, z}
    becomes (z + sqrt(z^2 + mu^2))/2 - mu/2, so the surrogate sits within
    [-mu, 0] of the true term per atom occurrence.
    """
    assert mu > 0.0, "smoothing width must be positive"
    if not oracle.atoms:
        raise UnsupportedAtom(
            f"oracle {oracle.name!r} declares no atoms; cannot smooth generically"
        )
    parts = [_smoothed_atom(atom, mu) for atom in oracle.atoms]

    def value_fn(y):
        y = np.asarray(y, dtype=float)
        return sum(v(y) for v, _ in parts)

    def grad_fn(y):
        y = np.asarray(y, dtype=float)
        g = np.zeros_like(y)
        for _, gr in parts:
            g = g + gr(y)
        return g

    return oracle.with_(
        value_fn=value_fn,
        subgrad_fn=grad_fn,
        batch_value_fn=None,
        minimizer=None,
        min_value=None,
        atoms=(),
        smooth_family=None,
        name=f"{oracle.name}~mu={mu:g}",
    )


def _stage_functions(oracle, mu):
    """(value_fn, grad_fn) of the mu-smoothed objective (mu=0 means as-is)."""
    if mu > 0.0:
        if oracle.smooth_family is not None:
            return oracle.smooth_family(mu)
        sm = smooth_surrogate(oracle, mu)
        return sm.value_fn, sm.subgrad_fn
    if oracle.subgrad_fn is None:
        raise MissingSubgradient(
            f"oracle {oracle.name!r} is treated as smooth but has no gradient"
        )
    return oracle.value_fn, lambda y: oracle.subgrad_fn(np.asarray(y, dtype=float))


def _mu_schedule(oracle, cfg):
    if cfg.smoothing_mu <= 0.0 or (
        oracle.smooth_family is None and not oracle.atoms
    ):
        return [0.0]
    mus = []
    mu = cfg.smoothing_mu
    while True:
        mus.append(mu)
        if mu <= MU_FLOOR:
            break
        mu *= cfg.smoothing_shrink
    return mus


# --------------------------------------------------------------------- inner loop
def _two_loop_direction(g, mem):
    """L-BFGS two-loop recursion; mem is a list of (s, y, rho) triples."""
    q = g.copy()
    alphas = []
    for s, yv, rho in reversed(mem):
        a = rho * float(s @ q)
        q -= a * yv
        alphas.append(a)
    s_last, y_last, _ = mem[-1]
    scale = float(s_last @ y_last) / float(y_last @ y_last)
    r = scale * q
    for (s, yv, rho), a in zip(mem, reversed(alphas)):
        b = rho * float(yv @ r)
        r += (a - b) * s
    return -r


def _minimize_stage(value_fn, grad_fn, y0, tol, budget):
    """Descent loop: gradient steps with Armijo backtracking, switching to a
    memory-limited quasi-Newton direction after QN_START iterations.

    Returns (y, f(y), iterations_used, hit_tolerance)."""
    y = np.array(y0, dtype=float)
    f = float(value_fn(y))
    if not np.isfinite(f):
        raise NonFiniteObjective(f"non-finite model value {f} at the start point")
    g = np.asarray(grad_fn(y), dtype=float)
    mem = []
    t_prev = None
    for it in range(budget):
        gnorm = float(np.linalg.norm(g))
        if not np.isfinite(gnorm):
            return y, f, it, False
        if gnorm <= tol:
            return y, f, it, True
        d = None
        if it >= QN_START and mem:
            d = _two_loop_direction(g, mem)
            if not np.all(np.isfinite(d)) or float(d @ g) >= 0.0:
                d = None
        gradient_step = d is None
        if gradient_step:
            d = -g
            if t_prev is not None:
                t = 2.0 * t_prev
            else:
                # scale the trial step to the current point so badly scaled
                # problems still produce a decrease above one float ulp
                t = (1.0 + float(np.linalg.norm(y))) / max(1.0, gnorm)
        else:
            t = 1.0
        slope = float(d @ g)
        accepted = False
        for _ in range(MAX_BACKTRACKS):
            y_new = y + t * d
            f_new = float(value_fn(y_new))
            if np.isfinite(f_new) and f_new <= f + ARMIJO_C * t * slope:
                accepted = True
                break
            t *= BACKTRACK
        if not accepted:
            # no decrease along the direction at machine scale: value stop
            return y, f, it + 1, True
        decrease = f - f_new
        g_new = np.asarray(grad_fn(y_new), dtype=float)
        s = y_new - y
        yv = g_new - g
        sy = float(s @ yv)
        if np.all(np.isfinite(yv)) and sy > 1e-12 * float(
            np.linalg.norm(s)
        ) * float(np.linalg.norm(yv)):
            mem.append((s, yv, 1.0 / sy))
            if len(mem) > QN_MEMORY:
                mem.pop(0)
        y, f, g = y_new, f_new, g_new
        if gradient_step:
            t_prev = t
        if decrease <= tol * tol:
            return y, f, it + 1, True
    return y, f, budget, False


def hope_solve(oracle, x, cfg, strict=False):
    """Approximately evaluate the high-order prox of the oracle at anchor x.

    Runs smoothing continuation when the oracle is nonsmooth, then returns
    the best candidate under the TRUE model among the anchor, every
    continuation stage's endpoint, and the oracle's known minimizer (when
    present). Budget exhaustion returns the best point found with
    converged=False, or raises InnerBudgetExhausted when strict=True.
    """
    x = as_vector(x)
    h_x = oracle.value(x)
    if not np.isfinite(h_x):
        raise NonFiniteObjective(f"objective is {h_x} at the anchor")
    reg_value, reg_grad = _regularizer(x, cfg.p, cfg.beta)
    candidates = [x]
    y = x.copy()
    total_iters = 0
    converged = True
    for mu in _mu_schedule(oracle, cfg):
        v_fn, g_fn = _stage_functions(oracle, mu)

        def model_value(z, _v=v_fn):
            return float(_v(z)) + reg_value(z)

        def model_grad(z, _g=g_fn):
            return np.asarray(_g(z), dtype=float) + reg_grad(z)

        budget = cfg.inner_max_iters - total_iters
        if budget <= 0:
            converged = False
            break
        y, _, used, hit = _minimize_stage(
            model_value, model_grad, y, cfg.inner_tol, budget
        )
        total_iters += used
        candidates.append(y.copy())
        if not hit:
            converged = False
            break
    if oracle.minimizer is not None:
        candidates.append(as_vector(oracle.minimizer))
    values = []
    for cand in candidates:
        val = oracle.value(cand) + reg_value(cand)
        values.append(val if np.isfinite(val) else np.inf)
    best = int(np.argmin(values))
    if not converged and strict:
        raise InnerBudgetExhausted(
            f"prox inner budget {cfg.inner_max_iters} exhausted"
        )
    return ProxResult(
        y=candidates[best],
        model_value=float(values[best]),
        inner_iters=total_iters,
        converged=converged,
    )
