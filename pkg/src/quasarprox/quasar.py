"""Quasar-convexity certificates: verification, refutation, and calculus.

A certificate asserts that the objective satisfies, for all x in the region
and all lam in [0,1],

    h(lam*c + (1-lam)*x) <= kappa*lam*h(c) + (1-kappa*lam)*h(x)
                            - lam*(1 - lam/(2-kappa)) * (kappa*gamma/2)*||x-c||^2

with respect to the supplied center c. Verification is sampled (it can refute
with a witness, it cannot prove); the calculus operations transform verified
certificates with explicit constants.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import as_vector, subgradient_select
from .errors import (
    BadParameter,
    CenterMismatch,
    GammaZeroForGrowth,
    InvalidCertificate,
    OutOfDomain,
    RangeViolation,
    RankDeficient,
)
from .regions import RegionDescriptor, ball, sample_points, whole_space

PROPERTIES = (
    "definition",
    "first_order",
    "quadratic_growth",
    "pl",
    "error_bound_value",
    "error_bound_subgrad",
)


# --------------------------------------------------------------------- constants
def _t_hat():
    """Crossover abscissa for the power-norm monotonicity modulus, found by
    bisection of its defining equation on (1.0001, 2.0] to 1e-12."""
    c = 2.0 - math.sqrt(3.0)

    def g(t):
        return t * (t - 1.0) / 2.0 - 1.0 + (1.0 + c * t / (t - 1.0)) ** (1.0 - t)

    lo, hi = 1.0001, 2.0
    assert g(lo) * g(hi) < 0, "bisection bracket lost the root"
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if g(lo) * g(mid) <= 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


_T_HAT_CACHE = None


def t_hat():
    global _T_HAT_CACHE
    if _T_HAT_CACHE is None:
        _T_HAT_CACHE = _t_hat()
    return _T_HAT_CACHE


def kappa_p(t):
    """Monotonicity modulus of the power-norm gradient map for t in (1,2).

    Piecewise closed form with a documented downward jump at the crossover
    point: the two branches meet only in the t -> 1 limit, so the function is
    discontinuous at t_hat. Callers only rely on pointwise values.
    """
    if not 1.0 < t < 2.0:
        raise OutOfDomain(f"kappa_p needs t in (1,2), got {t}")
    a = (2.0 + math.sqrt(3.0)) / 16.0
    if t <= t_hat():
        return a * (t - 1.0)
    return a * (1.0 - (3.0 - math.sqrt(3.0)) ** (1.0 - t))


def sigma_hat(q):
    """Uniform-convexity modulus of the power norm for q > 2."""
    if not q > 2.0:
        raise OutOfDomain(f"sigma_hat needs q > 2, got {q}")
    return 0.5 ** ((3.0 * q - 2.0) / 2.0)


def aux_constant_C(k1, k2):
    """inf over lam in [0,1] of (1 - lam/(2-k1)) / (1 - lam/(2-k1*k2)).

    The ratio is decreasing in lam, so the infimum sits at lam = 1 and has
    the closed form below.
    """
    if not 0.0 < k1 < 1.0:
        raise BadParameter(f"k1 must be in (0,1), got {k1}")
    if not 0.0 < k2 <= 1.0:
        raise BadParameter(f"k2 must be in (0,1], got {k2}")
    return (1.0 - k1) * (2.0 - k1 * k2) / ((2.0 - k1) * (1.0 - k1 * k2))


# --------------------------------------------------------------------- certificate
@dataclass(frozen=True)
class QuasarCertificate:
    kappa: float
    gamma: float
    center: np.ndarray
    region: RegionDescriptor
    provenance: str = ""

    def __post_init__(self):
        if not 0.0 < self.kappa <= 1.0:
            raise InvalidCertificate(f"kappa must be in (0,1], got {self.kappa}")
        if self.gamma < 0.0:
            raise InvalidCertificate(f"gamma must be >= 0, got {self.gamma}")
        object.__setattr__(self, "center", as_vector(self.center))

    def to_json(self):
        return {
            "kappa": self.kappa,
            "gamma": self.gamma,
            "center": list(map(float, self.center)),
            "region": self.region.to_json(),
        }

    @staticmethod
    def from_json(d):
        return QuasarCertificate(
            kappa=float(d["kappa"]),
            gamma=float(d["gamma"]),
            center=np.asarray(d["center"], dtype=float),
            region=RegionDescriptor.from_json(d["region"]),
            provenance=d.get("provenance", ""),
        )


def certificate(kappa, gamma, center, region=None, provenance=""):
    return QuasarCertificate(
        kappa=float(kappa),
        gamma=float(gamma),
        center=as_vector(center),
        region=whole_space() if region is None else region,
        provenance=provenance,
    )


@dataclass(frozen=True)
class SamplerConfig:
    n_samples: int = 1000
    seed: int = 0
    lam_points: int = 33  # uniform grid on [0,1]; the definition needs >= 33
    radius: float = 10.0  # sampling radius around the center for unbounded regions

    def __post_init__(self):
        assert self.n_samples >= 1 and self.lam_points >= 2


@dataclass(frozen=True)
class CheckReport:
    property: str
    samples_tested: int
    worst_violation: float  # <= 0 means the inequality held everywhere
    witness: object = None  # (x, lam) at the worst sample

    @property
    def passed(self):
        return self.worst_violation <= 0.0


def definition_residual(oracle, cert, x, lam):
    """LHS - RHS of the defining inequality at one (x, lam)."""
    x = as_vector(x)
    c = cert.center
    h_x = oracle.value(x)
    h_c = oracle.value(c)
    kl = cert.kappa * lam
    quad = (
        lam
        * (1.0 - lam / (2.0 - cert.kappa))
        * (cert.kappa * cert.gamma / 2.0)
        * float(np.dot(x - c, x - c))
    )
    lhs = oracle.value(lam * c + (1.0 - lam) * x)
    return lhs - (kl * h_c + (1.0 - kl) * h_x - quad)


def verify_certificate(oracle, cert, property="definition", sampler=None):
    """Sampled check of one certified inequality; reports the worst signed
    residual and the witness attaining it. worst_violation <= 0 is a pass."""
    if property not in PROPERTIES:
        raise BadParameter(f"unknown property {property!r}")
    if not 0.0 < cert.kappa <= 1.0 or cert.gamma < 0.0:
        raise InvalidCertificate("certificate parameters out of range")
    needs_gamma = property in ("quadratic_growth", "pl", "error_bound_value", "error_bound_subgrad")
    if needs_gamma and cert.gamma <= 0.0:
        raise GammaZeroForGrowth(f"{property} needs gamma > 0")
    sampler = sampler or SamplerConfig()
    rng = np.random.default_rng(sampler.seed)
    X = sample_points(cert.region, cert.center, rng, sampler.n_samples, sampler.radius)
    c = cert.center
    kappa, gamma = cert.kappa, cert.gamma
    h_c = oracle.value(c)
    h_X = oracle.batch_values(X)
    d2 = np.sum((X - c) ** 2, axis=1)

    if property == "definition":
        lams = np.linspace(0.0, 1.0, max(sampler.lam_points, 33))
        worst = -np.inf
        witness = None
        for lam in lams:
            P = c + (1.0 - lam) * (X - c)
            lhs = oracle.batch_values(P)
            quad = lam * (1.0 - lam / (2.0 - kappa)) * (kappa * gamma / 2.0) * d2
            resid = lhs - (kappa * lam * h_c + (1.0 - kappa * lam) * h_X - quad)
            i = int(np.argmax(resid))
            if resid[i] > worst:
                worst = float(resid[i])
                witness = (X[i].copy(), float(lam))
        return CheckReport("definition", X.shape[0] * lams.size, worst, witness)

    gaps = h_X - h_c
    dists = np.sqrt(d2)
    if property == "quadratic_growth":
        modulus = kappa * gamma / (2.0 * (2.0 - kappa))
        resid = modulus * d2 - gaps
    elif property == "error_bound_value":
        const = math.sqrt(2.0 * (2.0 - kappa) / (kappa * gamma))
        resid = dists - const * np.sqrt(np.maximum(gaps, 0.0))
    else:
        # properties needing a subgradient selection at each sample
        V = np.array([subgradient_select(oracle, x) for x in X])
        if property == "first_order":
            inner = np.sum(V * (c - X), axis=1)
            resid = (h_X + inner / kappa + (gamma / 2.0) * d2) - h_c
        elif property == "pl":
            modulus = gamma * kappa**2
            resid = modulus * gaps - 0.5 * np.sum(V * V, axis=1)
        elif property == "error_bound_subgrad":
            const = 2.0 / (kappa * gamma)
            resid = dists - const * np.linalg.norm(V, axis=1)
        else:  # pragma: no cover
            raise BadParameter(property)
    i = int(np.argmax(resid))
    return CheckReport(property, X.shape[0], float(resid[i]), (X[i].copy(), None))


# --------------------------------------------------------------------- calculus
def parameter_transform(cert, variant, value):
    """scale(alpha): alpha*h keeps kappa, multiplies gamma.
    translate(z): h(z + .) shifts the center.
    reduce_kappa(theta): (kappa, gamma) -> (theta*kappa, gamma/theta)."""
    if variant == "scale":
        alpha = float(value)
        if alpha <= 0:
            raise BadParameter("scale needs alpha > 0")
        return replace(cert, gamma=alpha * cert.gamma)
    if variant == "translate":
        z = as_vector(value)
        new_center = cert.center - z
        region = cert.region
        if region.kind != "all":
            region = RegionDescriptor(
                region.kind,
                tuple(c - z for c in region.centers),
                region.radii,
            )
        return replace(cert, center=new_center, region=region)
    if variant == "reduce_kappa":
        theta = float(value)
        if not 0.0 < theta <= 1.0:
            raise BadParameter("reduce_kappa needs theta in (0,1]")
        return replace(cert, kappa=theta * cert.kappa, gamma=cert.gamma / theta)
    raise BadParameter(f"unknown variant {variant!r}")


def sum_certificates(terms):
    """Certificate for sum_i alpha_i h_i from certificates sharing a center."""
    assert terms, "sum_certificates needs at least one term"
    base = terms[0][1]
    for alpha, cert in terms:
        if alpha <= 0:
            raise BadParameter("weights must be positive")
        if np.linalg.norm(cert.center - base.center) > 1e-12:
            raise CenterMismatch("summed certificates must share the center")
    kappa = min(cert.kappa for _, cert in terms)
    gamma = sum(alpha * cert.kappa * cert.gamma for alpha, cert in terms) / kappa
    return replace(base, kappa=kappa, gamma=gamma, provenance="calculus: sum")


def compose_linear(cert, A):
    """Certificate for h(A x) from a certificate for h.

    Needs full column rank and a center preimage; the produced region is the
    conservative preimage ball when the input region is a ball.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    m, n = A.shape
    svals = np.linalg.svd(A, compute_uv=False)
    smin = svals[-1] if n <= m else 0.0
    if smin <= max(m, n) * np.finfo(float).eps * svals[0]:
        raise RankDeficient("matrix must have full column rank")
    xg, residual, *_ = np.linalg.lstsq(A, cert.center, rcond=None)
    gap = np.linalg.norm(A @ xg - cert.center)
    if gap > 1e-8:
        raise RangeViolation(
            f"center is not in the range of the map (residual {gap:.3e})"
        )
    if cert.region.kind == "all":
        region = whole_space()
    elif cert.region.kind == "ball" and np.allclose(
        cert.region.centers[0], cert.center
    ):
        region = ball(xg, cert.region.radii[0] / svals[0])
    else:
        raise BadParameter("unsupported region for linear composition")
    return QuasarCertificate(
        kappa=cert.kappa,
        gamma=cert.gamma * smin**2,
        center=xg,
        region=region,
        provenance="calculus: linear composition",
    )


def compose_monotone(cert, kappa2, m):
    """Certificate for phi(h(x)) where phi is kappa2-quasar-convex with
    respect to h(center) and increases with slope at least m.

    Requires kappa < 1 on the inner certificate (a kappa = 1 input is first
    weakened with parameter_transform reduce_kappa)."""
    if not 0.0 < cert.kappa < 1.0:
        raise BadParameter(
            "inner kappa must be in (0,1); weaken a kappa=1 certificate with "
            "reduce_kappa first"
        )
    if not 0.0 < kappa2 <= 1.0:
        raise BadParameter("kappa2 must be in (0,1]")
    if m < 0:
        raise BadParameter("slope bound m must be >= 0")
    C = aux_constant_C(cert.kappa, kappa2)
    return replace(
        cert,
        kappa=cert.kappa * kappa2,
        gamma=C * m * cert.gamma / kappa2,
        provenance="calculus: monotone composition",
    )
