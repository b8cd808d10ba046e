"""Test-function zoo.

Each entry bundles an objective oracle with its analytic minimizer, a
subgradient selection, a positive quasar-convexity certificate when one is
known, and negative certificates (stored with explicit refutation witnesses)
when the construction is known NOT to satisfy the inequality for some
parameters.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .core import ObjectiveOracle, as_vector, rng_stream
from .errors import BadParameter, RankDeficientData, UnknownEntry
from .quasar import QuasarCertificate, certificate
from .regions import ball, two_balls, whole_space

ZOO_IDS = (
    "spiky",
    "dist_disk",
    "dist_cross",
    "star_flower",
    "relu_glm",
    "rmtr",
    "oscillatory",
)


@dataclass(frozen=True)
class RefutedCertificate:
    """A certificate the entry is known to violate, with the witness (x, lam)
    attaining a strictly positive definition residual."""

    certificate: QuasarCertificate
    witness_x: np.ndarray
    witness_lam: float
    note: str = ""


@dataclass(frozen=True)
class ZooEntry:
    oracle: ObjectiveOracle
    certificate: object = None
    negative_certificates: tuple = ()
    provenance: str = ""
    member_fn: object = None  # optional minimizer-set membership test
    default_x0: object = None  # callable seed -> starting point

    def x0(self, seed=0):
        assert self.default_x0 is not None, "entry has no default start point"
        return as_vector(self.default_x0(seed))


# --------------------------------------------------------------------- spiky norm
def _spiky_angle_weight(theta):
    return 2.0 + np.sin(3.0 * theta)


def _spiky_value(x):
    x = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(x))
    if r == 0.0:
        return 0.0
    theta = math.atan2(x[1], x[0])
    return math.sqrt(r) + _spiky_angle_weight(theta) * r * r


def _spiky_batch(X):
    X = np.asarray(X, dtype=float)
    r = np.linalg.norm(X, axis=1)
    theta = np.arctan2(X[:, 1], X[:, 0])
    return np.sqrt(r) + _spiky_angle_weight(theta) * r * r


def _spiky_subgrad(x):
    x = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(x))
    if r == 0.0:
        # conventional selection at the cusp; not a Clarke subgradient
        return np.zeros(2)
    theta = math.atan2(x[1], x[0])
    a = 0.5 * r ** (-1.5) + 2.0 * _spiky_angle_weight(theta)
    qp = 3.0 * math.cos(3.0 * theta)
    return a * x + qp * np.array([-x[1], x[0]])


def _spiky_smooth_family(mu):
    """Fully smooth stand-in: the radius is flattened to s(r) with s(0)=0 and
    the outer square root is shifted by mu, so the surrogate is C^1 at the
    origin and within O(sqrt(mu)) of the true value on bounded sets."""

    def value_fn(y):
        y = np.asarray(y, dtype=float)
        r2 = float(y @ y)
        s = math.sqrt(r2 + mu * mu) - mu
        theta = math.atan2(y[1], y[0]) if r2 > 0.0 else 0.0
        return math.sqrt(s + mu) - math.sqrt(mu) + _spiky_angle_weight(theta) * s * s

    def grad_fn(y):
        y = np.asarray(y, dtype=float)
        r2 = float(y @ y)
        if r2 < 1e-300:
            return np.zeros(2)
        root = math.sqrt(r2 + mu * mu)
        s = root - mu
        theta = math.atan2(y[1], y[0])
        q = _spiky_angle_weight(theta)
        ds = 1.0 / root  # (ds/dr) / r, applied to the raw coordinate vector
        radial = (0.5 / math.sqrt(s + mu) + 2.0 * q * s) * ds
        qp = 3.0 * math.cos(3.0 * theta)
        return radial * y + (qp * s * s / r2) * np.array([-y[1], y[0]])

    return value_fn, grad_fn


def make_spiky_norm():
    """Planar cusp-plus-wavy-bowl objective, strongly quasar-convex with
    modulus (1/2, 1) about the origin but not star-convex."""
    oracle = ObjectiveOracle(
        value_fn=_spiky_value,
        subgrad_fn=_spiky_subgrad,
        minimizer=np.zeros(2),
        min_value=0.0,
        name="spiky",
        batch_value_fn=_spiky_batch,
        smooth_family=_spiky_smooth_family,
    )
    cert = certificate(0.5, 1.0, np.zeros(2), whole_space(), "analytic construction")
    # along the trough direction the function is sqrt(r) + r^2, and halving
    # the radius beats half the value at the closed-form worst radius
    a = 1.0 / math.sqrt(2.0) - 0.5
    r_witness = a ** (2.0 / 3.0)
    trough = np.array([math.cos(-math.pi / 6.0), math.sin(-math.pi / 6.0)])
    negative = RefutedCertificate(
        certificate=certificate(1.0, 0.0, np.zeros(2), whole_space()),
        witness_x=r_witness * trough,
        witness_lam=0.5,
        note="star-convexity fails at small radii along the trough ray",
    )
    return ZooEntry(
        oracle=oracle,
        certificate=cert,
        negative_certificates=(negative,),
        provenance="analytic construction",
        default_x0=lambda seed: np.array([0.5, 0.0]),
    )


# ---------------------------------------------------------------- 1-d helpers
def make_abs_1d():
    """h(y) = |y| with the atom declaration used by the generic smoother."""
    return ObjectiveOracle(
        value_fn=lambda y: abs(float(np.asarray(y, dtype=float)[0])),
        subgrad_fn=lambda y: np.sign(np.asarray(y, dtype=float)),
        minimizer=np.zeros(1),
        min_value=0.0,
        name="abs_1d",
        batch_value_fn=lambda X: np.abs(np.asarray(X, dtype=float)[:, 0]),
        atoms=(("norm_affine", [[1.0]], [0.0], 1.0),),
    )


def make_square_1d():
    return ObjectiveOracle(
        value_fn=lambda y: float(np.asarray(y, dtype=float)[0]) ** 2,
        subgrad_fn=lambda y: 2.0 * np.asarray(y, dtype=float),
        minimizer=np.zeros(1),
        min_value=0.0,
        name="square_1d",
        batch_value_fn=lambda X: np.asarray(X, dtype=float)[:, 0] ** 2,
    )


def make_spiky_slice_1d():
    """The spiky norm restricted to the first axis: sqrt(|s|) + 2 s^2."""

    def value_fn(y):
        s = abs(float(np.asarray(y, dtype=float)[0]))
        return math.sqrt(s) + 2.0 * s * s

    def subgrad_fn(y):
        s = float(np.asarray(y, dtype=float)[0])
        if s == 0.0:
            return np.zeros(1)
        return np.array([math.copysign(0.5 / math.sqrt(abs(s)), s) + 4.0 * s])

    def smooth_family(mu):
        def v(y):
            s0 = float(np.asarray(y, dtype=float)[0])
            s = math.sqrt(s0 * s0 + mu * mu) - mu
            return math.sqrt(s + mu) - math.sqrt(mu) + 2.0 * s * s

        def g(y):
            s0 = float(np.asarray(y, dtype=float)[0])
            root = math.sqrt(s0 * s0 + mu * mu)
            s = root - mu
            return np.array([(0.5 / math.sqrt(s + mu) + 4.0 * s) * (s0 / root)])

        return v, g

    return ObjectiveOracle(
        value_fn=value_fn,
        subgrad_fn=subgrad_fn,
        minimizer=np.zeros(1),
        min_value=0.0,
        name="spiky_slice_1d",
        batch_value_fn=lambda X: np.sqrt(np.abs(X[:, 0])) + 2.0 * X[:, 0] ** 2,
        smooth_family=smooth_family,
    )


# ----------------------------------------------------------- distance powers
_CROSS_HALF_WIDTHS = (np.array([2.0, 1.0]), np.array([1.0, 2.0]))


def _rect_dist(X, half):
    over = np.maximum(np.abs(X) - half, 0.0)
    return np.linalg.norm(over, axis=-1)


def _cross_dist(X):
    return np.minimum(
        _rect_dist(X, _CROSS_HALF_WIDTHS[0]), _rect_dist(X, _CROSS_HALF_WIDTHS[1])
    )


def _disk_dist(X):
    return np.maximum(np.linalg.norm(X, axis=-1) - 1.0, 0.0)


def _pos_smooth(z, mu):
    return (z + math.sqrt(z * z + mu * mu)) / 2.0


def make_dist_power(shape, alpha):
    """Fractional power of the distance to a set: the unit disk, or the
    plus-sign union of two rectangles. Quasar-convex with kappa = alpha about
    any point of the set's kernel; the cross has non-kernel set points about
    which no kappa works."""
    if not 0.0 < alpha < 1.0:
        raise BadParameter(f"alpha must be in (0,1), got {alpha}")
    if shape not in ("disk", "cross"):
        raise BadParameter(f"shape must be disk or cross, got {shape!r}")
    dist_fn = _disk_dist if shape == "disk" else _cross_dist

    def value_fn(x):
        return float(dist_fn(np.asarray(x, dtype=float))) ** alpha

    def batch_value_fn(X):
        return _batch_power(dist_fn(np.asarray(X, dtype=float)), alpha)

    def subgrad_fn(x):
        x = np.asarray(x, dtype=float)
        if shape == "disk":
            r = float(np.linalg.norm(x))
            d = r - 1.0
            if d <= 0.0:
                return np.zeros(2)
            return alpha * d ** (alpha - 1.0) * (x / r)
        dists = [float(_rect_dist(x, h)) for h in _CROSS_HALF_WIDTHS]
        i = int(np.argmin(dists))  # ties resolve to the wide rectangle
        d = dists[i]
        if d <= 0.0:
            return np.zeros(2)
        half = _CROSS_HALF_WIDTHS[i]
        over = np.sign(x) * np.maximum(np.abs(x) - half, 0.0)
        return alpha * d ** (alpha - 2.0) * over

    smooth_family = None
    if shape == "disk":

        def smooth_family(mu):
            def v(y):
                y = np.asarray(y, dtype=float)
                return _pos_smooth(float(np.linalg.norm(y)) - 1.0, mu) ** alpha

            def g(y):
                y = np.asarray(y, dtype=float)
                r = float(np.linalg.norm(y))
                if r < 1e-300:
                    return np.zeros(2)
                z = r - 1.0
                pos = _pos_smooth(z, mu)
                slope = (1.0 + z / math.sqrt(z * z + mu * mu)) / 2.0
                return alpha * pos ** (alpha - 1.0) * slope * (y / r)

            return v, g

    oracle = ObjectiveOracle(
        value_fn=value_fn,
        subgrad_fn=subgrad_fn,
        minimizer=np.zeros(2),
        min_value=0.0,
        name=f"dist_{shape}",
        batch_value_fn=batch_value_fn,
        smooth_family=smooth_family,
    )
    cert = certificate(alpha, 0.0, np.zeros(2), whole_space(), "kernel point")
    negatives = ()
    if shape == "cross":
        # about the set point (2,1) the segment to (1,2) leaves the set, so
        # both endpoint values vanish while the midpoint value does not
        negatives = (
            RefutedCertificate(
                certificate=certificate(1.0, 0.0, np.array([2.0, 1.0]), whole_space()),
                witness_x=np.array([1.0, 2.0]),
                witness_lam=0.5,
                note="violated for every kappa since both endpoint values are 0",
            ),
        )
    member = (
        (lambda x: float(_disk_dist(as_vector(x))) == 0.0)
        if shape == "disk"
        else (lambda x: float(_cross_dist(as_vector(x))) == 0.0)
    )
    return ZooEntry(
        oracle=oracle,
        certificate=cert,
        negative_certificates=negatives,
        provenance="analytic construction",
        member_fn=member,
        default_x0=lambda seed: np.array([2.0, 0.0]),
    )


def _batch_power(d, alpha):
    out = np.zeros_like(d)
    pos = d > 0.0
    out[pos] = d[pos] ** alpha
    return out


# -------------------------------------------------------------- star flower
def _flower_radius(theta):
    return 1.0 + 0.35 * np.cos(4.0 * theta)


def _flower_gauge(X):
    X = np.asarray(X, dtype=float)
    r = np.linalg.norm(X, axis=-1)
    theta = np.arctan2(X[..., 1], X[..., 0])
    return r / _flower_radius(theta)


def make_star_flower():
    """Hinge of a four-petal gauge: zero on the flower-shaped set, growing
    linearly in the gauge outside. Star-convex about the origin with a whole
    continuum of minimizers."""

    def value_fn(x):
        return float(max(0.0, _flower_gauge(np.asarray(x, dtype=float)) - 1.0))

    def batch_value_fn(X):
        return np.maximum(_flower_gauge(X) - 1.0, 0.0)

    def subgrad_fn(x):
        x = np.asarray(x, dtype=float)
        r = float(np.linalg.norm(x))
        if r == 0.0:
            return np.zeros(2)
        theta = math.atan2(x[1], x[0])
        R = float(_flower_radius(theta))
        if r / R <= 1.0:
            return np.zeros(2)
        Rp = -1.4 * math.sin(4.0 * theta)
        return (1.0 / R) * (x / r) - (Rp / R**2) * np.array([-x[1], x[0]]) / r

    def smooth_family(mu):
        def v(y):
            y = np.asarray(y, dtype=float)
            return _pos_smooth(float(_flower_gauge(y)) - 1.0, mu)

        def g(y):
            y = np.asarray(y, dtype=float)
            r = float(np.linalg.norm(y))
            if r < 1e-300:
                return np.zeros(2)
            theta = math.atan2(y[1], y[0])
            R = float(_flower_radius(theta))
            Rp = -1.4 * math.sin(4.0 * theta)
            grad_rho = (1.0 / R) * (y / r) - (Rp / R**2) * np.array([-y[1], y[0]]) / r
            z = r / R - 1.0
            slope = (1.0 + z / math.sqrt(z * z + mu * mu)) / 2.0
            return slope * grad_rho

        return v, g

    oracle = ObjectiveOracle(
        value_fn=value_fn,
        subgrad_fn=subgrad_fn,
        minimizer=np.zeros(2),
        min_value=0.0,
        name="star_flower",
        batch_value_fn=batch_value_fn,
        smooth_family=smooth_family,
    )
    cert = certificate(1.0, 0.0, np.zeros(2), whole_space(), "gauge construction")
    return ZooEntry(
        oracle=oracle,
        certificate=cert,
        provenance="analytic construction",
        member_fn=lambda x: float(_flower_gauge(as_vector(x))) <= 1.0,
        default_x0=lambda seed: np.array([2.7, 0.0]),
    )


# ------------------------------------------------------------------ ReLU GLM
@dataclass(frozen=True)
class GlmConfig:
    n: int = 100
    c: float = 4.0
    w_star: object = None  # defaults to a seed-derived direction of norm 2
    batch_eval: int = 50000
    batch_full: int = 12000
    batch_sgd: int = 256
    seed: int = 0
    eps: float = 1.0  # density lower-bound radius entering the kappa formula

    def __post_init__(self):
        assert self.n >= 1 and min(self.batch_eval, self.batch_full, self.batch_sgd) >= 1
        assert self.c >= 0.5, f"c must be >= 1/2, got {self.c}"
        assert self.eps > 0.0, "eps must be positive"
        w = self.w_star
        if w is None:
            u = rng_stream(self.seed, "glm-wstar").standard_normal(self.n)
            w = 2.0 * u / np.linalg.norm(u)
        w = as_vector(w)
        assert abs(float(np.linalg.norm(w)) - 2.0) <= 1e-12, "w_star must have norm 2"
        object.__setattr__(self, "w_star", w)


def glm_kappa(eps, c):
    """Quasar modulus of the ReLU single-neuron risk on its two-ball trust
    region: eps^4 sin^3(pi/8) / (8 sqrt(2) c)."""
    return eps**4 * math.sin(math.pi / 8.0) ** 3 / (8.0 * math.sqrt(2.0) * c)


def _glm_sample(cfg, rng, m):
    """m draws from the uniform distribution on the ball of radius sqrt(c)."""
    g = rng.standard_normal((m, cfg.n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    radii = math.sqrt(cfg.c) * rng.uniform(0.0, 1.0, size=m) ** (1.0 / cfg.n)
    return g * radii[:, None]


def _glm_losses(W, data, targets):
    Z = W @ data.T
    return 0.5 * (np.maximum(Z, 0.0) - targets) ** 2


def make_relu_glm(cfg=None):
    """Single-neuron least squares with a ReLU link, noiseless and realizable.

    The oracle's value_fn and subgrad_fn evaluate a frozen batch of
    batch_full samples (deterministic, so prox solves are well posed);
    mc_value and mc_grad draw fresh batches from an explicit stream offset.
    """
    cfg = cfg or GlmConfig()
    data = _glm_sample(cfg, rng_stream(cfg.seed, "glm-data"), cfg.batch_full)
    targets = np.maximum(data @ cfg.w_star, 0.0)

    def value_fn(w):
        return float(np.mean(_glm_losses(np.asarray(w, dtype=float), data, targets)))

    def batch_value_fn(W):
        return np.mean(_glm_losses(np.asarray(W, dtype=float), data, targets), axis=-1)

    def subgrad_fn(w):
        w = np.asarray(w, dtype=float)
        z = data @ w
        err = np.maximum(z, 0.0) - targets
        active = (z > 0.0).astype(float)
        return (err * active) @ data / data.shape[0]

    def mc_value(w, m, offset):
        rng = rng_stream(cfg.seed, "glm-mc", offset)
        pts = _glm_sample(cfg, rng, m)
        tgt = np.maximum(pts @ cfg.w_star, 0.0)
        losses = _glm_losses(np.asarray(w, dtype=float), pts, tgt)
        se = float(np.std(losses, ddof=1) / math.sqrt(m)) if m > 1 else 0.0
        return float(np.mean(losses)), se

    def mc_grad(w, m, offset):
        rng = rng_stream(cfg.seed, "glm-sgd", offset)
        pts = _glm_sample(cfg, rng, m)
        tgt = np.maximum(pts @ cfg.w_star, 0.0)
        w = np.asarray(w, dtype=float)
        z = pts @ w
        err = np.maximum(z, 0.0) - tgt
        return (err * (z > 0.0)) @ pts / m

    def smooth_family(mu):
        def v(w):
            z = data @ np.asarray(w, dtype=float)
            soft = (z + np.sqrt(z * z + mu * mu)) / 2.0
            return float(np.mean(0.5 * (soft - targets) ** 2))

        def g(w):
            z = data @ np.asarray(w, dtype=float)
            root = np.sqrt(z * z + mu * mu)
            soft = (z + root) / 2.0
            slope = (1.0 + z / root) / 2.0
            return ((soft - targets) * slope) @ data / data.shape[0]

        return v, g

    oracle = ObjectiveOracle(
        value_fn=value_fn,
        subgrad_fn=subgrad_fn,
        minimizer=cfg.w_star.copy(),
        min_value=0.0,
        stochastic=True,
        seed=cfg.seed,
        name="relu_glm",
        batch_value_fn=batch_value_fn,
        smooth_family=smooth_family,
        mc_value=mc_value,
        mc_grad=mc_grad,
    )
    wn = float(np.linalg.norm(cfg.w_star))
    region = two_balls(cfg.w_star, wn, np.zeros(cfg.n), 2.0 * wn)
    cert = QuasarCertificate(
        kappa=glm_kappa(cfg.eps, cfg.c),
        gamma=cfg.c,
        center=cfg.w_star.copy(),
        region=region,
        provenance="planted-model analysis",
    )

    def default_x0(seed):
        u = rng_stream(seed, "glm-x0").standard_normal(cfg.n)
        u /= np.linalg.norm(u)
        return cfg.w_star + 1.8 * u

    return ZooEntry(
        oracle=oracle,
        certificate=cert,
        provenance="planted-model analysis",
        default_x0=default_x0,
    )


# ---------------------------------------------------------------------- RMTR
@dataclass(frozen=True)
class RmtrConfig:
    d: int = 100
    m: int = 5
    N: int = 400
    q: float = 0.5
    W_star: object = None  # m x d matrix of Frobenius norm 2
    seed: int = 0

    def __post_init__(self):
        assert self.d >= 1 and self.m >= 1 and self.N >= self.d, (
            "need N >= d so the data can have full row rank"
        )
        assert 0.0 < self.q < 1.0, f"q must be in (0,1), got {self.q}"
        W = self.W_star
        if W is None:
            W = rng_stream(self.seed, "rmtr-wstar").standard_normal((self.m, self.d))
            W = 2.0 * W / np.linalg.norm(W)
        W = np.asarray(W, dtype=float)
        assert W.shape == (self.m, self.d), "W_star shape mismatch"
        assert abs(float(np.linalg.norm(W)) - 2.0) <= 1e-12, (
            "W_star must have Frobenius norm 2"
        )
        object.__setattr__(self, "W_star", W)


def rmtr_gamma(q, kappa, c_x, radius):
    """Strong quasar modulus of the rooted multi-target loss on the radius-R
    ball about the planted matrix: 2 (q - kappa)/kappa * c_x^q * R^(q-2)."""
    assert 0.0 < kappa < q, f"kappa must be in (0,q), got {kappa}"
    return 2.0 * (q - kappa) / kappa * c_x**q * radius ** (q - 2.0)


def compute_cX(X, seed=0, starts=32, iters=300):
    """Smallest mean per-column response over unit-Frobenius test matrices,
    by multistart projected gradient on the sphere.

    A multistart local search can only overshoot the true minimum, so the
    returned value is an optimistic (upper) estimate; it is cross-checked
    against the analytic lower bound sigma_min(X)^2 / (N max_i ||x_i||) and
    asserted positive.
    """
    X = np.asarray(X, dtype=float)
    d, N = X.shape
    svals = np.linalg.svd(X, compute_uv=False)
    if svals.size < d or svals[-1] <= max(d, N) * np.finfo(float).eps * svals[0]:
        raise RankDeficientData("data matrix must have full row rank")
    m = 1  # the objective is row-separable, so one row suffices for the min
    col_norms = np.linalg.norm(X, axis=0)
    lower = svals[-1] ** 2 / (N * float(col_norms.max()))
    rng = rng_stream(seed, "cx-starts")
    best = np.inf
    for _ in range(starts):
        U = rng.standard_normal((m, d))
        U /= np.linalg.norm(U)
        t = 0.1
        val = float(np.mean(np.linalg.norm(U @ X, axis=0)))
        for _ in range(iters):
            R = U @ X
            nrm = np.linalg.norm(R, axis=0)
            nrm = np.where(nrm < 1e-300, 1.0, nrm)
            G = (R / nrm) @ X.T / N
            U_new = U - t * G
            U_new /= np.linalg.norm(U_new)
            val_new = float(np.mean(np.linalg.norm(U_new @ X, axis=0)))
            if val_new < val:
                U, val = U_new, val_new
                t *= 1.1
            else:
                t *= 0.5
                if t < 1e-12:
                    break
        best = min(best, val)
    assert best > 0.0, "search collapsed to zero on full-rank data"
    assert best >= lower * (1.0 - 1e-9), "search fell below the analytic bound"
    return best


def make_rmtr(cfg=None, kappa=None, radius=1.0):
    """Rooted multi-target regression: the mean of per-sample residual norms,
    raised to the power q. Realizable and deterministic; the certificate
    covers the radius-R Frobenius ball about the planted matrix."""
    cfg = cfg or RmtrConfig()
    rng = rng_stream(cfg.seed, "rmtr-data")
    X = rng.standard_normal((cfg.d, cfg.N))
    for _ in range(3):
        svals = np.linalg.svd(X, compute_uv=False)
        if svals[-1] > max(cfg.d, cfg.N) * np.finfo(float).eps * svals[0]:
            break
        X = rng.standard_normal((cfg.d, cfg.N))
    else:
        raise RankDeficientData("could not draw a full-row-rank data matrix")
    Y = cfg.W_star @ X
    shape = (cfg.m, cfg.d)
    size = cfg.m * cfg.d

    def _mean_residual(W):
        return float(np.mean(np.linalg.norm(W.reshape(shape) @ X - Y, axis=0)))

    def value_fn(w):
        return _mean_residual(np.asarray(w, dtype=float)) ** cfg.q

    def batch_value_fn(Ws):
        Ws = np.asarray(Ws, dtype=float).reshape(-1, cfg.m, cfg.d)
        R = np.einsum("smd,dn->smn", Ws, X) - Y[None, :, :]
        return np.mean(np.linalg.norm(R, axis=1), axis=1) ** cfg.q

    def subgrad_fn(w):
        W = np.asarray(w, dtype=float).reshape(shape)
        R = W @ X - Y
        nrm = np.linalg.norm(R, axis=0)
        A = float(np.mean(nrm))
        if A < 1e-300:
            return np.zeros(size)
        safe = np.where(nrm < 1e-300, 1.0, nrm)
        dA = (R / safe) @ X.T / cfg.N
        return (cfg.q * A ** (cfg.q - 1.0) * dA).ravel()

    def smooth_family(mu):
        def v(w):
            W = np.asarray(w, dtype=float).reshape(shape)
            nrm = np.sqrt(np.sum((W @ X - Y) ** 2, axis=0) + mu * mu) - mu
            return float(np.mean(nrm)) ** cfg.q

        def g(w):
            W = np.asarray(w, dtype=float).reshape(shape)
            R = W @ X - Y
            root = np.sqrt(np.sum(R * R, axis=0) + mu * mu)
            A = float(np.mean(root - mu))
            if A < 1e-300:
                return np.zeros(size)
            dA = (R / root) @ X.T / cfg.N
            return (cfg.q * A ** (cfg.q - 1.0) * dA).ravel()

        return v, g

    def mc_grad(w, batch, offset):
        """Minibatch subgradient over a random subset of the N samples."""
        idx = rng_stream(cfg.seed, "rmtr-batch", offset).choice(
            cfg.N, size=min(batch, cfg.N), replace=False
        )
        W = np.asarray(w, dtype=float).reshape(shape)
        R = W @ X[:, idx] - Y[:, idx]
        nrm = np.linalg.norm(R, axis=0)
        A = float(np.mean(nrm))
        if A < 1e-300:
            return np.zeros(size)
        safe = np.where(nrm < 1e-300, 1.0, nrm)
        dA = (R / safe) @ X[:, idx].T / idx.size
        return (cfg.q * A ** (cfg.q - 1.0) * dA).ravel()

    w_star_flat = cfg.W_star.ravel().copy()
    oracle = ObjectiveOracle(
        value_fn=value_fn,
        subgrad_fn=subgrad_fn,
        minimizer=w_star_flat,
        min_value=0.0,
        seed=cfg.seed,
        name="rmtr",
        batch_value_fn=batch_value_fn,
        smooth_family=smooth_family,
        mc_grad=mc_grad,
    )
    kappa = cfg.q / 2.0 if kappa is None else float(kappa)
    c_x = compute_cX(X, seed=cfg.seed)
    cert = QuasarCertificate(
        kappa=kappa,
        gamma=rmtr_gamma(cfg.q, kappa, c_x, radius),
        center=w_star_flat,
        region=ball(w_star_flat, radius),
        provenance="trust-region analysis",
    )

    def default_x0(seed):
        G = rng_stream(seed, "rmtr-x0").standard_normal(size)
        return 20.0 * G / np.linalg.norm(G)

    entry = ZooEntry(
        oracle=oracle,
        certificate=cert,
        provenance="trust-region analysis",
        default_x0=default_x0,
    )
    return entry


# ----------------------------------------------------------------- oscillatory
def oscillatory_slope(x, k=1):
    """Closed-form derivative t^(2k-1) sin^2(1/t) + t^(2k+1), extended by 0."""
    t = abs(float(x))
    if t == 0.0:
        return 0.0
    val = t ** (2 * k - 1) * math.sin(1.0 / t) ** 2 + t ** (2 * k + 1)
    return val if x > 0 else -val  # the integrand is odd, the integral even


def _oscillatory_value(x, k):
    t = abs(float(x))
    if t == 0.0:
        return 0.0
    # split sin^2 = (1 - cos)/2 and push the cosine part to a Fourier tail,
    # which the weighted quadrature rule integrates accurately
    head = t ** (2 * k) / (4.0 * k) + t ** (2 * k + 2) / (2 * k + 2)
    tail, err = quad(
        lambda u: u ** (-(2 * k + 1)),
        1.0 / t,
        np.inf,
        weight="cos",
        wvar=2.0,
        epsabs=1e-12,
        limit=400,
    )
    assert err < 1e-8, f"quadrature tail error {err} too large at x={x}"
    return head - 0.5 * tail


def make_oscillatory_counterexample(k=1):
    """Smooth, strictly unimodal on [-1,1], yet quasar-convex for no positive
    modulus: the slope collapses relative to the value along x = 1/(n pi)."""
    if k < 1:
        raise BadParameter(f"k must be a positive integer, got {k}")
    k = int(k)

    def value_fn(x):
        return _oscillatory_value(float(np.asarray(x, dtype=float)[0]), k)

    def subgrad_fn(x):
        return np.array([oscillatory_slope(float(np.asarray(x, dtype=float)[0]), k)])

    oracle = ObjectiveOracle(
        value_fn=value_fn,
        subgrad_fn=subgrad_fn,
        minimizer=np.zeros(1),
        min_value=0.0,
        name="oscillatory",
        batch_value_fn=lambda X: np.array(
            [_oscillatory_value(float(v), k) for v in np.asarray(X, dtype=float)[:, 0]]
        ),
    )
    x8 = 1.0 / (8.0 * math.pi)
    witness_lams = {0.5: 0.01, 0.1: 0.005, 0.01: 0.001}
    negatives = tuple(
        RefutedCertificate(
            certificate=certificate(kap, 0.0, np.zeros(1), whole_space()),
            witness_x=np.array([x8]),
            witness_lam=lam,
            note="slope-to-value ratio collapses along the inverse-pi grid",
        )
        for kap, lam in witness_lams.items()
    )
    return ZooEntry(
        oracle=oracle,
        negative_certificates=negatives,
        provenance="unimodal counterexample",
        default_x0=lambda seed: np.array([0.5]),
    )


# ------------------------------------------------------------------- registry
def zoo_ids():
    return ZOO_IDS


def get_entry(entry_id, seed=0, **overrides):
    """Build a zoo entry by id. Overrides feed the entry's config dataclass
    (for relu_glm and rmtr) or the construction parameters (oscillatory k,
    dist_* alpha)."""
    if entry_id == "spiky":
        return make_spiky_norm()
    if entry_id == "dist_disk":
        return make_dist_power("disk", overrides.get("alpha", 0.5))
    if entry_id == "dist_cross":
        return make_dist_power("cross", overrides.get("alpha", 0.5))
    if entry_id == "star_flower":
        return make_star_flower()
    if entry_id == "relu_glm":
        return make_relu_glm(GlmConfig(seed=seed, **overrides))
    if entry_id == "rmtr":
        kappa = overrides.pop("kappa", None)
        radius = overrides.pop("radius", 1.0)
        return make_rmtr(RmtrConfig(seed=seed, **overrides), kappa=kappa, radius=radius)
    if entry_id == "oscillatory":
        return make_oscillatory_counterexample(overrides.get("k", 1))
    raise UnknownEntry(
        f"unknown zoo id {entry_id!r}; known ids: {', '.join(ZOO_IDS)}"
    )
