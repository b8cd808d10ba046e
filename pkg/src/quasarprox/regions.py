"""Feasible regions: all of R^n, one ball, or an intersection of two balls.

Projection onto a two-ball intersection uses Dykstra's alternating scheme so
the limit is the true metric projection, not just a feasible point.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import as_vector
from .errors import BadParameter, EmptyRegion

DYKSTRA_TOL = 1e-10
DYKSTRA_MAX_SWEEPS = 10_000


@dataclass(frozen=True)
class RegionDescriptor:
    kind: str  # "all" | "ball" | "two_balls"
    centers: tuple = ()
    radii: tuple = ()

    def __post_init__(self):
        assert self.kind in ("all", "ball", "two_balls"), self.kind
        n = {"all": 0, "ball": 1, "two_balls": 2}[self.kind]
        assert len(self.centers) == len(self.radii) == n, "center/radius count"
        for r in self.radii:
            assert r > 0, "radii must be positive"

    def to_json(self):
        return {
            "kind": self.kind,
            "centers": [list(map(float, c)) for c in self.centers],
            "radii": list(map(float, self.radii)),
        }

    @staticmethod
    def from_json(d):
        return RegionDescriptor(
            kind=d["kind"],
            centers=tuple(np.asarray(c, dtype=float) for c in d["centers"]),
            radii=tuple(float(r) for r in d["radii"]),
        )


def whole_space():
    return RegionDescriptor("all")


def ball(center, radius):
    return RegionDescriptor("ball", (as_vector(center),), (float(radius),))


def two_balls(c1, r1, c2, r2):
    return RegionDescriptor(
        "two_balls",
        (as_vector(c1), as_vector(c2)),
        (float(r1), float(r2)),
    )


def contains(region, x, tol=1e-8):
    x = as_vector(x)
    for c, r in zip(region.centers, region.radii):
        if np.linalg.norm(x - c) > r + tol:
            return False
    return True


def _project_ball(x, c, r):
    d = x - c
    nd = np.linalg.norm(d)
    if nd <= r:
        return x.copy()
    return c + d * (r / nd)


def project_region(region, x):
    """Metric projection of x onto the region."""
    x = as_vector(x)
    if region.kind == "all":
        return x.copy()
    if region.kind == "ball":
        return _project_ball(x, region.centers[0], region.radii[0])
    (c1, c2), (r1, r2) = region.centers, region.radii
    if np.linalg.norm(c1 - c2) > r1 + r2:
        raise EmptyRegion("the two balls do not intersect")
    # Dykstra with two correction terms
    y = x.copy()
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    for _ in range(DYKSTRA_MAX_SWEEPS):
        y_prev = y
        z = _project_ball(y + p, c1, r1)
        p = y + p - z
        y = _project_ball(z + q, c2, r2)
        q = z + q - y
        if np.linalg.norm(y - y_prev) <= DYKSTRA_TOL:
            break
    return y


def sample_points(region, center, rng, n, radius=10.0):
    """n sample points for certificate checks.

    Unbounded regions are sampled from a ball of the given radius around the
    supplied center with a log-uniform radius mix (exponent uniform in
    [-6, 1]), because the interesting violations of the sampled inequalities
    sit at small radii. Ball regions are sampled uniformly; two-ball regions
    by rejection from the first ball.
    """
    center = as_vector(center)
    dim = center.size
    if region.kind == "all":
        dirs = rng.normal(size=(n, dim))
        dirs /= np.maximum(np.linalg.norm(dirs, axis=1, keepdims=True), 1e-300)
        rads = 10.0 ** rng.uniform(-6.0, np.log10(radius), size=n)
        return center + dirs * rads[:, None]
    if region.kind == "ball":
        c, r = region.centers[0], region.radii[0]
        dirs = rng.normal(size=(n, c.size))
        dirs /= np.maximum(np.linalg.norm(dirs, axis=1, keepdims=True), 1e-300)
        rads = r * rng.uniform(0.0, 1.0, size=n) ** (1.0 / c.size)
        return c + dirs * rads[:, None]
    if region.kind == "two_balls":
        c1, r1 = region.centers[0], region.radii[0]
        if np.linalg.norm(region.centers[0] - region.centers[1]) > sum(region.radii):
            raise EmptyRegion("the two balls do not intersect")
        out = []
        budget = 200 * n
        while len(out) < n and budget > 0:
            m = min(4 * (n - len(out)), 4096)
            budget -= m
            dirs = rng.normal(size=(m, c1.size))
            dirs /= np.maximum(np.linalg.norm(dirs, axis=1, keepdims=True), 1e-300)
            rads = r1 * rng.uniform(0.0, 1.0, size=m) ** (1.0 / c1.size)
            cand = c1 + dirs * rads[:, None]
            keep = [p for p in cand if contains(region, p)]
            out.extend(keep)
        if len(out) < n:
            raise BadParameter("rejection sampling failed; intersection too thin")
        return np.asarray(out[:n])
    raise BadParameter(f"unknown region kind {region.kind}")
