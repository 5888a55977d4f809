"""Closed-form atlases with known geodesics.

``flat``   -- the plane z -> (z1, z2, 0), one chart.
``circle`` -- the unit circle with two angle charts, each missing one point.
``sphere`` -- the unit 2-sphere with the two stereographic charts.

Partition weights are affine in position and vanish exactly at the point a
chart excludes, so every chart overlaps the other almost everywhere.
"""
from __future__ import annotations

import math

import numpy as np

from .atlas import Atlas
from .errors import DomainError, UsageError

ATLAS_NAMES = ("flat", "circle", "sphere")

# on-manifold tolerance used by oracle_distance
_MANIFOLD_TOL = 1e-6


class FlatAtlas(Atlas):
    m, d, D = 1, 2, 3
    spec = "flat"
    encode_is_total = True

    def _decode(self, chart, z):
        return np.concatenate([z, np.zeros(z.shape[:-1] + (1,))], axis=-1)

    def _encode(self, chart, x):
        return x[..., :2].copy()

    def _partition(self, x):
        return np.ones(x.shape[:-1] + (1,))


class CircleAtlas(Atlas):
    """Unit circle in R^2.

    Chart 1 is the angle ``theta`` in (-pi, pi) and misses (-1, 0); chart 2 is
    ``theta - pi`` wrapped into (-pi, pi) and misses (1, 0).
    """

    m, d, D = 2, 1, 2
    spec = "circle"

    def _decode(self, chart, z):
        t = z[..., 0] if chart == 1 else z[..., 0] + math.pi
        return np.stack([np.cos(t), np.sin(t)], axis=-1)

    def _encode(self, chart, x):
        theta = np.arctan2(x[..., 1], x[..., 0])
        if chart == 2:
            shifted = theta - math.pi
            theta = np.where(shifted > -math.pi, shifted, theta + math.pi)
        return theta[..., None]

    def _partition(self, x):
        r = np.hypot(x[..., 0], x[..., 1])
        safe = np.where(r > 0, r, 1.0)
        # cos(theta); atan2(0, 0) == 0 so the origin counts as theta = 0
        c = np.where(r > 0, np.clip(x[..., 0] / safe, -1.0, 1.0), 1.0)
        return np.stack([(1.0 + c) / 2.0, (1.0 - c) / 2.0], axis=-1)


class SphereAtlas(Atlas):
    """Unit sphere in R^3 with stereographic charts.

    Chart ``NORTH`` projects from the north pole (which it misses), chart
    ``SOUTH`` from the south pole. Both pull the Euclidean metric back to the
    conformal metric ``4 / (1 + |z|^2)^2 * I``.
    """

    m, d, D = 2, 2, 3
    spec = "sphere"
    NORTH, SOUTH = 1, 2

    def _decode(self, chart, z):
        sq = np.sum(z * z, axis=-1)
        denom = 1.0 + sq
        third = (sq - 1.0) if chart == self.NORTH else (1.0 - sq)
        return np.stack([2.0 * z[..., 0] / denom, 2.0 * z[..., 1] / denom, third / denom], axis=-1)

    def _encode(self, chart, x):
        denom = (1.0 - x[..., 2]) if chart == self.NORTH else (1.0 + x[..., 2])
        return x[..., :2] / denom[..., None]

    def _partition(self, x):
        h = np.clip(x[..., 2], -1.0, 1.0)
        return np.stack([(1.0 - h) / 2.0, (1.0 + h) / 2.0], axis=-1)


_ATLASES = {"flat": FlatAtlas, "circle": CircleAtlas, "sphere": SphereAtlas}


def make_atlas(name: str) -> Atlas:
    """Instantiate one of the built-in atlases by name."""
    try:
        return _ATLASES[name]()
    except KeyError:
        raise UsageError(f"unknown atlas {name!r}; expected one of {', '.join(ATLAS_NAMES)}") from None


def _check_name(name: str) -> None:
    if name not in _ATLASES:
        raise UsageError(f"unknown atlas {name!r}; expected one of {', '.join(ATLAS_NAMES)}")


def _check_on_manifold(name: str, x: np.ndarray) -> None:
    dim = _ATLASES[name].D
    if x.shape != (dim,):
        raise UsageError(f"{name} points must have length {dim}, got shape {x.shape}")
    if name == "flat":
        off = abs(x[2])
    else:
        off = abs(np.linalg.norm(x) - 1.0)
    if not off <= _MANIFOLD_TOL:
        raise DomainError(f"point {x.tolist()} is not on the {name} manifold")


def oracle_distance(name: str, x0, x1) -> float:
    """Exact geodesic distance between two points of a built-in manifold."""
    _check_name(name)
    x0 = np.asarray(x0, dtype=np.float64)
    x1 = np.asarray(x1, dtype=np.float64)
    _check_on_manifold(name, x0)
    _check_on_manifold(name, x1)
    if name == "flat":
        return float(np.linalg.norm(x1 - x0))
    # atan2(|x0 x x1|, <x0, x1>) is arccos(<x0, x1>) without the loss of
    # precision near 0 and pi
    dot = float(np.dot(x0, x1))
    if name == "circle":
        cross = abs(x0[0] * x1[1] - x0[1] * x1[0])
    else:
        cross = float(np.linalg.norm(np.cross(x0, x1)))
    return math.atan2(cross, dot)


def sample_manifold(name: str, n: int, seed: int) -> np.ndarray:
    """Draw ``n`` points uniformly (w.r.t. surface measure) from a manifold.

    Returns an ``(n, D)`` array. Sphere points are normalised Gaussian draws,
    circle points have uniform angle, flat points are uniform on
    ``[0, 5]^2 x {0}``.
    """
    _check_name(name)
    if n < 1:
        raise UsageError("n must be at least 1")
    rng = np.random.default_rng(seed)
    if name == "flat":
        xy = rng.uniform(0.0, 5.0, size=(n, 2))
        return np.concatenate([xy, np.zeros((n, 1))], axis=1)
    if name == "circle":
        theta = rng.uniform(-math.pi, math.pi, size=n)
        return np.stack([np.cos(theta), np.sin(theta)], axis=1)
    g = rng.standard_normal(size=(n, 3))
    return g / np.linalg.norm(g, axis=1, keepdims=True)
