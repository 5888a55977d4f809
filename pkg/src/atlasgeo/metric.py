"""Pullback metric and discretised curve length.

Decoders are treated as black boxes: Jacobians come from central finite
differences, so the same code serves analytic and neural atlases.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .atlas import Atlas, LatentCoord
from .errors import UsageError

DEFAULT_FD_STEP = 1e-5
DEFAULT_STEPS = 15


@dataclass(frozen=True, eq=False)
class SegmentSpec:
    """Straight latent segment ``z_a -> z_b`` inside one chart, cut into ``n`` steps."""

    chart: int
    z_a: np.ndarray
    z_b: np.ndarray
    n: int = DEFAULT_STEPS

    def __post_init__(self):
        if self.n < 1:
            raise UsageError("steps n must be >= 1")
        object.__setattr__(self, "z_a", np.asarray(self.z_a, dtype=np.float64).reshape(-1))
        object.__setattr__(self, "z_b", np.asarray(self.z_b, dtype=np.float64).reshape(-1))
        if self.z_a.shape != self.z_b.shape:
            raise UsageError("segment endpoints differ in dimension")


def jacobian_fd(atlas: Atlas, p: LatentCoord, h: float = DEFAULT_FD_STEP) -> np.ndarray:
    """``D x d`` Jacobian of the chart's decoder at ``p.z`` by central differences."""
    if not h > 0:
        raise UsageError("finite-difference step h must be positive")
    z = np.asarray(p.z, dtype=np.float64)
    if z.shape != (atlas.d,):
        raise UsageError(f"z must have length {atlas.d}")
    offsets = h * np.eye(atlas.d)
    probes = np.concatenate([z + offsets, z - offsets])
    g = atlas.decode_batch(p.chart, probes)
    return ((g[: atlas.d] - g[atlas.d:]) / (2.0 * h)).T


def pullback_metric(atlas: Atlas, p: LatentCoord, h: float = DEFAULT_FD_STEP) -> np.ndarray:
    """Metric tensor ``J^T J`` at ``p``, symmetrised to remove roundoff."""
    j = jacobian_fd(atlas, p, h)
    g = j.T @ j
    return (g + g.T) / 2.0


def riemannian_inner(atlas: Atlas, p: LatentCoord, u, v, h: float = DEFAULT_FD_STEP) -> float:
    """Inner product of tangent vectors ``u`` and ``v`` under the pullback metric at ``p``."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != (atlas.d,) or v.shape != (atlas.d,):
        raise UsageError(f"tangent vectors must have length {atlas.d}")
    g = pullback_metric(atlas, p, h)
    # averaging both orders makes the result exactly symmetric in (u, v)
    return float(u @ g @ v + v @ g @ u) / 2.0


def curve_lengths(atlas: Atlas, chart: int, z_a, z_b, n: int = DEFAULT_STEPS) -> np.ndarray:
    """Discretised lengths of many straight latent segments at once.

    ``z_a`` and ``z_b`` are ``(E, d)``; the latent line between each pair is
    sampled at ``t_i = i / n`` for ``i = 0..n`` and the ambient chords between
    consecutive decodings are summed.
    """
    if n < 1:
        raise UsageError("steps n must be >= 1")
    z_a = np.atleast_2d(np.asarray(z_a, dtype=np.float64))
    z_b = np.atleast_2d(np.asarray(z_b, dtype=np.float64))
    if z_a.shape != z_b.shape:
        raise UsageError("segment endpoint arrays differ in shape")
    t = (np.arange(n + 1) / n)[None, :, None]
    # z_a + t (z_b - z_a) is exactly constant for a degenerate segment; the
    # last sample is pinned so both endpoints are exact
    pts = z_a[:, None, :] + t * (z_b - z_a)[:, None, :]
    pts[:, -1, :] = z_b
    x = atlas.decode_batch(chart, pts)
    chords = np.sqrt(np.sum(np.diff(x, axis=1) ** 2, axis=-1))
    return np.array([math.fsum(row) for row in chords])


def curve_length_discrete(atlas: Atlas, seg: SegmentSpec) -> float:
    """Length of the latent segment measured in ambient space.

    Always at least the chord between the decoded endpoints.
    """
    return float(curve_lengths(atlas, seg.chart, seg.z_a[None], seg.z_b[None], seg.n)[0])
