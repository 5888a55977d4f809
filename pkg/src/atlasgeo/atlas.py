"""Atlas abstraction and hybrid latent coordinates.

An atlas bundles ``m`` charts over a ``d``-dimensional manifold immersed in
``R^D``. Chart ``y`` (numbered ``1..m``) has a decode map ``G_y: R^d -> R^D``,
an encode map ``F_y`` defined where ``psi_y > 0``, and the atlas carries a
partition of unity ``psi: R^D -> simplex``.

Concrete atlases implement the vectorised hooks ``_decode``, ``_encode`` and
``_partition``; the public functions in this module validate shapes and
dispatch to them.
"""
from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, UsageError

SIMPLEX_TOL = 1e-9


def _as_vector(values, length: int, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] != length:
        raise UsageError(f"{what} must be a vector of length {length}, got shape {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class LatentCoord:
    """A point ``(z, chart)`` of the hybrid latent space ``R^d x {1..m}``."""

    chart: int
    z: np.ndarray = field(repr=False)

    def __post_init__(self):
        z = np.array(self.z, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(z)):
            raise UsageError("latent coordinate must be finite")
        z.setflags(write=False)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "chart", int(self.chart))

    def __repr__(self):
        return f"LatentCoord(chart={self.chart}, z={self.z.tolist()})"

    def __eq__(self, other):
        if not isinstance(other, LatentCoord):
            return NotImplemented
        return self.chart == other.chart and np.array_equal(self.z, other.z)

    def __hash__(self):
        return hash((self.chart, self.z.tobytes()))


@dataclass(frozen=True)
class SimplexWeights:
    """Chart importances ``psi(x)``: non-negative, summing to one."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64).reshape(-1)
        if np.any(w < 0) or abs(w.sum() - 1.0) > SIMPLEX_TOL:
            raise ValueError(f"not a point of the simplex: {w}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def __getitem__(self, chart: int) -> float:
        """Weight of ``chart`` (1-based)."""
        return float(self.weights[chart - 1])

    def __len__(self):
        return len(self.weights)


class Atlas(ABC):
    """Interface shared by analytic and neural atlases.

    Subclasses set ``m``, ``d``, ``D`` and ``spec`` and implement the batched
    maps below. Batched inputs have shape ``(..., d)`` or ``(..., D)``; chart
    indices are 1-based. Instances are treated as immutable.
    """

    m: int
    d: int
    D: int
    spec: str

    @abstractmethod
    def _decode(self, chart: int, z: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def _encode(self, chart: int, x: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def _partition(self, x: np.ndarray) -> np.ndarray:
        ...

    # Encode is only defined where psi_chart > 0 unless a subclass says otherwise.
    encode_is_total = False

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.m, self.d, self.D)

    @property
    def fingerprint(self) -> dict:
        """Identity used to check that a stored graph matches this atlas."""
        return {"m": self.m, "d": self.d, "D": self.D, "digest": self.spec}

    def _check_chart(self, chart: int) -> int:
        if not 1 <= chart <= self.m:
            raise UsageError(f"chart must be in 1..{self.m}, got {chart}")
        return int(chart)

    def decode_batch(self, chart: int, z) -> np.ndarray:
        chart = self._check_chart(chart)
        z = np.asarray(z, dtype=np.float64)
        if z.shape[-1:] != (self.d,):
            raise UsageError(f"latent points must have trailing dimension {self.d}, got {z.shape}")
        return self._decode(chart, z)

    def encode_batch(self, chart: int, x) -> np.ndarray:
        chart = self._check_chart(chart)
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1:] != (self.D,):
            raise UsageError(f"ambient points must have trailing dimension {self.D}, got {x.shape}")
        if not self.encode_is_total:
            psi = self._partition(x)[..., chart - 1]
            if np.any(psi <= 0):
                raise DomainError(f"point outside the domain of chart {chart} (psi == 0)")
        return self._encode(chart, x)

    def partition_batch(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1:] != (self.D,):
            raise UsageError(f"ambient points must have trailing dimension {self.D}, got {x.shape}")
        return self._partition(x)

    def __repr__(self):
        return f"{type(self).__name__}(m={self.m}, d={self.d}, D={self.D})"


def decode(atlas: Atlas, p: LatentCoord) -> np.ndarray:
    """Decode a latent coordinate to its ambient point ``G_chart(z)``."""
    z = _as_vector(p.z, atlas.d, "z")
    return atlas.decode_batch(p.chart, z)


def encode(atlas: Atlas, chart: int, x) -> np.ndarray:
    """Latent coordinates ``F_chart(x)``.

    Raises ``DomainError`` when ``psi_chart(x) == 0`` for atlases whose
    encoders are partial.
    """
    x = _as_vector(x, atlas.D, "x")
    return atlas.encode_batch(chart, x)


def partition(atlas: Atlas, x) -> SimplexWeights:
    x = _as_vector(x, atlas.D, "x")
    return SimplexWeights(atlas.partition_batch(x))


def chart_membership(atlas: Atlas, x, eps: float) -> set[int]:
    """Charts ``y`` with ``psi_y(x) > eps``.

    Non-empty whenever ``eps < 1/m``: the weights sum to one, so the largest
    is at least ``1/m``.
    """
    if eps < 0:
        raise UsageError("eps must be non-negative")
    w = partition(atlas, x).weights
    return {int(i) + 1 for i in np.flatnonzero(w > eps)}


def argmax_chart(atlas: Atlas, x) -> int:
    """Chart with the largest weight; ties go to the lowest index."""
    w = partition(atlas, x).weights
    # np.argmax returns the first maximal entry
    return int(np.argmax(w)) + 1
