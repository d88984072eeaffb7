"""Seeded 1-D gradient (Perlin) noise and radial ring distortion."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .geom import Point, TWO_PI

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class NoiseParams:
    seed: int = 0
    amplitude: float = 0.0
    frequency: float = 3.0

    def __post_init__(self):
        if not (math.isfinite(self.amplitude) and self.amplitude >= 0):
            raise ValueError(f"noise amplitude must be >= 0, got {self.amplitude!r}")
        if not (math.isfinite(self.frequency) and self.frequency > 0):
            raise ValueError(f"noise frequency must be > 0, got {self.frequency!r}")

    @property
    def cells(self) -> int:
        """Whole lattice cells per revolution (keeps the ring seam-free)."""
        return max(1, round(self.frequency))


@lru_cache(maxsize=256)
def _tables(seed: int) -> tuple[np.ndarray, np.ndarray, float]:
    rng = np.random.default_rng(int(seed) & _MASK64)
    perm = rng.permutation(256)
    perm = np.concatenate([perm, perm])
    # 16 gradient levels in [-1, -1/8] u [1/8, 1]
    h = perm & 15
    grads = np.where(h & 8, -1.0, 1.0) * ((h & 7) + 1) / 8.0
    phase = float(rng.random())
    perm.setflags(write=False)
    grads.setflags(write=False)
    return perm, grads, phase


def _fade(t):
    return t * t * t * (t * (t * 6.0 - 15.0) + 10.0)


def _noise(x, seed: int, period: int | None):
    perm, grads, _ = _tables(seed)
    x = np.asarray(x, dtype=float)
    xf = np.floor(x)
    f = x - xf
    i0 = xf.astype(np.int64)
    i1 = i0 + 1
    if period is not None:
        i0 %= period
        i1 %= period
    g0 = grads[perm[i0 & 255]]
    g1 = grads[perm[i1 & 255]]
    u = _fade(f)
    # 1-D gradient noise peaks at 0.5; scale to [-1, 1]
    return 2.0 * (g0 * f * (1.0 - u) + g1 * (f - 1.0) * u)


def perlin1d(x, seed: int = 0):
    """Improved Perlin noise in one dimension.

    Values lie in [-1, 1], vanish on integer lattice coordinates and are C1 in
    ``x``.  Accepts scalars or arrays.
    """
    out = _noise(x, seed, None)
    return float(out) if np.ndim(out) == 0 else out


def periodic_perlin1d(x, period: int, seed: int = 0):
    """As :func:`perlin1d` but with lattice indices wrapped modulo ``period``."""
    if period < 1:
        raise ValueError("period must be a positive integer")
    out = _noise(x, seed, int(period))
    return float(out) if np.ndim(out) == 0 else out


def ring_displacement(theta, params: NoiseParams):
    """Radial displacement of the ring at polar angle ``theta`` (radians)."""
    cells = params.cells
    phase = _tables(params.seed)[2] * cells
    x = cells * np.asarray(theta, dtype=float) / TWO_PI + phase
    return params.amplitude * periodic_perlin1d(x, cells, params.seed)


def distort_ring_points(points: Sequence[Point], circle, params: NoiseParams) -> list[Point]:
    """Push each ring point radially by the seeded noise field."""
    if params.amplitude >= 0.5 * circle.radius:
        raise ValueError(
            f"noise amplitude {params.amplitude} must stay below half the radius ({circle.radius})"
        )
    cx, cy = circle.center.x, circle.center.y
    xy = np.array([tuple(p) for p in points], dtype=float).reshape(-1, 2)
    rel = xy - (cx, cy)
    dist = np.hypot(rel[:, 0], rel[:, 1])
    if np.any(np.abs(dist - circle.radius) > 1e-6):
        raise ValueError("points must lie on the circle")
    if params.amplitude == 0.0:
        return [Point(*p) for p in xy]
    theta = np.arctan2(rel[:, 1], rel[:, 0])
    k = (circle.radius + ring_displacement(theta, params)) / dist
    return [Point(cx + kk * dx, cy + kk * dy) for kk, (dx, dy) in zip(k, rel)]
