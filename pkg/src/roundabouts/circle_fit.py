"""Base-circle fitting for both roundabout generators.

The centre comes from the algebraic (Kasa) least-squares fit; the radius is a
fixed fraction of the distance to the nearest incident point, so every
incident point ends up outside the circle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateInputError
from .geom import Point

RADIUS_FACTOR = 0.4
COND_LIMIT = 1e10


@dataclass(frozen=True)
class Circle:
    center: Point
    radius: float

    def __post_init__(self):
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ValueError(f"circle radius must be positive, got {self.radius!r}")


def _as_xy(points) -> np.ndarray:
    xy = np.array([tuple(p) for p in points], dtype=float).reshape(-1, 2)
    if not np.all(np.isfinite(xy)):
        raise ValueError("points must be finite")
    return xy


def kasa_objective(points, center) -> float:
    """min over rho^2 of sum_i (|p_i - c|^2 - rho^2)^2 for a fixed centre."""
    xy = _as_xy(points)
    c = np.asarray(tuple(center), dtype=float)
    d2 = np.sum((xy - c) ** 2, axis=1)
    return float(np.sum((d2 - d2.mean()) ** 2))


def fit_center_least_squares(points: Sequence[Point]) -> Point:
    """Centre of the algebraic least-squares circle through ``points``.

    Solves the 3x3 normal equations of |p|^2 = 2 c.p + k in centred
    coordinates; rejects fewer than three points and (near-)collinear input.
    """
    xy = _as_xy(points)
    if len(xy) < 3:
        raise DegenerateInputError(f"circle fit needs at least 3 points, got {len(xy)}")
    mean = xy.mean(axis=0)
    q = xy - mean
    scale = np.abs(q).max()
    if scale == 0.0:
        raise DegenerateInputError("circle fit points are all coincident")
    q = q / scale
    A = np.column_stack([2.0 * q, np.ones(len(q))])
    b = np.sum(q**2, axis=1)
    N = A.T @ A
    if np.linalg.cond(N) > COND_LIMIT:
        raise DegenerateInputError("circle fit points are collinear (singular normal equations)")
    cx, cy, _ = np.linalg.solve(N, A.T @ b)
    return Point(mean[0] + scale * cx, mean[1] + scale * cy)


def roundabout_radius(center: Point, incident_points: Sequence[Point], radius_factor: float = RADIUS_FACTOR) -> float:
    xy = _as_xy(incident_points)
    if len(xy) == 0:
        raise DegenerateInputError("need at least one incident point")
    d = np.hypot(xy[:, 0] - center.x, xy[:, 1] - center.y).min()
    if d == 0.0:
        raise DegenerateInputError("an incident point coincides with the circle centre")
    return float(radius_factor * d)


def find_maximal_circle(defs, radius_factor: float = RADIUS_FACTOR) -> Circle:
    """Fit the base circle to the positions of incident road definitions."""
    pts = [d.position for d in defs]
    center = fit_center_least_squares(pts)
    return Circle(center, roundabout_radius(center, pts, radius_factor))
