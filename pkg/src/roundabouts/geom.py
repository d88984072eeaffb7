"""Planar geometry kernel.

Angles are radians, counterclockwise positive, heading 0 along +x, normalized
to (-pi, pi].  Reference-line primitives follow OpenDRIVE: ``Line``, ``Arc``
and ``ParamCubic`` (paramPoly3 with a normalized parameter range).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from shapely.geometry import LineString
from shapely.geometry import Point as ShapelyPoint

from .errors import DegenerateInputError

TWO_PI = 2.0 * math.pi
DEFAULT_STEP = 0.5

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def normalize_angle(a: float) -> float:
    """Reduce ``a`` to the half-open interval (-pi, pi]."""
    if not math.isfinite(a):
        raise ValueError(f"angle must be finite, got {a!r}")
    r = math.fmod(a + math.pi, TWO_PI)
    if r <= 0.0:
        r += TWO_PI
    return r - math.pi


def angle_diff(a: float, b: float) -> float:
    """Signed smallest rotation taking ``b`` onto ``a``."""
    return normalize_angle(a - b)


@dataclass(frozen=True)
class Point:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"point coordinates must be finite, got ({self.x}, {self.y})")
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))

    def __iter__(self):
        yield self.x
        yield self.y

    def __sub__(self, other: Point) -> Point:
        return Point(self.x - other.x, self.y - other.y)

    def __add__(self, other: Point) -> Point:
        return Point(self.x + other.x, self.y + other.y)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])

    def distance_to(self, other: Point) -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def bearing_to(self, other: Point) -> float:
        """Heading of the vector from this point to ``other``."""
        return normalize_angle(math.atan2(other.y - self.y, other.x - self.x))


@dataclass(frozen=True)
class Pose:
    position: Point
    heading: float

    def __post_init__(self):
        object.__setattr__(self, "heading", normalize_angle(float(self.heading)))

    @classmethod
    def xyh(cls, x: float, y: float, heading: float) -> Pose:
        return cls(Point(x, y), heading)

    @property
    def x(self) -> float:
        return self.position.x

    @property
    def y(self) -> float:
        return self.position.y

    def reversed(self) -> Pose:
        return Pose(self.position, self.heading + math.pi)


def rotate_about(p: Point, pivot: Point, phi: float) -> Point:
    """Rotate ``p`` counterclockwise by ``phi`` around ``pivot``."""
    c, s = math.cos(phi), math.sin(phi)
    dx, dy = p.x - pivot.x, p.y - pivot.y
    return Point(pivot.x + c * dx - s * dy, pivot.y + s * dx + c * dy)


def rotate_pose_about(pose: Pose, pivot: Point, phi: float) -> Pose:
    return Pose(rotate_about(pose.position, pivot, phi), pose.heading + phi)


# --------------------------------------------------------------------------
# Polylines


@dataclass(frozen=True, eq=False)
class Polyline:
    """Ordered samples of a curve with cumulative arc length."""

    points: np.ndarray
    s: np.ndarray = field(default=None)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).reshape(-1, 2)
        if len(pts) == 0:
            raise ValueError("polyline needs at least one point")
        if len(pts) > 1:
            keep = np.ones(len(pts), dtype=bool)
            keep[1:] = np.any(pts[1:] != pts[:-1], axis=1)
            pts = pts[keep]
        seg = np.hypot(*np.diff(pts, axis=0).T) if len(pts) > 1 else np.zeros(0)
        s = np.concatenate([[0.0], np.cumsum(seg)])
        pts.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "s", s)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def length(self) -> float:
        return float(self.s[-1])

    def bbox(self) -> tuple[float, float, float, float]:
        lo = self.points.min(axis=0)
        hi = self.points.max(axis=0)
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])

    @cached_property
    def shape(self):
        """The polyline as a shapely geometry, for distance queries."""
        if len(self.points) == 1:
            return ShapelyPoint(self.points[0])
        return LineString(self.points)

    def concat(self, other: Polyline) -> Polyline:
        return Polyline(np.vstack([self.points, other.points]))


def min_clearance(a: Polyline, b: Polyline) -> float:
    """Minimum Euclidean distance between the segments of two polylines (0 if they cross)."""
    if len(a) == 0 or len(b) == 0:
        raise ValueError("min_clearance needs non-empty polylines")
    return float(a.shape.distance(b.shape))


def bbox_gap(a: tuple, b: tuple) -> float:
    """Lower bound on the distance between two axis-aligned boxes."""
    dx = max(b[0] - a[2], a[0] - b[2], 0.0)
    dy = max(b[1] - a[3], a[1] - b[3], 0.0)
    return math.hypot(dx, dy)


# --------------------------------------------------------------------------
# Reference-line primitives


class Geometry:
    """Common behaviour of the three reference-line primitives.

    Subclasses provide ``evaluate(s)`` returning positions (k,2) and headings
    (k,) at arc-length offsets ``s`` measured from the geometry start.
    """

    start: Pose
    length: float
    kind: str = ""

    def _check_length(self):
        if not (math.isfinite(self.length) and self.length > 0):
            raise ValueError(f"geometry length must be positive, got {self.length!r}")

    def evaluate(self, s) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def point_at(self, s: float) -> Point:
        xy, _ = self.evaluate(np.array([s]))
        return Point(*xy[0])

    def pose_at(self, s: float) -> Pose:
        xy, h = self.evaluate(np.array([s]))
        return Pose(Point(*xy[0]), float(h[0]))

    @cached_property
    def end(self) -> Pose:
        return self.pose_at(self.length)

    def sample(self, step: float = DEFAULT_STEP) -> Polyline:
        if not step > 0:
            raise ValueError(f"sampling step must be positive, got {step!r}")
        n = max(1, math.ceil(self.length / step - 1e-12))
        xy, _ = self.evaluate(np.linspace(0.0, self.length, n + 1))
        return Polyline(xy)

    def rotated(self, pivot: Point, phi: float) -> Geometry:
        raise NotImplementedError


@dataclass(frozen=True, eq=True)
class Line(Geometry):
    start: Pose
    length: float
    kind = "line"

    def __post_init__(self):
        self._check_length()

    def evaluate(self, s):
        s = np.asarray(s, dtype=float)
        c, sn = math.cos(self.start.heading), math.sin(self.start.heading)
        xy = np.column_stack([self.start.x + s * c, self.start.y + s * sn])
        return xy, np.full(s.shape, self.start.heading)

    def rotated(self, pivot, phi):
        return Line(rotate_pose_about(self.start, pivot, phi), self.length)


@dataclass(frozen=True, eq=True)
class Arc(Geometry):
    start: Pose
    length: float
    curvature: float
    kind = "arc"

    def __post_init__(self):
        self._check_length()
        if not (math.isfinite(self.curvature) and self.curvature != 0.0):
            raise ValueError("arc curvature must be finite and nonzero")

    def evaluate(self, s):
        s = np.asarray(s, dtype=float)
        h0, k = self.start.heading, self.curvature
        h = h0 + k * s
        xy = np.column_stack(
            [
                self.start.x + (np.sin(h) - math.sin(h0)) / k,
                self.start.y - (np.cos(h) - math.cos(h0)) / k,
            ]
        )
        return xy, np.arctan2(np.sin(h), np.cos(h))

    def rotated(self, pivot, phi):
        return Arc(rotate_pose_about(self.start, pivot, phi), self.length, self.curvature)


@dataclass(frozen=True, eq=True)
class ParamCubic(Geometry):
    """Parametric cubic in the start pose's local frame, t in [0, 1].

    u(t) = au + bu t + cu t^2 + du t^3, v(t) likewise.  ``length`` is the arc
    length; when omitted it is integrated with 16-node Gauss-Legendre.
    """

    start: Pose
    au: float
    bu: float
    cu: float
    du: float
    av: float
    bv: float
    cv: float
    dv: float
    length: float = None
    kind = "paramPoly3"

    def __post_init__(self):
        for name in ("au", "bu", "cu", "du", "av", "bv", "cv", "dv"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.length is None:
            object.__setattr__(self, "length", self.arc_length(1.0))
        self._check_length()

    @property
    def coefficients(self) -> tuple[float, ...]:
        return (self.au, self.bu, self.cu, self.du, self.av, self.bv, self.cv, self.dv)

    def _local(self, t):
        t = np.asarray(t, dtype=float)
        u = self.au + t * (self.bu + t * (self.cu + t * self.du))
        v = self.av + t * (self.bv + t * (self.cv + t * self.dv))
        return u, v

    def _local_deriv(self, t):
        t = np.asarray(t, dtype=float)
        du = self.bu + t * (2 * self.cu + 3 * t * self.du)
        dv = self.bv + t * (2 * self.cv + 3 * t * self.dv)
        return du, dv

    def speed(self, t):
        du, dv = self._local_deriv(t)
        return np.hypot(du, dv)

    def arc_length(self, t):
        """Arc length from t=0 to ``t`` (scalar or array)."""
        t = np.asarray(t, dtype=float)
        nodes = 0.5 * (_GL_NODES + 1.0)
        tau = t[..., None] * nodes
        out = 0.5 * t * np.sum(_GL_WEIGHTS * self.speed(tau), axis=-1)
        return float(out) if out.ndim == 0 else out

    def t_at(self, s) -> np.ndarray:
        """Invert the arc-length map by safeguarded Newton iteration."""
        s = np.clip(np.asarray(s, dtype=float), 0.0, self.length)
        total = self.arc_length(1.0)
        t = s / self.length
        for _ in range(12):
            f = self.arc_length(t) * (self.length / total) - s
            sp = self.speed(t) * (self.length / total)
            t = np.clip(t - f / np.maximum(sp, 1e-12), 0.0, 1.0)
        return t

    def evaluate_t(self, t):
        u, v = self._local(t)
        du, dv = self._local_deriv(t)
        c, sn = math.cos(self.start.heading), math.sin(self.start.heading)
        xy = np.column_stack([self.start.x + c * u - sn * v, self.start.y + sn * u + c * v])
        h = np.arctan2(dv, du) + self.start.heading
        return xy, np.arctan2(np.sin(h), np.cos(h))

    def evaluate(self, s):
        return self.evaluate_t(self.t_at(s))

    @cached_property
    def end(self) -> Pose:
        xy, h = self.evaluate_t(np.array([1.0]))
        return Pose(Point(*xy[0]), float(h[0]))

    def sample(self, step: float = DEFAULT_STEP) -> Polyline:
        if not step > 0:
            raise ValueError(f"sampling step must be positive, got {step!r}")
        vmax = float(self.speed(np.linspace(0.0, 1.0, 65)).max())
        n = max(1, math.ceil(1.1 * vmax / step))
        xy, _ = self.evaluate_t(np.linspace(0.0, 1.0, n + 1))
        return Polyline(xy)

    def rotated(self, pivot, phi):
        return ParamCubic(rotate_pose_about(self.start, pivot, phi), *self.coefficients, length=self.length)


def sample_geometry(g: Geometry, step: float = DEFAULT_STEP) -> Polyline:
    return g.sample(step)


def fit_param_cubic(start: Pose, end: Pose, scale: tuple[float, float] = (1.0, 1.0)) -> ParamCubic:
    """Cubic Hermite curve between two poses.

    Tangent magnitudes are the chord length scaled by ``1 / cos^2(alpha / 4)``
    with ``alpha`` the turning angle, which reduces to the plain chord for
    straight pieces and reproduces circular arcs to within O(theta^6).
    ``scale`` multiplies the start and end tangent separately; the end
    conditions hold for any positive scale.
    """
    if not (scale[0] > 0 and scale[1] > 0):
        raise ValueError("tangent scales must be positive")
    dx, dy = end.x - start.x, end.y - start.y
    chord = math.hypot(dx, dy)
    if chord == 0.0:
        raise DegenerateInputError("cannot fit a cubic between coincident points")
    c, s = math.cos(start.heading), math.sin(start.heading)
    # end point and end tangent in the start frame
    pu, pv = c * dx + s * dy, -s * dx + c * dy
    rel = normalize_angle(end.heading - start.heading)
    mag = chord / math.cos(abs(rel) / 4.0) ** 2
    t1u, t1v = scale[1] * mag * math.cos(rel), scale[1] * mag * math.sin(rel)
    t0u = scale[0] * mag
    return ParamCubic(
        start,
        0.0,
        t0u,
        3 * pu - 2 * t0u - t1u,
        -2 * pu + t0u + t1u,
        0.0,
        0.0,
        3 * pv - t1v,
        -2 * pv + t1v,
    )
