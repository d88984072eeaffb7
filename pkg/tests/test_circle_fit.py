import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize

from roundabouts import IncidentRoadDefinition, Point
from roundabouts.circle_fit import (
    Circle,
    find_maximal_circle,
    fit_center_least_squares,
    kasa_objective,
    roundabout_radius,
)
from roundabouts.errors import DegenerateInputError


def nelder_mead_center(xy):
    """Oracle: direct numerical minimisation of the algebraic objective."""
    start = xy.mean(axis=0) + 1.0
    res = minimize(
        lambda c: kasa_objective(xy, c), start, method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 20000, "maxfev": 40000},
    )
    return res.x


def test_symmetric_square():
    c = fit_center_least_squares([Point(1, 0), Point(0, 1), Point(-1, 0), Point(0, -1)])
    assert (c.x, c.y) == pytest.approx((0.0, 0.0), abs=1e-12)


def test_three_points_give_circumcenter():
    c = fit_center_least_squares([Point(0, 0), Point(2, 0), Point(1, 1)])
    assert (c.x, c.y) == pytest.approx((1.0, 0.0), abs=1e-12)


def test_perturbed_points_match_numerical_minimiser():
    rng = np.random.default_rng(5)
    th = np.sort(rng.uniform(0, 2 * np.pi, 6))
    xy = np.column_stack([3 + 12 * np.cos(th), -7 + 12 * np.sin(th)]) + rng.normal(0, 0.5, (6, 2))
    c = fit_center_least_squares([Point(*p) for p in xy])
    np.testing.assert_allclose((c.x, c.y), nelder_mead_center(xy), atol=1e-6)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_objective_never_beaten(seed):
    rng = np.random.default_rng(seed)
    xy = rng.uniform(-50, 50, (rng.integers(3, 9), 2))
    try:
        c = fit_center_least_squares(xy)
    except DegenerateInputError:
        return
    assert kasa_objective(xy, c) <= kasa_objective(xy, nelder_mead_center(xy)) + 1e-6


@given(
    st.floats(-100, 100), st.floats(-100, 100), st.floats(1, 80),
    st.lists(st.floats(0, 2 * math.pi), min_size=3, max_size=8, unique=True),
)
def test_exact_circle_recovered(cx, cy, r, th):
    th = np.array(th)
    if np.min(np.abs(np.angle(np.exp(1j * (th[:, None] - th[None, :]))) + np.eye(len(th)) * 10)) < 0.05:
        return
    xy = np.column_stack([cx + r * np.cos(th), cy + r * np.sin(th)])
    c = fit_center_least_squares(xy)
    assert math.hypot(c.x - cx, c.y - cy) < 1e-9 * max(1.0, r)


def test_translation_equivariance():
    xy = np.array([[0, 0], [4, 1], [3, 5], [-1, 3.5]])
    a = fit_center_least_squares(xy)
    b = fit_center_least_squares(xy + (1000.0, -250.0))
    assert (b.x - 1000.0, b.y + 250.0) == pytest.approx((a.x, a.y), abs=1e-9)


@pytest.mark.parametrize(
    "pts",
    [[(0, 0), (1, 1)], [(0, 0), (1, 1), (2, 2)], [(3, 3), (3, 3), (3, 3)]],
)
def test_degenerate_inputs(pts):
    with pytest.raises(DegenerateInputError):
        fit_center_least_squares([Point(*p) for p in pts])


class TestRadius:
    def test_nearest_point_rule(self):
        pts = [Point(10, 0), Point(0, 25), Point(-40, 0)]
        assert roundabout_radius(Point(0, 0), pts) == pytest.approx(4.0)

    @given(st.floats(0.5, 500))
    def test_constant_distance(self, d):
        pts = [Point(d, 0), Point(0, d), Point(-d, 0)]
        assert roundabout_radius(Point(0, 0), pts) == pytest.approx(0.4 * d, rel=1e-12)

    def test_coincident_point(self):
        with pytest.raises(DegenerateInputError):
            roundabout_radius(Point(0, 0), [Point(0, 0), Point(5, 5)])


class TestMaximalCircle:
    def _defs(self, pts):
        return [IncidentRoadDefinition(Point(*p), 0.0) for p in pts]

    def test_square(self):
        c = find_maximal_circle(self._defs([(40, 0), (0, 40), (-40, 0), (0, -40)]))
        assert (c.center.x, c.center.y, c.radius) == pytest.approx((0, 0, 16.0), abs=1e-12)

    def test_scaled_circumcenter(self):
        c = find_maximal_circle(self._defs([(0, 0), (80, 0), (40, 40)]))
        assert (c.center.x, c.center.y) == pytest.approx((40.0, 0.0), abs=1e-9)
        assert c.radius == pytest.approx(16.0, abs=1e-9)

    def test_random_sets_land_in_band(self):
        rng = np.random.default_rng(11)
        radii = []
        for _ in range(20):
            R = rng.uniform(35, 45)
            th = rng.uniform(0, 2 * np.pi, rng.integers(3, 6))
            radii.append(find_maximal_circle(self._defs(np.column_stack([R * np.cos(th), R * np.sin(th)]))).radius)
        assert np.mean([12 <= r <= 25 for r in radii]) >= 0.75

    def test_every_incident_point_outside(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            pts = rng.uniform(-50, 50, (5, 2))
            c = find_maximal_circle(self._defs(pts))
            d = np.hypot(*(pts - (c.center.x, c.center.y)).T)
            assert d.min() / c.radius == pytest.approx(2.5, abs=1e-9)


def test_circle_rejects_bad_radius():
    with pytest.raises(ValueError):
        Circle(Point(0, 0), 0.0)
