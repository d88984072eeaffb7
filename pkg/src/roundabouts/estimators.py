"""scikit-learn style wrappers.

``CircleFitter`` is an ordinary estimator on (n, 2) point arrays.  The two
generators treat a list of incident road definitions (or rows of
``x, y, heading[, left, right]``) as ``X``; ``fit`` builds the network and
stores it in ``network_``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .circle_fit import RADIUS_FACTOR, find_maximal_circle, fit_center_least_squares, kasa_objective
from .defs import GenerationParams, TurboParams
from .geom import Point
from .validation import check_points, check_road_defs


class CircleFitter(BaseEstimator):
    """Algebraic (Kasa) circle centre with the roundabout radius rule."""

    def __init__(self, radius_factor: float = RADIUS_FACTOR):
        self.radius_factor = radius_factor

    def fit(self, X, y=None):
        xy = check_points(X, min_points=3)
        c = fit_center_least_squares(xy)
        d = np.hypot(xy[:, 0] - c.x, xy[:, 1] - c.y)
        self.center_ = np.array([c.x, c.y])
        self.radius_ = float(self.radius_factor * d.min())
        self.n_features_in_ = 2
        return self

    def transform(self, X):
        """Distance of every point to the fitted centre."""
        check_is_fitted(self, "center_")
        xy = check_points(X)
        return np.hypot(xy[:, 0] - self.center_[0], xy[:, 1] - self.center_[1])

    def score(self, X, y=None) -> float:
        """Negative algebraic objective at the fitted centre (higher is better)."""
        check_is_fitted(self, "center_")
        return -kasa_objective(check_points(X), Point(*self.center_))


class ClassicRoundaboutGenerator(BaseEstimator):
    _params_cls = GenerationParams

    def __init__(
        self,
        segments_per_ring=None,
        distortion_ratio=0.08,
        noise_frequency=3.0,
        circulating_lanes=2,
        lane_width=3.5,
        clearance=2.0,
        min_incident_length=5.0,
        approach_gap=None,
        radius_factor=RADIUS_FACTOR,
        counterclockwise=True,
        seed=0,
        validate=True,
    ):
        self.segments_per_ring = segments_per_ring
        self.distortion_ratio = distortion_ratio
        self.noise_frequency = noise_frequency
        self.circulating_lanes = circulating_lanes
        self.lane_width = lane_width
        self.clearance = clearance
        self.min_incident_length = min_incident_length
        self.approach_gap = approach_gap
        self.radius_factor = radius_factor
        self.counterclockwise = counterclockwise
        self.seed = seed
        self.validate = validate

    def generation_params(self):
        names = set(self._params_cls.field_names())
        return self._params_cls(**{k: v for k, v in self.get_params().items() if k in names})

    def _build(self, defs, params):
        from .classic import generate_classic

        return generate_classic(defs, params, validate=self.validate)

    def fit(self, X, y=None):
        defs = check_road_defs(X)
        params = self.generation_params()
        self.circle_ = find_maximal_circle(defs, params.radius_factor)
        self.network_ = self._build(defs, params)
        self.n_incident_ = len(defs)
        return self

    def transform(self, X):
        """Generate a network for ``X`` with this estimator's parameters."""
        return self._build(check_road_defs(X), self.generation_params())

    def fit_transform(self, X, y=None):
        return self.fit(X).network_

    def to_opendrive(self) -> str:
        from .odr.writer import emit_opendrive

        check_is_fitted(self, "network_")
        return emit_opendrive(self.network_, clearance=self.clearance)


class TurboRoundaboutGenerator(ClassicRoundaboutGenerator):
    _params_cls = TurboParams

    def __init__(
        self,
        translation_distance=None,
        segments_per_ring=None,
        circulating_lanes=2,
        lane_width=3.5,
        clearance=2.0,
        min_incident_length=5.0,
        approach_gap=None,
        radius_factor=RADIUS_FACTOR,
        counterclockwise=True,
        seed=0,
        validate=True,
    ):
        self.translation_distance = translation_distance
        self.segments_per_ring = segments_per_ring
        self.circulating_lanes = circulating_lanes
        self.lane_width = lane_width
        self.clearance = clearance
        self.min_incident_length = min_incident_length
        self.approach_gap = approach_gap
        self.radius_factor = radius_factor
        self.counterclockwise = counterclockwise
        self.seed = seed
        self.validate = validate

    def _build(self, defs, params):
        from .turbo import generate_turbo

        return generate_turbo(defs, params, validate=self.validate)
