"""Incident road definitions and generator parameters."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from .geom import Point, Pose, normalize_angle
from .noise import NoiseParams


@dataclass(frozen=True)
class IncidentRoadDefinition:
    """Where an approach road meets the roundabout area.

    ``heading`` is the travel direction of the road's reference line, which
    runs from ``position`` towards the roundabout.  Right lanes travel inbound,
    left lanes outbound.
    """

    position: Point
    heading: float
    num_left_lanes: int = 1
    num_right_lanes: int = 1

    def __post_init__(self):
        if not isinstance(self.position, Point):
            object.__setattr__(self, "position", Point(*self.position))
        object.__setattr__(self, "heading", normalize_angle(float(self.heading)))
        for name in ("num_left_lanes", "num_right_lanes"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise ValueError(f"{name} must be a nonnegative integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if self.num_left_lanes + self.num_right_lanes < 1:
            raise ValueError("an incident road needs at least one lane")

    @property
    def pose(self) -> Pose:
        return Pose(self.position, self.heading)

    def to_dict(self) -> dict:
        return {
            "x": self.position.x,
            "y": self.position.y,
            "heading_rad": self.heading,
            "num_left_lanes": self.num_left_lanes,
            "num_right_lanes": self.num_right_lanes,
        }

    @classmethod
    def from_dict(cls, d: dict) -> IncidentRoadDefinition:
        missing = {"x", "y", "heading_rad"} - set(d)
        if missing:
            raise ValueError(f"road definition is missing {sorted(missing)}")
        return cls(
            Point(float(d["x"]), float(d["y"])),
            float(d["heading_rad"]),
            d.get("num_left_lanes", 1),
            d.get("num_right_lanes", 1),
        )


@dataclass(frozen=True)
class GenerationParams:
    """Knobs for classic generation.

    ``segments_per_ring`` of ``None`` means three per incident road, at least
    12.  ``distortion`` of ``None`` means the default amplitude of
    ``distortion_ratio * radius``; pass ``NoiseParams(amplitude=0)`` or
    ``distortion_ratio=0`` for a perfect circle.  ``approach_gap`` is the
    clearance kept between incident road ends and the ring; ``None`` resolves to
    ``clearance`` plus the paved width of the circulating lanes.
    """

    segments_per_ring: int | None = None
    distortion: NoiseParams | None = None
    distortion_ratio: float = 0.08
    noise_frequency: float = 3.0
    circulating_lanes: int = 2
    lane_width: float = 3.5
    clearance: float = 2.0
    min_incident_length: float = 5.0
    approach_gap: float | None = None
    radius_factor: float = 0.4
    counterclockwise: bool = True
    seed: int = 0

    def __post_init__(self):
        if not self.lane_width > 0:
            raise ValueError("lane_width must be positive")
        if not self.clearance > 0:
            raise ValueError("clearance must be positive")
        if self.circulating_lanes < 1:
            raise ValueError("circulating_lanes must be >= 1")
        if self.min_incident_length < 0:
            raise ValueError("min_incident_length must be >= 0")
        if self.distortion_ratio < 0:
            raise ValueError("distortion_ratio must be >= 0")
        if self.segments_per_ring is not None and self.segments_per_ring < 4:
            raise ValueError("segments_per_ring must be >= 4")

    def ring_segments(self, n_incident: int) -> int:
        if self.segments_per_ring is not None:
            return self.segments_per_ring
        return max(12, 3 * n_incident)

    def resolved_approach_gap(self) -> float:
        if self.approach_gap is not None:
            return self.approach_gap
        return self.clearance + 0.5 * self.circulating_lanes * self.lane_width

    def noise_for(self, radius: float) -> NoiseParams:
        if self.distortion is not None:
            return self.distortion
        return NoiseParams(self.seed, self.distortion_ratio * radius, self.noise_frequency)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in dataclasses.fields(cls)]


@dataclass(frozen=True)
class TurboParams(GenerationParams):
    """Classic parameters plus the half-circle translation distance.

    ``translation_distance`` of ``None`` resolves to the paved ring width
    (``circulating_lanes * lane_width``).
    """

    translation_distance: float | None = None

    def __post_init__(self):
        super().__post_init__()
        if self.translation_distance is not None and not self.translation_distance > 0:
            raise ValueError("translation_distance must be positive")

    def resolved_translation(self) -> float:
        if self.translation_distance is not None:
            return self.translation_distance
        return self.circulating_lanes * self.lane_width
