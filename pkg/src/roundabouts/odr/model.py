"""In-memory OpenDRIVE road network (the subset this package reads and writes)."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator

import numpy as np

from ..geom import DEFAULT_STEP, Geometry, Polyline, Pose

CONTACT_POINTS = ("start", "end")


@dataclass(frozen=True)
class Link:
    element_type: str  # "road" or "junction"
    element_id: int
    contact_point: str | None = None

    def __post_init__(self):
        if self.element_type not in ("road", "junction"):
            raise ValueError(f"unknown link element type {self.element_type!r}")
        if self.element_type == "road" and self.contact_point not in CONTACT_POINTS:
            raise ValueError(f"road links need contact point start/end, got {self.contact_point!r}")


@dataclass(frozen=True)
class Lane:
    id: int
    width: float
    type: str = "driving"
    predecessor: int | None = None
    successor: int | None = None


@dataclass(frozen=True)
class LaneSection:
    s: float = 0.0
    left: tuple[Lane, ...] = ()
    right: tuple[Lane, ...] = ()

    def lane_ids(self) -> set[int]:
        return {ln.id for ln in self.left} | {ln.id for ln in self.right} | {0}

    @classmethod
    def uniform(cls, n_left: int, n_right: int, width: float, links=None) -> LaneSection:
        """Lanes of equal width; ``links`` maps lane id -> (pred id, succ id)."""
        links = links or {}
        left = tuple(Lane(i, width, "driving", *links.get(i, (None, None))) for i in range(1, n_left + 1))
        right = tuple(Lane(-i, width, "driving", *links.get(-i, (None, None))) for i in range(1, n_right + 1))
        return cls(0.0, left, right)


@dataclass(eq=False)
class Road:
    id: int
    geometries: list[Geometry]
    lane_sections: list[LaneSection] = field(default_factory=lambda: [LaneSection()])
    predecessor: Link | None = None
    successor: Link | None = None
    junction: int = -1
    name: str = ""

    def __post_init__(self):
        if self.id <= 0:
            raise ValueError("road ids must be positive")
        if not self.geometries:
            raise ValueError(f"road {self.id} has no geometry")

    @property
    def s_offsets(self) -> list[float]:
        out, s = [], 0.0
        for g in self.geometries:
            out.append(s)
            s += g.length
        return out

    @property
    def length(self) -> float:
        return float(sum(g.length for g in self.geometries))

    @property
    def start_pose(self) -> Pose:
        return self.geometries[0].start

    @property
    def end_pose(self) -> Pose:
        return self.geometries[-1].end

    def contact_pose(self, contact: str) -> Pose:
        return self.start_pose if contact == "start" else self.end_pose

    def sample(self, step: float = DEFAULT_STEP) -> Polyline:
        parts = [g.sample(step).points for g in self.geometries]
        return Polyline(np.vstack(parts))

    @cached_property
    def polyline(self) -> Polyline:
        return self.sample(DEFAULT_STEP)

    @property
    def role(self) -> str:
        return self.name.split("_", 1)[0] if self.name else ""


@dataclass(frozen=True)
class Connection:
    id: int
    incoming_road: int
    connecting_road: int
    contact_point: str
    lane_links: tuple[tuple[int, int], ...] = ()


@dataclass
class Junction:
    id: int
    name: str = ""
    connections: list[Connection] = field(default_factory=list)


@dataclass
class RoadNetwork:
    roads: list[Road] = field(default_factory=list)
    junctions: list[Junction] = field(default_factory=list)
    name: str = "roundabout"
    version: str = "1.0"
    rev_major: int = 1
    rev_minor: int = 6
    geo_reference: str = ""

    def road(self, road_id: int) -> Road:
        return self._road_index[road_id]

    @property
    def _road_index(self) -> dict[int, Road]:
        return {r.id: r for r in self.roads}

    def junction(self, junction_id: int) -> Junction:
        return {j.id: j for j in self.junctions}[junction_id]

    def __iter__(self) -> Iterator[Road]:
        return iter(sorted(self.roads, key=lambda r: r.id))

    def roads_by_role(self, role: str) -> list[Road]:
        return [r for r in self if r.role == role]

    def ring_chain(self) -> list[Road]:
        """Ring roads in travel order, starting from the lowest id."""
        ring = {r.id: r for r in self.roads_by_role("ring")}
        if not ring:
            return []
        first = min(ring)
        chain = [ring[first]]
        seen = {first}
        while True:
            succ = chain[-1].successor
            if succ is None or succ.element_type != "road" or succ.element_id not in ring:
                break
            if succ.element_id in seen:
                break
            chain.append(ring[succ.element_id])
            seen.add(succ.element_id)
        return chain

    def geometries_of_kind(self, kind: str, role: str | None = None) -> list[Geometry]:
        roads = self.roads_by_role(role) if role else list(self)
        return [g for r in roads for g in r.geometries if g.kind == kind]
