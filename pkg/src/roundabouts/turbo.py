"""Turbo roundabouts with one translation axis.

The base circle is split into two half rings whose centres are pushed apart
by ``translation_distance``; two straight spikes close the gap.  The
construction happens in a canonical frame, with spikes running along +x and
-x, and is then rotated so that the spikes land next to the compatible pair
of incident points.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

from .circle_fit import Circle, find_maximal_circle
from .classic import CircularSegment, assemble_network, resolve_approaches
from .defs import IncidentRoadDefinition, TurboParams
from .errors import InfeasibleLayoutError, ValidationFailedError
from .geom import Arc, Line, Pose, angle_diff, normalize_angle
from .odr.model import RoadNetwork
from .validation import check_road_defs


@dataclass(frozen=True)
class CompatiblePair:
    index_a: int
    index_b: int
    axis_angle: float

    @property
    def translation_angle(self) -> float:
        """Direction of the spikes, perpendicular to the line through the pair."""
        return normalize_angle(self.axis_angle + math.pi / 2)


def find_compatible_pair(defs: Sequence[IncidentRoadDefinition], circle: Circle) -> CompatiblePair:
    """The most nearly antipodal pair of incident points about the centre."""
    defs = check_road_defs(defs)
    c = circle.center
    bearings = [c.bearing_to(d.position) for d in defs]
    best = None
    for i, j in itertools.combinations(range(len(defs)), 2):
        miss = abs(math.pi - abs(angle_diff(bearings[i], bearings[j])))
        if best is None or miss < best[0] - 1e-12:
            best = (miss, i, j)
    _, i, j = best
    return CompatiblePair(i, j, defs[i].position.bearing_to(defs[j].position))


def _canonical_ring(circle: Circle, n_half: int, d: float, ccw: bool) -> list:
    """Geometries of the stadium ring with spikes parallel to the x axis.

    Order: right half ring, upper spike, left half ring, lower spike (for
    counterclockwise travel; mirrored otherwise).
    """
    c, r = circle.center, circle.radius
    sgn = 1.0 if ccw else -1.0
    span = math.pi * r / n_half
    out = []
    halves = ((c.x + d / 2, -math.pi / 2), (c.x - d / 2, math.pi / 2))
    for h, (cx, theta0) in enumerate(halves):
        for k in range(n_half):
            theta = sgn * (theta0 + math.pi * k / n_half)
            start = Pose.xyh(cx + r * math.cos(theta), c.y + r * math.sin(theta), theta + sgn * math.pi / 2)
            out.append(Arc(start, span, sgn / r))
        # spike leaves the top (h=0) or bottom (h=1) of this half towards the other one
        y = c.y + sgn * (r if h == 0 else -r)
        heading = math.pi if h == 0 else 0.0
        out.append(Line(Pose.xyh(cx, y, heading), d))
    return out


def build_turbo_ring(
    circle: Circle, pair: CompatiblePair, params: TurboParams, n_incident: int = 4
) -> list[CircularSegment]:
    """Two half rings of ``segments_per_ring / 2`` arcs each, joined by spikes."""
    d = params.resolved_translation()
    if d >= circle.radius:
        raise InfeasibleLayoutError(
            f"translation distance {d} m must be smaller than the ring radius {circle.radius:.3f} m"
        )
    n_half = max(2, math.ceil(params.ring_segments(n_incident) / 2))
    geoms = _canonical_ring(circle, n_half, d, params.counterclockwise)
    phi = pair.translation_angle
    geoms = [g.rotated(circle.center, phi) for g in geoms]
    n = len(geoms)
    return [CircularSegment(k, g.start, geoms[(k + 1) % n].start, g) for k, g in enumerate(geoms)]


def spike_indices(ring: Sequence[CircularSegment]) -> list[int]:
    return [s.index for s in ring if s.geometry.kind == "line"]


def _spike_attachments(defs, pair: CompatiblePair, ring: Sequence[CircularSegment]) -> dict:
    """(entry node, exit node) for both compatible approaches.

    Traffic enters at the far end of the spike and leaves from its near end,
    so the two directions of one approach sit on different half rings.
    """
    n = len(ring)
    spikes = spike_indices(ring)
    fixed = {}
    free = list(spikes)
    for idx in (pair.index_a, pair.index_b):
        p = defs[idx].position
        k = min(free, key=lambda s: ring[s].geometry.point_at(ring[s].geometry.length / 2).distance_to(p))
        free.remove(k)
        d = defs[idx]
        fixed[idx] = ((k + 1) % n if d.num_right_lanes > 0 else None, k if d.num_left_lanes > 0 else None)
    return fixed


def generate_turbo(
    defs: Sequence[IncidentRoadDefinition],
    params: TurboParams | None = None,
    validate: bool = True,
) -> RoadNetwork:
    """Build a turbo roundabout; the compatible pair attaches at the spikes."""
    params = params or TurboParams()
    defs = check_road_defs(defs)
    circle = find_maximal_circle(defs, params.radius_factor)
    pair = find_compatible_pair(defs, circle)
    ring = build_turbo_ring(circle, pair, params, len(defs))
    approaches = resolve_approaches(defs, circle, ring, params, fixed=_spike_attachments(defs, pair, ring))
    net = assemble_network(ring, approaches, params, name="turbo_roundabout")
    if validate:
        from .odr.validate import validate_links

        violations = validate_links(net, params.clearance)
        if violations:
            raise ValidationFailedError(violations)
    return net
