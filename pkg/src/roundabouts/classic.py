"""Classic roundabout generation.

The base circle is cut into equal segments so that approach roads can attach
to segment endpoints only.  Segments are exact arcs for a perfect circle, or
parametric cubics through radially distorted boundary points.  Each incident
road runs straight from its definition towards the ring and is joined to it by
an entry and an exit connection road.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circle_fit import Circle, find_maximal_circle
from .defs import GenerationParams, IncidentRoadDefinition
from .errors import InfeasibleLayoutError, ValidationFailedError
from .geom import (
    DEFAULT_STEP,
    TWO_PI,
    Arc,
    Geometry,
    Line,
    Point,
    Polyline,
    Pose,
    angle_diff,
    bbox_gap,
    fit_param_cubic,
    min_clearance,
    normalize_angle,
)
from .noise import NoiseParams, distort_ring_points
from .odr.model import Connection, Junction, LaneSection, Link, Road, RoadNetwork
from .validation import check_road_defs

# connections may dip this far inside the sampled ring before counting as a crossing
_CROSSING_TOL = 0.05


@dataclass(frozen=True)
class CircularSegment:
    index: int
    start: Pose
    end: Pose
    geometry: Geometry

    @property
    def polyline(self) -> Polyline:
        return self.geometry.sample(DEFAULT_STEP)


def segment_circle(circle: Circle, n: int, counterclockwise: bool = True) -> list[Pose]:
    """``n`` equally spaced boundary poses with tangent headings."""
    if n < 4:
        raise ValueError(f"a ring needs at least 4 segments, got {n}")
    sgn = 1.0 if counterclockwise else -1.0
    c, r = circle.center, circle.radius
    poses = []
    for k in range(n):
        theta = sgn * TWO_PI * k / n
        poses.append(Pose.xyh(c.x + r * math.cos(theta), c.y + r * math.sin(theta), theta + sgn * math.pi / 2))
    return poses


def build_circular_roads(
    circle: Circle,
    n: int,
    distortion: NoiseParams | None = None,
    counterclockwise: bool = True,
) -> list[CircularSegment]:
    poses = segment_circle(circle, n, counterclockwise)
    sgn = 1.0 if counterclockwise else -1.0
    if distortion is None or distortion.amplitude == 0.0:
        span = TWO_PI * circle.radius / n
        segs = []
        for k, p in enumerate(poses):
            arc = Arc(p, span, sgn / circle.radius)
            segs.append(CircularSegment(k, p, poses[(k + 1) % n], arc))
        return segs

    pts = distort_ring_points([p.position for p in poses], circle, distortion)
    # tangent of the distorted ring by central difference of the neighbours
    nodes = []
    for k, p in enumerate(pts):
        a, b = pts[k - 1], pts[(k + 1) % n]
        nodes.append(Pose(p, math.atan2(b.y - a.y, b.x - a.x)))
    return [
        CircularSegment(k, nodes[k], nodes[(k + 1) % n], fit_param_cubic(nodes[k], nodes[(k + 1) % n]))
        for k in range(n)
    ]


def center_offset(center: Point, incident: Pose) -> float:
    """Heading of ``incident`` relative to the outward bearing from ``center``."""
    if incident.position.distance_to(center) == 0.0:
        raise InfeasibleLayoutError("incident point coincides with the roundabout centre")
    return normalize_angle(incident.heading - center.bearing_to(incident.position))


def _ring_polyline(ring: Sequence[CircularSegment]) -> Polyline:
    return Polyline(np.vstack([s.polyline.points for s in ring]))


def incident_road_length(
    incident: Pose,
    circle: Circle,
    ring: Sequence[CircularSegment],
    clearance: float,
    min_len: float,
    ring_poly: Polyline | None = None,
) -> float:
    """Length of the straight approach road.

    The road is extended along its heading towards the point of closest
    approach to the centre, but stops where it would come within
    ``clearance`` of the ring (or of the nominal circle grown by
    ``clearance``).
    """
    c = circle.center
    p = incident.position
    d = p.distance_to(c)
    if d < circle.radius + clearance:
        raise InfeasibleLayoutError(f"incident point {tuple(p)} lies within the ring clearance")
    psi = angle_diff(p.bearing_to(c), incident.heading)
    l_star = d * math.cos(psi)
    ring_poly = ring_poly if ring_poly is not None else _ring_polyline(ring)
    ch, sh = math.cos(incident.heading), math.sin(incident.heading)
    limit = circle.radius + clearance

    def feasible(length: float) -> bool:
        end = (p.x + length * ch, p.y + length * sh)
        if math.hypot(end[0] - c.x, end[1] - c.y) < limit:
            return False
        seg = Polyline([(p.x, p.y), end])
        return min_clearance(seg, ring_poly) >= clearance

    if not feasible(min_len):
        raise InfeasibleLayoutError(
            f"incident road at {tuple(p)} cannot reach the minimum length {min_len} m without overlapping the ring"
        )
    if l_star <= min_len:
        return float(min_len)
    if feasible(l_star):
        return float(l_star)
    lo, hi = float(min_len), float(l_star)
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-10:
            break
    return lo


def _node_angles(ring: Sequence[CircularSegment], center: Point) -> np.ndarray:
    return np.array([center.bearing_to(s.start.position) if s.start.position != center else 0.0 for s in ring])


def _nearest_node(angles: np.ndarray, target: float) -> int:
    diffs = np.abs([angle_diff(a, target) for a in angles])
    return int(np.argmin(diffs))


def connection_targets(
    endpoint: Pose, offset: float, n: int, center: Point, counterclockwise: bool = True
) -> tuple[float, float]:
    """Ring angles aimed at by the entry and exit connections of one approach.

    The endpoint bearing is moved one segment span downstream for the entry
    and one upstream for the exit, and both are shifted against the heading's
    tangential component (``offset`` is the centre offset of the outbound
    direction, zero for a radial road).
    """
    span = TWO_PI / n
    sgn = 1.0 if counterclockwise else -1.0
    phi = center.bearing_to(endpoint.position)
    shift = -(4.0 * span / math.pi) * offset
    return phi + sgn * span + shift, phi - sgn * span + shift


def select_connection_segments(
    incident: Pose,
    offset: float,
    ring: Sequence[CircularSegment],
    center: Point,
    counterclockwise: bool = True,
) -> tuple[int, int]:
    """Ring node indices (entry, exit) for the road ending at ``incident``.

    Node ``j`` is the start pose of ring segment ``j``.
    """
    angles = _node_angles(ring, center)
    t_entry, t_exit = connection_targets(incident, offset, len(ring), center, counterclockwise)
    entry = _nearest_node(angles, t_entry)
    exit_ = _nearest_node(angles, t_exit)
    if exit_ == entry:
        exit_ = (entry - 1) % len(ring) if counterclockwise else (entry + 1) % len(ring)
    return entry, exit_


# --------------------------------------------------------------------------
# assembly shared with the turbo generator


class _RingContext:
    def __init__(self, ring: Sequence[CircularSegment], center: Point):
        self.ring = list(ring)
        self.center = center
        self.polys = [s.polyline for s in self.ring]
        self.boxes = [p.bbox() for p in self.polys]
        self.poly = Polyline(np.vstack([p.points for p in self.polys]))
        self.angles = _node_angles(self.ring, center)
        pts = self.poly.points - (center.x, center.y)
        th = np.arctan2(pts[:, 1], pts[:, 0])
        order = np.argsort(th)
        self._th = th[order]
        self._rad = np.hypot(pts[:, 0], pts[:, 1])[order]

    def radius_at(self, theta):
        return np.interp(theta, self._th, self._rad, period=TWO_PI)

    def connection_ok(self, geom: Geometry, node: int, clearance: float) -> bool:
        n = len(self.ring)
        poly = geom.sample(DEFAULT_STEP)
        adjacent = {node % n, (node - 1) % n}
        box = poly.bbox()
        for k, rp in enumerate(self.polys):
            if k in adjacent or bbox_gap(box, self.boxes[k]) >= clearance:
                continue
            if min_clearance(poly, rp) < clearance:
                return False
        rel = poly.points - (self.center.x, self.center.y)
        th = np.arctan2(rel[:, 1], rel[:, 0])
        return bool(np.all(np.hypot(rel[:, 0], rel[:, 1]) >= self.radius_at(th) - _CROSSING_TOL))


# tangent scalings tried, in order, when the plain Hermite fit clips the ring
TANGENT_SCALES = ((1.0, 1.0), (0.7, 0.7), (1.0, 0.6), (0.6, 1.0), (0.5, 0.5), (1.4, 1.4), (1.4, 0.8), (0.8, 1.4))


def _entry_geometry(end: Pose, node: Pose, scale=(1.0, 1.0)) -> Geometry:
    return fit_param_cubic(end, node, scale)


def _exit_geometry(end: Pose, node: Pose, scale=(1.0, 1.0)) -> Geometry:
    return fit_param_cubic(node, end.reversed(), scale)


def _feasible_geometry(ctx, make, end: Pose, node: int, clearance: float):
    """First tangent scaling whose connection keeps clear of the ring, else None."""
    for scale in TANGENT_SCALES:
        g = make(end, ctx.ring[node].start, scale)
        if ctx.connection_ok(g, node, clearance):
            return g
    return None


def _ranked_nodes(angles: np.ndarray, target: float) -> list[int]:
    diffs = [abs(angle_diff(a, target)) for a in angles]
    return sorted(range(len(angles)), key=lambda k: (diffs[k], k))


def choose_connections(
    ctx: _RingContext,
    end: Pose,
    offset: float,
    clearance: float,
    counterclockwise: bool = True,
    need_entry: bool = True,
    need_exit: bool = True,
    max_candidates: int = 5,
) -> tuple[list, list]:
    """Feasible (node, geometry) candidates for entry and exit, best first.

    The first candidate of each list is the node picked by
    :func:`select_connection_segments` whenever that node is feasible.
    """
    entry0, exit0 = select_connection_segments(end, offset, ctx.ring, ctx.center, counterclockwise)
    out = []
    for need, first, make in ((need_entry, entry0, _entry_geometry), (need_exit, exit0, _exit_geometry)):
        if not need:
            out.append([(None, None)])
            continue
        order = _ranked_nodes(ctx.angles, float(ctx.angles[first]))
        found = []
        for k in order:
            g = _feasible_geometry(ctx, make, end, k, clearance)
            if g is not None:
                found.append((k, g))
                if len(found) == max_candidates:
                    break
        if not found:
            raise InfeasibleLayoutError(f"no ring node admits a connection at {tuple(end.position)}")
        out.append(found)
    return out[0], out[1]


@dataclass
class _Approach:
    definition: IncidentRoadDefinition
    length: float
    end: Pose
    entry: int | None = None
    exit: int | None = None
    entry_geometry: Geometry | None = None
    exit_geometry: Geometry | None = None


def assemble_network(
    ring: Sequence[CircularSegment],
    approaches: Sequence[_Approach],
    params: GenerationParams,
    name: str = "roundabout",
) -> RoadNetwork:
    """Turn ring segments and resolved approaches into linked OpenDRIVE roads."""
    n = len(ring)
    m = params.circulating_lanes
    w = params.lane_width
    ring_ids = [k + 1 for k in range(n)]
    next_id = n + 1
    incident_ids = []
    for _ in approaches:
        incident_ids.append(next_id)
        next_id += 1
    conn_ids = {}
    for i, a in enumerate(approaches):
        if a.entry is not None:
            conn_ids[(i, "entry")] = next_id
            next_id += 1
        if a.exit is not None:
            conn_ids[(i, "exit")] = next_id
            next_id += 1
    junction_ids = []
    for _ in approaches:
        junction_ids.append(next_id)
        next_id += 1

    roads: list[Road] = []
    ring_lanes = LaneSection.uniform(0, m, w, {-i: (-i, -i) for i in range(1, m + 1)})
    for k, seg in enumerate(ring):
        roads.append(
            Road(
                ring_ids[k],
                [seg.geometry],
                [ring_lanes],
                predecessor=Link("road", ring_ids[k - 1], "end"),
                successor=Link("road", ring_ids[(k + 1) % n], "start"),
                name=f"ring_{k}",
            )
        )

    junctions = []
    for i, a in enumerate(approaches):
        d = a.definition
        jid = junction_ids[i]
        roads.append(
            Road(
                incident_ids[i],
                [Line(d.pose, a.length)],
                [LaneSection.uniform(d.num_left_lanes, d.num_right_lanes, w)],
                successor=Link("junction", jid),
                name=f"incident_{i}",
            )
        )
        conns = []
        if a.entry is not None:
            rid = conn_ids[(i, "entry")]
            node = ring[a.entry].start
            lanes = {-l: (-l, -min(l, m)) for l in range(1, d.num_right_lanes + 1)}
            roads.append(
                Road(
                    rid,
                    [a.entry_geometry or _entry_geometry(a.end, node)],
                    [LaneSection.uniform(0, d.num_right_lanes, w, lanes)],
                    predecessor=Link("road", incident_ids[i], "end"),
                    successor=Link("road", ring_ids[a.entry], "start"),
                    junction=jid,
                    name=f"entry_{i}",
                )
            )
            conns.append(
                Connection(
                    len(conns),
                    incident_ids[i],
                    rid,
                    "start",
                    tuple((-l, -l) for l in range(1, d.num_right_lanes + 1)),
                )
            )
        if a.exit is not None:
            rid = conn_ids[(i, "exit")]
            node = ring[a.exit].start
            lanes = {-l: (-min(l, m), l) for l in range(1, d.num_left_lanes + 1)}
            upstream = ring_ids[(a.exit - 1) % n]
            roads.append(
                Road(
                    rid,
                    [a.exit_geometry or _exit_geometry(a.end, node)],
                    [LaneSection.uniform(0, d.num_left_lanes, w, lanes)],
                    predecessor=Link("road", upstream, "end"),
                    successor=Link("road", incident_ids[i], "end"),
                    junction=jid,
                    name=f"exit_{i}",
                )
            )
            conns.append(
                Connection(
                    len(conns),
                    upstream,
                    rid,
                    "start",
                    tuple((-min(l, m), -l) for l in range(1, d.num_left_lanes + 1)),
                )
            )
        junctions.append(Junction(jid, f"approach_{i}", conns))
    return RoadNetwork(roads, junctions, name=name)


def _conflict(ga: Polyline, na: int, gb: Polyline, nb: int, clearance: float) -> bool:
    """Two connections clash unless they meet at a shared ring node."""
    if na == nb:
        return False
    return min_clearance(ga, gb) < clearance


# extra distance a pinned approach may keep from the ring, tried in order
PINNED_GAP_STEPS = (0.0, 2.5, 5.0, 7.5, 10.0, 12.5, 15.0, 20.0, 25.0, 30.0)


def _pinned_approach(d: IncidentRoadDefinition, nodes, circle: Circle, ctx: _RingContext, params: GenerationParams):
    """Approach with fixed ring nodes: the shortest pull-back that lets both connections fit."""
    e, x = nodes
    fallback = None
    for extra in PINNED_GAP_STEPS:
        gap = params.resolved_approach_gap() + extra
        try:
            length = incident_road_length(d.pose, circle, ctx.ring, gap, params.min_incident_length, ctx.poly)
        except InfeasibleLayoutError:
            if fallback is None:
                raise
            break
        end = Line(d.pose, length).end
        ge = _feasible_geometry(ctx, _entry_geometry, end, e, params.clearance) if e is not None else None
        gx = _feasible_geometry(ctx, _exit_geometry, end, x, params.clearance) if x is not None else None
        if (e is None or ge is not None) and (x is None or gx is not None):
            return _Approach(d, length, end), (ge, gx)
        if fallback is None:
            fallback = (
                _Approach(d, length, end),
                (
                    ge or (_entry_geometry(end, ctx.ring[e].start) if e is not None else None),
                    gx or (_exit_geometry(end, ctx.ring[x].start) if x is not None else None),
                ),
            )
        if length <= params.min_incident_length:
            break
    return fallback


def resolve_approaches(
    defs: Sequence[IncidentRoadDefinition],
    circle: Circle,
    ring: Sequence[CircularSegment],
    params: GenerationParams,
    fixed: dict | None = None,
    budget: int = 20_000,
) -> list[_Approach]:
    """Incident lengths and connection nodes for every approach.

    Nodes are chosen jointly: each approach contributes its ranked candidate
    (entry, exit) pairs, and a depth-first search keeps the first combination
    whose connection roads stay ``clearance`` away from each other and from
    the other incident roads.  ``fixed`` pins (entry, exit) by approach index;
    pinned approaches may stop further out to give their connections room.
    """
    fixed = fixed or {}
    ctx = _RingContext(ring, circle.center)
    gap = params.resolved_approach_gap()
    clearance = params.clearance
    approaches = []
    pinned = {}
    for i, d in enumerate(defs):
        if i in fixed:
            a, geoms = _pinned_approach(d, fixed[i], circle, ctx, params)
            pinned[i] = geoms
        else:
            length = incident_road_length(d.pose, circle, ring, gap, params.min_incident_length, ctx.poly)
            a = _Approach(d, length, Line(d.pose, length).end)
        approaches.append(a)
    incident_polys = [Line(a.definition.pose, a.length).sample(DEFAULT_STEP) for a in approaches]

    options = []
    for i, a in enumerate(approaches):
        d = a.definition
        if i in fixed:
            e, x = fixed[i]
            ge, gx = pinned[i]
            entries, exits = [(e, ge)], [(x, gx)]
        else:
            offset = center_offset(circle.center, a.end.reversed())
            entries, exits = choose_connections(
                ctx,
                a.end,
                offset,
                clearance,
                params.counterclockwise,
                need_entry=d.num_right_lanes > 0,
                need_exit=d.num_left_lanes > 0,
            )
        pairs = []
        for re_, (e, ge) in enumerate(entries):
            for rx, (x, gx) in enumerate(exits):
                if e is not None and e == x:
                    continue
                conns = []
                ok = True
                for node, g in ((e, ge), (x, gx)):
                    if g is None:
                        continue
                    poly = g.sample(DEFAULT_STEP)
                    for j, ip in enumerate(incident_polys):
                        if j != i and min_clearance(poly, ip) < clearance:
                            ok = False
                            break
                    if not ok:
                        break
                    conns.append((node, poly))
                if ok:
                    pairs.append((re_ + rx, re_, (e, x), conns, (ge, gx)))
        pairs.sort(key=lambda p: (p[0], p[1]))
        options.append(pairs)

    chosen: list = [None] * len(approaches)
    steps = 0

    def dfs(i: int) -> bool:
        nonlocal steps
        if i == len(approaches):
            return True
        for _, _, nodes, conns, geoms in options[i]:
            steps += 1
            if steps > budget:
                return False
            clash = any(
                _conflict(pa, na, pb, nb, clearance)
                for prev in chosen[:i]
                for na, pa in prev[1]
                for nb, pb in conns
            )
            if clash:
                continue
            chosen[i] = (nodes, conns, geoms)
            if dfs(i + 1):
                return True
        chosen[i] = None
        return False

    if not dfs(0):
        raise InfeasibleLayoutError("no combination of ring nodes keeps the connection roads apart")
    for a, (nodes, _, geoms) in zip(approaches, chosen):
        a.entry, a.exit = nodes
        a.entry_geometry, a.exit_geometry = geoms
    return approaches


def generate_classic(
    defs: Sequence[IncidentRoadDefinition],
    params: GenerationParams | None = None,
    validate: bool = True,
) -> RoadNetwork:
    """Build a classic roundabout network from incident road definitions."""
    params = params or GenerationParams()
    defs = check_road_defs(defs)
    circle = find_maximal_circle(defs, params.radius_factor)
    noise = params.noise_for(circle.radius)
    ring = build_circular_roads(
        circle,
        params.ring_segments(len(defs)),
        noise if noise.amplitude > 0 else None,
        params.counterclockwise,
    )
    approaches = resolve_approaches(defs, circle, ring, params)
    net = assemble_network(ring, approaches, params, name="classic_roundabout")
    if validate:
        from .odr.validate import validate_links

        violations = validate_links(net, params.clearance)
        if violations:
            raise ValidationFailedError(violations)
    return net
