"""Link and overlap validation for road networks."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..geom import DEFAULT_STEP, angle_diff, bbox_gap, min_clearance
from .model import CONTACT_POINTS, Road, RoadNetwork

POSITION_TOL = 1e-3
HEADING_TOL = 1e-4
CLOSURE_TOL = 1e-6


@dataclass(frozen=True)
class Violation:
    kind: str  # missing-target, coincidence, heading, lane-link, contact, clearance, duplicate-id, closure
    roads: tuple[int, ...]
    message: str

    def __str__(self) -> str:
        return f"[{self.kind}] {self.message}"


class _Ports:
    """Union-find over road endpoints; roads sharing a node are adjacent."""

    def __init__(self):
        self.parent: dict = {}

    def find(self, k):
        self.parent.setdefault(k, k)
        while self.parent[k] != k:
            self.parent[k] = self.parent[self.parent[k]]
            k = self.parent[k]
        return k

    def union(self, a, b):
        self.parent[self.find(a)] = self.find(b)


def _check_join(a: Road, a_contact: str, b: Road, b_contact: str, out: list, what: str):
    """``a`` leaves/enters through ``a_contact`` into ``b`` at ``b_contact``."""
    pa, pb = a.contact_pose(a_contact), b.contact_pose(b_contact)
    gap = pa.position.distance_to(pb.position)
    if gap > POSITION_TOL:
        out.append(
            Violation(
                "coincidence",
                (a.id, b.id),
                f"{what}: road {a.id} {a_contact} and road {b.id} {b_contact} are {gap:.4g} m apart",
            )
        )
        return
    # travel continues through the node when contacts differ, reverses when equal
    expected = pa.heading if a_contact != b_contact else pa.heading + math.pi
    dh = abs(angle_diff(pb.heading, expected))
    if dh > HEADING_TOL:
        out.append(
            Violation(
                "heading",
                (a.id, b.id),
                f"{what}: heading jump of {dh:.4g} rad between road {a.id} and road {b.id}",
            )
        )


def _lane_ok(road: Road, lane_id: int, contact: str) -> bool:
    section = road.lane_sections[0] if contact == "start" else road.lane_sections[-1]
    return lane_id in section.lane_ids()


def adjacency(net: RoadNetwork) -> set[frozenset]:
    """Pairs of road ids that meet at a shared endpoint."""
    ports = _Ports()
    roads = net._road_index
    jmap = {j.id: j for j in net.junctions}
    for r in net.roads:
        for own, link in (("start", r.predecessor), ("end", r.successor)):
            if link is None:
                continue
            if link.element_type == "road" and link.element_id in roads:
                ports.union((r.id, own), (link.element_id, link.contact_point))
    for j in jmap.values():
        for c in j.connections:
            inc = roads.get(c.incoming_road)
            con = roads.get(c.connecting_road)
            if inc is None or con is None:
                continue
            # match the incoming road's endpoint that touches the connecting road
            cp = con.contact_pose(c.contact_point).position
            own = min(CONTACT_POINTS, key=lambda k: inc.contact_pose(k).position.distance_to(cp))
            ports.union((inc.id, own), (con.id, c.contact_point))
    groups: dict = {}
    for r in net.roads:
        for k in CONTACT_POINTS:
            groups.setdefault(ports.find((r.id, k)), set()).add(r.id)
    pairs = set()
    for members in groups.values():
        ms = sorted(members)
        for i, a in enumerate(ms):
            for b in ms[i + 1 :]:
                pairs.add(frozenset((a, b)))
    return pairs


def validate_links(
    net: RoadNetwork, clearance: float = 2.0, step: float = DEFAULT_STEP, check_clearance: bool = True
) -> list[Violation]:
    """Return every rule violation found in ``net`` (empty list = valid)."""
    out: list[Violation] = []
    roads: dict[int, Road] = {}
    for r in net.roads:
        if r.id in roads:
            out.append(Violation("duplicate-id", (r.id,), f"road id {r.id} is used twice"))
        roads[r.id] = r
    jmap = {}
    for j in net.junctions:
        if j.id in roads or j.id in jmap:
            out.append(Violation("duplicate-id", (j.id,), f"junction id {j.id} collides"))
        jmap[j.id] = j

    for r in net.roads:
        offsets = r.s_offsets
        if any(b <= a for a, b in zip(offsets, offsets[1:])):
            out.append(Violation("contact", (r.id,), f"road {r.id} has non-increasing geometry offsets"))
        if r.junction != -1:
            j = jmap.get(r.junction)
            if j is None:
                out.append(Violation("missing-target", (r.id,), f"road {r.id} names missing junction {r.junction}"))
            elif not any(c.connecting_road == r.id for c in j.connections):
                out.append(Violation("missing-target", (r.id,), f"road {r.id} is not a connecting road of junction {j.id}"))
        for own, link, what in (("start", r.predecessor, "predecessor"), ("end", r.successor, "successor")):
            if link is None:
                continue
            if link.element_type == "junction":
                if link.element_id not in jmap:
                    out.append(
                        Violation("missing-target", (r.id,), f"road {r.id} {what} names missing junction {link.element_id}")
                    )
                continue
            other = roads.get(link.element_id)
            if other is None:
                out.append(Violation("missing-target", (r.id,), f"road {r.id} {what} names missing road {link.element_id}"))
                continue
            if own == "start":
                # travel arrives from ``other`` into r's start
                _check_join(other, link.contact_point, r, "start", out, f"road {r.id} {what}")
            else:
                _check_join(r, "end", other, link.contact_point, out, f"road {r.id} {what}")
            for lane in [*r.lane_sections[0 if own == "start" else -1].left, *r.lane_sections[0 if own == "start" else -1].right]:
                target = lane.predecessor if own == "start" else lane.successor
                if target is not None and not _lane_ok(other, target, link.contact_point):
                    out.append(
                        Violation(
                            "lane-link",
                            (r.id, other.id),
                            f"road {r.id} lane {lane.id} links to missing lane {target} of road {other.id}",
                        )
                    )

    for j in jmap.values():
        for c in j.connections:
            inc, con = roads.get(c.incoming_road), roads.get(c.connecting_road)
            if inc is None or con is None:
                out.append(
                    Violation(
                        "missing-target",
                        (c.incoming_road, c.connecting_road),
                        f"junction {j.id} connection {c.id} names a missing road",
                    )
                )
                continue
            if c.contact_point not in CONTACT_POINTS:
                out.append(Violation("contact", (con.id,), f"junction {j.id} connection {c.id} has bad contact point"))
                continue
            if con.junction != j.id:
                out.append(
                    Violation("missing-target", (con.id,), f"connecting road {con.id} is not a member of junction {j.id}")
                )
            cp = con.contact_pose(c.contact_point).position
            near = min(CONTACT_POINTS, key=lambda k: inc.contact_pose(k).position.distance_to(cp))
            if inc.contact_pose(near).position.distance_to(cp) > POSITION_TOL:
                out.append(
                    Violation(
                        "contact",
                        (inc.id, con.id),
                        f"junction {j.id}: road {con.id} attaches to road {inc.id} away from its endpoints",
                    )
                )
            for a, b in c.lane_links:
                if not _lane_ok(inc, a, near) or not _lane_ok(con, b, c.contact_point):
                    out.append(
                        Violation(
                            "lane-link",
                            (inc.id, con.id),
                            f"junction {j.id} connection {c.id} lane link {a}->{b} names a missing lane",
                        )
                    )

    out.extend(ring_closure_violations(net))
    if check_clearance:
        out.extend(clearance_violations(net, clearance, step))
    return out


def ring_closure_violations(net: RoadNetwork) -> list[Violation]:
    """The ring must be one loop through every ring road, closing to within ``CLOSURE_TOL``."""
    ring = net.roads_by_role("ring")
    if not ring:
        return []
    chain = net.ring_chain()
    ids = tuple(r.id for r in chain)
    if len(chain) != len(ring):
        return [Violation("closure", ids, f"ring chain visits {len(chain)} of {len(ring)} ring roads")]
    gap = chain[-1].end_pose.position.distance_to(chain[0].start_pose.position)
    if gap > CLOSURE_TOL:
        return [Violation("closure", (ids[-1], ids[0]), f"ring does not close: end of road {ids[-1]} is {gap:.3g} m from road {ids[0]}")]
    return []


def clearance_violations(net: RoadNetwork, clearance: float = 2.0, step: float = DEFAULT_STEP) -> list[Violation]:
    adj = adjacency(net)
    roads = sorted(net.roads, key=lambda r: r.id)
    polys = {r.id: (r.polyline if step == DEFAULT_STEP else r.sample(step)) for r in roads}
    boxes = {k: p.bbox() for k, p in polys.items()}
    out = []
    for i, a in enumerate(roads):
        for b in roads[i + 1 :]:
            if frozenset((a.id, b.id)) in adj:
                continue
            if bbox_gap(boxes[a.id], boxes[b.id]) >= clearance:
                continue
            d = min_clearance(polys[a.id], polys[b.id])
            if d < clearance:
                out.append(
                    Violation(
                        "clearance",
                        (a.id, b.id),
                        f"roads {a.id} and {b.id} are {d:.3f} m apart (< {clearance} m)",
                    )
                )
    return out
