"""OpenDRIVE 1.6 serialization.

Output is built as text so that attribute order, indentation and number
formatting are fixed.  Floats are written fixed-point with 17 significant
digits, which round-trips every double exactly.
"""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape, quoteattr

import numpy as np

from ..errors import ValidationFailedError
from ..geom import Arc, Geometry, Line, ParamCubic
from .model import Lane, LaneSection, Link, Road, RoadNetwork


def fmt_float(x: float) -> str:
    x = float(x)
    if x == 0.0:
        return "0"
    return np.format_float_positional(x, precision=17, unique=False, fractional=False, trim="-")


def _attrs(pairs) -> str:
    out = []
    for k, v in pairs:
        if v is None:
            continue
        if isinstance(v, float):
            v = fmt_float(v)
        out.append(f"{k}={quoteattr(str(v))}")
    return " ".join(out)


def _tag(name: str, pairs=(), close: bool = True) -> str:
    a = _attrs(pairs)
    body = f"{name} {a}" if a else name
    return f"<{body}/>" if close else f"<{body}>"


def _geometry(g: Geometry, s: float) -> list[str]:
    head = _tag(
        "geometry",
        [("s", s), ("x", g.start.x), ("y", g.start.y), ("hdg", g.start.heading), ("length", float(g.length))],
        close=False,
    )
    if isinstance(g, Line):
        inner = "<line/>"
    elif isinstance(g, Arc):
        inner = _tag("arc", [("curvature", g.curvature)])
    elif isinstance(g, ParamCubic):
        names = ("aU", "bU", "cU", "dU", "aV", "bV", "cV", "dV")
        inner = _tag("paramPoly3", [*zip(names, g.coefficients), ("pRange", "normalized")])
    else:
        raise TypeError(f"cannot serialize geometry of type {type(g).__name__}")
    return [head, f"  {inner}", "</geometry>"]


def _link(pred: Link | None, succ: Link | None) -> list[str]:
    if pred is None and succ is None:
        return []
    out = ["<link>"]
    for name, link in (("predecessor", pred), ("successor", succ)):
        if link is not None:
            out.append(
                "  "
                + _tag(
                    name,
                    [("elementType", link.element_type), ("elementId", link.element_id), ("contactPoint", link.contact_point)],
                )
            )
    out.append("</link>")
    return out


def _lane(lane: Lane) -> list[str]:
    out = [_tag("lane", [("id", lane.id), ("type", lane.type), ("level", "false")], close=False)]
    if lane.predecessor is not None or lane.successor is not None:
        out.append("  <link>")
        if lane.predecessor is not None:
            out.append("    " + _tag("predecessor", [("id", lane.predecessor)]))
        if lane.successor is not None:
            out.append("    " + _tag("successor", [("id", lane.successor)]))
        out.append("  </link>")
    out.append("  " + _tag("width", [("sOffset", 0.0), ("a", float(lane.width)), ("b", 0.0), ("c", 0.0), ("d", 0.0)]))
    out.append("</lane>")
    return out


def _indent(lines: list[str], n: int) -> list[str]:
    pad = " " * n
    return [pad + ln for ln in lines]


def _lane_section(sec: LaneSection) -> list[str]:
    out = [_tag("laneSection", [("s", float(sec.s))], close=False)]
    if sec.left:
        out.append("  <left>")
        for lane in sorted(sec.left, key=lambda ln: -ln.id):
            out += _indent(_lane(lane), 4)
        out.append("  </left>")
    out.append("  <center>")
    out.append("    " + _tag("lane", [("id", 0), ("type", "none"), ("level", "false")]))
    out.append("  </center>")
    if sec.right:
        out.append("  <right>")
        for lane in sorted(sec.right, key=lambda ln: -ln.id):
            out += _indent(_lane(lane), 4)
        out.append("  </right>")
    out.append("</laneSection>")
    return out


def _road(road: Road) -> list[str]:
    out = [
        _tag(
            "road",
            [("name", road.name), ("length", road.length), ("id", road.id), ("junction", road.junction)],
            close=False,
        )
    ]
    out += _indent(_link(road.predecessor, road.successor), 2)
    out.append("  <planView>")
    for g, s in zip(road.geometries, road.s_offsets):
        out += _indent(_geometry(g, float(s)), 4)
    out.append("  </planView>")
    out.append("  <lanes>")
    for sec in road.lane_sections:
        out += _indent(_lane_section(sec), 4)
    out.append("  </lanes>")
    out.append("</road>")
    return out


def emit_opendrive(net: RoadNetwork, validate: bool = True, clearance: float = 2.0) -> str:
    """Serialize ``net``; by default refuses networks that fail validation."""
    if validate:
        from .validate import validate_links

        violations = validate_links(net, clearance)
        if violations:
            raise ValidationFailedError(violations)
    lines = ['<?xml version="1.0" encoding="UTF-8"?>', "<OpenDRIVE>"]
    lines.append(
        "  "
        + _tag(
            "header",
            [("revMajor", net.rev_major), ("revMinor", net.rev_minor), ("name", net.name), ("version", net.version)],
            close=not net.geo_reference,
        )
    )
    if net.geo_reference:
        lines.append(f"    <geoReference>{escape(net.geo_reference)}</geoReference>")
        lines.append("  </header>")
    for road in sorted(net.roads, key=lambda r: r.id):
        lines += _indent(_road(road), 2)
    for j in sorted(net.junctions, key=lambda j: j.id):
        lines.append("  " + _tag("junction", [("name", j.name), ("id", j.id)], close=False))
        for c in sorted(j.connections, key=lambda c: c.id):
            lines.append(
                "    "
                + _tag(
                    "connection",
                    [
                        ("id", c.id),
                        ("incomingRoad", c.incoming_road),
                        ("connectingRoad", c.connecting_road),
                        ("contactPoint", c.contact_point),
                    ],
                    close=not c.lane_links,
                )
            )
            if c.lane_links:
                for a, b in c.lane_links:
                    lines.append("      " + _tag("laneLink", [("from", a), ("to", b)]))
                lines.append("    </connection>")
        lines.append("  </junction>")
    lines.append("</OpenDRIVE>")
    return "\n".join(lines) + "\n"


def write_opendrive(net: RoadNetwork, path, **kwargs) -> Path:
    path = Path(path)
    path.write_text(emit_opendrive(net, **kwargs), encoding="utf-8")
    return path
