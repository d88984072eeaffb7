"""OpenDRIVE reader for the subset written by :mod:`.writer`.

Elements outside that subset are skipped with a warning; geometry kinds the
package cannot evaluate are an error.  Every error carries the line number of
the offending element.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path
from xml.parsers import expat

from ..errors import MalformedXMLError, MissingAttributeError, OpenDriveParseError, UnsupportedGeometryError
from ..geom import Arc, Line, ParamCubic, Pose
from .model import Connection, Junction, Lane, LaneSection, Link, Road, RoadNetwork

_UNSUPPORTED_GEOMETRY = ("spiral", "poly3")


@dataclass
class _Node:
    tag: str
    attrib: dict
    line: int
    children: list = field(default_factory=list)
    text: str = ""

    def find(self, tag: str):
        return next((c for c in self.children if c.tag == tag), None)

    def findall(self, tag: str):
        return [c for c in self.children if c.tag == tag]

    def get(self, name: str, cast=str, default=...):
        if name not in self.attrib:
            if default is ...:
                raise MissingAttributeError(f"<{self.tag}> is missing attribute {name!r}", self.line)
            return default
        raw = self.attrib[name]
        try:
            return cast(raw)
        except ValueError:
            raise OpenDriveParseError(f"<{self.tag}> attribute {name}={raw!r} is not a valid {cast.__name__}", self.line)


def _parse_tree(text: str | bytes) -> _Node:
    parser = expat.ParserCreate()
    root: list[_Node] = []
    stack: list[_Node] = []

    def start(tag, attrib):
        node = _Node(tag, dict(attrib), parser.CurrentLineNumber)
        if stack:
            stack[-1].children.append(node)
        else:
            root.append(node)
        stack.append(node)

    def end(tag):
        stack.pop()

    def chars(data):
        if stack:
            stack[-1].text += data

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    parser.CharacterDataHandler = chars
    try:
        parser.Parse(text, True)
    except expat.ExpatError as exc:
        raise MalformedXMLError(f"malformed XML: {expat.ErrorString(exc.code)}", exc.lineno) from None
    return root[0]


def _warn_unknown(node: _Node, known: set[str]):
    for c in node.children:
        if c.tag not in known:
            warnings.warn(f"line {c.line}: ignoring unsupported element <{c.tag}> inside <{node.tag}>", stacklevel=4)


def _link(node: _Node | None) -> Link | None:
    if node is None:
        return None
    etype = node.get("elementType")
    cp = node.get("contactPoint", default=None)
    if etype == "road" and cp is None:
        raise MissingAttributeError(f"<{node.tag}> road link is missing attribute 'contactPoint'", node.line)
    try:
        return Link(etype, node.get("elementId", int), cp)
    except ValueError as exc:
        raise OpenDriveParseError(str(exc), node.line) from None


def _geometry(node: _Node):
    start = Pose.xyh(node.get("x", float), node.get("y", float), node.get("hdg", float))
    length = node.get("length", float)
    kinds = [c for c in node.children]
    if len(kinds) != 1:
        raise OpenDriveParseError("<geometry> needs exactly one primitive child", node.line)
    prim = kinds[0]
    if prim.tag in _UNSUPPORTED_GEOMETRY:
        raise UnsupportedGeometryError(f"unsupported geometry type {prim.tag!r}", prim.line)
    try:
        if prim.tag == "line":
            return Line(start, length)
        if prim.tag == "arc":
            return Arc(start, length, prim.get("curvature", float))
        if prim.tag == "paramPoly3":
            p_range = prim.get("pRange", default="normalized")
            if p_range != "normalized":
                raise UnsupportedGeometryError(f"paramPoly3 with pRange={p_range!r} is not supported", prim.line)
            names = ("aU", "bU", "cU", "dU", "aV", "bV", "cV", "dV")
            return ParamCubic(start, *(prim.get(n, float) for n in names), length=length)
    except (ValueError, ArithmeticError) as exc:
        if isinstance(exc, OpenDriveParseError):
            raise
        raise OpenDriveParseError(f"invalid <{prim.tag}> geometry: {exc}", prim.line) from None
    raise UnsupportedGeometryError(f"unsupported geometry type {prim.tag!r}", prim.line)


def _lane(node: _Node) -> Lane:
    width = node.find("width")
    w = width.get("a", float) if width is not None else 0.0
    link = node.find("link")
    pred = succ = None
    if link is not None:
        p, s = link.find("predecessor"), link.find("successor")
        pred = p.get("id", int) if p is not None else None
        succ = s.get("id", int) if s is not None else None
    return Lane(node.get("id", int), w, node.get("type", default="driving"), pred, succ)


def _lane_section(node: _Node) -> LaneSection:
    _warn_unknown(node, {"left", "center", "right"})
    sides = {}
    for side in ("left", "right"):
        el = node.find(side)
        lanes = [_lane(ln) for ln in el.findall("lane")] if el is not None else []
        sides[side] = tuple(sorted(lanes, key=lambda ln: abs(ln.id)))
    return LaneSection(node.get("s", float, 0.0), sides["left"], sides["right"])


def _road(node: _Node) -> Road:
    _warn_unknown(node, {"link", "planView", "lanes"})
    plan = node.find("planView")
    if plan is None:
        raise OpenDriveParseError(f"road {node.attrib.get('id')} has no <planView>", node.line)
    _warn_unknown(plan, {"geometry"})
    geoms = [_geometry(g) for g in plan.findall("geometry")]
    if not geoms:
        raise OpenDriveParseError(f"road {node.attrib.get('id')} has no geometry", plan.line)
    link = node.find("link")
    pred = succ = None
    if link is not None:
        pred, succ = _link(link.find("predecessor")), _link(link.find("successor"))
    lanes = node.find("lanes")
    sections = [_lane_section(s) for s in lanes.findall("laneSection")] if lanes is not None else []
    try:
        return Road(
            node.get("id", int),
            geoms,
            sections or [LaneSection()],
            pred,
            succ,
            node.get("junction", int, -1),
            node.get("name", default=""),
        )
    except ValueError as exc:
        raise OpenDriveParseError(str(exc), node.line) from None


def _junction(node: _Node) -> Junction:
    _warn_unknown(node, {"connection"})
    conns = []
    for c in node.findall("connection"):
        links = tuple((ll.get("from", int), ll.get("to", int)) for ll in c.findall("laneLink"))
        conns.append(
            Connection(
                c.get("id", int),
                c.get("incomingRoad", int),
                c.get("connectingRoad", int),
                c.get("contactPoint"),
                links,
            )
        )
    return Junction(node.get("id", int), node.get("name", default=""), conns)


def parse_opendrive(doc: str | bytes) -> RoadNetwork:
    """Read an OpenDRIVE document into a :class:`RoadNetwork`."""
    root = _parse_tree(doc)
    if root.tag != "OpenDRIVE":
        raise OpenDriveParseError(f"root element is <{root.tag}>, expected <OpenDRIVE>", root.line)
    _warn_unknown(root, {"header", "road", "junction"})
    header = root.find("header")
    net = RoadNetwork()
    if header is not None:
        net.rev_major = header.get("revMajor", int, 1)
        net.rev_minor = header.get("revMinor", int, 6)
        net.name = header.get("name", default=net.name)
        net.version = header.get("version", default=net.version)
        geo = header.find("geoReference")
        net.geo_reference = geo.text.strip() if geo is not None else ""
    net.roads = [_road(r) for r in root.findall("road")]
    net.junctions = [_junction(j) for j in root.findall("junction")]
    return net


def read_opendrive(path) -> RoadNetwork:
    return parse_opendrive(Path(path).read_bytes())
