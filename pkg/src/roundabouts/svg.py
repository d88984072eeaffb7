"""Deterministic SVG previews of road networks."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Iterable, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .errors import EmptyNetworkError
from .odr.model import Road, RoadNetwork

_ROLE_COLOURS = {
    "ring": "#1f4e79",
    "incident": "#333333",
    "entry": "#2e7d32",
    "exit": "#c62828",
}


def _fmt(v: float) -> str:
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _path_d(points: np.ndarray) -> str:
    # SVG y grows downwards
    head = f"M{_fmt(points[0, 0])},{_fmt(-points[0, 1])}"
    return head + "".join(f" L{_fmt(x)},{_fmt(-y)}" for x, y in points[1:])


def _offset(points: np.ndarray, dist: float) -> np.ndarray:
    """Shift a polyline ``dist`` to the left (negative = right)."""
    if len(points) < 2:
        return points
    t = np.gradient(points, axis=0)
    norm = np.hypot(t[:, 0], t[:, 1])
    norm[norm == 0] = 1.0
    n = np.column_stack([-t[:, 1], t[:, 0]]) / norm[:, None]
    return points + dist * n


def _lane_boundaries(road: Road, pts: np.ndarray) -> list[np.ndarray]:
    section = road.lane_sections[0]
    out = []
    acc = 0.0
    for lane in sorted(section.left, key=lambda ln: ln.id):
        acc += lane.width
        out.append(_offset(pts, acc))
    acc = 0.0
    for lane in sorted(section.right, key=lambda ln: -ln.id):
        acc += lane.width
        out.append(_offset(pts, -acc))
    return out


def _viewbox(arrays: Iterable[np.ndarray]) -> tuple[float, float, float, float]:
    allpts = np.vstack(list(arrays))
    lo, hi = allpts.min(axis=0), allpts.max(axis=0)
    w, h = max(hi[0] - lo[0], 1.0), max(hi[1] - lo[1], 1.0)
    mx, my = 0.1 * w, 0.1 * h
    return lo[0] - mx, -(hi[1] + my), w + 2 * mx, h + 2 * my


def _document(viewbox, body: Sequence[str]) -> str:
    x, y, w, h = viewbox
    scale = 800.0 / max(w, h)
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(w * scale)}" height="{_fmt(h * scale)}" '
        f'viewBox="{_fmt(x)} {_fmt(y)} {_fmt(w)} {_fmt(h)}">\n'
    )
    return head + "".join(body) + "</svg>\n"


def network_svg(net: RoadNetwork, step: float = 0.5, lanes: bool = True) -> str:
    """Centerline ``<path>`` per road plus lane-boundary polylines."""
    roads = list(net)
    if not roads:
        raise EmptyNetworkError("cannot render an empty network")
    centre = {r.id: r.sample(step).points for r in roads}
    bounds = list(centre.values())
    body = []
    if lanes:
        body.append('<g class="lanes" fill="none" stroke="#9e9e9e" stroke-width="0.15">\n')
        for r in roads:
            for b in _lane_boundaries(r, centre[r.id]):
                bounds.append(b)
                pts = " ".join(f"{_fmt(x)},{_fmt(-y)}" for x, y in b)
                body.append(f'<polyline points="{pts}"/>\n')
        body.append("</g>\n")
    body.append('<g class="centerlines" fill="none" stroke-width="0.3">\n')
    for r in roads:
        colour = _ROLE_COLOURS.get(r.role, "#000000")
        body.append(
            f'<path id="road-{r.id}" data-name="{escape(r.name)}" stroke="{colour}" d="{_path_d(centre[r.id])}"/>\n'
        )
    body.append("</g>\n")
    return _document(_viewbox(bounds), body)


def render_svg(net: RoadNetwork, path, step: float = 0.5) -> Path:
    path = Path(path)
    text = network_svg(net, step)
    path.write_text(text, encoding="utf-8")
    return path


def superposition_svg(series_list, unit_circle: bool = True) -> str:
    """Rings normalised by their mean radius, overlaid on a unit circle."""
    if not series_list:
        raise EmptyNetworkError("no radius series to draw")
    body = ['<g fill="none" stroke="#1f77b4" stroke-width="0.004" stroke-opacity="0.6">\n']
    all_pts = []
    for ser in series_list:
        r = np.asarray(ser.radius)
        theta = np.linspace(0.0, 2 * math.pi, len(r), endpoint=False)
        if getattr(ser, "angles", None) is not None:
            theta = ser.angles
        rn = r / r.mean()
        pts = np.column_stack([rn * np.cos(theta), rn * np.sin(theta)])
        pts = np.vstack([pts, pts[:1]])
        all_pts.append(pts)
        body.append(f'<path d="{_path_d(pts)}"/>\n')
    body.append("</g>\n")
    if unit_circle:
        t = np.linspace(0.0, 2 * math.pi, 361)
        circ = np.column_stack([np.cos(t), np.sin(t)])
        all_pts.append(circ)
        body.append(f'<path fill="none" stroke="#000000" stroke-width="0.02" d="{_path_d(circ)}"/>\n')
    return _document(_viewbox(all_pts), body)
