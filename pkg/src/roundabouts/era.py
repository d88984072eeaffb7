"""Expressive range analysis of generated rings.

Radius here is the distance from a fixed centre to the ring centerline, sampled
uniformly in arc length; its derivative is taken with periodic central
differences because the ring is closed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .defs import IncidentRoadDefinition
from .geom import TWO_PI, Point, Polyline, angle_diff, min_clearance, normalize_angle
from .odr.model import RoadNetwork

DEFAULT_RADIUS_RANGE = (35.0, 45.0)
HEADING_JITTER = math.pi / 4
# centreline spacing demanded between the sketched approaches of a random layout
LAYOUT_MARGIN = 8.0


@dataclass(frozen=True)
class RadiusSeries:
    s: np.ndarray
    radius: np.ndarray
    center: Point
    length: float
    roundabout_id: str = ""

    def __len__(self) -> int:
        return len(self.s)


@dataclass(frozen=True)
class EraSummary:
    mean: float
    std: float
    skewness: float
    excess_kurtosis: float
    degenerate: bool = False


def ring_centerline(net: RoadNetwork, step: float) -> tuple[np.ndarray, float]:
    """Points of the ring sampled uniformly in arc length, closing point dropped."""
    chain = net.ring_chain()
    if not chain:
        raise ValueError("network has no ring roads")
    geoms = [g for road in chain for g in road.geometries]
    lengths = np.array([g.length for g in geoms])
    total = float(lengths.sum())
    n = max(3, math.ceil(total / step - 1e-9))
    s = np.arange(n) * (total / n)
    edges = np.concatenate([[0.0], np.cumsum(lengths)])
    idx = np.clip(np.searchsorted(edges, s, side="right") - 1, 0, len(geoms) - 1)
    pts = np.empty((n, 2))
    for k, g in enumerate(geoms):
        sel = idx == k
        if np.any(sel):
            pts[sel] = g.evaluate(np.minimum(s[sel] - edges[k], g.length))[0]
    return pts, total


def radius_series(net: RoadNetwork, center: Point | None = None, step: float = 0.5, roundabout_id: str = "") -> RadiusSeries:
    """Distance from ``center`` to the ring centerline along the ring.

    ``center`` defaults to the algebraic circle fit of the sampled ring.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    pts, total = ring_centerline(net, step)
    if center is None:
        from .circle_fit import fit_center_least_squares

        center = fit_center_least_squares([Point(*p) for p in pts])
    r = np.hypot(pts[:, 0] - center.x, pts[:, 1] - center.y)
    n = len(pts)
    s = np.arange(n) * (total / n)
    return RadiusSeries(s, r, center, total, roundabout_id)


def radius_derivative(series: RadiusSeries) -> tuple[np.ndarray, np.ndarray]:
    """``(s, dr/ds)`` by central differences, wrapping around the closed ring."""
    n = len(series)
    if n < 3:
        raise ValueError("radius derivative needs at least 3 samples")
    r = np.asarray(series.radius, dtype=float)
    s = np.asarray(series.s, dtype=float)
    s_next = np.concatenate([s[1:], [s[0] + series.length]])
    s_prev = np.concatenate([[s[-1] - series.length], s[:-1]])
    dr = (np.roll(r, -1) - np.roll(r, 1)) / (s_next - s_prev)
    return s.copy(), dr


def summarize(values) -> EraSummary:
    """Population moments; zero-variance input reports skew and kurtosis as 0."""
    x = np.asarray(values, dtype=float).ravel()
    if len(x) < 4:
        raise ValueError("summarize needs at least 4 values")
    mu = float(x.mean())
    d = x - mu
    m2 = float(np.mean(d**2))
    if m2 <= 1e-300 or math.sqrt(m2) <= 1e-12 * max(1.0, abs(mu)):
        return EraSummary(mu, 0.0, 0.0, 0.0, degenerate=True)
    m3 = float(np.mean(d**3))
    m4 = float(np.mean(d**4))
    return EraSummary(mu, math.sqrt(m2), m3 / m2**1.5, m4 / m2**2 - 3.0)


def approach_sketches(defs, radius_factor: float = 0.4, gap: float = 5.5) -> list[Polyline]:
    """Cheap stand-in for each approach: the straight road, then radially to the ring."""
    from .circle_fit import find_maximal_circle

    circle = find_maximal_circle(defs, radius_factor)
    c, r = circle.center, circle.radius
    out = []
    for d in defs:
        p = d.position
        dist = p.distance_to(c)
        psi = angle_diff(p.bearing_to(c), d.heading)
        length = max(0.0, dist * math.cos(psi))
        # stop where the road would come within ``gap`` of the ring
        b = dist * math.cos(psi)
        disc = b * b - (dist * dist - (r + gap) ** 2)
        if disc > 0:
            length = min(length, max(0.0, b - math.sqrt(disc)))
        e = (p.x + length * math.cos(d.heading), p.y + length * math.sin(d.heading))
        ang = math.atan2(e[1] - c.y, e[0] - c.x)
        ring_pt = (c.x + r * math.cos(ang), c.y + r * math.sin(ang))
        out.append(Polyline([(p.x, p.y), e, ring_pt]))
    return out


def layout_separated(defs, margin: float = LAYOUT_MARGIN, radius_factor: float = 0.4) -> bool:
    sketches = approach_sketches(defs, radius_factor)
    for i, a in enumerate(sketches):
        for b in sketches[i + 1 :]:
            if min_clearance(a, b) < margin:
                return False
    return True


def random_road_defs(
    n: int,
    seed: int = 0,
    radius_range: tuple[float, float] = DEFAULT_RADIUS_RANGE,
    lane_choices: tuple[int, ...] = (2, 3),
    max_tries: int = 10_000,
    margin: float | None = LAYOUT_MARGIN,
) -> list[IncidentRoadDefinition]:
    """Random incident definitions on a random circle.

    Positions sit on a circle with radius drawn from ``radius_range`` at polar
    angles kept at least ``pi / n`` apart; headings point at the circle centre
    plus a uniform perturbation in [-pi/4, pi/4].  Each road gets a total of
    2 or 3 lanes split between the two directions.

    Draws whose approaches would run into each other (sketched approaches
    closer than ``margin``) are rejected and redrawn; ``margin=None`` keeps
    the first well-separated draw.
    """
    if n < 3:
        raise ValueError("random layouts need n >= 3")
    rng = np.random.default_rng(seed)
    R = float(rng.uniform(*radius_range))
    min_sep = math.pi / n
    for _ in range(max_tries):
        ang = np.sort(rng.uniform(0.0, TWO_PI, n))
        gaps = np.diff(np.concatenate([ang, [ang[0] + TWO_PI]]))
        if gaps.min() < min_sep:
            continue
        out = []
        for a in ang:
            pos = Point(R * math.cos(a), R * math.sin(a))
            heading = normalize_angle(a + math.pi + rng.uniform(-HEADING_JITTER, HEADING_JITTER))
            total = int(rng.choice(lane_choices))
            right = (total + int(rng.integers(0, 2))) // 2 if total > 1 else 1
            out.append(IncidentRoadDefinition(pos, heading, total - right, right))
        if margin is None or layout_separated(out, margin):
            return out
    raise RuntimeError("could not draw a buildable random layout")


# --------------------------------------------------------------------------
# batches

REPORT_COLUMNS = (
    "instance_id",
    "n_ways",
    "mean_radius",
    "std_radius",
    "skew",
    "excess_kurtosis",
    "deriv_mean",
    "deriv_kurtosis",
)


@dataclass(frozen=True)
class BatchItem:
    instance_id: str
    defs: tuple
    params: object = None
    mode: str = "classic"


@dataclass
class EraInstance:
    instance_id: str
    n_ways: int
    series: RadiusSeries
    derivative: np.ndarray
    radius_summary: EraSummary
    derivative_summary: EraSummary

    def row(self) -> dict:
        r, d = self.radius_summary, self.derivative_summary
        return {
            "instance_id": self.instance_id,
            "n_ways": self.n_ways,
            "mean_radius": r.mean,
            "std_radius": r.std,
            "skew": r.skewness,
            "excess_kurtosis": r.excess_kurtosis,
            "deriv_mean": d.mean,
            "deriv_kurtosis": d.excess_kurtosis,
        }


@dataclass
class EraReport:
    instances: list[EraInstance] = field(default_factory=list)
    failures: list[dict] = field(default_factory=list)

    def rows(self) -> list[dict]:
        return [inst.row() for inst in self.instances]

    def aggregate(self, bin_width: float = 1.0) -> dict:
        out = {"count": len(self.instances), "failures": list(self.failures), "by_n_ways": {}}
        if not self.instances:
            return out
        groups: dict = {}
        for inst in self.instances:
            groups.setdefault(inst.n_ways, []).append(inst)
        groups["all"] = list(self.instances)
        for key, insts in groups.items():
            radii = np.concatenate([i.series.radius for i in insts])
            derivs = np.concatenate([i.derivative for i in insts])
            top = max(bin_width, math.ceil(radii.max() / bin_width) * bin_width)
            counts, edges = np.histogram(radii, bins=np.arange(0.0, top + bin_width, bin_width))
            entry = {
                "count": len(insts),
                "median_mean_radius": float(np.median([i.radius_summary.mean for i in insts])),
                "radius": _summary_dict(summarize(radii)),
                "derivative": _summary_dict(summarize(derivs)),
                "radius_histogram": {"edges": [float(e) for e in edges], "counts": [int(c) for c in counts]},
            }
            if key == "all":
                out["all"] = entry
            else:
                out["by_n_ways"][str(key)] = entry
        return out

    def write(self, out_dir, prefix: str = "era") -> dict:
        """CSV report, JSON aggregate and one series CSV per instance."""
        import csv
        import json
        from pathlib import Path

        out = Path(out_dir)
        (out / "series").mkdir(parents=True, exist_ok=True)
        paths = {"report": out / f"{prefix}_report.csv", "aggregate": out / f"{prefix}_aggregate.json"}
        with open(paths["report"], "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(REPORT_COLUMNS)
            for row in self.rows():
                w.writerow([_cell(row[c]) for c in REPORT_COLUMNS])
        for inst in self.instances:
            p = out / "series" / f"{inst.instance_id}.csv"
            with open(p, "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(("s", "radius", "dr_ds"))
                for s, r, d in zip(inst.series.s, inst.series.radius, inst.derivative):
                    w.writerow((_cell(s), _cell(r), _cell(d)))
        paths["aggregate"].write_text(json.dumps(self.aggregate(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return paths


def _cell(v):
    return repr(float(v)) if isinstance(v, (float, np.floating)) else v


def _summary_dict(s: EraSummary) -> dict:
    return {
        "mean": s.mean,
        "std": s.std,
        "skewness": s.skewness,
        "excess_kurtosis": s.excess_kurtosis,
        "degenerate": s.degenerate,
    }


def analyse_network(net: RoadNetwork, center: Point, instance_id: str = "", n_ways: int = 0, step: float = 0.5):
    series = radius_series(net, center, step, instance_id)
    _, dr = radius_derivative(series)
    return EraInstance(instance_id, n_ways, series, dr, summarize(series.radius), summarize(dr))


def _generate(item: BatchItem):
    from .circle_fit import find_maximal_circle
    from .classic import generate_classic
    from .defs import GenerationParams, TurboParams

    if item.mode == "turbo":
        from .turbo import generate_turbo

        params = item.params or TurboParams()
        net = generate_turbo(item.defs, params)
    else:
        params = item.params or GenerationParams()
        net = generate_classic(item.defs, params)
    return net, find_maximal_circle(item.defs, params.radius_factor).center


def era_batch(items, step: float = 0.5) -> EraReport:
    """Generate and analyse every item; failures are recorded, not raised.

    The radius is measured from the centre of each roundabout's base circle.
    """
    from .errors import RoundaboutError

    report = EraReport()
    for item in items:
        try:
            net, center = _generate(item)
        except RoundaboutError as exc:
            report.failures.append({"instance_id": item.instance_id, "error": type(exc).__name__, "message": str(exc)})
            continue
        report.instances.append(analyse_network(net, center, item.instance_id, len(item.defs), step))
    return report


def random_batch(n_ways: int, count: int, seed: int = 0, params=None, mode: str = "classic") -> list[BatchItem]:
    """``count`` random layouts; instance ``k`` draws its layout from seed ``seed + k``."""
    from .defs import GenerationParams, TurboParams

    base = params or (TurboParams() if mode == "turbo" else GenerationParams())
    items = []
    for k in range(count):
        defs = tuple(random_road_defs(n_ways, seed + k))
        p = base.replace(seed=seed + k)
        items.append(BatchItem(f"{mode}_{n_ways}way_{k:03d}", defs, p, mode))
    return items


def fixed_batch(defs, seeds, params=None, mode: str = "classic") -> list[BatchItem]:
    """One layout generated under different noise seeds."""
    from .defs import GenerationParams, TurboParams

    base = params or (TurboParams() if mode == "turbo" else GenerationParams())
    return [BatchItem(f"{mode}_fixed_{s:03d}", tuple(defs), base.replace(seed=s), mode) for s in seeds]
