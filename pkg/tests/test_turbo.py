import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from roundabouts import IncidentRoadDefinition, InfeasibleLayoutError, Point, TurboParams, generate_classic, generate_turbo, validate_links
from roundabouts.circle_fit import Circle, find_maximal_circle
from roundabouts.era import random_road_defs
from roundabouts.geom import angle_diff, normalize_angle
from roundabouts.turbo import CompatiblePair, build_turbo_ring, find_compatible_pair, spike_indices

CIRCLE = Circle(Point(5.0, -3.0), 16.0)


def _defs_at(bearings, R=40.0, c=(0.0, 0.0)):
    return [
        IncidentRoadDefinition(Point(c[0] + R * math.cos(b), c[1] + R * math.sin(b)), b + math.pi) for b in bearings
    ]


def _pair_for_translation(phi):
    """A pair object whose spikes run along ``phi``."""
    return CompatiblePair(0, 1, normalize_angle(phi - math.pi / 2))


def _samples(ring, step=0.25):
    return np.vstack([s.geometry.sample(step).points for s in ring])


def _arc_center(g):
    h = g.start.heading
    return np.array([g.start.x - math.sin(h) / g.curvature, g.start.y + math.cos(h) / g.curvature])


class TestCompatiblePair:
    def test_square_tie_break(self):
        defs = _defs_at([0, math.pi / 2, math.pi, 3 * math.pi / 2])
        pair = find_compatible_pair(defs, find_maximal_circle(defs))
        assert (pair.index_a, pair.index_b) == (0, 2)
        assert abs(angle_diff(pair.axis_angle, math.pi)) < 1e-12

    def test_closest_to_antipodal(self):
        defs = _defs_at(np.radians([0, 90, 200]))
        circle = Circle(Point(0, 0), 16.0)
        assert (lambda p: (p.index_a, p.index_b))(find_compatible_pair(defs, circle)) == (0, 2)

    @given(st.integers(0, 2**31))
    @settings(max_examples=50, deadline=None)
    def test_exhaustive_oracle(self, seed):
        rng = np.random.default_rng(seed)
        defs = _defs_at(rng.uniform(0, 2 * np.pi, 5), R=rng.uniform(30, 50))
        circle = find_maximal_circle(defs)
        b = [math.atan2(d.position.y - circle.center.y, d.position.x - circle.center.x) for d in defs]
        miss = {
            (i, j): abs(math.pi - abs(math.remainder(b[i] - b[j], 2 * math.pi)))
            for i, j in itertools.combinations(range(5), 2)
        }
        best = min(miss.values())
        pair = find_compatible_pair(defs, circle)
        assert pair.index_a < pair.index_b
        assert miss[(pair.index_a, pair.index_b)] <= best + 1e-12
        p, q = defs[pair.index_a].position, defs[pair.index_b].position
        assert abs(angle_diff(pair.axis_angle, math.atan2(q.y - p.y, q.x - p.x))) < 1e-12

    def test_translation_perpendicular_to_pair_line(self):
        pair = CompatiblePair(0, 2, 0.3)
        assert pair.translation_angle == pytest.approx(0.3 + math.pi / 2)


class TestTurboRing:
    def test_spikes(self):
        pair = CompatiblePair(0, 2, 0.4)
        ring = build_turbo_ring(CIRCLE, pair, TurboParams(translation_distance=4.0))
        spikes = [ring[k].geometry for k in spike_indices(ring)]
        assert len(spikes) == 2
        for g in spikes:
            assert g.length == pytest.approx(4.0, abs=1e-9)
            assert min(abs(angle_diff(g.start.heading, pair.translation_angle + k * math.pi)) for k in (0, 1)) < 1e-12
        assert abs(abs(angle_diff(spikes[0].start.heading, spikes[1].start.heading)) - math.pi) < 1e-12

    @pytest.mark.parametrize("ccw", [True, False])
    def test_closed_and_g1(self, ccw):
        ring = build_turbo_ring(CIRCLE, CompatiblePair(0, 1, -1.1), TurboParams(translation_distance=5.0, counterclockwise=ccw))
        for k, seg in enumerate(ring):
            nxt = ring[(k + 1) % len(ring)].start
            assert seg.geometry.end.position.distance_to(nxt.position) < 1e-9
            assert abs(angle_diff(seg.geometry.end.heading, nxt.heading)) < 1e-9

    def test_half_rings_are_translates(self):
        d, phi = 6.0, 0.7
        ring = build_turbo_ring(CIRCLE, _pair_for_translation(phi), TurboParams(translation_distance=d))
        arcs = [s.geometry for s in ring if s.geometry.kind == "arc"]
        centres = np.array([_arc_center(g) for g in arcs])
        radii = np.array([1 / abs(g.curvature) for g in arcs])
        np.testing.assert_allclose(radii, CIRCLE.radius, atol=1e-12)
        half = len(arcs) // 2
        a, b = centres[:half], centres[half:]
        np.testing.assert_allclose(a - a[0], 0.0, atol=1e-9)
        np.testing.assert_allclose(b - b[0], 0.0, atol=1e-9)
        shift = a[0] - b[0]
        assert np.hypot(*shift) == pytest.approx(d, abs=1e-9)
        assert abs(angle_diff(math.atan2(shift[1], shift[0]), phi)) < 1e-9 or abs(
            angle_diff(math.atan2(shift[1], shift[0]), phi + math.pi)
        ) < 1e-9
        np.testing.assert_allclose((a[0] + b[0]) / 2, tuple(CIRCLE.center), atol=1e-9)

    def test_zero_translation_limit(self):
        ring = build_turbo_ring(CIRCLE, CompatiblePair(0, 1, 0.9), TurboParams(translation_distance=1e-9))
        pts = _samples(ring, 0.1)
        r = np.hypot(pts[:, 0] - CIRCLE.center.x, pts[:, 1] - CIRCLE.center.y)
        assert np.abs(r - CIRCLE.radius).max() < 1e-6
        # the nodes are the classic nodes for a ring started at the rotated origin
        arcs = [s for s in ring if s.geometry.kind == "arc"]
        steps = [angle_diff(CIRCLE.center.bearing_to(b.start.position), CIRCLE.center.bearing_to(a.start.position)) for a, b in zip(arcs, arcs[1:])]
        np.testing.assert_allclose(steps, 2 * math.pi / len(arcs), atol=1e-9)

    @given(st.floats(-math.pi, math.pi))
    @settings(max_examples=50, deadline=None)
    def test_rotation_equivariance(self, phi):
        params = TurboParams(translation_distance=3.5)
        base = _samples(build_turbo_ring(CIRCLE, _pair_for_translation(0.0), params))
        turned = _samples(build_turbo_ring(CIRCLE, _pair_for_translation(phi), params))
        c, s = math.cos(phi), math.sin(phi)
        rel = base - tuple(CIRCLE.center)
        want = rel @ np.array([[c, s], [-s, c]]) + tuple(CIRCLE.center)
        np.testing.assert_allclose(turned, want, atol=1e-9)

    def test_translation_too_large(self):
        with pytest.raises(InfeasibleLayoutError):
            build_turbo_ring(CIRCLE, CompatiblePair(0, 1, 0.0), TurboParams(translation_distance=16.0))

    def test_params_validation(self):
        with pytest.raises(ValueError):
            TurboParams(translation_distance=0.0)
        assert TurboParams(circulating_lanes=2, lane_width=3.5).resolved_translation() == 7.0


class TestGenerateTurbo:
    def test_symmetric_smoke(self, four_way):
        net = generate_turbo(four_way)
        assert validate_links(net) == []
        ring = net.ring_chain()
        lines = [(i, r) for i, r in enumerate(ring) if r.geometries[0].kind == "line"]
        assert len(lines) == 2
        pair = find_compatible_pair(four_way, find_maximal_circle(four_way))
        spike_ids = {r.id for _, r in lines}
        ring_ids = [r.id for r in ring]
        for idx in (pair.index_a, pair.index_b):
            entry = next(r for r in net.roads if r.name == f"entry_{idx}")
            exit_ = next(r for r in net.roads if r.name == f"exit_{idx}")
            # entry joins the ring right after a spike, exit leaves right before one
            into = entry.successor.element_id
            out_of = exit_.predecessor.element_id
            assert ring_ids[(ring_ids.index(into) - 1) % len(ring_ids)] in spike_ids
            assert ring_ids[(ring_ids.index(out_of) + 1) % len(ring_ids)] in spike_ids

    def test_lane_separation(self, four_way):
        # inbound and outbound lanes of a compatible approach land on different half rings
        net = generate_turbo(four_way, TurboParams(distortion_ratio=0))
        pair = find_compatible_pair(four_way, find_maximal_circle(four_way))
        ring = net.ring_chain()
        kinds = [r.geometries[0].kind for r in ring]
        spike_pos = [i for i, k in enumerate(kinds) if k == "line"]
        halves = {}
        for h, (a, b) in enumerate(zip(spike_pos, spike_pos[1:] + [spike_pos[0] + len(ring)])):
            for i in range(a + 1, b):
                halves[ring[i % len(ring)].id] = h
        for idx in (pair.index_a, pair.index_b):
            entry = next(r for r in net.roads if r.name == f"entry_{idx}")
            exit_ = next(r for r in net.roads if r.name == f"exit_{idx}")
            into = entry.successor.element_id
            out_of = exit_.predecessor.element_id
            assert {halves[into], halves[out_of]} == {0, 1}

    def test_fingerprint_vs_classic(self, four_way):
        count = lambda net: sum(g.kind == "line" for r in net.roads_by_role("ring") for g in r.geometries)
        assert count(generate_turbo(four_way)) == 2
        assert count(generate_classic(four_way)) == 0

    @pytest.mark.parametrize("k", range(5))
    def test_random_four_way(self, k):
        defs = random_road_defs(4, 300 + k)
        assert validate_links(generate_turbo(defs, TurboParams(seed=k))) == []

    def test_deterministic(self, four_way):
        a, b = generate_turbo(four_way), generate_turbo(four_way)
        assert [r.geometries for r in a.roads] == [r.geometries for r in b.roads]
