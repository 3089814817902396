"""One check per acceptance criterion, at the stated tolerances."""

import math
import time

import numpy as np
import pytest

from anglepoly.errors import Unrealizable
from anglepoly.geom import (
    PlanarPolygon,
    count_crossings,
    origin_in_relint_conv,
    polar_add,
    polar_sub,
    turning_number,
)
from anglepoly.lift import best_fit_plane, forced_planar_thrackle_check, realize_3d, skip_two_length
from anglepoly.oracle import SamplerConfig, allpairs_crossings, hull_contains_origin_sampling, sample_spherical_closure
from anglepoly.planar import crossing_number, realize_min_crossing
from anglepoly.spherical import backtrack_realization, decide_spherical, enclose_origin

from conftest import REJECT, random_consistent_sequence, random_generic_polygon, random_realizable_3d, star


def _enclosure_trials():
    rng = np.random.default_rng(2024)
    return [random_realizable_3d(rng, int(rng.integers(3, 11))) for _ in range(100)]


def test_c01_planar_construction():
    rng = np.random.default_rng(101)
    for _ in range(300):
        a, _ = random_consistent_sequence(rng, int(rng.integers(3, 51)))
        start = time.perf_counter()
        p = realize_min_crossing(a)
        elapsed = time.perf_counter() - start
        count, generic = count_crossings(p)
        assert generic and count == crossing_number(a)
        assert np.abs(p.turning_angles() - np.array(a)).max() < 1e-8
        assert elapsed < 1.0


def test_c02_crossing_lower_bound():
    rng = np.random.default_rng(202)
    violations = 0
    for _ in range(1000):
        v = random_generic_polygon(rng, int(rng.integers(3, 31)))
        if count_crossings(v)[0] < abs(turning_number(PlanarPolygon(v))) - 1:
            violations += 1
    assert violations == 0


@pytest.mark.parametrize("n,k", [(5, 2), (7, 2), (7, 3), (9, 4)])
def test_c03_regular_stars(n, k):
    a = star(n, k)
    p = realize_min_crossing(a)
    assert count_crossings(p) == (k - 1, True)
    assert turning_number(p) == k


def test_c04_decision_matches_sampler():
    rng = np.random.default_rng(404)
    cfg = SamplerConfig(400)
    checked = 0
    for t in range(200):
        n = (3, 4, 5)[t % 3]
        a = [float(x) for x in rng.uniform(0.0, math.pi, n)]
        d = decide_spherical(a)
        if abs(d.margin) <= 1e-3:
            continue
        assert bool(d) == sample_spherical_closure(a, cfg).closes(1e-3)
        checked += 1
    assert checked >= 150


def test_c05_rejection_example():
    with pytest.raises(Unrealizable) as exc:
        realize_3d(REJECT)
    assert exc.value.reason == Unrealizable.NO_SPHERICAL_REALIZATION
    assert sample_spherical_closure(REJECT, SamplerConfig(400)).min_gap > 0.05


def test_c06_fenchel_gate():
    rng = np.random.default_rng(606)
    for _ in range(200):
        n = int(rng.integers(3, 12))
        a = rng.uniform(0.01, math.pi - 0.01, n)
        total = a.sum()
        if total >= 2 * math.pi - 1e-9:
            a = a * (2 * math.pi - 1e-8) / total * rng.uniform(0.3, 1.0)
        with pytest.raises(Unrealizable) as exc:
            realize_3d(list(a))
        assert exc.value.reason == Unrealizable.TOTAL_CURVATURE_BELOW_2PI
    realized = 0
    for _ in range(100):
        n = int(rng.integers(3, 12))
        a = rng.dirichlet(np.ones(n)) * 2 * math.pi
        if a.max() >= math.pi - 1e-3 or a.min() <= 1e-3:
            continue
        assert abs(a.sum() - 2 * math.pi) < 1e-6
        try:
            p = realize_3d(list(a))
        except Unrealizable:
            continue
        realized += 1
        assert p.planar
    assert realized >= 50


def test_c07_origin_enclosure():
    for a in _enclosure_trials():
        q = enclose_origin(backtrack_realization(a), a)
        w = origin_in_relint_conv(q.vertices)
        assert w is not None and w.residual < 1e-10
        assert np.abs(q.arc_lengths() - np.array(a)).max() < 1e-8


def test_c08_lift_fidelity():
    for a in _enclosure_trials():
        p = realize_3d(a)
        assert p.closure_residual() < 1e-9
        assert np.linalg.norm(p.edges().sum(axis=0)) < 1e-9
        assert np.abs(p.turning_angles() - np.array(a)).max() < 1e-8


@pytest.mark.parametrize("n", [5, 7])
def test_c09_musquash(n):
    a = [(n - 1) * math.pi / n] * n
    assert forced_planar_thrackle_check(a).forced_planar
    p = realize_3d(a)
    assert p.planar and best_fit_plane(p.vertices)[1] < 1e-8
    normal = p.plane_normal
    e1 = np.cross(normal, [1.0, 0, 0] if abs(normal[0]) < 0.9 else [0, 1.0, 0])
    e1 /= np.linalg.norm(e1)
    flat = np.column_stack([p.vertices @ e1, p.vertices @ np.cross(normal, e1)])
    count = count_crossings(flat)[0]
    assert count == n * (n - 3) // 2 or count >= (n - 1) // 2 - 1 >= 1
    assert abs(skip_two_length(p.directions()) - 2 * math.pi) < 1e-8


def test_c10_polar_algebra_grid():
    grid = [k * math.pi / 100 for k in range(101)]
    violations = 0
    for x in grid:
        for y in grid:
            s, d = polar_add(x, y), polar_sub(x, y)
            ok = 0.0 <= d <= s <= math.pi and s == polar_add(y, x) and d == polar_sub(y, x)
            violations += not ok
        violations += polar_add(x, 0.0) != x
    assert violations == 0


def test_c11_oracle_agreement():
    rng = np.random.default_rng(1111)
    for _ in range(1000):
        v = random_generic_polygon(rng, int(rng.integers(3, 31)))
        assert allpairs_crossings(v) == count_crossings(v)[0]
    for _ in range(500):
        pts = rng.normal(size=(int(rng.integers(4, 13)), 3))
        pts /= np.linalg.norm(pts, axis=1)[:, None]
        assert hull_contains_origin_sampling(pts) == (origin_in_relint_conv(pts) is not None)
