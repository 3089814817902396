import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anglepoly.errors import InconsistentSequence, PreconditionViolation
from anglepoly.geom import PlanarPolygon, count_crossings, turning_number
from anglepoly.planar import (
    Reason,
    check_consistency,
    classify_sign_changes,
    crossing_number,
    lower_bound_holds,
    realize_min_crossing,
    realize_spiral,
    realize_two_essential,
)

from conftest import BOWTIE, random_consistent_sequence, random_generic_polygon, star

# figure eight: two convex lobes joined at one crossing
FIG8 = [math.pi / 2, math.pi / 2, -math.pi / 2, -math.pi / 2, -math.pi / 2, math.pi / 2]


def _round_trip(poly, a):
    return float(np.abs(poly.turning_angles() - np.array(a)).max())


def test_consistency_examples():
    r = check_consistency([2 * math.pi / 3] * 3)
    assert r.consistent and r.k == 1 and r.reason is Reason.OK
    r = check_consistency([math.pi / 2, -math.pi / 2] * 2)
    assert not r.consistent and r.reason is Reason.ORIGIN_NOT_INTERIOR_POSITIVE_HULL
    r = check_consistency([math.pi / 3] * 7)
    assert not r.consistent and r.reason is Reason.SUM_NOT_MULTIPLE_OF_2PI
    assert r.k is None


def test_consistency_reason_matches_flag(rng):
    for _ in range(30):
        a, _ = random_consistent_sequence(rng, int(rng.integers(3, 15)))
        r = check_consistency(a)
        assert r.consistent == (r.reason is Reason.OK)
        assert len(r.direction_vectors) == len(a)


def test_crossing_number_formula():
    assert crossing_number([math.pi / 2] * 4) == 0
    assert crossing_number(FIG8) == 1
    assert crossing_number(star(5, 2)) == 1
    assert crossing_number([-x for x in star(7, 3)]) == 2
    with pytest.raises(InconsistentSequence):
        crossing_number([math.pi / 3] * 7)


def test_sign_changes():
    assert classify_sign_changes([math.pi / 2] * 4).indices == []
    info = classify_sign_changes(FIG8)
    assert info.indices == [1, 4] and info.essential == [True, True]
    convex = [math.pi / 4] * 8
    zigzag = convex[:3] + [0.1, -0.1] + convex[3:]
    info = classify_sign_changes(zigzag)
    assert 3 in info.indices
    assert not info.essential[info.indices.index(3)]


def test_sign_changes_even_and_rotation_invariant(rng):
    for _ in range(30):
        a, _ = random_consistent_sequence(rng, int(rng.integers(4, 16)))
        info = classify_sign_changes(a)
        assert len(info.indices) % 2 == 0
        s = int(rng.integers(len(a)))
        rot = classify_sign_changes(a[s:] + a[:s])
        shifted = {(i - s) % len(a): e for i, e in zip(info.indices, info.essential)}
        assert dict(zip(rot.indices, rot.essential)) == shifted


def test_spiral():
    p = realize_spiral([2 * math.pi / 3] * 3)
    assert count_crossings(p) == (0, True)
    for n, k in [(5, 2), (7, 3)]:
        p = realize_spiral(star(n, k))
        assert count_crossings(p) == (k - 1, True)
        assert turning_number(p) == k
        assert _round_trip(p, star(n, k)) < 1e-8
    p = realize_spiral([-x for x in star(5, 2)])
    assert count_crossings(p) == (1, True) and turning_number(p) == -2
    with pytest.raises(PreconditionViolation):
        realize_spiral(FIG8)


def test_two_essential():
    p = realize_two_essential(FIG8)
    assert count_crossings(p) == (1, True)
    assert _round_trip(p, FIG8) < 1e-8
    mirrored = [-x for x in FIG8[::-1]]
    assert count_crossings(realize_two_essential(mirrored)) == (1, True)
    bow = list(PlanarPolygon(BOWTIE).turning_angles())
    assert count_crossings(realize_two_essential(bow)) == (1, True)
    with pytest.raises(PreconditionViolation):
        realize_two_essential([math.pi / 2] * 4)


def test_min_crossing_examples():
    p = realize_min_crossing([math.pi / 2] * 4)
    assert count_crossings(p) == (0, True)
    with pytest.raises(InconsistentSequence):
        realize_min_crossing([math.pi / 2, -math.pi / 2] * 2)


def test_min_crossing_zero_sum(rng):
    # zero-sum sequences need exactly one crossing
    for _ in range(20):
        while True:
            a, _ = random_consistent_sequence(rng, int(rng.integers(4, 14)))
            if abs(math.fsum(a)) < 1e-6:
                break
        p = realize_min_crossing(a)
        assert count_crossings(p) == (1, True)
        assert _round_trip(p, a) < 1e-8


def test_min_crossing_turning_number_three(rng):
    while True:
        a, _ = random_consistent_sequence(rng, 12)
        if round(math.fsum(a) / (2 * math.pi)) == 3:
            break
    p = realize_min_crossing(a)
    assert count_crossings(p) == (2, True)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(3, 25))
def test_min_crossing_property(seed, n):
    a, _ = random_consistent_sequence(np.random.default_rng(seed), n)
    p = realize_min_crossing(a)
    count, generic = count_crossings(p)
    assert generic
    assert count == crossing_number(a)
    assert _round_trip(p, a) < 1e-8
    assert turning_number(p) == round(math.fsum(a) / (2 * math.pi))


def test_seed_reproducible(rng):
    a, _ = random_consistent_sequence(rng, 15)
    assert np.array_equal(realize_min_crossing(a, seed=3).vertices, realize_min_crossing(a, seed=3).vertices)


def test_lower_bound(rng):
    for _ in range(100):
        v = random_generic_polygon(rng, int(rng.integers(3, 20)))
        assert lower_bound_holds(PlanarPolygon(v))
