import math

import numpy as np
import pytest

from anglepoly.geom import count_crossings, polygon_turning_angles
from anglepoly.spherical import decide_spherical


def random_generic_polygon(rng, n):
    """Random vertices in the unit square, redrawn until generic."""
    while True:
        v = rng.uniform(size=(n, 2))
        try:
            polygon_turning_angles(v)
        except Exception:
            continue
        if count_crossings(v)[1]:
            return v


def random_consistent_sequence(rng, n):
    v = random_generic_polygon(rng, n)
    return [float(x) for x in polygon_turning_angles(v)], v


def random_realizable_3d(rng, n, lo=0.05):
    """Random spatial sequence that passes both the Fenchel gate and the
    spherical decision."""
    if n == 3:
        # a closed triangle is planar with turning angles summing to 2pi,
        # which rejection sampling would never hit
        while True:
            inner = rng.dirichlet(np.ones(3)) * math.pi
            a = [float(math.pi - x) for x in inner]
            if min(a) >= lo and max(a) <= math.pi - lo:
                return a
    while True:
        a = [float(x) for x in rng.uniform(lo, math.pi - lo, n)]
        if math.fsum(a) >= 2 * math.pi and decide_spherical(a):
            return a


def star(n, k):
    return [2 * k * math.pi / n] * n


def pentagram():
    return np.array([[math.cos(math.pi / 2 + 4 * math.pi * j / 5), math.sin(math.pi / 2 + 4 * math.pi * j / 5)]
                     for j in range(5)])


SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
BOWTIE = np.array([[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]])
REJECT = [math.pi - 0.1, math.pi - 0.1, math.pi - 0.1, 0.1]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
