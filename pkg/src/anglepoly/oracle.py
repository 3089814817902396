"""Brute-force cross-checks for the main algorithms.

Nothing here shares code with the routines it verifies: the sampler walks
chains numerically instead of propagating intervals, the hull test asks qhull
for facets, and the crossing counter is a plain double loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import OutOfRange, TooLarge
from .geom import PolarInterval, PlanarPolygon

MAX_SAMPLER_N = 6
# configurations evaluated exhaustively before switching to random draws
GRID_BUDGET = 20_000_000
RANDOM_DRAWS = 2_000_000
BALL_RADIUS = 1e-6


@dataclass(frozen=True)
class SamplerConfig:
    resolution: int = 400
    closure_tolerance: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if self.resolution < 8:
            raise OutOfRange("resolution must be at least 8")
        if not 0.0 < self.closure_tolerance < math.pi / 8:
            raise OutOfRange("closure tolerance must lie in (0, pi/8)")


@dataclass(frozen=True)
class SamplerResult:
    min_gap: float
    achieved_polar_angles: tuple
    straddles: bool  # sampled endpoint polar angles fall on both sides of the closing arc

    def closes(self, tolerance: float) -> bool:
        return self.min_gap < tolerance


def _step(cos_phi, cos_theta, alpha):
    """cos of the polar angle one arc further along, for every pair of a
    current polar angle and a bearing (measured from the meridian)."""
    sin_phi = np.sqrt(np.clip(1.0 - cos_phi * cos_phi, 0.0, None))
    out = np.multiply.outer(cos_phi * math.cos(alpha), np.ones_like(cos_theta))
    out += np.multiply.outer(sin_phi * math.sin(alpha), cos_theta)
    return np.clip(out, -1.0, 1.0).ravel()


def sample_spherical_closure(a, cfg: SamplerConfig = SamplerConfig()) -> SamplerResult:
    """Walk every chain pole -> u_0 -> ... -> u_{n-2} with arcs a_0..a_{n-2}
    on a grid of bearings and report how close the free end gets to lying
    at distance a_{n-1} from the pole.

    Bearings are measured at each vertex from the direction to the pole.  A
    bearing and its mirror image give the same polar angle, so only
    ``resolution // 2 + 1`` distinct cosines are used.  Since the chain's
    configuration space is connected, endpoint polar angles on both sides of
    a_{n-1} imply an exact closing configuration; the gap is then 0.
    """
    arcs = [float(x) for x in a]
    n = len(arcs)
    if n < 3:
        raise OutOfRange("need at least 3 angles")
    if n > MAX_SAMPLER_N:
        raise TooLarge(f"sampler supports n <= {MAX_SAMPLER_N}, got {n}")
    half = cfg.resolution // 2
    cos_theta = np.cos(np.arange(half + 1) * (2.0 * math.pi / cfg.resolution))
    steps = n - 2
    target = arcs[-1]
    achieved = [PolarInterval(arcs[0], arcs[0])]
    if (half + 1) ** steps <= GRID_BUDGET:
        cos_phi = np.array([math.cos(arcs[0])])
        for alpha in arcs[1 : n - 1]:
            cos_phi = _step(cos_phi, cos_theta, alpha)
            achieved.append(_hull(cos_phi))
        final = cos_phi
    else:
        rng = np.random.default_rng(cfg.seed)
        picks = rng.integers(0, half + 1, size=(RANDOM_DRAWS, steps))
        cos_phi = np.full(RANDOM_DRAWS, math.cos(arcs[0]))
        for k, alpha in enumerate(arcs[1 : n - 1]):
            ct = cos_theta[picks[:, k]]
            sin_phi = np.sqrt(np.clip(1.0 - cos_phi * cos_phi, 0.0, None))
            cos_phi = np.clip(cos_phi * math.cos(alpha) + sin_phi * math.sin(alpha) * ct, -1.0, 1.0)
            achieved.append(_hull(cos_phi))
        final = cos_phi
    polar = np.arccos(final)
    diff = polar - target
    straddles = bool(diff.min() <= 0.0 <= diff.max())
    gap = 0.0 if straddles else float(np.abs(diff).min())
    return SamplerResult(gap, tuple(achieved), straddles)


def _hull(cos_phi) -> PolarInterval:
    lo = float(np.arccos(cos_phi.max()))
    hi = float(np.arccos(cos_phi.min()))
    return PolarInterval(lo, hi)


def hull_contains_origin_sampling(points, trials: int = 256, seed: int = 0) -> bool:
    """Does the hull of ``points`` contain a small ball around the origin
    (relative to the points' linear span)?

    Random support directions reject cheaply; qhull facets decide.
    """
    x = np.asarray(points, dtype=float)
    if len(x) < 2:
        return False
    _, s, vt = np.linalg.svd(x, full_matrices=False)
    rank = int(np.count_nonzero(s > 1e-9 * s[0]))
    y = x @ vt[:rank].T
    rng = np.random.default_rng(seed)
    dirs = rng.normal(size=(trials, rank))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    if np.any((y @ dirs.T).max(axis=0) < BALL_RADIUS):
        return False
    if rank == 1:
        return bool(y.min() < -BALL_RADIUS and y.max() > BALL_RADIUS)
    try:
        hull = ConvexHull(y)
    except QhullError:
        return False
    # facet rows are (normal, offset) with normal . p + offset <= 0 inside
    return bool(np.all(hull.equations[:, -1] < -BALL_RADIUS))


def _orient(p, q, r) -> float:
    return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])


def _segments_cross(a, b, c, d) -> bool:
    d1 = _orient(c, d, a)
    d2 = _orient(c, d, b)
    d3 = _orient(a, b, c)
    d4 = _orient(a, b, d)
    return ((d1 > 0 > d2) or (d1 < 0 < d2)) and ((d3 > 0 > d4) or (d3 < 0 < d4))


def allpairs_crossings(p) -> int:
    """Proper crossings between non-adjacent edges, by checking every pair."""
    v = p.vertices if isinstance(p, PlanarPolygon) else np.asarray(p, dtype=float)
    pts = [tuple(map(float, q)) for q in v]
    n = len(pts)
    count = 0
    for i in range(n):
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            if _segments_cross(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]):
                count += 1
    return count
