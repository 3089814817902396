"""Geometric primitives shared by the planar and spatial realizers.

Everything here works on double precision radians.  Three tolerance tiers
are used throughout the package:

* ``UNIT_TOL`` (1e-12) for unit norms and exact identities,
* ``GENERIC_TOL`` (1e-9) for genericity of constructed polygons,
* ``INTEGER_TOL`` (1e-6) for rounding a turning number.
"""

from __future__ import annotations

import enum
import functools
import itertools
import math
import os
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linprog

from .errors import DegenerateVertex, NotClosedToInteger, OutOfRange

UNIT_TOL = 1e-12
GENERIC_TOL = 1e-9
INTEGER_TOL = 1e-6
SEED_ENV = "ANGLEPOLY_SEED"
TWO_PI = 2.0 * math.pi

# origin_in_relint_conv switches from subset enumeration to an LP above this
ENUMERATION_LIMIT = 20


def default_seed() -> int:
    """Seed for randomized tie-breaking, taken from ``ANGLEPOLY_SEED`` (default 0)."""
    return int(os.environ.get(SEED_ENV, "0"))


class Dimension(enum.Enum):
    PLANAR_2D = 2
    SPACE_3D = 3


@dataclass(frozen=True)
class AngleSequence:
    """A cyclic sequence of turning angles.

    Planar sequences are signed and live in the open interval (-pi, pi);
    spatial sequences are unsigned and live in (0, pi).
    """

    angles: tuple
    dimension: Dimension = Dimension.PLANAR_2D

    def __post_init__(self):
        angles = tuple(float(a) for a in self.angles)
        object.__setattr__(self, "angles", angles)
        if len(angles) < 3:
            raise OutOfRange(f"need at least 3 angles, got {len(angles)}")
        for a in angles:
            if not math.isfinite(a):
                raise OutOfRange(f"non-finite angle {a!r}")
            if self.dimension is Dimension.PLANAR_2D:
                if not -math.pi < a < math.pi:
                    raise OutOfRange(f"planar angle {a} outside (-pi, pi)")
            elif not 0.0 < a < math.pi:
                raise OutOfRange(f"spatial angle {a} outside (0, pi)")

    @classmethod
    def planar(cls, angles: Sequence[float]) -> "AngleSequence":
        return cls(tuple(angles), Dimension.PLANAR_2D)

    @classmethod
    def spatial(cls, angles: Sequence[float]) -> "AngleSequence":
        return cls(tuple(angles), Dimension.SPACE_3D)

    @property
    def n(self) -> int:
        return len(self.angles)

    def __len__(self) -> int:
        return len(self.angles)

    def __iter__(self):
        return iter(self.angles)

    def __getitem__(self, i):
        return self.angles[i]

    @property
    def total(self) -> float:
        return math.fsum(self.angles)


@dataclass
class PlanarPolygon:
    """Closed polygon in the plane; vertex i joins vertex i+1 (mod n)."""

    vertices: np.ndarray

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 2)

    @property
    def n(self) -> int:
        return len(self.vertices)

    def reversed(self) -> "PlanarPolygon":
        return PlanarPolygon(self.vertices[::-1].copy())

    def turning_angles(self) -> np.ndarray:
        return polygon_turning_angles(self.vertices)


@dataclass
class SphericalPolygon:
    """Closed polygon on the unit sphere.

    The arc from vertex i-1 to vertex i realises the i-th angle of the
    sequence, so ``arc_lengths()[i] == dist(u[i-1], u[i])``.
    """

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float).reshape(-1, 3)
        norms = np.linalg.norm(v, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-6):
            raise OutOfRange("spherical polygon vertices must be unit vectors")
        self.vertices = v / norms[:, None]

    @property
    def n(self) -> int:
        return len(self.vertices)

    def arc_lengths(self) -> np.ndarray:
        u = self.vertices
        return np.array([spherical_distance(u[i - 1], u[i]) for i in range(len(u))])


@dataclass(frozen=True)
class PolarInterval:
    """Closed sub-interval of [0, pi] of polar angles."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (-UNIT_TOL <= self.lo <= self.hi + UNIT_TOL and self.hi <= math.pi + UNIT_TOL):
            raise OutOfRange(f"invalid polar interval [{self.lo}, {self.hi}]")

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= x <= self.hi + tol

    def margin(self, x: float) -> float:
        """Signed distance of ``x`` to the boundary, positive inside."""
        return min(x - self.lo, self.hi - x)

    @property
    def width(self) -> float:
        return self.hi - self.lo


@dataclass
class ConvexWitness:
    coefficients: np.ndarray
    residual: float
    support: tuple = field(default_factory=tuple)

    @property
    def min_coefficient(self) -> float:
        return float(np.min(self.coefficients))


# --------------------------------------------------------------------------
# planar primitives


def _cross2(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def turning_angle_2d(prev, cur, nxt) -> float:
    """Signed turning angle at ``cur``; positive for a left turn."""
    prev, cur, nxt = (np.asarray(p, dtype=float) for p in (prev, cur, nxt))
    d1 = cur - prev
    d2 = nxt - cur
    if np.linalg.norm(d1) < UNIT_TOL or np.linalg.norm(d2) < UNIT_TOL:
        raise DegenerateVertex("coincident consecutive vertices")
    angle = math.atan2(float(_cross2(d1, d2)), float(np.dot(d1, d2)))
    if math.pi - abs(angle) < UNIT_TOL:
        raise DegenerateVertex("turning angle is +-pi")
    return angle


def polygon_turning_angles(vertices) -> np.ndarray:
    """Turning angles at every vertex of a closed polygon (vectorised)."""
    v = np.asarray(vertices, dtype=float)
    d_in = v - np.roll(v, 1, axis=0)
    d_out = np.roll(v, -1, axis=0) - v
    if np.any(np.linalg.norm(d_in, axis=1) < UNIT_TOL):
        raise DegenerateVertex("coincident consecutive vertices")
    return np.arctan2(_cross2(d_in, d_out), np.einsum("ij,ij->i", d_in, d_out))


def _point_segment_distance(p, a, b, squared=False):
    """Distances between points p[i] and segments (a[j], b[j]); shape (P, S)."""
    ab = b - a
    ap = p[:, None, :] - a[None, :, :]
    denom = np.einsum("ij,ij->i", ab, ab)
    t = np.clip(np.einsum("psj,sj->ps", ap, ab) / np.where(denom > 0, denom, 1.0), 0.0, 1.0)
    off = ap - t[..., None] * ab[None, :, :]
    sq = np.einsum("psj,psj->ps", off, off)
    return sq if squared else np.sqrt(sq)


def _vertices(polygon) -> np.ndarray:
    return polygon.vertices if isinstance(polygon, PlanarPolygon) else np.asarray(polygon, float)


@functools.lru_cache(maxsize=64)
def _masks(n: int):
    idx = np.arange(n)
    # edge j is incident to vertices j and j+1
    incident = (idx[:, None] == idx[None, :]) | (idx[:, None] == (idx[None, :] + 1) % n)
    gap = (idx[None, :] - idx[:, None]) % n
    pairs = (gap >= 2) & (gap <= n - 2) & (idx[:, None] < idx[None, :])
    return ~incident, pairs


def crossing_report(polygon) -> tuple[int, float]:
    """``(count, margin)``: proper crossings between non-adjacent edges, and the
    smallest distance from a vertex to a non-incident edge relative to the
    diameter (this bounds vertex-vertex distances too).  The polygon is generic
    at tolerance ``tol`` iff ``margin > tol``; then every edge intersection is
    a crossing."""
    v = _vertices(polygon)
    n = len(v)
    if n < 3:
        return 0, 0.0
    away, pairs = _masks(n)
    a = v
    b = np.roll(v, -1, axis=0)
    scale = max(float(np.ptp(v, axis=0).max()), 1e-300)
    margin = math.sqrt(float(_point_segment_distance(v, a, b, squared=True)[away].min())) / scale

    r = b - a
    # side of a[j] / b[j] relative to edge i
    oa = _cross2(r[:, None, :], a[None, :, :] - a[:, None, :])
    ob = oa + _cross2(r[:, None, :], r[None, :, :])
    straddle = (oa * ob) < 0
    count = int(np.count_nonzero(straddle & straddle.T & pairs))
    return count, margin


def genericity_margin(polygon) -> float:
    return crossing_report(polygon)[1]


def count_crossings(polygon, tol: float = GENERIC_TOL) -> tuple[int, bool]:
    """Number of transversal crossings between non-adjacent edges.

    Returns ``(count, generic)``.  Genericity is judged with ``tol`` scaled by
    the polygon's diameter: vertices pairwise distinct and no vertex within
    that distance of a non-incident edge.
    """
    count, margin = crossing_report(polygon)
    return count, margin > tol


def turning_number(polygon) -> int:
    v = polygon.vertices if isinstance(polygon, PlanarPolygon) else np.asarray(polygon, float)
    angles = polygon_turning_angles(v)
    if np.any(math.pi - np.abs(angles) < UNIT_TOL):
        raise DegenerateVertex("turning angle is +-pi")
    k = math.fsum(angles) / TWO_PI
    rounded = round(k)
    if abs(k - rounded) >= INTEGER_TOL:
        raise NotClosedToInteger(f"total turn / 2pi = {k}")
    return int(rounded)


def signed_remainder_2pi(x: float) -> float:
    """x reduced to [-pi, pi) modulo 2pi."""
    return x - TWO_PI * math.floor(x / TWO_PI + 0.5)


# --------------------------------------------------------------------------
# polar angle algebra


def _check_polar(x: float) -> float:
    if not -UNIT_TOL <= x <= math.pi + UNIT_TOL:
        raise OutOfRange(f"polar angle {x} outside [0, pi]")
    return min(max(x, 0.0), math.pi)


def polar_add(a: float, b: float) -> float:
    """a (+) b = min(a + b, 2pi - (a + b)) on [0, pi]."""
    a, b = _check_polar(a), _check_polar(b)
    # (pi - a) + (pi - b) rounds like a (-) b does when b == pi, keeping (-) <= (+)
    return min(a + b, (math.pi - a) + (math.pi - b))


def polar_sub(a: float, b: float) -> float:
    """a (-) b = |a - b|."""
    a, b = _check_polar(a), _check_polar(b)
    return abs(a - b)


# --------------------------------------------------------------------------
# spherical primitives


def unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


def spherical_distance(u, v) -> float:
    """Central angle between two unit vectors, in [0, pi].

    Uses atan2 of the cross and dot products, which stays accurate near 0 and
    pi where a clamped arccos loses half its digits.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return math.atan2(float(np.linalg.norm(np.cross(u, v))), float(np.clip(np.dot(u, v), -1.0, 1.0)))


def rotate(v, axis, angle: float) -> np.ndarray:
    """Rodrigues rotation of ``v`` (or rows of ``v``) about ``axis``."""
    k = unit(axis)
    v = np.asarray(v, dtype=float)
    c, s = math.cos(angle), math.sin(angle)
    return v * c + np.cross(k, v) * s + np.outer(v @ k, k).reshape(v.shape) * (1 - c)


def any_orthogonal(u) -> np.ndarray:
    u = unit(u)
    helper = np.array([1.0, 0.0, 0.0]) if abs(u[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    return unit(np.cross(u, helper))


def tangent_toward(center, target) -> Optional[np.ndarray]:
    """Unit tangent at ``center`` pointing along the great circle to ``target``."""
    t = np.asarray(target, float) - np.dot(target, center) * np.asarray(center, float)
    norm = np.linalg.norm(t)
    if norm < 1e-14:
        return None
    return t / norm


def point_at(center, radius: float, bearing: float, reference=None) -> np.ndarray:
    """Point at spherical distance ``radius`` from ``center``.

    ``bearing`` is measured at ``center`` from the tangent toward
    ``reference`` (the north pole by default), counter-clockwise about
    ``center``.
    """
    center = unit(center)
    ref = np.array([0.0, 0.0, 1.0]) if reference is None else np.asarray(reference, float)
    t1 = tangent_toward(center, ref)
    if t1 is None:
        t1 = tangent_toward(center, np.array([1.0, 0.0, 0.0]))
        if t1 is None:
            t1 = tangent_toward(center, np.array([0.0, 1.0, 0.0]))
    t2 = np.cross(center, t1)
    direction = math.cos(bearing) * t1 + math.sin(bearing) * t2
    return unit(math.cos(radius) * center + math.sin(radius) * direction)


def arc_point(a, b, t: float) -> np.ndarray:
    """Point at distance ``t`` from ``a`` along the minor great arc toward ``b``."""
    tangent = tangent_toward(a, b)
    if tangent is None:
        raise DegenerateVertex("arc endpoints identical or antipodal")
    return unit(math.cos(t) * np.asarray(a, float) + math.sin(t) * tangent)


def circle_intersections(c1, r1: float, c2, r2: float, tol: float = 1e-12) -> list:
    """Points at distance r1 from c1 and r2 from c2 (0, 1 or 2 of them)."""
    c1, c2 = unit(c1), unit(c2)
    g = float(np.clip(np.dot(c1, c2), -1.0, 1.0))
    denom = 1.0 - g * g
    if denom < 1e-15:
        return []
    k1, k2 = math.cos(r1), math.cos(r2)
    a = (k1 - g * k2) / denom
    b = (k2 - g * k1) / denom
    base = a * c1 + b * c2
    rest = 1.0 - float(np.dot(base, base))
    normal = np.cross(c1, c2)
    normal /= np.linalg.norm(normal)
    if rest < -tol:
        return []
    if rest <= tol:
        return [unit(base)]
    h = math.sqrt(rest)
    return [unit(base + h * normal), unit(base - h * normal)]


def spherical_turning_angle(prev, cur, nxt) -> float:
    """Turning angle in [0, pi] of a spherical polygon at ``cur``.

    0 means the path continues straight through ``cur``; pi marks a spur.
    """
    back = tangent_toward(cur, prev)
    fwd = tangent_toward(cur, nxt)
    if back is None or fwd is None:
        raise DegenerateVertex("neighbouring vertices identical or antipodal")
    return math.pi - math.atan2(float(np.linalg.norm(np.cross(back, fwd))), float(np.dot(back, fwd)))


# --------------------------------------------------------------------------
# origin in relative interior of a convex hull


def _span_coordinates(points: np.ndarray, rel_tol: float = 1e-9):
    _, s, vt = np.linalg.svd(points, full_matrices=False)
    if s[0] == 0.0:
        return points[:, :0], vt[:0]
    rank = int(np.count_nonzero(s > rel_tol * s[0]))
    basis = vt[:rank]
    return points @ basis.T, basis


def _ray_simplex_by_enumeration(x: np.ndarray, c: np.ndarray):
    """Largest mu with -mu*c in a simplex spanned by rows of ``x``."""
    m, r = x.shape
    best_mu, best = 0.0, None
    if m < r + 1:
        return best_mu, best
    combos = np.array(list(itertools.combinations(range(m), r + 1)))
    mats = np.ones((len(combos), r + 1, r + 1))
    mats[:, :r, :] = np.transpose(x[combos], (0, 2, 1))
    dets = np.linalg.det(mats)
    ok = np.abs(dets) > 1e-12
    if not np.any(ok):
        return best_mu, best
    combos, mats = combos[ok], mats[ok]
    rhs0 = np.zeros(r + 1)
    rhs0[r] = 1.0
    rhs1 = np.append(-c, 0.0)
    rhs = np.broadcast_to(np.stack([rhs0, rhs1], axis=1), (len(combos), r + 1, 2))
    sol = np.linalg.solve(mats, rhs)
    lam0, lam1 = sol[..., 0], sol[..., 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        bound = np.where(lam1 < 0, -lam0 / lam1, np.inf)
        lower = np.where(lam1 > 0, -lam0 / lam1, -np.inf)
    mu_hi = bound.min(axis=1)
    mu_lo = np.maximum(lower.max(axis=1), 0.0)
    feasible = np.isfinite(mu_hi) & (mu_hi >= mu_lo) & (mu_hi > 0)
    if not np.any(feasible):
        return best_mu, best
    k = int(np.argmax(np.where(feasible, mu_hi, -np.inf)))
    mu = float(mu_hi[k])
    lam = np.clip(lam0[k] + mu * lam1[k], 0.0, None)
    return mu, (combos[k], lam / lam.sum())


def _ray_simplex_by_lp(x: np.ndarray, c: np.ndarray):
    m, r = x.shape
    # variables: lambda_0..lambda_{m-1}, mu ; maximise mu
    cost = np.zeros(m + 1)
    cost[-1] = -1.0
    a_eq = np.zeros((r + 1, m + 1))
    a_eq[:r, :m] = x.T
    a_eq[:r, m] = c
    a_eq[r, :m] = 1.0
    b_eq = np.zeros(r + 1)
    b_eq[r] = 1.0
    res = linprog(cost, A_eq=a_eq, b_eq=b_eq, bounds=[(0, None)] * m + [(0, 1e6)], method="highs")
    if res.status != 0 or res.x[-1] <= 0:
        return 0.0, None
    lam = np.clip(res.x[:m], 0.0, None)
    support = np.flatnonzero(lam > 1e-14)
    sub = lam[support]
    return float(res.x[-1]), (support, sub / sub.sum())


def origin_in_relint_conv(points, min_mu: float = 1e-12) -> Optional[ConvexWitness]:
    """Strictly positive convex combination of ``points`` equal to the origin.

    Mirrors the classical construction: with centroid c, find a simplex of
    input points met by the ray from 0 in direction -c, take the largest mu
    with -mu*c on it, and mix ``mu*c - mu*c``.  Works in the linear span of
    the points, so lower-dimensional sets get a relative-interior answer.
    Returns ``None`` when no such combination exists.
    """
    u = np.asarray(points, dtype=float)
    m = len(u)
    if m < 2:
        return None
    c = u.mean(axis=0)
    if np.linalg.norm(c) < UNIT_TOL:
        coeffs = np.full(m, 1.0 / m)
        return ConvexWitness(coeffs, float(np.linalg.norm(coeffs @ u)), tuple(range(m)))
    x, basis = _span_coordinates(u)
    cx = c @ basis.T
    if np.linalg.norm(c - cx @ basis) > 1e-9 * np.linalg.norm(c) + 1e-15:
        return None
    if m <= ENUMERATION_LIMIT:
        mu, found = _ray_simplex_by_enumeration(x, cx)
    else:
        mu, found = _ray_simplex_by_lp(x, cx)
    if found is None or mu <= min_mu:
        return None
    support, lam = found
    coeffs = np.full(m, mu / m)
    coeffs[np.asarray(support)] += lam
    coeffs /= coeffs.sum()
    residual = float(np.linalg.norm(coeffs @ u))
    if residual >= 1e-10 or coeffs.min() <= 0:
        return None
    return ConvexWitness(coeffs, residual, tuple(int(s) for s in support))
