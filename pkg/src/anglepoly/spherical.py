"""Spherical polygons with prescribed arc lengths.

A space polygon with turning angles ``a`` exists iff a closed spherical
polygon with arc lengths ``a`` exists whose vertices surround the origin.
This module decides the first condition with interval propagation of polar
angles, builds a realization by backtracking, and then reshapes it until the
origin lies in the relative interior of its convex hull.

Vertex convention: ``dist(u[i-1], u[i]) == a[i]``.  During propagation the
chain starts at the north pole ``u[n-1]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DegenerateVertex,
    InternalInconsistency,
    LengthBelowFenchel,
    PreconditionViolation,
    RecursionExhausted,
)
from .geom import (
    TWO_PI,
    AngleSequence,
    Dimension,
    PolarInterval,
    SphericalPolygon,
    arc_point,
    circle_intersections,
    default_seed,
    origin_in_relint_conv,
    polar_add,
    polar_sub,
    rotate,
    spherical_distance,
    spherical_turning_angle,
    tangent_toward,
    unit,
)

NORTH = np.array([0.0, 0.0, 1.0])
BOUNDARY_TOL = 1e-9
FENCHEL_TOL = 1e-9
ANGLE_TOL = 1e-8  # turning angle counted as 0 or pi
ANTIPODAL_TOL = 1e-9
EPS0 = 0.1
MAX_HALVINGS = 60
WITNESS_MARGIN = 1e-6


def _arcs(a) -> list:
    if isinstance(a, AngleSequence):
        if a.dimension is not Dimension.SPACE_3D:
            raise PreconditionViolation("expected a spatial angle sequence")
        return list(a.angles)
    return list(AngleSequence.spatial(a).angles)


# --------------------------------------------------------------------------
# zone propagation


def interval_image(lo: float, hi: float, alpha: float) -> tuple[float, float]:
    """Union of ``[phi (-) alpha, phi (+) alpha]`` over ``phi`` in ``[lo, hi]``.

    ``phi (-) alpha`` is V-shaped with its zero at ``alpha`` and ``phi (+) alpha``
    is a tent peaking at ``pi - alpha``, so the extremes sit at the endpoints or
    at those two points.
    """
    if lo <= alpha <= hi:
        m = 0.0
    else:
        m = min(polar_sub(lo, alpha), polar_sub(hi, alpha))
    if lo <= math.pi - alpha <= hi:
        big = math.pi
    else:
        big = max(polar_add(lo, alpha), polar_add(hi, alpha))
    return m, big


@dataclass(frozen=True)
class ZoneTrace:
    """Polar-angle intervals I_0..I_{n-1} of the reachable zones."""

    angles: tuple
    intervals: tuple

    def check(self, tol: float = 1e-12) -> bool:
        first = self.intervals[0]
        if abs(first.lo - self.angles[0]) > tol or abs(first.hi - self.angles[0]) > tol:
            return False
        for prev, cur, alpha in zip(self.intervals, self.intervals[1:], self.angles[1:]):
            lo, hi = interval_image(prev.lo, prev.hi, alpha)
            if abs(lo - cur.lo) > tol or abs(hi - cur.hi) > tol:
                return False
        return True


def propagate_zones(a) -> ZoneTrace:
    arcs = _arcs(a)
    intervals = [PolarInterval(arcs[0], arcs[0])]
    for alpha in arcs[1:]:
        cur = intervals[-1]
        intervals.append(PolarInterval(*interval_image(cur.lo, cur.hi, alpha)))
    return ZoneTrace(tuple(arcs), tuple(intervals))


@dataclass(frozen=True)
class Decision:
    """Outcome of the spherical realizability test.

    ``margin`` is the signed distance of the closing arc length to the boundary
    of the zone reachable after n-1 arcs (positive inside), which equals the
    distance of the pole to the boundary of the last zone whenever the pole
    lies strictly inside it.
    """

    realizable: bool
    margin: float
    boundary: bool
    trace: ZoneTrace

    def __bool__(self) -> bool:
        return self.realizable


def decide_spherical(a) -> Decision:
    trace = propagate_zones(a)
    closing = trace.angles[-1]
    margin = trace.intervals[-2].margin(closing)
    return Decision(margin >= -BOUNDARY_TOL, margin, abs(margin) <= BOUNDARY_TOL, trace)


def _polar(u) -> float:
    return spherical_distance(u, NORTH)


def _bearing_toward(center, radius, target_polar) -> Optional[float]:
    """Bearing (from the pole direction) of a point at ``radius`` from
    ``center`` with the given polar angle, or None if out of reach."""
    phi = _polar(center)
    s = math.sin(phi) * math.sin(radius)
    if s < 1e-15:
        return None
    c = (math.cos(target_polar) - math.cos(phi) * math.cos(radius)) / s
    return math.acos(min(1.0, max(-1.0, c)))


def _point(center, radius: float, bearing: float) -> np.ndarray:
    center = unit(center)
    t1 = tangent_toward(center, NORTH)
    if t1 is None:
        t1 = tangent_toward(center, np.array([1.0, 0.0, 0.0]))
    t2 = np.cross(center, t1)
    return unit(math.cos(radius) * center + math.sin(radius) * (math.cos(bearing) * t1 + math.sin(bearing) * t2))


def backtrack_realization(a, trace: Optional[ZoneTrace] = None) -> SphericalPolygon:
    """Spherical polygon realizing ``a``, built from the pole backwards."""
    arcs = _arcs(a)
    n = len(arcs)
    if trace is None:
        trace = propagate_zones(arcs)
    verts = [None] * n
    verts[n - 1] = NORTH.copy()
    verts[n - 2] = _point(NORTH, arcs[n - 1], 0.0)
    if not trace.intervals[n - 2].contains(arcs[n - 1], BOUNDARY_TOL):
        raise InternalInconsistency("closing arc outside the last zone")
    for i in range(n - 2, 0, -1):
        u, alpha = verts[i], arcs[i]
        zone = trace.intervals[i - 1]
        chosen = None
        # straight toward the pole, then straight away from it
        for bearing in (0.0, math.pi):
            cand = _point(u, alpha, bearing)
            if zone.contains(_polar(cand), 1e-12):
                chosen = cand
                break
        if chosen is None:
            phi = _polar(u)
            reach_lo, reach_hi = polar_sub(phi, alpha), polar_add(phi, alpha)
            for target in (zone.lo, zone.hi):
                if reach_lo - BOUNDARY_TOL <= target <= reach_hi + BOUNDARY_TOL:
                    bearing = _bearing_toward(u, alpha, target)
                    if bearing is not None:
                        chosen = _point(u, alpha, bearing)
                        break
        if chosen is None:
            raise InternalInconsistency(f"no admissible position for vertex {i - 1}")
        verts[i - 1] = chosen
    return SphericalPolygon(np.array(verts))


# --------------------------------------------------------------------------
# zones around an arbitrary center


@dataclass(frozen=True)
class ReachZone:
    """Points whose distance from ``center`` lies in [near_radius, far_radius]."""

    center: np.ndarray
    near_radius: float
    far_radius: float

    def contains(self, point, tol: float = BOUNDARY_TOL) -> bool:
        d = spherical_distance(self.center, point)
        return self.near_radius - tol <= d <= self.far_radius + tol

    @property
    def is_circle(self) -> bool:
        return self.far_radius - self.near_radius < 1e-12


def reach_zone(center, arc_lengths: Sequence[float]) -> ReachZone:
    """Reachable zone of the free end of a chain fixed at ``center``."""
    arcs = [float(x) for x in arc_lengths]
    if not arcs:
        raise PreconditionViolation("need at least one arc")
    lo = hi = arcs[0]
    for alpha in arcs[1:]:
        lo, hi = interval_image(lo, hi, alpha)
    return ReachZone(unit(center), lo, hi)


# --------------------------------------------------------------------------
# local moves


def _turn(verts, k) -> float:
    n = len(verts)
    return spherical_turning_angle(verts[(k - 1) % n], verts[k % n], verts[(k + 1) % n])


def _is_straight(verts, k, tol=ANGLE_TOL) -> bool:
    return _turn(verts, k) < tol


def _is_spur(verts, k, tol=ANGLE_TOL) -> bool:
    return math.pi - _turn(verts, k) < tol


def _meet(c1, r1, c2, r2, near) -> Optional[np.ndarray]:
    """Intersection of two circles closest to ``near`` (tangency tolerated)."""
    pts = circle_intersections(c1, r1, c2, r2, tol=1e-10)
    if not pts:
        return None
    return min(pts, key=lambda p: float(np.linalg.norm(p - near)))


def _beyond(a, b, t) -> np.ndarray:
    """Point at distance ``t`` from ``a`` moving directly away from ``b``."""
    tangent = tangent_toward(a, b)
    if tangent is None:
        raise InternalInconsistency("direction undefined")
    return unit(math.cos(t) * np.asarray(a) - math.sin(t) * tangent)


def _fold_to(start, target, first, second, old) -> np.ndarray:
    """Middle vertex of a straight or spur path start -> x -> target with
    ``dist(start, x) = first`` and ``dist(x, target) = second``.

    The caller has placed ``start`` at distance ``first (+) second`` (straight)
    or ``first (-) second`` (spur) from ``target``.
    """
    d = spherical_distance(start, target)
    if math.pi - d < 1e-12:
        # antipodal ends: every half great circle joins them
        return arc_point(start, old, first)
    if abs(d - polar_add(first, second)) <= abs(d - polar_sub(first, second)):
        if first + second <= math.pi:
            return arc_point(start, target, first)
        return _beyond(start, target, first)
    if d < 1e-12:
        # start and target coincide; keep the old direction
        return arc_point(start, old, first)
    if first >= second:
        return arc_point(start, target, first)
    return _beyond(start, target, first)


def _flex(verts, arcs, j, delta) -> Optional[np.ndarray]:
    """Rotate u_j about u_{j-1} by ``delta`` and re-solve u_{j+1}; all other
    vertices stay put.  None when the chain cannot close."""
    n = len(verts)
    prev, nxt, far = (j - 1) % n, (j + 1) % n, (j + 2) % n
    out = verts.copy()
    out[j] = unit(rotate(verts[j], verts[prev], delta))
    p = _meet(out[j], arcs[nxt], verts[far], arcs[far], verts[nxt])
    if p is None:
        return None
    out[nxt] = p
    return out


def straighten(p, a, i: int) -> SphericalPolygon:
    """Move u_i and u_{i+1} only, until the turn at u_{i-1} is 0 or the turn
    at u_{i+1} is 0 or pi."""
    verts = np.array(p.vertices if isinstance(p, SphericalPolygon) else p, dtype=float)
    arcs = _arcs(a) if not isinstance(a, list) else a
    return SphericalPolygon(_straighten(verts, arcs, i))


def _straighten(verts, arcs, i):
    n = len(verts)
    if n < 4:
        raise PreconditionViolation("straightening needs at least four vertices")
    im2, im1, i0, i1, i2 = ((i + k) % n for k in (-2, -1, 0, 1, 2))
    dlo = polar_sub(arcs[i1], arcs[i2])
    dhi = polar_add(arcs[i1], arcs[i2])
    if dhi - dlo < 1e-12:
        raise PreconditionViolation("reachable zone is a circle or a point")
    if _is_straight(verts, im1) or _is_straight(verts, i1) or _is_spur(verts, i1):
        return verts
    d = spherical_distance(verts[im1], verts[i2])
    reach_lo, reach_hi = polar_sub(d, arcs[i0]), polar_add(d, arcs[i0])
    out = verts.copy()
    if dlo <= reach_lo and reach_hi <= dhi:
        # the whole circle fits: continue straight through u_{i-1}
        out[i0] = _beyond(verts[im1], verts[im2], arcs[i0])
        mid = _meet(out[i0], arcs[i1], verts[i2], arcs[i2], verts[i1])
        if mid is None:
            raise InternalInconsistency("straightened vertex lost its partner")
        out[i1] = mid
        return out
    for target in (dhi, dlo):
        if reach_lo - 1e-12 <= target <= reach_hi + 1e-12:
            moved = _meet(verts[im1], arcs[i0], verts[i2], target, verts[i0])
            if moved is None:
                continue
            out[i0] = moved
            out[i1] = _fold_to(moved, verts[i2], arcs[i1], arcs[i2], verts[i1])
            return out
    raise InternalInconsistency("no straightening case applies")


# --------------------------------------------------------------------------
# origin enclosure


def _enclosed(verts, margin: float = 0.0) -> bool:
    w = origin_in_relint_conv(verts)
    return w is not None and w.min_coefficient > margin


def _half_circle_run(verts, arcs):
    """A maximal great-circle path of at least half a circle, as a list of
    consecutive vertex indices, or None."""
    n = len(verts)
    flat = [_is_straight(verts, k) or _is_spur(verts, k) for k in range(n)]
    if all(flat):
        starts = [0]
    else:
        starts = [k for k in range(n) if not flat[k]]
    for start in starts:
        idx = [start]
        s, direction, lo, hi = 0.0, 1.0, 0.0, 0.0
        k = start
        while True:
            k = (k + 1) % n
            s += direction * arcs[k]
            lo, hi = min(lo, s), max(hi, s)
            idx.append(k)
            if k == start or not flat[k]:
                break
            if _is_spur(verts, k):
                direction = -direction
        if hi - lo >= math.pi - ANGLE_TOL:
            return idx
    return None


def _antipodal_pair(verts):
    n = len(verts)
    best = None
    for i in range(n):
        for j in range(i + 2, n):
            if (i, j) == (0, n - 1):
                continue
            gap = float(np.linalg.norm(verts[i] + verts[j]))
            if gap < ANTIPODAL_TOL and (best is None or gap < best[0]):
                best = (gap, i, j)
    return None if best is None else best[1:]


class _Enclosure:
    def __init__(self, budget: int, rng):
        self.budget = budget
        self.rng = rng

    def spend(self):
        self.budget -= 1
        if self.budget < 0:
            raise RecursionExhausted("origin enclosure did not converge")


def _rotate_between(verts, i, j):
    """Rotate the chain strictly between antipodal vertices u_i and u_j about
    their common axis; return the best enclosing configuration or None."""
    n = len(verts)
    chain = [(i + k) % n for k in range(1, (j - i) % n)]
    axis = verts[i]
    back = tangent_toward(verts[i], verts[(i - 1) % n])
    fwd = tangent_toward(verts[i], verts[(i + 1) % n])
    if back is None or fwd is None:
        return None
    # rotation that makes u_{i-1}, u_i, u_{i+1} continue straight
    theta0 = math.atan2(float(np.dot(axis, np.cross(fwd, -back))), float(np.dot(fwd, -back)))

    def turned(theta):
        out = verts.copy()
        out[chain] = rotate(verts[chain], axis, theta)
        return out

    cand = turned(theta0)
    if _enclosed(cand):
        return cand
    eps = EPS0
    for _ in range(MAX_HALVINGS):
        for sign in (1.0, -1.0):
            cand = turned(theta0 + sign * eps)
            if _enclosed(cand, WITNESS_MARGIN):
                return cand
        eps *= 0.5
        if eps < 1e-9:
            break
    for theta in np.linspace(0.0, TWO_PI, 73)[1:-1]:
        cand = turned(theta0 + theta)
        if _enclosed(cand, WITNESS_MARGIN):
            return cand
    return None


def _flex_search(verts, arcs):
    """Small two-vertex flexes that push a vertex out of the supporting
    hemisphere."""
    n = len(verts)
    eps = EPS0
    for _ in range(MAX_HALVINGS):
        for j in range(n):
            for sign in (1.0, -1.0):
                cand = _flex(verts, arcs, j, sign * eps)
                if cand is not None and _enclosed(cand, WITNESS_MARGIN) and _arcs_ok(cand, arcs):
                    return cand
        eps *= 0.5
        if eps < 1e-7:
            break
    return None


def _random_flex(verts, arcs, rng):
    n = len(verts)
    for _ in range(50):
        j = int(rng.integers(n))
        cand = _flex(verts, arcs, j, float(rng.uniform(-1.0, 1.0)))
        if cand is not None and _arcs_ok(cand, arcs) and _no_antipodal_arcs(cand):
            return cand
    return verts


def _arcs_ok(verts, arcs, tol=1e-9) -> bool:
    n = len(verts)
    return all(abs(spherical_distance(verts[k - 1], verts[k]) - arcs[k]) < tol for k in range(n))


def _no_antipodal_arcs(verts) -> bool:
    n = len(verts)
    return all(np.linalg.norm(verts[k - 1] + verts[k]) > 1e-9 for k in range(n))


def _case_n4(verts, arcs):
    """Four vertices: force a straight vertex at u_1 or u_3 (the fold
    between u_0 and u_2 is shared by both halves)."""
    u2 = verts[2]
    plus = (polar_sub(arcs[1], arcs[2]), polar_add(arcs[1], arcs[2]))
    minus = (polar_sub(arcs[3], arcs[0]), polar_add(arcs[3], arcs[0]))
    options = []
    for r, own in ((plus[1], "plus"), (minus[1], "minus")):
        room = min(r - plus[0], plus[1] - r, r - minus[0], minus[1] - r)
        options.append((room, r, own))
    options.sort(key=lambda t: -t[0])
    for room, r, own in options:
        if room < -1e-12:
            continue
        toward = tangent_toward(u2, verts[0])
        if toward is None:
            toward = tangent_toward(u2, verts[1])
        out = verts.copy()
        out[0] = unit(math.cos(r) * u2 + math.sin(r) * toward)
        if own == "plus":
            out[1] = _fold_to(out[0], u2, arcs[1], arcs[2], verts[1])
            v3 = _meet(u2, arcs[3], out[0], arcs[0], verts[3])
            if v3 is None:
                continue
            out[3] = v3
        else:
            # u_2 -> u_3 -> u_0 straight
            out[3] = _fold_to(u2, out[0], arcs[3], arcs[0], verts[3])
            v1 = _meet(out[0], arcs[1], u2, arcs[2], verts[1])
            if v1 is None:
                continue
            out[1] = v1
        return out
    raise InternalInconsistency("four-vertex case found no straight position")


def _frame(p, q):
    e1 = unit(p)
    t = tangent_toward(e1, q)
    if t is None:
        raise InternalInconsistency("frame undefined")
    return np.stack([e1, t, np.cross(e1, t)])


def _suppress(verts, arcs, k):
    n = len(verts)
    keep = [m for m in range(n) if m != k]
    merged = list(arcs)
    merged[(k + 1) % n] = arcs[k] + arcs[(k + 1) % n]
    new_arcs = [merged[m] for m in keep]
    return verts[keep], new_arcs, keep


def _enclose(verts, arcs, state: _Enclosure, depth: int = 0) -> np.ndarray:
    n = len(verts)
    verts = np.array([unit(v) for v in verts])
    for _ in range(40 * n):
        state.spend()
        if _enclosed(verts):
            return verts
        if n == 3:
            raise InternalInconsistency("triangle with total length above 2pi")

        # half-circle inside a great-circle path
        run = _half_circle_run(verts, arcs)
        if run is not None:
            pair = _antipodal_pair(verts)
            cand = _rotate_between(verts, *pair) if pair is not None else None
            if cand is None:
                cand = _flex_search(verts, arcs)
            if cand is not None:
                return cand
            verts = _random_flex(verts, arcs, state.rng)
            continue

        # straight vertex: drop it, enclose the shorter polygon, subdivide
        straight = [k for k in range(n) if _is_straight(verts, k)]
        if straight:
            k = straight[0]
            if arcs[k] + arcs[(k + 1) % n] < math.pi:
                sub, sub_arcs, keep = _suppress(verts, arcs, k)
                sub = _enclose(sub, sub_arcs, state, depth + 1)
                out = np.empty_like(verts)
                out[keep] = sub
                out[k] = arc_point(out[(k - 1) % n], out[(k + 1) % n], arcs[k])
                return out
            verts = _random_flex(verts, arcs, state.rng)
            continue

        try:
            if n == 4:
                verts = _case_n4(verts, arcs)
            else:
                verts = _case_straighten(verts, arcs, state, depth)
        except RecursionExhausted:
            raise
        except (InternalInconsistency, PreconditionViolation, DegenerateVertex):
            verts = _random_flex(verts, arcs, state.rng)
    raise RecursionExhausted("origin enclosure exceeded its step budget")


def _case_straighten(verts, arcs, state, depth):
    n = len(verts)
    i = (int(np.argmin(arcs)) - 2) % n
    i0, i1, i2, i3 = ((i + k) % n for k in range(4))
    out = _straighten(verts, arcs, i)
    if _is_straight(out, i - 1) or _is_straight(out, i1):
        return out
    # a spur at u_{i+1}
    if abs(arcs[i1] - arcs[i2]) < 1e-12:
        # u_i and u_{i+2} coincide: swing the doubled segment straight
        out[i1] = _beyond(out[i2], out[i3], arcs[i2])
        return out
    # cut the overlap: u_i -> u_{i+2} of length a_{i+1} - a_{i+2}
    short = arcs[i1] - arcs[i2]
    keep = [m for m in range(n) if m != i1]
    cut = out[keep]
    cut_arcs = [arcs[m] for m in keep]
    cut_arcs[keep.index(i2)] = short
    pos = keep.index(i0)
    cut2 = _straighten(cut, cut_arcs, pos)
    m = n - 1
    ui, y = cut2[pos], cut2[(pos + 1) % m]
    x = arc_point(ui, y, arcs[i1])
    res = out.copy()
    res[keep] = cut2
    res[i1] = x
    # the straightened short polygon decides which case we are in
    if _is_straight(cut2, pos - 1) or _is_spur(cut2, pos + 1):
        return res
    # crimp: spurs at x and y
    u3 = res[i3]
    if float(np.linalg.norm(ui + u3)) < 1e-9 or _antipodal_in(res[[i0, i1, i2, i3]]):
        return res
    if arcs[i1] + arcs[i3] < math.pi:
        x2 = _meet(ui, arcs[i1], u3, arcs[i2] + arcs[i3], x)
        if x2 is None:
            raise InternalInconsistency("crimp triangle failed")
        res[i1] = x2
        res[i2] = arc_point(x2, u3, arcs[i2])
        return res
    # the four-vertex crimp has length at least 2pi: enclose it on its own
    quad = res[[i0, i1, i2, i3]]
    quad_arcs = [spherical_distance(ui, u3), arcs[i1], arcs[i2], arcs[i3]]
    done = _enclose(quad, quad_arcs, state, depth + 1)
    rot = _frame(ui, u3).T @ _frame(done[0], done[3])
    placed = done @ rot.T
    res[i1], res[i2] = unit(placed[1]), unit(placed[2])
    return res


def _antipodal_in(pts) -> bool:
    for a in range(len(pts)):
        for b in range(a + 1, len(pts)):
            if np.linalg.norm(pts[a] + pts[b]) < 1e-9:
                return True
    return False


def enclose_origin(p, a, seed: Optional[int] = None) -> SphericalPolygon:
    """Reshape a spherical realization of ``a`` so that the origin lies in the
    relative interior of the convex hull of its vertices."""
    arcs = _arcs(a)
    if math.fsum(arcs) < TWO_PI - FENCHEL_TOL:
        raise LengthBelowFenchel(f"total length {math.fsum(arcs)} below 2pi")
    verts = np.array(p.vertices if isinstance(p, SphericalPolygon) else p, dtype=float)
    rng = np.random.default_rng(default_seed() if seed is None else seed)
    state = _Enclosure(200 * len(arcs) ** 2, rng)
    out = _enclose(verts, arcs, state)
    return SphericalPolygon(out)
