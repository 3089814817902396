"""Minimum-crossing realisation of planar angle sequences.

Conventions: vertex ``i`` carries turning angle ``a[i]`` and edge ``i`` runs
from vertex ``i`` to vertex ``i+1``.  With prefix sums ``beta[i] = a[0] + ...
+ a[i]`` the direction of edge ``i`` is ``(cos beta[i], sin beta[i])``, so
edge ``n-1`` points along +x.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateVertex,
    InconsistentSequence,
    InternalInconsistency,
    PreconditionViolation,
    RecursionExhausted,
)
from .geom import (
    GENERIC_TOL,
    TWO_PI,
    AngleSequence,
    Dimension,
    PlanarPolygon,
    count_crossings,
    crossing_report,
    default_seed,
    origin_in_relint_conv,
    polygon_turning_angles,
    signed_remainder_2pi,
    turning_number,
)

SUM_TOL = 1e-9
ROUND_TRIP_TOL = 1e-9
MAX_HALVINGS = 60
MAX_RETRIES = 8
RESTARTS = 6
EARLY_HALVINGS = 4
THIN = 0.05


class Reason(enum.Enum):
    OK = "Ok"
    SUM_NOT_MULTIPLE_OF_2PI = "SumNotMultipleOf2Pi"
    ORIGIN_NOT_INTERIOR_POSITIVE_HULL = "OriginNotInteriorPositiveHull"


@dataclass
class ConsistencyReport:
    consistent: bool
    k: int | None
    direction_vectors: np.ndarray
    reason: Reason


@dataclass
class SignChangeInfo:
    indices: list
    essential: list


def _angles(a) -> list:
    if isinstance(a, AngleSequence):
        if a.dimension is not Dimension.PLANAR_2D:
            raise PreconditionViolation("expected a planar angle sequence")
        return list(a.angles)
    return [float(x) for x in a]


def prefix_directions(angles: Sequence[float]) -> np.ndarray:
    beta = np.cumsum(angles)
    return np.column_stack([np.cos(beta), np.sin(beta)])


def strictly_positive_hull(vectors: np.ndarray, tol: float = SUM_TOL) -> bool:
    """True iff 0 is a convex combination of ``vectors`` with all weights > 0.

    Equivalently no closed half-plane through 0 holds every vector with at
    least one strictly inside: the largest angular gap is below pi, or is
    exactly pi with every vector on the separating line.
    """
    v = np.asarray(vectors, dtype=float)
    if len(v) < 2:
        return False
    theta = np.sort(np.mod(np.arctan2(v[:, 1], v[:, 0]), TWO_PI))
    gaps = np.diff(np.append(theta, theta[0] + TWO_PI))
    widest = float(gaps.max())
    if widest < math.pi - tol:
        return True
    if widest > math.pi + tol:
        return False
    # a gap of exactly pi: only the two directions on its boundary line allowed
    k = int(np.argmax(gaps))
    line = np.array([math.cos(theta[k]), math.sin(theta[k])])
    off = np.abs(v[:, 0] * line[1] - v[:, 1] * line[0])
    return bool(np.all(off <= tol))


def check_consistency(a) -> ConsistencyReport:
    angles = _angles(a)
    dirs = prefix_directions(angles)
    total = math.fsum(angles)
    if abs(signed_remainder_2pi(total)) > SUM_TOL:
        return ConsistencyReport(False, None, dirs, Reason.SUM_NOT_MULTIPLE_OF_2PI)
    k = int(round(total / TWO_PI))
    if not strictly_positive_hull(dirs):
        return ConsistencyReport(False, k, dirs, Reason.ORIGIN_NOT_INTERIOR_POSITIVE_HULL)
    return ConsistencyReport(True, k, dirs, Reason.OK)


def crossing_number(a) -> int:
    """Minimum crossings over generic realisations: 1 if k == 0 else |k| - 1."""
    report = check_consistency(a)
    if not report.consistent:
        raise InconsistentSequence(report.reason.value)
    return 1 if report.k == 0 else abs(report.k) - 1


def sign_change_indices(angles: Sequence[float]) -> list:
    n = len(angles)
    return [i for i in range(n) if angles[i] * angles[(i + 1) % n] < 0]


def classify_sign_changes(a) -> SignChangeInfo:
    angles = _angles(a)
    report = check_consistency(angles)
    if not report.consistent:
        raise InconsistentSequence(report.reason.value)
    dirs = report.direction_vectors
    indices = sign_change_indices(angles)
    essential = [not strictly_positive_hull(np.delete(dirs, i, axis=0)) for i in indices]
    return SignChangeInfo(indices, essential)


# --------------------------------------------------------------------------
# helpers


def _rot(v, angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([c * v[0] - s * v[1], s * v[0] + c * v[1]])


def _unit(v):
    return v / np.linalg.norm(v)


def _check(vertices, angles, crossings) -> tuple[bool, float]:
    """``(valid, margin)`` for a candidate realization of ``angles``."""
    if not np.all(np.isfinite(vertices)):
        return False, 0.0
    count, margin = crossing_report(vertices)
    if margin <= GENERIC_TOL or count != crossings:
        return False, margin
    try:
        got = polygon_turning_angles(vertices)
    except DegenerateVertex:
        return False, margin
    return bool(np.all(np.abs(got - np.asarray(angles)) < ROUND_TRIP_TOL)), margin


def _is_valid(vertices, angles, crossings) -> bool:
    if not np.all(np.isfinite(vertices)):
        return False
    count, generic = count_crossings(vertices)
    if not generic or count != crossings:
        return False
    try:
        got = polygon_turning_angles(vertices)
    except DegenerateVertex:
        return False
    return bool(np.all(np.abs(got - np.asarray(angles)) < ROUND_TRIP_TOL))


def _ray_hits(start, d, a, b):
    """Ray parameters t > 0 where start + t*d meets segments (a[j], b[j])."""
    r = b - a
    denom = d[0] * r[:, 1] - d[1] * r[:, 0]
    w = a - start
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (w[:, 0] * r[:, 1] - w[:, 1] * r[:, 0]) / denom
        u = (w[:, 0] * d[1] - w[:, 1] * d[0]) / denom
    ok = (np.abs(denom) > 1e-15) & (t > 1e-12) & (u >= -1e-12) & (u <= 1 + 1e-12)
    return t, ok


# --------------------------------------------------------------------------
# all turns in one direction


def _spiral_chain(angles):
    """Open chain w_0 .. w_{n+1}: unit first edge on the x-axis, then edges
    of length 1, or half the distance to the x-axis / an earlier edge when
    the ray would hit one."""
    pts = [np.array([0.0, 0.0]), np.array([1.0, 0.0])]
    heading = 0.0
    for alpha in angles:
        heading += alpha
        d = np.array([math.cos(heading), math.sin(heading)])
        start = pts[-1]
        hits = []
        if d[1] < -1e-15:
            hits.append(-start[1] / d[1])
        if len(pts) >= 3:
            a = np.array(pts[:-2])
            b = np.array(pts[1:-1])
            t, ok = _ray_hits(start, d, a, b)
            hits.extend(t[ok].tolist())
        length = 1.0 if not hits else min(1.0, min(hits) / 2.0)
        pts.append(start + length * d)
    return np.array(pts)


def _spiral_positive(angles) -> np.ndarray:
    n = len(angles)
    k = int(round(math.fsum(angles) / TWO_PI))
    w = _spiral_chain(angles)
    y_star = w[n][1]
    east = np.array([1.0, 0.0])
    # extend the last edge rightwards; keep the rightmost increasing edge hit
    t, ok = _ray_hits(w[n], east, w[:n], w[1 : n + 1])
    rising = (w[1 : n + 1, 1] - w[:n, 1]) > 0
    ok &= rising
    if not np.any(ok):
        raise InternalInconsistency("extension of the last spiral edge meets no increasing edge")
    j = int(np.argmax(np.where(ok, t, -np.inf)))
    if j < 1 or j > n - 1:
        raise InternalInconsistency("spiral extension hit an unusable edge")
    c = w[n] + t[j] * east
    d = _unit(w[j + 1] - w[j])
    m = j - 1  # c lies on the edge leaving the vertex with angle a[m]
    head = w[1 : m + 2]
    tail = w[m + 2 : n + 1]
    room = min(np.linalg.norm(w[j + 1] - c), np.linalg.norm(c - w[n]))
    span = max(np.linalg.norm(c), 1.0)
    s = 0.5 * room / span
    for _ in range(MAX_HALVINGS):
        q = c - s * c + (s * y_star / d[1]) * d
        verts = np.vstack([q + s * head, tail])
        if _is_valid(verts, angles, abs(k) - 1):
            return verts
        s *= 0.5
    raise InternalInconsistency("no splice scale made the spiral generic")


def realize_spiral(a) -> PlanarPolygon:
    """Generic polygon with |k|-1 crossings for a sequence without sign changes."""
    angles = _angles(a)
    if not (all(x > 0 for x in angles) or all(x < 0 for x in angles)):
        raise PreconditionViolation("spiral construction needs all angles of one sign")
    total = math.fsum(angles)
    if abs(signed_remainder_2pi(total)) > SUM_TOL or abs(total) < math.pi:
        raise PreconditionViolation("angle sum must be 2k*pi with k != 0")
    if angles[0] > 0:
        return PlanarPolygon(_spiral_positive(angles))
    verts = _spiral_positive([-x for x in angles])
    return PlanarPolygon(verts * np.array([1.0, -1.0]))


# --------------------------------------------------------------------------
# zero sum, two essential sign changes


def _two_essential_normalized(angles) -> np.ndarray:
    """Angles positive on 0..j, negative on j+1..n-1, summing to 0."""
    n = len(angles)
    j = max(i for i in range(n) if angles[i] > 0)
    beta = np.cumsum(angles)
    dirs = np.column_stack([np.cos(beta), np.sin(beta)])
    vj = dirs[j]
    east = np.array([1.0, 0.0])
    basis = np.column_stack([-vj, -east])

    def split(chain):
        disp = dirs[chain].sum(axis=0)
        coef = np.linalg.solve(basis, disp)
        if np.any(coef <= 1e-12 * max(1.0, np.abs(coef).max())):
            raise PreconditionViolation("chain displacement not strictly inside the cone")
        return coef

    # chain 1 joins the end of the +x edge to the start of edge j, chain 2
    # the end of edge j to the start of the +x edge; the two edges cross at 0
    t1, b = split(list(range(0, j)))
    t2, a_len = split(list(range(j + 1, n - 1)))
    verts = np.zeros((n, 2))
    verts[0] = b * east
    for i in range(j):
        verts[i + 1] = verts[i] + dirs[i]
    verts[j + 1] = t2 * vj
    for i in range(j + 1, n - 1):
        verts[i + 1] = verts[i] + dirs[i]
    return verts


def realize_two_essential(a) -> PlanarPolygon:
    """One-crossing polygon for a zero-sum sequence with two essential sign changes."""
    angles = _angles(a)
    n = len(angles)
    if abs(math.fsum(angles)) > SUM_TOL:
        raise PreconditionViolation("angle sum must be 0")
    changes = sign_change_indices(angles)
    if len(changes) != 2:
        raise PreconditionViolation(f"expected 2 sign changes, found {len(changes)}")
    info = classify_sign_changes(angles)
    if not all(info.essential):
        raise PreconditionViolation("both sign changes must be essential")
    # rotate so the positive run starts at index 0
    start = next(i for i in changes if angles[i] < 0)
    r = (start + 1) % n
    rotated = angles[r:] + angles[:r]
    verts = _two_essential_normalized(rotated)
    verts = np.roll(verts, r, axis=0)
    if not _is_valid(verts, angles, 1):
        raise InternalInconsistency("two-chain construction did not give one crossing")
    return PlanarPolygon(verts)


# --------------------------------------------------------------------------
# general case


def _solve2(d1, d2, rhs):
    m = np.column_stack([d1, d2])
    if abs(np.linalg.det(m)) < 1e-14:
        return None
    return np.linalg.solve(m, rhs)


def _edge_len(verts, i):
    return float(np.linalg.norm(verts[(i + 1) % len(verts)] - verts[i]))


def _start_scale(p, cuts):
    """Largest splice scale that keeps every shortened edge positive.

    ``cuts`` pairs a signed offset along an edge (negative = shortening)
    with that edge's length.
    """
    scale = float(np.ptp(p, axis=0).max())
    for offset, length in cuts:
        if offset < 0:
            scale = min(scale, 0.9 * length / -offset)
    return scale


def _splice_global(p, a, zero_pair):
    """Re-insert a[1], a[2] by adding one edge and re-closing through all edges.

    The new edge keeps its length; the closure defect goes to the old edges
    in proportion to their squared length, so short features barely move.
    This avoids the sliver a local triangle needs when a[1] + a[2] is small.
    """
    old = np.linalg.norm(np.roll(p, -1, axis=0) - p, axis=1)
    e0 = p[1] - p[0]
    beta = math.atan2(e0[1], e0[0]) + np.concatenate([[0.0], np.cumsum(a[1:])])
    dirs = np.column_stack([np.cos(beta), np.sin(beta)])
    if zero_pair:
        base = np.concatenate([[old[0] / 2, 0.0, old[0] / 2], old[1:]])
        room = old[0] / 2
    else:
        base = np.concatenate([[old[0], 0.0], old[1:]])
        room = min(old[0], old[1])
    fresh = np.zeros(len(base), dtype=bool)
    fresh[1] = True
    wd = (base**2)[:, None] * dirs
    gram = dirs.T @ wd
    if abs(np.linalg.det(gram)) < 1e-300:
        return []

    def build(eps):
        lengths = base.copy()
        lengths[fresh] = eps
        defect = dirs.T @ lengths
        lengths -= wd @ np.linalg.solve(gram, defect)
        if np.any(lengths[~fresh] < 0.5 * base[~fresh]):
            return None
        return np.vstack([p[:1], p[0] + np.cumsum(lengths[:, None] * dirs, axis=0)[:-1]])

    return [(room, build)]


def _splice_triangle(p, a, loop=False):
    """Undo the merge of a[1], a[2] at vertex 1 of ``p``.

    With ``loop`` the merged angle was wrapped by 2*pi and the two new
    edges form a small kink with one crossing.
    """
    v = p[1]
    d_in = _unit(p[1] - p[0])
    d_out = _unit(p[2] - p[1])
    vs = _rot(d_in, a[1])
    sol = _solve2(d_in, -d_out, -vs)
    if sol is None:
        return []
    x, w = sol
    if (x > 0 and w < 0) != loop:
        return []
    s0 = _start_scale(p, [(x, _edge_len(p, 0)), (-w, _edge_len(p, 1))])

    def build(s):
        b = v + s * x * d_in
        c = v + s * w * d_out
        return np.vstack([p[:1], b, c, p[2:]])

    return [(s0, build)]


def _splice_trapezoid(p, a):
    """Undo the removal of a zero-sum pair a[1], a[2] next to vertex 0/1 of ``p``."""
    candidates = []
    # after-variant: the pair is re-inserted just before vertex 1 (angle a[3])
    v = p[1]
    d_in = _unit(p[1] - p[0])
    d_out = _unit(p[2] - p[1])
    vs = _rot(d_in, a[1])
    sol = _solve2(d_in, -d_out, -vs)
    if sol is not None and sol[1] > 0:
        u, w = sol
        z = max(u, 0.0) + 1.0
        x = u - z
        s0 = _start_scale(p, [(x, _edge_len(p, 0)), (-w, _edge_len(p, 1))])

        def build_after(s, x=x, z=z, w=w, v=v, d_in=d_in, d_out=d_out, vs=vs):
            b = v + s * x * d_in
            c = b + s * vs
            d = v + s * w * d_out
            return np.vstack([p[:1], b, c, d, p[2:]])

        candidates.append((s0, build_after))
    # before-variant: re-inserted just after vertex 0 (angle a[0])
    v = p[0]
    d_in = _unit(p[0] - p[-1])
    d_out = _unit(p[1] - p[0])
    vs = _rot(d_out, a[1])
    sol = _solve2(d_in, -d_out, -vs)
    if sol is not None:
        x, u = sol
        z = max(-u, 0.0) + 1.0
        w = u + z
        s0 = _start_scale(p, [(x, _edge_len(p, len(p) - 1)), (-w, _edge_len(p, 0))])

        def build_before(s, x=x, z=z, w=w, v=v, d_in=d_in, d_out=d_out):
            b = v + s * x * d_in
            c = b + s * z * d_out
            d = v + s * w * d_out
            return np.vstack([b, c, d, p[1:]])

        candidates.append((s0, build_before))
    return candidates


def _normalize(verts):
    """Centre on the origin with unit diameter so tolerances stay comparable."""
    verts = verts - verts.mean(axis=0)
    return verts / float(np.ptp(verts, axis=0).max())


def _convex(angles) -> np.ndarray:
    dirs = prefix_directions(angles)
    witness = origin_in_relint_conv(dirs)
    if witness is None:
        raise InternalInconsistency("turning number one sequence without a positive hull")
    lengths = np.asarray(witness.coefficients) / max(witness.coefficients)
    verts = np.vstack([[0.0, 0.0], np.cumsum(lengths[:, None] * dirs, axis=0)[:-1]])
    return verts - verts.mean(axis=0)


class _Search:
    """Shared state of one construction attempt.

    ``budget`` bounds failed re-insertions; ``rng`` (when set) breaks ties
    between equally ranked merges at random instead of by index.
    """

    def __init__(self, rng=None):
        self.budget = MAX_RETRIES
        self.rng = rng

    def tiebreak(self, i):
        return i if self.rng is None else float(self.rng.random())

    def spend(self):
        self.budget -= 1
        if self.budget <= 0:
            raise RecursionExhausted("no merge order re-inserted every turn")


def _reinsert(candidates, a, target, r):
    """Best conditioned valid splice.

    Each candidate is shrunk until it clears the other edges; among the
    survivors the one with the largest genericity margin wins.
    """
    best, best_margin = None, -1.0
    for s0, build in candidates:
        scale = s0
        for h in range(MAX_HALVINGS):
            verts = build(scale)
            scale *= 0.5
            if verts is None:
                continue
            valid, margin = _check(verts, a, target)
            if valid:
                if margin > best_margin:
                    best, best_margin = verts, margin
                break
            if h >= EARLY_HALVINGS and margin <= GENERIC_TOL:
                break  # smaller copies only get closer to degenerate
    return None if best is None else np.roll(_normalize(best), r, axis=0)


def _realize_one_sign(angles: list, depth: list, search: _Search) -> np.ndarray:
    n = len(angles)
    k = int(round(math.fsum(angles) / TWO_PI))
    if abs(k) == 1:
        verts = _convex(angles)
        if _is_valid(verts, angles, 0):
            return verts
    try:
        return realize_spiral(angles).vertices
    except InternalInconsistency:
        pass
    # the inward spiral got too thin: peel one winding off as a small kink,
    # or merge two small turns into one, and re-insert afterwards
    sign = 1.0 if angles[0] > 0 else -1.0
    pairs = []
    for i in range(n):
        j = (i + 1) % n
        both = abs(angles[i] + angles[j])
        if both > math.pi + SUM_TOL and abs(k) >= 2:
            merged = angles[i] + angles[j] - sign * TWO_PI
        elif both < math.pi - SUM_TOL:
            merged = angles[i] + angles[j]
        else:
            continue
        rest = [merged] + [angles[(j + 1 + t) % n] for t in range(n - 2)]
        if n > 3 and check_consistency(rest).consistent:
            pairs.append((max(depth[i], depth[j]), search.tiebreak(i), i))
    for _, _, s in sorted(pairs):
        r = (s - 1) % n
        a = angles[r:] + angles[:r]
        dep = depth[r:] + depth[:r]
        loop = abs(a[1] + a[2]) > math.pi
        merged = a[1] + a[2] - (sign * TWO_PI if loop else 0.0)
        try:
            p = _realize([a[0], merged] + a[3:], [dep[0], max(dep[1], dep[2]) + 1] + dep[3:], search)
        except RecursionExhausted:
            raise
        except InternalInconsistency:
            continue
        verts = _reinsert(_splice_triangle(p, a, loop=loop), a, abs(k) - 1, r)
        if verts is not None:
            return verts
        search.spend()
    raise InternalInconsistency("no well conditioned realization of a one-signed sequence")


def _thinness(x, y):
    """Small when re-inserting the pair x, y needs a sliver triangle."""
    return min(math.pi - abs(x), math.pi - abs(y), abs(x + y))


def _realize(angles: list, depth: list, search: _Search) -> np.ndarray:
    """Recursive construction; ``depth[i]`` counts merges absorbed by angle i.

    A merge whose re-insertion fails is retried with the next candidate.
    """
    n = len(angles)
    total = math.fsum(angles)
    if not sign_change_indices(angles):
        return _realize_one_sign(angles, depth, search)
    info = classify_sign_changes(angles)
    loose = [i for i, ess in zip(info.indices, info.essential) if not ess]
    if not loose:
        if abs(total) <= SUM_TOL:
            return realize_two_essential(angles).vertices
        raise InternalInconsistency("essential sign change with nonzero angle sum")
    target = 1 if abs(total) <= SUM_TOL else abs(int(round(total / TWO_PI))) - 1

    # merging opposite-signed neighbours always stays inside (-pi, pi); the
    # shallowest pair goes first so re-insertions do not nest in one spot,
    # and slivers are postponed
    def key(i):
        j = (i + 1) % n
        thin = _thinness(angles[i], angles[j]) < THIN
        return (max(depth[i], depth[j]), thin, search.tiebreak(i))

    for s in sorted(loose, key=key):
        r = (s - 1) % n
        a = angles[r:] + angles[:r]  # a[1], a[2] are the pair being merged
        dep = depth[r:] + depth[:r]
        merged = a[1] + a[2]
        try:
            if abs(merged) <= SUM_TOL:
                p = _realize([a[0]] + a[3:], [dep[0]] + dep[3:], search)
                candidates = _splice_global(p, a, True) + _splice_trapezoid(p, a)
            else:
                level = max(dep[1], dep[2]) + 1
                p = _realize([a[0], merged] + a[3:], [dep[0], level] + dep[3:], search)
                candidates = _splice_global(p, a, False) + _splice_triangle(p, a)
        except RecursionExhausted:
            raise
        except InternalInconsistency:
            continue
        verts = _reinsert(candidates, a, target, r)
        if verts is not None:
            return verts
        search.spend()
    raise InternalInconsistency("could not re-insert any sign change without new crossings")


def realize_min_crossing(a, seed: int | None = None) -> PlanarPolygon:
    """Generic polygon realising ``a`` with exactly ``crossing_number(a)`` crossings.

    The first attempt is fully deterministic; if it cannot keep every
    re-insertion well conditioned, later attempts shuffle ties between
    equally ranked merges with a generator seeded from ``seed``.
    """
    angles = _angles(a)
    report = check_consistency(angles)
    if not report.consistent:
        raise InconsistentSequence(report.reason.value)
    if seed is None:
        seed = default_seed()
    last = None
    for attempt in range(RESTARTS):
        rng = None if attempt == 0 else np.random.default_rng([seed, attempt])
        try:
            return PlanarPolygon(_realize(angles, [0] * len(angles), _Search(rng)))
        except InternalInconsistency as exc:
            last = exc
    raise InternalInconsistency(f"construction failed after {RESTARTS} attempts: {last}")


def lower_bound_holds(polygon) -> bool:
    """Crossings of a generic polygon are at least |turning number| - 1."""
    count, _ = count_crossings(polygon)
    return count >= abs(turning_number(polygon)) - 1


__all__ = [
    "ConsistencyReport",
    "Reason",
    "SignChangeInfo",
    "check_consistency",
    "classify_sign_changes",
    "crossing_number",
    "realize_min_crossing",
    "realize_spiral",
    "realize_two_essential",
    "strictly_positive_hull",
    "GENERIC_TOL",
]
