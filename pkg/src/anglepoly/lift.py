"""From spherical polygons to closed polygons in space.

The edge directions of a closed space polygon form a spherical polygon whose
arc lengths are the turning angles, and the edge lengths are positive
weights that cancel those directions.  ``realize_3d`` runs the whole chain:
Fenchel gate, spherical decision, backtracking, origin enclosure, lift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    InconsistentSequence,
    LengthBelowFenchel,
    NoWitness,
    SignedSequenceInconsistent,
    Unrealizable,
)
from .geom import (
    TWO_PI,
    AngleSequence,
    Dimension,
    SphericalPolygon,
    count_crossings,
    origin_in_relint_conv,
    spherical_distance,
)
from .planar import SUM_TOL, realize_min_crossing
from .spherical import backtrack_realization, decide_spherical, enclose_origin

CLOSURE_TOL = 1e-9
PLANE_TOL = 1e-8
FENCHEL_TOL = 1e-9
THRACKLE_TOL = 1e-9


@dataclass
class SpacePolygon:
    """Closed polygon in R^3; edge i runs from vertex i to vertex i+1."""

    vertices: np.ndarray
    planar: bool
    plane_normal: Optional[np.ndarray]
    edge_lengths: np.ndarray
    self_intersecting: Optional[bool] = None
    # the spherical polygon the edges were built from, when known
    sphere: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return len(self.vertices)

    def edges(self) -> np.ndarray:
        return np.roll(self.vertices, -1, axis=0) - self.vertices

    def closure_residual(self) -> float:
        """Norm of sum(length_i * direction_i).

        Directions come from the source spherical polygon when available, so
        this measures how well the prescribed edges close up; otherwise the
        measured edge directions are used.
        """
        dirs = self.directions() if self.sphere is None else self.sphere
        return float(np.linalg.norm(self.edge_lengths @ dirs))

    def directions(self) -> np.ndarray:
        e = self.edges()
        return e / np.linalg.norm(e, axis=1)[:, None]

    def turning_angles(self) -> np.ndarray:
        return space_turning_angles(self.vertices)


def space_turning_angles(vertices) -> np.ndarray:
    """Angle at each vertex between the incoming and the outgoing edge."""
    v = np.asarray(vertices, dtype=float)
    e = np.roll(v, -1, axis=0) - v
    d = e / np.linalg.norm(e, axis=1)[:, None]
    prev = np.roll(d, 1, axis=0)
    return np.array([spherical_distance(p, q) for p, q in zip(prev, d)])


def best_fit_plane(points) -> tuple[np.ndarray, float]:
    """Unit normal of the least-squares plane and the largest distance to it."""
    x = np.asarray(points, dtype=float)
    centered = x - x.mean(axis=0)
    _, _, vt = np.linalg.svd(centered)
    normal = vt[-1]
    return normal, float(np.abs(centered @ normal).max())


def _space_polygon(vertices, lengths, sphere=None) -> SpacePolygon:
    normal, dev = best_fit_plane(vertices)
    planar = dev < PLANE_TOL
    crossing = None
    if planar:
        e1 = vertices[1] - vertices[0]
        e1 = e1 - (e1 @ normal) * normal
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(normal, e1)
        flat = np.stack([vertices @ e1, vertices @ e2], axis=1)
        crossing = count_crossings(flat)[0] > 0
    return SpacePolygon(vertices, planar, normal if planar else None, np.asarray(lengths, float), crossing, sphere)


def lift_to_polygon(p) -> SpacePolygon:
    """Closed polygon whose edge directions are the vertices of ``p``.

    The weights of a strictly positive convex combination of the vertices
    equal to the origin become the edge lengths.
    """
    u = np.asarray(p.vertices if isinstance(p, SphericalPolygon) else p, dtype=float)
    witness = origin_in_relint_conv(u)
    if witness is None:
        raise NoWitness("origin is not strictly enclosed by the spherical polygon")
    lam = witness.coefficients
    steps = lam[:, None] * u
    verts = np.vstack([np.zeros(3), np.cumsum(steps, axis=0)[:-1]])
    return _space_polygon(verts, lam, u)


def _circle_normal(u) -> np.ndarray:
    _, _, vt = np.linalg.svd(np.asarray(u, float))
    return vt[-1]


def on_great_circle(p, tol: float = PLANE_TOL) -> bool:
    u = np.asarray(p.vertices if isinstance(p, SphericalPolygon) else p, dtype=float)
    return float(np.abs(u @ _circle_normal(u)).max()) < tol


def signed_sequence(p, a) -> list:
    """Signed planar angles of a spherical polygon lying on a great circle.

    An arc traversed counter-clockwise about the circle normal contributes
    ``+a[i]``, a clockwise one ``-a[i]``.
    """
    u = np.asarray(p.vertices if isinstance(p, SphericalPolygon) else p, dtype=float)
    arcs = list(a)
    normal = _circle_normal(u)
    signs = [1.0 if float(np.cross(u[i - 1], u[i]) @ normal) >= 0 else -1.0 for i in range(len(u))]
    return [s * x for s, x in zip(signs, arcs)], normal


def lift_planar(p, a) -> SpacePolygon:
    """Planar realization for a spherical polygon on one great circle, built by
    the minimum-crossing planar construction inside the circle's plane."""
    u = np.asarray(p.vertices if isinstance(p, SphericalPolygon) else p, dtype=float)
    arcs = list(a.angles if isinstance(a, AngleSequence) else a)
    signed, normal = signed_sequence(u, arcs)
    total = math.fsum(signed)
    k = round(total / TWO_PI)
    if abs(total - k * TWO_PI) > SUM_TOL:
        raise SignedSequenceInconsistent(f"signed sum {total} is not a multiple of 2pi")
    try:
        flat = realize_min_crossing(signed).vertices
    except InconsistentSequence as exc:
        raise SignedSequenceInconsistent(str(exc)) from exc
    # planar frame in which the first direction u[0] has angle 0
    e1 = u[0] - (u[0] @ normal) * normal
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(normal, e1)
    edge0 = flat[1] - flat[0]
    # turning angle a[i] sits at vertex i, so edge 0 leaves vertex 0 along u[0]
    phi = math.atan2(edge0[1], edge0[0])
    c, s = math.cos(-phi), math.sin(-phi)
    flat = flat @ np.array([[c, s], [-s, c]])
    flat = flat - flat[0]
    verts = flat[:, :1] * e1 + flat[:, 1:] * e2
    lengths = np.linalg.norm(np.roll(verts, -1, axis=0) - verts, axis=1)
    scale = lengths.sum()
    out = _space_polygon(verts / scale, lengths / scale, u)
    out.planar = True
    out.plane_normal = normal
    return out


def realize_3d(a, seed: Optional[int] = None) -> SpacePolygon:
    """Closed space polygon with turning angles ``a``.

    Raises ``Unrealizable`` with reason ``TotalCurvatureBelow2Pi`` or
    ``NoSphericalRealization``.
    """
    seq = a if isinstance(a, AngleSequence) else AngleSequence.spatial(a)
    if seq.dimension is not Dimension.SPACE_3D:
        seq = AngleSequence.spatial(seq.angles)
    arcs = list(seq.angles)
    if seq.total < TWO_PI - FENCHEL_TOL:
        raise Unrealizable(Unrealizable.TOTAL_CURVATURE_BELOW_2PI, f"sum {seq.total:.12g} < 2pi")
    decision = decide_spherical(seq)
    if not decision:
        raise Unrealizable(Unrealizable.NO_SPHERICAL_REALIZATION, f"zone margin {decision.margin:.3g}")
    if seq.total <= TWO_PI + FENCHEL_TOL:
        # equality in Fenchel's bound: the only realizations are planar and
        # convex, so walk the directions once around a great circle instead of
        # letting the enclosure settle on a near-degenerate witness
        beta = np.cumsum(arcs)
        return lift_planar(np.column_stack([np.cos(beta), np.sin(beta), np.zeros_like(beta)]), arcs)
    sphere = backtrack_realization(seq, decision.trace)
    try:
        sphere = enclose_origin(sphere, seq, seed=seed)
    except LengthBelowFenchel as exc:
        raise Unrealizable(Unrealizable.TOTAL_CURVATURE_BELOW_2PI, str(exc)) from exc
    if on_great_circle(sphere):
        return lift_planar(sphere, arcs)
    return lift_to_polygon(sphere)


@dataclass(frozen=True)
class ThrackleVerdict:
    forced_planar: bool
    n_odd: bool
    deficit: float


def forced_planar_thrackle_check(a) -> ThrackleVerdict:
    """Odd n >= 5 with sum(pi - a_i) == pi forces a planar, self-crossing
    realization."""
    arcs = list(a.angles if isinstance(a, AngleSequence) else a)
    n = len(arcs)
    deficit = math.pi - math.fsum(math.pi - x for x in arcs)
    odd = n % 2 == 1
    return ThrackleVerdict(odd and n >= 5 and abs(deficit) < THRACKLE_TOL, odd, deficit)


def skip_two_length(directions) -> float:
    """Length of the spherical polygon u_0, u_2, u_4, ... (indices mod n).

    For odd n this visits every vertex once; on a realization of a forced
    planar sequence it equals 2pi.
    """
    u = np.asarray(directions, dtype=float)
    n = len(u)
    return math.fsum(spherical_distance(u[i], u[(i + 2) % n]) for i in range(n))
