"""Requests, responses and file formats for the command line tool."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DegenerateVertex, OutOfRange
from .geom import AngleSequence, Dimension, polygon_turning_angles

UNITS = ("radians", "degrees")
# "consistent" answers check2d without a polygon; "verdict" carries the
# thrackle check, whose answer lives in the flags
STATUSES = ("realized", "consistent", "unrealizable", "inconsistent", "verdict")


class RequestError(ValueError):
    """Malformed input; the CLI maps it to exit code 2."""


@dataclass
class Request:
    angles: list
    unit: str = "radians"
    dimension: int = 2
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.unit not in UNITS:
            raise RequestError(f"unknown unit {self.unit!r}")
        if self.dimension not in (2, 3):
            raise RequestError(f"dimension must be 2 or 3, got {self.dimension!r}")
        try:
            self.angles = [float(x) for x in self.angles]
        except (TypeError, ValueError) as exc:
            raise RequestError(f"angles must be numbers: {exc}") from exc

    def radians(self) -> list:
        if self.unit == "degrees":
            return [math.radians(x) for x in self.angles]
        return list(self.angles)

    def sequence(self) -> AngleSequence:
        dim = Dimension.PLANAR_2D if self.dimension == 2 else Dimension.SPACE_3D
        try:
            return AngleSequence(tuple(self.radians()), dim)
        except OutOfRange as exc:
            raise RequestError(str(exc)) from exc

    def to_dict(self) -> dict:
        return {"angles": list(self.angles), "unit": self.unit, "dimension": self.dimension}


def parse_angle_list(text: str) -> list:
    parts = [p for p in text.replace(";", ",").split(",") if p.strip()]
    if not parts:
        raise RequestError("empty angle list")
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise RequestError(f"bad angle list {text!r}") from exc


def request_from_dict(data: dict, unit: str = "radians", dimension: int = 2) -> Request:
    """Build a request from ``{"angles": [...], "unit": ..., "dimension": ...}``.

    A ``"polygon"`` vertex list may stand in for the angles; they are then
    read off the polygon (in radians) and the vertices are kept in
    ``options["polygon"]`` so ``render`` can draw them as given.
    """
    if not isinstance(data, dict) or ("angles" not in data and "polygon" not in data):
        raise RequestError("request needs an 'angles' or 'polygon' field")
    if "angles" not in data:
        return _request_from_polygon(data["polygon"])
    angles = data["angles"]
    if not isinstance(angles, list):
        raise RequestError("'angles' must be a list")
    try:
        dim = int(data.get("dimension", dimension))
    except (TypeError, ValueError) as exc:
        raise RequestError("'dimension' must be 2 or 3") from exc
    return Request(angles, data.get("unit", unit), dim)


def _request_from_polygon(vertices) -> Request:
    from .lift import space_turning_angles

    try:
        v = np.asarray(vertices, dtype=float)
    except (TypeError, ValueError) as exc:
        raise RequestError("'polygon' must be a list of points") from exc
    if v.ndim != 2 or v.shape[1] not in (2, 3) or len(v) < 3:
        raise RequestError("'polygon' needs at least 3 points in 2 or 3 dimensions")
    try:
        angles = polygon_turning_angles(v) if v.shape[1] == 2 else space_turning_angles(v)
    except DegenerateVertex as exc:
        raise RequestError(str(exc)) from exc
    return Request(list(angles), "radians", int(v.shape[1]), {"polygon": v.tolist()})


def parse_request_line(line: str, unit: str = "radians", dimension: int = 2) -> Request:
    """One batch line: either a JSON object or a comma separated angle list."""
    line = line.strip()
    if line.startswith("{"):
        try:
            data = json.loads(line)
        except json.JSONDecodeError as exc:
            raise RequestError(f"bad JSON: {exc}") from exc
        return request_from_dict(data, unit, dimension)
    return Request(parse_angle_list(line), unit, dimension)


def load_request(path: str, unit: str = "radians", dimension: int = 2) -> Request:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise RequestError(f"cannot read {path}: {exc}") from exc
    return request_from_dict(data, unit, dimension)


@dataclass
class Response:
    status: str
    polygon: Optional[list] = None
    crossing_number: Optional[int] = None
    diagnostics: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    message: str = ""

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        if (self.status == "realized") != (self.polygon is not None):
            raise ValueError("a polygon comes with, and only with, status 'realized'")
        if self.polygon is not None:
            self.polygon = [[float(c) for c in row] for row in np.asarray(self.polygon, dtype=float)]
        self.diagnostics = {k: _plain(v) for k, v in self.diagnostics.items()}
        self.flags = {k: _plain(v) for k, v in self.flags.items()}

    def to_dict(self) -> dict:
        out = {"status": self.status}
        if self.polygon is not None:
            out["polygon"] = self.polygon
        if self.crossing_number is not None:
            out["crossing_number"] = int(self.crossing_number)
        out["diagnostics"] = dict(self.diagnostics)
        out["flags"] = dict(self.flags)
        if self.message:
            out["message"] = self.message
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "Response":
        return cls(
            data["status"],
            data.get("polygon"),
            data.get("crossing_number"),
            dict(data.get("diagnostics", {})),
            dict(data.get("flags", {})),
            data.get("message", ""),
        )

    def to_json(self, indent: Optional[int] = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def _plain(v):
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


# --------------------------------------------------------------------------
# rendering


def segment_crossings(vertices) -> list:
    """Crossing points between non-adjacent edges of a closed 2D polygon."""
    v = np.asarray(vertices, dtype=float)
    n = len(v)
    pts = []
    for i in range(n):
        p, r = v[i], v[(i + 1) % n] - v[i]
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            q, s = v[j], v[(j + 1) % n] - v[j]
            denom = r[0] * s[1] - r[1] * s[0]
            if denom == 0.0:
                continue
            qp = q - p
            t = (qp[0] * s[1] - qp[1] * s[0]) / denom
            u = (qp[0] * r[1] - qp[1] * r[0]) / denom
            if 0.0 < t < 1.0 and 0.0 < u < 1.0:
                pts.append(p + t * r)
    return pts


def render_svg(vertices, mark_crossings: bool = True) -> str:
    """SVG with the polygon as a closed path and crossings as small circles."""
    v = np.asarray(vertices, dtype=float)
    lo, hi = v.min(axis=0), v.max(axis=0)
    span = hi - lo
    pad = 0.05 * max(span.max(), 1e-12)
    x0, y0 = lo - pad
    w, h = span + 2 * pad
    diag = math.hypot(w, h)
    # SVG's y axis points down; flip so counter-clockwise stays counter-clockwise
    flip = lambda p: (p[0], y0 + h - (p[1] - y0))  # noqa: E731
    path = " ".join(f"{'M' if k == 0 else 'L'} {x:.9g} {y:.9g}" for k, (x, y) in enumerate(map(flip, v)))
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{x0:.9g} {y0:.9g} {w:.9g} {h:.9g}">',
        f'  <path d="{path} Z" fill="none" stroke="black" stroke-width="{0.004 * diag:.6g}"/>',
    ]
    if mark_crossings:
        for c in segment_crossings(v):
            cx, cy = flip(c)
            lines.append(
                f'  <circle class="crossing" cx="{cx:.9g}" cy="{cy:.9g}" r="{0.01 * diag:.6g}" fill="red"/>'
            )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def render_obj(vertices) -> str:
    """Wavefront OBJ: one ``v`` record per vertex and a closed ``l`` polyline."""
    v = np.asarray(vertices, dtype=float)
    if v.shape[1] == 2:
        v = np.hstack([v, np.zeros((len(v), 1))])
    out = [f"v {x:.17g} {y:.17g} {z:.17g}" for x, y, z in v]
    out.append("l " + " ".join(str(k + 1) for k in range(len(v))) + " 1")
    return "\n".join(out) + "\n"
