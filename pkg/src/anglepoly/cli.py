"""Command line interface.

Exit codes: 0 realized or consistent, 1 negative answer, 2 malformed input.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Callable

import numpy as np

from .errors import InconsistentSequence, Unrealizable
from .geom import count_crossings, genericity_margin, origin_in_relint_conv, polygon_turning_angles
from .io import (
    Request,
    RequestError,
    Response,
    load_request,
    parse_angle_list,
    parse_request_line,
    render_obj,
    render_svg,
)
from .lift import best_fit_plane, forced_planar_thrackle_check, realize_3d
from .oracle import (
    MAX_SAMPLER_N,
    SamplerConfig,
    allpairs_crossings,
    hull_contains_origin_sampling,
    sample_spherical_closure,
)
from .planar import check_consistency, crossing_number, realize_min_crossing
from .spherical import backtrack_realization, decide_spherical

EXIT_OK, EXIT_NEGATIVE, EXIT_MALFORMED = 0, 1, 2


def _exit_code(resp: Response) -> int:
    return EXIT_OK if resp.status in ("realized", "consistent", "verdict") else EXIT_NEGATIVE


# --------------------------------------------------------------------------
# commands; each maps a Request to a Response


def cmd_check2d(req: Request, opts=None) -> Response:
    seq = _planar(req).sequence()
    report = check_consistency(seq)
    if not report.consistent:
        return Response("inconsistent", flags={"consistent": False}, message=report.reason.value)
    return Response(
        "consistent",
        crossing_number=crossing_number(seq),
        diagnostics={"turning_number": report.k},
        flags={"consistent": True},
    )


def cmd_realize2d(req: Request, opts=None) -> Response:
    seq = _planar(req).sequence()
    try:
        poly = realize_min_crossing(seq, seed=getattr(opts, "seed", None))
    except InconsistentSequence as exc:
        return Response("inconsistent", flags={"consistent": False}, message=str(exc))
    count, generic = count_crossings(poly)
    diag = {
        "angle_round_trip": float(np.abs(polygon_turning_angles(poly.vertices) - np.array(seq.angles)).max()),
        "crossings": count,
        "genericity_margin": genericity_margin(poly),
    }
    if getattr(opts, "verify", False):
        diag["verify_allpairs_crossings"] = allpairs_crossings(poly)
    resp = Response(
        "realized",
        polygon=poly.vertices,
        crossing_number=crossing_number(seq),
        diagnostics=diag,
        flags={"consistent": True, "generic": generic},
    )
    svg = getattr(opts, "svg", None)
    if svg:
        _write(svg, render_svg(poly.vertices))
    return resp


def cmd_realize3d(req: Request, opts=None) -> Response:
    seq = _spatial(req).sequence()
    verdict = forced_planar_thrackle_check(seq)
    decision = decide_spherical(seq)
    flags = {"boundary": decision.boundary, "forced_planar_thrackle": verdict.forced_planar}
    try:
        poly = realize_3d(seq, seed=getattr(opts, "seed", None))
    except Unrealizable as exc:
        return Response("unrealizable", flags=flags, message=exc.reason, diagnostics={"zone_margin": decision.margin})
    flags["planar"] = poly.planar
    diag = {
        "closure": poly.closure_residual(),
        "angle_round_trip": float(np.abs(poly.turning_angles() - np.array(seq.angles)).max()),
        "plane_residual": best_fit_plane(poly.vertices)[1],
        "zone_margin": decision.margin,
    }
    witness = origin_in_relint_conv(poly.sphere)
    if witness is not None:
        diag["witness_residual"] = witness.residual
    if poly.self_intersecting is not None:
        flags["self_intersecting"] = poly.self_intersecting
    if getattr(opts, "verify", False):
        diag["verify_hull_contains_origin"] = hull_contains_origin_sampling(poly.sphere)
        if seq.n <= MAX_SAMPLER_N:
            res = sample_spherical_closure(seq, SamplerConfig(getattr(opts, "resolution", 400)))
            diag["verify_sampler_min_gap"] = res.min_gap
    obj = getattr(opts, "obj", None)
    if obj:
        _write(obj, render_obj(poly.vertices))
    return Response("realized", polygon=poly.vertices, diagnostics=diag, flags=flags)


def cmd_realize_sphere(req: Request, opts=None) -> Response:
    seq = _spatial(req).sequence()
    decision = decide_spherical(seq)
    flags = {"boundary": decision.boundary}
    if not decision:
        return Response("unrealizable", flags=flags, diagnostics={"zone_margin": decision.margin},
                        message=Unrealizable.NO_SPHERICAL_REALIZATION)
    sphere = backtrack_realization(seq, decision.trace)
    err = float(np.abs(sphere.arc_lengths() - np.array(seq.angles)).max())
    return Response("realized", polygon=sphere.vertices, flags=flags,
                    diagnostics={"arc_round_trip": err, "zone_margin": decision.margin})


def cmd_thrackle_check(req: Request, opts=None) -> Response:
    seq = _spatial(req).sequence()
    v = forced_planar_thrackle_check(seq)
    return Response(
        "verdict",
        diagnostics={"deficit": v.deficit},
        flags={"forced_planar_thrackle": v.forced_planar, "n_odd": v.n_odd},
    )


def cmd_render(req: Request, opts=None) -> Response:
    out = getattr(opts, "out", None)
    given = req.options.get("polygon")
    if given is not None:
        # draw the supplied polygon itself rather than a fresh realization
        if out:
            _write(out, render_svg(given) if req.dimension == 2 else render_obj(given))
        return Response("realized", polygon=given)
    if req.dimension == 2:
        resp = cmd_realize2d(req, None)
        if resp.status == "realized" and out:
            _write(out, render_svg(resp.polygon))
    else:
        resp = cmd_realize3d(req, None)
        if resp.status == "realized" and out:
            _write(out, render_obj(resp.polygon))
    return resp


def _planar(req: Request) -> Request:
    if req.dimension != 2:
        raise RequestError("this command needs --dim 2")
    return req


def _spatial(req: Request) -> Request:
    if req.dimension != 3:
        raise RequestError("this command needs --dim 3")
    return req


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


COMMANDS: dict[str, tuple[Callable, int]] = {
    "check2d": (cmd_check2d, 2),
    "realize2d": (cmd_realize2d, 2),
    "realize3d": (cmd_realize3d, 3),
    "realize-sphere": (cmd_realize_sphere, 3),
    "thrackle-check": (cmd_thrackle_check, 3),
    "render": (cmd_render, 2),
}


# --------------------------------------------------------------------------
# argument handling


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="anglepoly", description="Polygons with prescribed turning angles.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, default_dim) in COMMANDS.items():
        p = sub.add_parser(name)
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--angles", help="comma separated angles")
        src.add_argument("--input", help="JSON file with angles, unit, dimension")
        src.add_argument("--batch", help="file with one request per line ('-' for stdin)")
        p.add_argument("--unit", choices=["radians", "degrees"], default="radians")
        p.add_argument("--dim", type=int, choices=[2, 3], default=default_dim)
        p.add_argument("--output", help="write the JSON response here instead of stdout")
        p.add_argument("--seed", type=int, default=None, help="overrides ANGLEPOLY_SEED")
        p.add_argument("--jobs", type=int, default=1, help="worker processes for --batch")
        if name == "realize2d":
            p.add_argument("--svg", help="also write an SVG drawing")
            p.add_argument("--verify", action="store_true")
        if name == "realize3d":
            p.add_argument("--obj", help="also write an OBJ polyline")
            p.add_argument("--verify", action="store_true", help="run the brute-force oracles")
            p.add_argument("--resolution", type=int, default=400)
        if name == "render":
            p.add_argument("--out", required=True, help="SVG (2D) or OBJ (3D) file")
    return parser


def _run_one(command: str, req: Request, opts) -> tuple[int, dict]:
    handler = COMMANDS[command][0]
    try:
        resp = handler(req, opts)
    except RequestError as exc:
        return EXIT_MALFORMED, {"status": "error", "message": str(exc)}
    return _exit_code(resp), resp.to_dict()


def _batch_worker(args):
    command, line, unit, dim, opts = args
    try:
        req = parse_request_line(line, unit, dim)
    except RequestError as exc:
        return EXIT_MALFORMED, {"status": "error", "message": str(exc)}
    return _run_one(command, req, opts)


class _Opts:
    """Picklable subset of the parsed options for batch workers."""

    def __init__(self, ns):
        for key in ("seed", "verify", "resolution"):
            setattr(self, key, getattr(ns, key, None))
        if self.resolution is None:
            self.resolution = 400


def main(argv=None) -> int:
    import json

    parser = build_parser()
    ns = parser.parse_args(argv)
    emit = _emitter(ns.output)
    if ns.batch:
        stream = sys.stdin if ns.batch == "-" else open(ns.batch, encoding="utf-8")
        with stream:
            lines = [ln for ln in stream if ln.strip() and not ln.lstrip().startswith("#")]
        opts = _Opts(ns)
        jobs = [(ns.command, ln, ns.unit, ns.dim, opts) for ln in lines]
        if ns.jobs > 1:
            with ProcessPoolExecutor(ns.jobs) as pool:
                results = list(pool.map(_batch_worker, jobs))
        else:
            results = [_batch_worker(j) for j in jobs]
        emit("\n".join(json.dumps(r) for _, r in results) + ("\n" if results else ""))
        codes = [c for c, _ in results]
        if EXIT_MALFORMED in codes:
            return EXIT_MALFORMED
        return EXIT_NEGATIVE if EXIT_NEGATIVE in codes else EXIT_OK
    try:
        if ns.input:
            req = load_request(ns.input, ns.unit, ns.dim)
        else:
            req = Request(parse_angle_list(ns.angles), ns.unit, ns.dim)
    except RequestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    code, payload = _run_one(ns.command, req, ns)
    if code == EXIT_MALFORMED:
        print(f"error: {payload['message']}", file=sys.stderr)
        return code
    emit(json.dumps(payload, indent=2) + "\n")
    return code


def _emitter(path):
    def emit(text):
        if path:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)

    return emit


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
