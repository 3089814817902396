import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from anglepoly.cli import main
from anglepoly.io import (
    Request,
    RequestError,
    Response,
    load_request,
    parse_angle_list,
    parse_request_line,
    render_obj,
    render_svg,
)

from conftest import SQUARE, pentagram


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, json.loads(out.out), out.err


def test_parse_angle_list():
    assert parse_angle_list("1, 2,3") == [1.0, 2.0, 3.0]
    with pytest.raises(RequestError):
        parse_angle_list("1,a")
    with pytest.raises(RequestError):
        parse_angle_list(" , ")


def test_request_validation():
    with pytest.raises(RequestError):
        Request([1, 2, 3], unit="grad")
    with pytest.raises(RequestError):
        Request([1, 2, 3], dimension=4)
    with pytest.raises(RequestError):
        Request([1, 2, 4], dimension=3).sequence()
    with pytest.raises(RequestError):
        Request([1, 2]).sequence()
    assert Request([90, 90, 90, 90], "degrees").radians() == pytest.approx([math.pi / 2] * 4)


def test_request_lines_and_files(tmp_path):
    assert parse_request_line('{"angles": [1, 2, 3], "dimension": 3}').dimension == 3
    assert parse_request_line("1,2,3", dimension=3).angles == [1.0, 2.0, 3.0]
    with pytest.raises(RequestError):
        parse_request_line("{bad")
    with pytest.raises(RequestError):
        parse_request_line('{"unit": "radians"}')
    f = tmp_path / "r.json"
    f.write_text(json.dumps({"angles": [120, 120, 120], "unit": "degrees", "dimension": 2}))
    req = load_request(str(f))
    assert req.unit == "degrees" and req.radians() == pytest.approx([2 * math.pi / 3] * 3)
    with pytest.raises(RequestError):
        load_request(str(tmp_path / "missing.json"))


def test_polygon_request():
    req = parse_request_line(json.dumps({"polygon": pentagram().tolist()}))
    assert req.dimension == 2 and req.angles == pytest.approx([4 * math.pi / 5] * 5)
    with pytest.raises(RequestError):
        parse_request_line('{"polygon": [[0, 0], [1, 1]]}')


def _responses():
    num = st.floats(-1e6, 1e6, allow_nan=False)
    polygons = st.lists(st.lists(num, min_size=3, max_size=3), min_size=3, max_size=6)
    extras = dict(
        crossing_number=st.one_of(st.none(), st.integers(0, 20)),
        diagnostics=st.dictionaries(st.sampled_from(["closure", "angle_round_trip"]), num),
        flags=st.dictionaries(st.sampled_from(["planar", "boundary"]), st.booleans()),
    )
    return st.one_of(
        st.builds(Response, st.just("realized"), polygons, **extras),
        st.builds(Response, st.sampled_from(["unrealizable", "inconsistent", "consistent"]), st.none(), **extras),
    )


@given(_responses())
def test_response_json_round_trip(resp):
    text = resp.to_json()
    again = Response.from_dict(json.loads(text))
    assert again.to_json() == text


def test_response_invariants():
    with pytest.raises(ValueError):
        Response("maybe")
    with pytest.raises(ValueError):
        Response("realized")
    with pytest.raises(ValueError):
        Response("unrealizable", polygon=[[0, 0], [1, 0], [0, 1]])


def test_render_svg_and_obj():
    svg = render_svg(SQUARE)
    assert svg.count(" L ") == 3 and 'class="crossing"' not in svg
    assert render_svg(pentagram()).count('class="crossing"') == 5
    obj = render_obj(np.eye(3)[[0, 1, 2, 0, 1]] + np.arange(5)[:, None])
    lines = obj.splitlines()
    assert sum(ln.startswith("v ") for ln in lines) == 5
    assert lines[-1] == "l 1 2 3 4 5 1"


def test_check2d(capsys):
    code, out, _ = run(capsys, "check2d", "--angles", "120,120,120", "--unit", "degrees", "--dim", "2")
    assert code == 0 and out["status"] == "consistent" and out["crossing_number"] == 0
    code, out, _ = run(capsys, "check2d", "--angles", "144,144,144,144,144", "--unit", "degrees")
    assert code == 0 and out["crossing_number"] == 1
    code, out, _ = run(capsys, "check2d", "--angles", "90,90,-90,-90,-90,90", "--unit", "degrees")
    assert code == 0 and out["crossing_number"] == 1
    code, out, _ = run(capsys, "check2d", "--angles", "90,-90,90,-90", "--unit", "degrees")
    assert code == 1 and out["status"] == "inconsistent"


def test_exit_code_two_on_bad_input(capsys):
    assert main(["check2d", "--angles", "1,x"]) == 2
    assert main(["check2d", "--angles", "4,1,1"]) == 2
    assert main(["realize3d", "--angles", "2,2,2,2", "--dim", "2"]) == 2
    assert "error" in capsys.readouterr().err


def test_realize2d(capsys, tmp_path):
    svg = tmp_path / "p.svg"
    code, out, _ = run(capsys, "realize2d", "--angles", "90,90,90,90", "--unit", "degrees", "--svg", str(svg),
                       "--verify")
    assert code == 0 and out["status"] == "realized" and len(out["polygon"]) == 4
    assert out["diagnostics"]["crossings"] == 0 == out["diagnostics"]["verify_allpairs_crossings"]
    assert svg.read_text().startswith("<svg")
    code, out, _ = run(capsys, "realize2d", "--angles", "144,144,144,144,144", "--unit", "degrees")
    assert out["diagnostics"]["crossings"] == 1 and out["diagnostics"]["angle_round_trip"] < 1e-8
    code, out, _ = run(capsys, "realize2d", "--angles", "90,-90,90,-90", "--unit", "degrees")
    assert code == 1 and "polygon" not in out


def test_units_agree(capsys):
    _, deg, _ = run(capsys, "realize2d", "--angles", "144,144,144,144,144", "--unit", "degrees")
    _, rad, _ = run(capsys, "realize2d", "--angles", ",".join([repr(4 * math.pi / 5)] * 5))
    assert np.allclose(deg["polygon"], rad["polygon"], atol=1e-12)
    assert deg["crossing_number"] == rad["crossing_number"]


def test_realize3d(capsys, tmp_path):
    obj = tmp_path / "p.obj"
    code, out, _ = run(capsys, "realize3d", "--angles", "3.0415926535897933,3.0415926535897933,"
                       "3.0415926535897933,0.1")
    assert code == 1 and out["status"] == "unrealizable" and out["message"] == "NoSphericalRealization"
    code, out, _ = run(capsys, "realize3d", "--angles", "144,144,144,144,144", "--unit", "degrees",
                       "--obj", str(obj), "--verify", "--resolution", "60")
    assert code == 0 and out["flags"]["planar"] and out["flags"]["forced_planar_thrackle"]
    assert out["diagnostics"]["closure"] < 1e-9
    assert out["diagnostics"]["verify_hull_contains_origin"]
    text = obj.read_text().splitlines()
    assert sum(ln.startswith("v ") for ln in text) == 5 and text[-1] == "l 1 2 3 4 5 1"
    code, out, _ = run(capsys, "realize3d", "--angles", "90,90,90,90", "--unit", "degrees")
    assert code == 0 and out["flags"]["planar"] and len(out["polygon"]) == 4


def test_realize_sphere_and_thrackle(capsys):
    code, out, _ = run(capsys, "realize-sphere", "--angles", "90,90,90", "--unit", "degrees")
    assert code == 0 and out["diagnostics"]["arc_round_trip"] < 1e-9
    code, out, _ = run(capsys, "thrackle-check", "--angles", "120,120,120,120,120,120", "--unit", "degrees")
    assert code == 0 and out["status"] == "verdict" and out["flags"]["forced_planar_thrackle"] is False


def test_render(capsys, tmp_path):
    svg = tmp_path / "sq.svg"
    assert main(["render", "--angles", "90,90,90,90", "--unit", "degrees", "--out", str(svg)]) == 0
    assert svg.read_text().count(" L ") == 3
    src = tmp_path / "star.json"
    src.write_text(json.dumps({"polygon": pentagram().tolist()}))
    out = tmp_path / "star.svg"
    assert main(["render", "--input", str(src), "--out", str(out)]) == 0
    assert out.read_text().count('class="crossing"') == 5
    obj = tmp_path / "p.obj"
    assert main(["render", "--angles", "2,2,2,2,2", "--dim", "3", "--out", str(obj)]) == 0
    lines = obj.read_text().splitlines()
    assert sum(ln.startswith("v ") for ln in lines) == 5 and lines[-1] == "l 1 2 3 4 5 1"
    capsys.readouterr()


@pytest.mark.parametrize("jobs", ["1", "2"])
def test_batch(capsys, tmp_path, jobs):
    f = tmp_path / "b.txt"
    f.write_text('90,90,90,90\n# comment\n{"angles": [90, -90, 90, -90]}\n\n144,144,144,144,144\n')
    code = main(["check2d", "--batch", str(f), "--unit", "degrees", "--jobs", jobs])
    rows = [json.loads(ln) for ln in capsys.readouterr().out.splitlines()]
    assert [r["status"] for r in rows] == ["consistent", "inconsistent", "consistent"]
    assert code == 1
    f.write_text("90,90,90,90\n1,nope\n")
    assert main(["check2d", "--batch", str(f), "--unit", "degrees", "--jobs", jobs]) == 2


def test_output_file(capsys, tmp_path):
    out = tmp_path / "o.json"
    assert main(["check2d", "--angles", "120,120,120", "--unit", "degrees", "--output", str(out)]) == 0
    assert json.loads(out.read_text())["crossing_number"] == 0
    assert capsys.readouterr().out == ""
