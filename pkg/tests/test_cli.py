import csv
import io
import json
import math

import numpy as np
import pytest

from dualcurve.cli import CSV_COLUMNS, SCHEMA, dumps, main, parse_grid
from dualcurve.measures import cylinder_dcm_subspace


@pytest.fixture
def files(tmp_path):
    def write(name, obj):
        p = tmp_path / name
        p.write_text(json.dumps(obj), encoding="utf-8")
        return str(p)

    return write


def run(capsys, argv):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def report(capsys, argv):
    code, out, err = run(capsys, argv)
    assert code == 0, err
    rep = json.loads(out)
    assert rep["schema"] == SCHEMA
    return rep


def test_measure_box(capsys, files):
    body = files("box.json", {"type": "box", "halfwidths": [1, 1, 1]})
    rep = report(capsys, ["measure", body, "--q", "3"])
    assert rep["results"][0]["value"] == pytest.approx(8.0, rel=1e-12)
    assert rep["config"]["engine"] == "facet-exact"


def test_measure_ball(capsys, files):
    body = files("ball.json", {"type": "ball", "n": 3, "r": 2})
    rep = report(capsys, ["measure", body, "--q", "5"])
    assert rep["results"][0]["value"] == pytest.approx(4 * math.pi / 3 * 32, rel=1e-12)


def test_measure_cylinder_subspace(capsys, files):
    body = files("cyl.json", {"type": "cylinder", "n": 3, "k": 1, "l": 10})
    L = files("L.json", {"basis": [[1, 0, 0]]})
    rep = report(capsys, ["measure", body, "--q", "4", "--eta", "subspace", L])
    assert rep["results"][0]["value"] == pytest.approx(cylinder_dcm_subspace(4.0, 3, 1, 10.0).value, rel=1e-12)


def test_measure_facets(capsys, files):
    body = files("box.json", {"type": "box", "halfwidths": [1, 1, 1]})
    rep = report(capsys, ["measure", body, "--q", "3", "--eta", "facets", "0,1"])
    assert rep["results"][0]["value"] == pytest.approx(8 / 3, rel=1e-12)


def test_ratio_examples(capsys, files):
    cube = files("cube.json", {"type": "box", "halfwidths": [1, 1, 1]})
    r = report(capsys, ["ratio", cube, "--axes", "1", "--q", "3"])["results"][0]
    assert r["ratio"] == pytest.approx(1 / 3) and r["bound"] == pytest.approx(1 / 3) and r["satisfied"]
    r = report(capsys, ["ratio", cube, "--axes", "1,2", "--q", "4"])["results"][0]
    assert r["ratio"] == pytest.approx(2 / 3) and r["bound"] == pytest.approx(0.75)
    cyl = files("cyl.json", {"type": "cylinder", "n": 3, "k": 1, "l": 100})
    r = report(capsys, ["ratio", cyl, "--axes", "1", "--q", "4"])["results"][0]
    assert r["ratio"] < 0.5 and r["margin"] > 0


def test_ratio_subspace_file(capsys, files):
    cube = files("cube.json", {"type": "box", "halfwidths": [1, 1, 1]})
    L = files("L.json", {"basis": [[1, 0, 0], [0, 1, 0]]})
    r = report(capsys, ["ratio", cube, "--subspace", L, "--q", "4"])["results"][0]
    assert r["ratio"] == pytest.approx(2 / 3)


@pytest.mark.parametrize(
    "argv",
    [
        ["measure"],
        ["frobnicate"],
        ["ratio", "{body}", "--q", "3"],
        ["ratio", "{body}", "--q", "3", "--axes", "4"],
        ["ratio", "{body}", "--q", "3", "--axes", "0"],
        ["measure", "{body}", "--q", "0"],
        ["measure", "{body}", "--q", "3", "--eta", "facets", "9"],
        ["measure", "{bad}", "--q", "3"],
        ["measure", "{missing}", "--q", "3"],
        ["verify", "--suite", "karamata", "--trials", "0"],
        ["sweep", "--family", "cylinder", "--q", "4", "--n", "3", "--k", "1", "--l-grid", "geomspace(0,1,3)"],
        ["sweep", "--family", "cylinder", "--q", "4", "--n", "3"],
    ],
)
def test_usage_errors_exit_2(capsys, files, tmp_path, argv):
    body = files("box.json", {"type": "box", "halfwidths": [1, 1, 1]})
    bad = files("bad.json", {"type": "box", "halfwidths": "wide"})
    argv = [a.format(body=body, bad=bad, missing=str(tmp_path / "nope.json")) for a in argv]
    code, _, err = run(capsys, argv)
    assert code == 2
    assert err


def test_bodyspec_error_names_field(capsys, files):
    bad = files("bad.json", {"type": "box", "halfwidths": [1, None]})
    code, _, err = run(capsys, ["measure", bad, "--q", "3"])
    assert code == 2 and "$.halfwidths[1]" in err


def test_engine_mismatch_exit_3(capsys, files):
    body = files("ball.json", {"type": "ball", "n": 3, "r": 1})
    code, _, err = run(capsys, ["measure", body, "--q", "3", "--eta", "facets", "0"])
    assert code == 3
    body = files("box.json", {"type": "box", "halfwidths": [1, 1, 1]})
    code, _, _ = run(capsys, ["measure", body, "--q", "0", "--engine", "body-mc"])
    assert code in (2, 3)


def test_verify_pass_and_jsonl(capsys, tmp_path):
    path = tmp_path / "r.jsonl"
    code, out, err = run(capsys, ["verify", "--suite", "karamata", "--trials", "50", "--report", str(path)])
    assert code == 0 and "PASS karamata" in err
    lines = path.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 50
    assert all(json.loads(line)["suite"] == "karamata" for line in lines)
    rep = json.loads(out)
    assert rep["results"][0]["passed"]


def test_verify_small_p(capsys):
    code, out, _ = run(capsys, ["verify", "--suite", "small-p"])
    assert code == 0
    res = json.loads(out)["results"][0]["summary"]
    assert res["example"]["details"]["ratio"] == pytest.approx(1.00405, abs=1e-5)


def test_verify_failure_exit_1(capsys, monkeypatch):
    import dualcurve.cli as cli
    from dualcurve.suites import SuiteResult

    monkeypatch.setattr(cli, "run_suite", lambda *a, **k: SuiteResult("karamata", False, {}, [{"trial": 3, "seed": 0}]))
    code, _, err = run(capsys, ["verify", "--suite", "karamata", "--trials", "5"])
    assert code == 1
    assert "FAIL karamata" in err and '"trial":3' in err.replace(" ", "")


def strip_time(text):
    rep = json.loads(text)
    rep.pop("wall_time")
    return rep


def test_determinism_modulo_wall_time(capsys, files):
    body = files("box.json", {"type": "box", "halfwidths": [1, 2, 1]})
    argv = ["measure", body, "--q", "2.5", "--engine", "body-mc", "--samples", "5000", "--seed", "9"]
    _, a, _ = run(capsys, argv)
    _, b, _ = run(capsys, argv)
    assert strip_time(a) == strip_time(b)
    text_a = a[: a.index('"wall_time"')]
    text_b = b[: b.index('"wall_time"')]
    assert text_a == text_b


def test_seed_from_environment(capsys, files, monkeypatch):
    body = files("box.json", {"type": "box", "halfwidths": [1, 2, 1]})
    argv = ["measure", body, "--q", "2.5", "--engine", "sphere-mc", "--samples", "5000"]
    monkeypatch.setenv("DUALCURVE_SEED", "41")
    env = strip_time(run(capsys, argv)[1])
    explicit = strip_time(run(capsys, argv + ["--seed", "41"])[1])
    assert env["config"]["seed"] == 41
    assert env["results"] == explicit["results"]
    monkeypatch.setenv("DUALCURVE_SEED", "x")
    assert run(capsys, argv)[0] == 2


def test_float_format():
    text = dumps({"a": 0.1, "b": [1 / 3, float("nan")], "c": 2})
    assert '"a": 0.10000000000000001' in text
    assert "0.33333333333333331" in text and "null" in text
    assert json.loads(text)["b"][0] == 1 / 3


def read_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    assert tuple(rows[0]) == CSV_COLUMNS
    return np.array(rows[1:], dtype=float)


def test_sweep_cylinder(capsys):
    code, out, _ = run(capsys, ["sweep", "--family", "cylinder", "--q", "4", "--n", "3", "--k", "1", "--l-grid", "geomspace(1,1000,13)"])
    assert code == 0
    T = read_csv(out)
    assert len(T) == 13
    assert np.all(np.diff(T[:, 3]) >= -1e-12)
    assert np.all(T[:, 3] < 0.5) and T[-1, 3] > 0.49
    assert T[0, 1] == pytest.approx(2.5529658767675, rel=1e-10)
    code, out, _ = run(capsys, ["sweep", "--family", "cylinder", "--q", "4", "--n", "3", "--k", "2"])
    T = read_csv(out)
    assert np.all(T[:, 3] < 0.75) and T[-1, 3] > 0.74


def test_sweep_tightness(capsys, tmp_path):
    out_path = tmp_path / "t.csv"
    code, _, _ = run(capsys, ["sweep", "--family", "tightness", "--p", "1", "--lam", "0.75", "--rho-grid", "10,100,1000", "--out", str(out_path)])
    assert code == 0
    T = read_csv(out_path.read_text(encoding="utf-8"))
    assert np.allclose(T[:, 3], 0.5, atol=2e-3)


def test_parse_grid():
    assert np.allclose(parse_grid("geomspace(1, 100, 3)"), [1, 10, 100])
    assert np.allclose(parse_grid("linspace(0,1,5)"), np.linspace(0, 1, 5))
    assert np.allclose(parse_grid("1,2.5"), [1, 2.5])
