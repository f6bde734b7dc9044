import json

import numpy as np
import pytest

from emmetric.cli import EXIT_FAIL, EXIT_INPUT, EXIT_OK, fit_grid, main
from emmetric.paths import MatrixPath

ROTATING = {"n": 2, "V": "0.5*(x1^2 + x2^2)", "A": ["x2", "-x1"]}


def _write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
    return str(p)


def _scenario(tmp_path, g, **extra):
    return _write(tmp_path, "s.json", {"schema_version": 1, "system": ROTATING,
                                       "candidate": {"g": g}, **extra})


def test_verify_pass_and_fail(tmp_path, capsys):
    ok = _scenario(tmp_path, [["1", "0"], ["0", "1"]])
    assert main(["verify", "--scenario", ok]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["pass"] and report["version"]
    bad = _scenario(tmp_path, [["1", "0"], ["0", "2"]])
    out = tmp_path / "r.json"
    assert main(["verify", "--scenario", bad, "--out", str(out)]) == EXIT_FAIL
    assert json.loads(out.read_text())["pass"] is False


def test_verify_overrides_recorded(tmp_path):
    s = _scenario(tmp_path, [["1", "0"], ["0", "1"]])
    out = tmp_path / "r.json"
    main(["verify", "--scenario", s, "--out", str(out), "--seed", "3", "--samples", "7",
          "--tol", "1e-9", "--t1", "0.5", "--h", "0.05"])
    rep = json.loads(out.read_text())
    assert rep["seed"] == 3 and rep["samples"] == 7 and rep["tolerance"] == 1e-9
    assert rep["grid"] == {"t0": 0.0, "t1": 0.5, "points": 11}


def test_reports_are_deterministic(tmp_path):
    s = _scenario(tmp_path, [["1", "0"], ["0", "1"]])
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["verify", "--scenario", s, "--out", str(a)])
    main(["verify", "--scenario", s, "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize("content", [
    "not json",
    {"schema_version": 2},
    {"schema_version": 1, "system": {"n": 2, "V": "x3", "A": ["0", "0"]}},
    {"schema_version": 1, "system": {"n": 2, "V": "x1 +", "A": ["0", "0"]}},
    {"schema_version": 1, "system": ROTATING, "candidate": {"g": [["1"]]}},
    {"schema_version": 1, "system": ROTATING, "candidate": {"g": [["1", "0"], ["0", "1"]]},
     "window": {"t0": 1.0, "t1": 0.0}},
])
def test_bad_input_exit_code(tmp_path, content, capsys):
    s = _write(tmp_path, "s.json", content)
    assert main(["verify", "--scenario", s]) == EXIT_INPUT
    assert capsys.readouterr().err.startswith("error:")


def test_missing_file(tmp_path):
    assert main(["verify", "--scenario", str(tmp_path / "none.json")]) == EXIT_INPUT


def test_lax_csv_and_summary(tmp_path, capsys):
    s = _scenario(tmp_path, [["1", "0.5"], ["0.5", "2"]], window={"t0": 0, "t1": 1, "h": 0.01})
    assert main(["lax", "--scenario", s]) == EXIT_OK
    cap = capsys.readouterr()
    lines = cap.out.splitlines()
    assert lines[0] == "t,m11,m12,m21,m22" and len(lines) == 102
    summary = json.loads(cap.err)
    assert summary["eigen_drift"] < 1e-9 and summary["crossings"] == []
    out = tmp_path / "g.csv"
    assert main(["lax", "--scenario", s, "--out", str(out)]) == EXIT_OK
    path = MatrixPath.from_csv(out.read_text())
    assert np.linalg.eigvalsh(path.values[-1]) == pytest.approx(np.linalg.eigvalsh([[1, 0.5], [0.5, 2]]))


def test_lax_from_explicit_inputs(tmp_path, capsys):
    s = _write(tmp_path, "s.json", {"schema_version": 1,
                                    "lax": {"gamma": [["0", "t"], ["-t", "0"]], "g0": [[2, 0], [0, 1]]}})
    assert main(["lax", "--scenario", s, "--h", "0.1"]) == EXIT_OK
    assert len(capsys.readouterr().out.splitlines()) == 12


def test_construct_then_verify_and_decouple(tmp_path):
    spec = {"schema_version": 1,
            "construct": {"mode": "compose",
                          "subsystems": [{"n": 1, "V": "0.5*x1^2", "A": ["0"]},
                                         {"n": 1, "V": "x1^4", "A": ["0"]}],
                          "lambdas": [1.0, 3.0],
                          "P": [["cos(t)", "-sin(t)"], ["sin(t)", "cos(t)"]]}}
    s = _write(tmp_path, "c.json", spec)
    built = tmp_path / "built.json"
    assert main(["construct", "--scenario", s, "--out", str(built)]) == EXIT_OK
    assert main(["verify", "--scenario", str(built), "--out", str(tmp_path / "r.json")]) == EXIT_OK
    dec, pcsv = tmp_path / "d.json", tmp_path / "P.csv"
    assert main(["decouple", "--scenario", str(built), "--out", str(dec), "--csv", str(pcsv)]) == EXIT_OK
    report = json.loads(dec.read_text())
    assert report["blocks"] == [[1], [2]] and report["residual"] < 1e-5
    assert MatrixPath.from_csv(pcsv.read_text()).orthogonality_error() < 1e-12


def test_construct_time_only(tmp_path):
    spec = {"schema_version": 1,
            "construct": {"mode": "prop3", "W": "x1^2 + 2*x2^2", "S": [[1, 0], [0, 2]],
                          "U": [["cos(t^2)", "-sin(t^2)"], ["sin(t^2)", "cos(t^2)"]]}}
    built = tmp_path / "built.json"
    assert main(["construct", "--scenario", _write(tmp_path, "c.json", spec), "--out", str(built)]) == EXIT_OK
    assert main(["verify", "--scenario", str(built), "--out", str(tmp_path / "r.json")]) == EXIT_OK


def test_construct_unknown_mode(tmp_path):
    s = _write(tmp_path, "c.json", {"schema_version": 1, "construct": {"mode": "other"}})
    assert main(["construct", "--scenario", s]) == EXIT_INPUT


@pytest.mark.parametrize("name, code", [("n2", EXIT_OK), ("sec5", EXIT_OK), ("n3", EXIT_FAIL)])
def test_demos(name, code, tmp_path):
    out = tmp_path / "demo.json"
    assert main(["demo", name, "--out", str(out), "--samples", "8"]) == code
    report = json.loads(out.read_text())
    assert report["demo"] == name and report["pass"] is (code == EXIT_OK)


def test_fit_grid():
    assert fit_grid(0.0, 0.7, 0.01) == pytest.approx((0.0, 0.7, 0.01))
    t0, t1, h = fit_grid(0.0, 0.738, 0.01)
    assert round((t1 - t0) / h) == 74
