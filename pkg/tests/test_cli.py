import json
import re

import numpy as np
import pytest

from opgeo.cli import main
from opgeo.fileio import matrix_from_dict, spec_to_dict, write_matrix
from opgeo.subgroups import LieAlgebraSpec


@pytest.fixture
def mats(tmp_path):
    paths = {}
    for name, a in {
        "eye": np.eye(2),
        "d49": np.diag([4.0, 9.0]),
        "sing": np.array([[1.0, 2.0], [2.0, 4.0]]),
        "g": np.array([[2.0, 1.0], [0.5, 3.0]]),
        "h": np.array([[1.0, -1.0], [0.3, 2.0]]),
        "neg": -np.eye(2),
    }.items():
        paths[name] = str(tmp_path / f"{name}.json")
        write_matrix(paths[name], a)
    return paths


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_distance_positive(capsys, mats):
    code, out, _ = run(capsys, "distance", "positive", mats["eye"], mats["d49"])
    assert code == 0
    rec = json.loads(out)
    assert rec["value"] == pytest.approx(np.hypot(np.log(4), np.log(9)), rel=1e-12)


def test_distance_polar_same_point(capsys, mats):
    code, out, _ = run(capsys, "distance", "polar", mats["g"], mats["g"])
    assert code == 0 and abs(json.loads(out)["value"]) < 1e-12


def test_distance_left_is_labelled_bound(capsys, mats):
    code, out, _ = run(capsys, "distance", "left", mats["g"], mats["h"])
    rec = json.loads(out)
    assert code == 0 and rec["label"] == "upper bound"
    assert rec["value"] <= rec["c_times_polar_distance"] + 1e-9


def test_json_has_17_digits(capsys, mats):
    _, out, _ = run(capsys, "distance", "positive", mats["eye"], mats["d49"])
    num = re.search(r'"value": (\S+)', out).group(1)
    mantissa = num.split("e")[0].replace(".", "").lstrip("-")
    assert len(mantissa) == 17


def test_geodesic_points(capsys, mats):
    code, out, _ = run(capsys, "geodesic", "spd", mats["eye"], mats["d49"], "--t", "0.5")
    assert code == 0
    assert np.allclose(matrix_from_dict(json.loads(out)), np.diag([2.0, 3.0]), atol=1e-12)
    _, out, _ = run(capsys, "geodesic", "polar", mats["g"], mats["h"], "--t", "0")
    assert np.allclose(matrix_from_dict(json.loads(out)), [[2, 1], [0.5, 3]], atol=1e-12)


def test_geodesic_samples(capsys, mats):
    code, out, _ = run(capsys, "geodesic", "polar", mats["g"], mats["h"], "--samples", "8")
    pts = json.loads(out)
    assert code == 0 and len(pts) == 9
    assert np.abs(matrix_from_dict(pts[0]) - [[2, 1], [0.5, 3]]).max() < 1e-10
    assert np.abs(matrix_from_dict(pts[-1]) - [[1, -1], [0.3, 2]]).max() < 1e-10
    _, out, _ = run(capsys, "geodesic", "polar", mats["g"], mats["h"], "--samples", "4",
                    "--format", "csv")
    assert len(out.strip().splitlines()) == 6


def test_math_errors_exit_3(capsys, mats):
    code, out, err = run(capsys, "distance", "polar", mats["sing"], mats["eye"])
    assert code == 3 and out == "" and err.startswith("Singular")
    code, _, err = run(capsys, "distance", "polar", mats["eye"], mats["neg"])
    assert code == 3 and err.startswith("BranchCut")


def test_usage_errors_exit_2(capsys, mats, tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "no_such_suite"])
    assert exc.value.code == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, _ = run(capsys, "distance", "positive", str(bad), mats["eye"])
    assert code == 2
    code, _, _ = run(capsys, "geodesic", "spd", mats["eye"])
    assert code == 2


def test_csv_matrix_input(capsys, mats, tmp_path):
    f = tmp_path / "d.csv"
    f.write_text("re11,im11,re12,im12\n4,0,0,0\n0,0,9,0\n")
    code, out, _ = run(capsys, "distance", "positive", mats["eye"], str(f))
    assert code == 0
    assert json.loads(out)["value"] == pytest.approx(np.hypot(np.log(4), np.log(9)))


def test_norm_and_polar(capsys, mats):
    code, out, _ = run(capsys, "norm", mats["d49"], "--p", "inf")
    assert code == 0 and json.loads(out)["value"] == pytest.approx(9.0)
    code, out, _ = run(capsys, "polar", mats["g"])
    rec = json.loads(out)
    u, a = matrix_from_dict(rec["u"]), matrix_from_dict(rec["abs"])
    assert np.allclose(u @ a, [[2, 1], [0.5, 3]], atol=1e-12)


def test_verify_minimality(capsys):
    argv = ["verify", "minimality", "--group", "full_gl", "--dim", "4", "--trials", "50",
            "--seed", "1", "--format", "pretty"]
    code, out, _ = run(capsys, *argv)
    assert code == 0 and out.startswith("minimality: PASS")


def test_verify_digest_and_sources(capsys, monkeypatch, tmp_path):
    base = ["verify", "bound", "--dim", "3", "--trials", "5"]
    _, a, _ = run(capsys, *base, "--seed", "4")
    _, b, _ = run(capsys, *base, "--seed", "4")
    ra, rb = json.loads(a), json.loads(b)
    assert ra["trials"] == rb["trials"]
    monkeypatch.setenv("OPGEO_SEED", "4")
    _, c, _ = run(capsys, *base)
    assert json.loads(c)["config"]["seed"] == 4
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 9, "spread": 0.4, "n": 2}))
    _, d, _ = run(capsys, *base, "--config", str(cfg))
    rd = json.loads(d)["config"]
    assert rd["seed"] == 9 and rd["spread"] == 0.4 and rd["n"] == 3
    cfg.write_text(json.dumps({"colour": "red"}))
    code, _, _ = run(capsys, *base, "--config", str(cfg))
    assert code == 2


def test_verify_out_file(capsys, tmp_path):
    out = tmp_path / "rep.csv"
    code, stdout, err = run(capsys, "verify", "minkowski", "--dim", "2", "--trials", "3",
                            "--format", "csv", "--out", str(out))
    assert code == 0 and stdout == "" and "pass" in err
    assert out.read_text().startswith("index,kind")


@pytest.mark.parametrize("kind,dim,dims", [("unitary", 3, (9, 0)), ("symplectic", 4, (4, 6)),
                                           ("full_gl", 2, (4, 4))])
def test_algebra_builtin(capsys, kind, dim, dims):
    code, out, _ = run(capsys, "algebra", "--kind", kind, "--dim", str(dim))
    rec = json.loads(out)
    assert code == 0 and rec["pass"] and (rec["k_dim"], rec["m_dim"]) == dims


def test_algebra_not_star_closed(capsys, tmp_path):
    e12 = np.zeros((2, 2))
    e12[0, 1] = 1.0
    spec = LieAlgebraSpec("upper", 2, np.array([e12]))
    f = tmp_path / "spec.json"
    f.write_text(json.dumps(spec_to_dict(spec)))
    code, out, _ = run(capsys, "algebra", "--spec-file", str(f))
    rec = json.loads(out)
    assert code == 1 and not rec["pass"]
    assert rec["validation_adjoint_residual"] == pytest.approx(1.0, abs=1e-12)
