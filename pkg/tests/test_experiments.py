import itertools
import json

import numpy as np
import pytest
import scipy.linalg
from conftest import rand_spd

from opgeo import experiments as ex
from opgeo.errors import BranchCut, ConfigInvalid, InvalidP, UnknownSuite
from opgeo.experiments import SuiteReport, TrialConfig, bound_constant, run_suite


def small(**kw):
    base = {"n": 3, "trials": 4, "seed": 11}
    base.update(kw)
    return TrialConfig(**base)


def test_config_validation():
    with pytest.raises(ConfigInvalid):
        TrialConfig(trials=0)
    with pytest.raises(ConfigInvalid):
        TrialConfig(n=65)
    with pytest.raises(ConfigInvalid):
        TrialConfig(group="lorentz")
    with pytest.raises(ConfigInvalid):
        TrialConfig(group="symplectic", n=3)
    with pytest.raises(ConfigInvalid):
        TrialConfig(tolerances={"bound_slack": 0.0})
    with pytest.raises(ConfigInvalid):
        TrialConfig.from_dict({"colour": "blue"})
    cfg = TrialConfig.from_dict({"p_norm": "inf", "n": 2})
    assert np.isinf(cfg.p_norm)
    assert TrialConfig.from_dict(cfg.to_dict()) == cfg


def test_bound_constant_examples(rng):
    assert bound_constant(np.eye(3), np.eye(3)) == pytest.approx(np.sqrt(2), abs=1e-14)
    for n in (1, 2, 5):
        c = bound_constant(np.eye(n), np.e * np.eye(n))
        assert c == pytest.approx(np.sqrt(2) * np.e**2, rel=1e-13)
    q = rand_spd(rng, 4)
    cs = [bound_constant(np.eye(4), scipy.linalg.fractional_matrix_power(q, s))
          for s in (1.0, 1.5, 2.0, 3.0)]
    assert all(b >= a for a, b in itertools.pairwise(cs))


def test_bound_constant_matches_formula(rng):
    p = rng.standard_normal((4, 4)) + 3 * np.eye(4)
    q = rng.standard_normal((4, 4)) + 3 * np.eye(4)
    ap = scipy.linalg.sqrtm(p.T @ p)
    aq = scipy.linalg.sqrtm(q.T @ q)
    isq = np.linalg.inv(scipy.linalg.sqrtm(ap))
    lnv = np.linalg.norm(scipy.linalg.logm(isq @ aq @ isq), 2)
    k = np.linalg.norm(p, 2) * np.linalg.norm(np.linalg.inv(p), 2)
    want = np.sqrt(2 * max(np.exp(4 * lnv) * k**2, k))
    assert bound_constant(p, q) == pytest.approx(want, rel=1e-10)


def test_bound_suite():
    rep = run_suite("bound", small(group="full_gl", n=4, trials=20, seed=7))
    assert rep.passed and rep.summary["min_margin"] > 0
    fixed = [r for r in rep.trials if r["kind"] == "fixed"]
    assert fixed[0]["left_length"] == 0.0 and fixed[0]["c"] == pytest.approx(np.sqrt(2))


@pytest.mark.parametrize("manifold", ["unitary", "spd", "polar"])
def test_minimality_suite(manifold):
    rep = ex.verify_minimality(small(trials=3, perturbations=6), manifold)
    assert rep.passed
    assert all(r["pass"] for r in rep.trials if r["kind"] == "fixed")
    chord = [r for r in rep.trials if r.get("case") == "straight chord"]
    if manifold == "spd":
        assert chord and chord[0]["excess"] > 1e-3


def test_minimality_rejects_missing_factor():
    with pytest.raises(ConfigInvalid):
        ex.verify_minimality(small(group="unitary"), "spd")
    rep = run_suite("minimality", small(group="unitary", trials=2, perturbations=3))
    assert rep.summary["skipped_manifolds"] == ["spd"]


def test_minkowski_suite():
    rep = run_suite("minkowski", small(trials=10))
    assert rep.passed
    fixed = [r for r in rep.trials if r["kind"] == "fixed"]
    assert len(fixed) == 2 and all(r["pass"] for r in fixed)
    assert rep.summary["max_isometry_gap"] < 1e-10


def test_normal_suite_and_control():
    rep = run_suite("normal", small(n=6, trials=10))
    assert rep.passed and rep.summary["max_gap"] < 1e-10
    assert rep.summary["control_separated"] >= 9
    for r in rep.trials:
        if r["kind"] == "random":
            assert r["normality"] < 1e-12


def test_normal_elements_in_subgroups():
    for kind in ("symplectic", "orthogonal"):
        cfg = small(group=kind, n=4)
        ctx = cfg.context()
        v = ex.random_normal_element(ctx, np.random.default_rng(1), 0.7)
        assert np.linalg.norm(v @ v.conj().T - v.conj().T @ v) < 1e-12
        assert run_suite("normal", cfg).passed


@pytest.mark.parametrize("p", [2, 4, 8, np.inf])
def test_pnorm_suite(p):
    rep = ex.verify_pnorm_equivalence(small(n=8, trials=20), p)
    assert rep.passed
    fixed = [r for r in rep.trials if r["kind"] == "fixed"]
    assert fixed[0]["ratio"] == pytest.approx(8 ** (0.5 - (0 if np.isinf(p) else 1 / p)))
    assert fixed[1]["ratio"] == pytest.approx(1.0)
    with pytest.raises(InvalidP):
        ex.verify_pnorm_equivalence(small(), 1.5)


def test_convergence_suite():
    rep = run_suite("convergence", small(n=4, trials=20, spread=0.3))
    assert rep.passed and rep.summary["cap_violations"] == 0
    for r in rep.trials:
        if r["kind"] == "random":
            est = r["estimates"]
            assert est[-1] < 1e-3 and est[-1] < est[0]


def test_approach_hits_target_gaps(rng):
    ctx = small(n=4).context()
    x = ex.random_group_element(ctx.spec, rng, 0.5)
    w = ex.random_algebra_element(ctx.spec, rng, 1.0)
    for k in (1, 6, 12):
        y = ex._approach(x, w, 2.0**-k)
        assert np.linalg.norm(y.g - x.g) == pytest.approx(2.0**-k, rel=1e-10)


@pytest.mark.parametrize("suite", ["closed_form", "residuals", "tangency", "cartan"])
@pytest.mark.parametrize("group", ["full_gl", "symplectic", "unitary"])
def test_structural_suites(suite, group):
    rep = run_suite(suite, small(group=group, n=4, trials=5))
    assert rep.passed, rep.summary


def test_unknown_suite():
    with pytest.raises(UnknownSuite):
        run_suite("nope", small())


def test_determinism_and_threads(monkeypatch):
    a = run_suite("bound", small(trials=6))
    b = run_suite("bound", small(trials=6))
    assert a.digest() == b.digest()
    c = run_suite("bound", small(trials=6, threads=3))
    assert c.digest() == a.digest()
    monkeypatch.setenv("OPGEO_THREADS", "1")
    assert ex._threads(small(threads=4)) == 1
    d = run_suite("bound", small(trials=6, seed=12))
    assert d.digest() != a.digest()


def test_branch_cut_resampling(monkeypatch):
    calls = {"n": 0}
    real = ex._bound_record

    def flaky(p, q, cfg):
        calls["n"] += 1
        if calls["n"] == 4:  # two fixed trials come first
            raise BranchCut("forced")
        return real(p, q, cfg)

    monkeypatch.setattr(ex, "_bound_record", flaky)
    rep = run_suite("bound", small(trials=200, seed=3))
    assert rep.summary["resamples"] == 1 and rep.passed
    calls["n"] = 0
    rep = run_suite("bound", small(trials=20, seed=3))
    # one resample in 21 draws exceeds the 1% budget
    assert rep.summary["resamples"] == 1 and not rep.summary["resample_ok"] and not rep.passed


def test_report_serialisation(tmp_path):
    rep = run_suite("minkowski", small(trials=3))
    d = json.loads(rep.to_json())
    assert set(d) == {"suite", "config", "trials", "pass", "summary", "runtime_ms"}
    assert d["pass"] is True and len(d["trials"]) == len(rep.trials)
    csv_text = rep.to_csv().splitlines()
    assert len(csv_text) == len(rep.trials) + 1 and csv_text[0].startswith("index,kind")
    again = SuiteReport(**{**rep.__dict__, "runtime_ms": 0.0})
    assert again.digest() == rep.digest()
