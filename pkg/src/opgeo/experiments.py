"""Seeded verification suites.

Each suite draws ``cfg.trials`` random instances, checks one geometric claim
per instance and returns a :class:`SuiteReport`. Trial ``i`` draws from its
own generator ``default_rng([seed, i])`` (``[seed, i, attempt]`` after a
branch-cut resample), so reports do not depend on execution order or on the
number of worker threads.

A few closed-form cases are prepended to every suite as fixed trials.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import time
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np
import scipy.linalg
import scipy.optimize

from . import curves as cv
from . import matfun as mf
from .errors import BranchCut, ConfigInvalid, InvalidP, UnknownSuite
from .manifolds import (
    LEFT,
    POLAR,
    POSITIVE,
    GroupPoint,
    as_group_point,
    exp_anti_hermitian,
    exp_hermitian,
    polar_dist,
    polar_parameters,
    spd_dist,
    spd_geodesic,
    unitary_dist,
)
from .subgroups import (
    BUILTIN_KINDS,
    LieAlgebraSpec,
    SubgroupContext,
    conjugation_residual,
    isometric_action,
    polar_closure_residuals,
    random_algebra_element,
    random_group_element,
    transitivity_witness,
    triple_system_check,
    validate_algebra,
)

MAX_RESAMPLE_FRACTION = 0.01
MINIMALITY_AMPLITUDES = (0.05, 0.2, 0.5)
MANIFOLDS = ("unitary", "spd", "polar")

DEFAULT_TOLERANCES = {
    "bound_slack": 1e-9,
    "quadrature_slack": 1e-4,
    "strict_gap": 1e-3,
    "zero_amplitude": 1e-8,
    "minkowski_slack": 1e-8,
    "isometry": 1e-8,
    "normal_gap": 1e-10,
    "control_gap": 1e-6,
    "pnorm_slack": 1e-12,
    "convergence_target": 1e-3,
    "monotone_factor": 2.0,
    "closed_form_rel": 1e-6,
    "residual": 1e-5,
    "residual_length": 2.0,
    "ratio_lo": 3.5,
    "ratio_hi": 4.5,
    "tangency": 1e-6,
    "triple": 1e-10,
    "closure": 1e-8,
    "conjugation": 1e-10,
    "action": 1e-10,
}


@dataclass
class TrialConfig:
    """Parameters shared by all suites."""

    group: str = "full_gl"
    n: int = 4
    trials: int = 100
    seed: int = 0
    spread: float = 0.8
    tolerances: dict[str, float] = field(default_factory=dict)
    panels: int = 256
    h: float = 1e-3
    perturbations: int = 10
    p_norm: float = 4.0
    manifolds: tuple[str, ...] = MANIFOLDS
    threads: int = 1

    def __post_init__(self):
        self.manifolds = tuple(self.manifolds)
        self.validate()

    def validate(self) -> None:
        if self.group not in BUILTIN_KINDS:
            raise ConfigInvalid(f"unknown group {self.group!r}")
        if not 1 <= self.n <= 64:
            raise ConfigInvalid("n must lie in [1, 64]")
        if self.group == "symplectic" and self.n % 2:
            raise ConfigInvalid("symplectic group needs even n")
        if self.trials < 1:
            raise ConfigInvalid("trials must be >= 1")
        if not self.spread > 0:
            raise ConfigInvalid("spread must be positive")
        if self.panels < 2 or self.panels % 2:
            raise ConfigInvalid("panels must be a positive even number")
        if not self.h > 0 or self.perturbations < 1 or self.threads < 1:
            raise ConfigInvalid("h, perturbations and threads must be positive")
        bad = {k: v for k, v in self.tolerances.items() if not v > 0}
        if bad:
            raise ConfigInvalid(f"tolerances must be positive: {bad}")
        unknown = set(self.manifolds) - set(MANIFOLDS)
        if unknown:
            raise ConfigInvalid(f"unknown manifolds {sorted(unknown)}")

    def tol(self, name: str) -> float:
        return self.tolerances.get(name, DEFAULT_TOLERANCES[name])

    def context(self) -> SubgroupContext:
        return SubgroupContext.builtin(self.group, self.n)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["manifolds"] = list(self.manifolds)
        d.pop("threads")
        if np.isinf(d["p_norm"]):
            d["p_norm"] = "inf"
        return d

    @classmethod
    def from_dict(cls, d: dict) -> TrialConfig:
        d = dict(d)
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigInvalid(f"unknown config keys {sorted(unknown)}")
        if d.get("p_norm") in ("inf", "infinity"):
            d["p_norm"] = float("inf")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigInvalid(str(exc)) from exc


@dataclass
class SuiteReport:
    suite: str
    config: dict
    trials: list[dict]
    passed: bool
    summary: dict
    runtime_ms: float = 0.0

    def digest(self) -> str:
        """SHA-256 of the per-trial records (runtime excluded)."""
        blob = json.dumps(self.trials, sort_keys=True, default=_jsonable)
        return hashlib.sha256(blob.encode()).hexdigest()

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "config": self.config,
            "trials": self.trials,
            "pass": self.passed,
            "summary": self.summary,
            "runtime_ms": self.runtime_ms,
        }

    def to_json(self, indent: int | None = 2) -> str:
        """JSON with 17 significant digits per float."""
        from .fileio import dumps

        return dumps(self.to_dict(), indent=indent)

    def to_csv(self) -> str:
        """One row per trial; nested values are JSON-encoded."""
        keys: list[str] = []
        for rec in self.trials:
            keys += [k for k in rec if k not in keys]
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
        writer.writeheader()
        for rec in self.trials:
            writer.writerow(
                {k: json.dumps(v, default=_jsonable) if isinstance(v, (dict, list)) else v
                 for k, v in rec.items()}
            )
        return buf.getvalue()


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not JSON serialisable: {type(x)}")


def inputs_digest(*mats) -> str:
    h = hashlib.sha256()
    for m in mats:
        m = m.g if isinstance(m, GroupPoint) else np.asarray(m, dtype=complex)
        h.update(np.ascontiguousarray(m).tobytes())
    return h.hexdigest()[:16]


def _f(x) -> float:
    return float(x)


# -- harness -----------------------------------------------------------------


def _threads(cfg: TrialConfig) -> int:
    env = os.environ.get("OPGEO_THREADS")
    if env:
        try:
            return max(1, min(cfg.threads, int(env)))
        except ValueError:
            raise ConfigInvalid("OPGEO_THREADS must be an integer") from None
    return cfg.threads


def _run_trials(cfg: TrialConfig, trial: Callable[[np.random.Generator, int], dict]):
    """Run ``trial`` for every index, resampling on BranchCut."""

    def one(i: int) -> dict:
        for attempt in range(20):
            key = [cfg.seed, i] if attempt == 0 else [cfg.seed, i, attempt]
            try:
                rec = trial(np.random.default_rng(key), i)
            except BranchCut:
                continue
            rec = {"index": i, "kind": "random", "resamples": attempt, **rec}
            return rec
        raise ConfigInvalid(f"trial {i}: 20 consecutive branch-cut draws")

    threads = _threads(cfg)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(one, range(cfg.trials)))
    return [one(i) for i in range(cfg.trials)]


def _finish(name: str, cfg: TrialConfig, fixed: list[dict], records: list[dict],
            started: float, extra: dict | None = None) -> SuiteReport:
    fixed = [{"index": f"fixed-{j}", "kind": "fixed", **r} for j, r in enumerate(fixed)]
    trials = fixed + records
    resamples = sum(r.get("resamples", 0) for r in records)
    draws = len(records) + resamples
    resample_ok = resamples <= MAX_RESAMPLE_FRACTION * max(draws, 1)
    failures = [r["index"] for r in trials if not r["pass"]]
    summary = {
        "trials": len(trials),
        "failures": len(failures),
        "failed_indices": failures[:20],
        "resamples": resamples,
        "resample_ok": resample_ok,
    }
    summary.update(extra or {})
    return SuiteReport(
        suite=name,
        config=cfg.to_dict(),
        trials=trials,
        passed=not failures and resample_ok,
        summary=summary,
        runtime_ms=round((time.perf_counter() - started) * 1000, 3),
    )


def _agg(records, key, fn=max):
    vals = [r[key] for r in records if r.get(key) is not None]
    return fn(vals) if vals else None


def _sample_pair(ctx: SubgroupContext, rng, spread) -> tuple[GroupPoint, GroupPoint]:
    p = random_group_element(ctx.spec, rng, spread)
    q = random_group_element(ctx.spec, rng, spread)
    polar_parameters(p, q)  # BranchCut -> resample
    return p, q


def _sub_spec(name: str, n: int, basis: np.ndarray) -> LieAlgebraSpec | None:
    return LieAlgebraSpec(name, n, basis) if basis.shape[0] else None


# -- distance-comparison bound -----------------------------------------------


def bound_constant(p, q) -> float:
    """Constant ``c(p, q)`` of the bound ``d_left(p, q) <= c(p, q) d_polar(p, q)``.

    ``c^2 = 2 max(e^{4||ln v||} (||p|| ||p^{-1}||)^2, ||p|| ||p^{-1}||)`` with
    ``v = |p|^{-1/2} |q| |p|^{-1/2}`` and operator norms throughout.
    """
    p = as_group_point(p)
    q = as_group_point(q)
    s = np.linalg.svd(p.g, compute_uv=False)
    if s[-1] <= mf.SINGULAR_RTOL * s[0]:
        raise mf.Singular("p is numerically singular")
    kappa = s[0] / s[-1]
    _, isq = mf.spd_sqrt_pair(p.abs_g)
    w = np.linalg.eigvalsh(mf.hermitian_part(isq @ q.abs_g @ isq))
    lnv = float(np.max(np.abs(np.log(w))))
    return float(np.sqrt(2 * max(np.exp(4 * lnv) * kappa**2, kappa)))


def convergence_cap(x) -> float:
    """Uniform bound ``sqrt(2 max(e^4 k^2, k))``, ``k = ||x|| ||x^{-1}||``."""
    s = np.linalg.svd(as_group_point(x).g, compute_uv=False)
    kappa = s[0] / s[-1]
    return float(np.sqrt(2 * max(np.exp(4) * kappa**2, kappa)))


def _bound_record(p: GroupPoint, q: GroupPoint, cfg: TrialConfig) -> dict:
    slack = cfg.tol("bound_slack")
    c = bound_constant(p, q)
    c_rev = bound_constant(q, p)
    d = polar_dist(p, q)
    curve = replace(cv.polar_geodesic_curve(p, q), panels=cfg.panels)
    length = cv.curve_length(curve, LEFT)
    speeds = cv.speed(curve, LEFT, np.linspace(0.0, 1.0, 33))
    rhs = c * d
    ok = length <= rhs + slack and bool(np.all(speeds <= rhs + slack))
    return {
        "inputs": inputs_digest(p, q),
        "c": c,
        "c_reversed": c_rev,
        "c_symmetrized": min(c, c_rev),
        "polar_dist": d,
        "left_length": length,
        "max_speed": _f(np.max(speeds)),
        "bound": rhs,
        "margin": (rhs - length) / d if d > 0 else 0.0,
        "pass": ok,
    }


def verify_bound(cfg: TrialConfig) -> SuiteReport:
    """Check ``L_left(α_pq) <= c(p,q) d_polar(p,q)`` and the pointwise speed bound."""
    t0 = time.perf_counter()
    ctx = cfg.context()
    n = cfg.n
    eye = GroupPoint.from_matrix(np.eye(n))
    fixed = [_bound_record(eye, eye, cfg)]
    fixed[0]["pass"] = fixed[0]["pass"] and abs(fixed[0]["c"] - np.sqrt(2)) < 1e-12
    if cfg.group == "full_gl":
        e = GroupPoint.from_matrix(np.e * np.eye(n))
        rec = _bound_record(eye, e, cfg)
        rec["pass"] = rec["pass"] and abs(rec["c"] - np.sqrt(2) * np.e**2) < 1e-9
        fixed.append(rec)

    def trial(rng, i):
        p, q = _sample_pair(ctx, rng, cfg.spread)
        return _bound_record(p, q, cfg)

    recs = _run_trials(cfg, trial)
    return _finish("bound", cfg, fixed, recs, t0, {
        "min_margin": _agg(recs, "margin", min),
        "max_c": _agg(recs, "c"),
    })


# -- minimality --------------------------------------------------------------


def _minimality_setup(manifold, ctx, rng, spread):
    """Closed-form geodesic, its distance, metric, perturbation mode and algebra."""
    n = ctx.spec.dim
    if manifold == "polar":
        p, q = _sample_pair(ctx, rng, spread)
        return cv.polar_geodesic_curve(p, q), polar_dist(p, q), POLAR, "polar", ctx.spec, (p, q)
    if manifold == "unitary":
        p, q = _sample_pair(ctx, rng, spread)
        k = _sub_spec("k", n, ctx.split.k_basis)
        return (cv.unitary_geodesic_curve(p.u, q.u), unitary_dist(p.u, q.u), LEFT,
                "group", k, (p.u, q.u))
    p, q = _sample_pair(ctx, rng, spread)
    m = _sub_spec("m", n, ctx.split.m_basis)
    return (cv.spd_geodesic_curve(p.abs_g, q.abs_g), spd_dist(p.abs_g, q.abs_g), POSITIVE,
            "spd", m, (p.abs_g, q.abs_g))


def _minimality_record(manifold, cfg, ctx, rng) -> dict:
    base, d, metric, mode, algebra, pts = _minimality_setup(manifold, ctx, rng, cfg.spread)
    base = replace(base, panels=cfg.panels)
    slack = cfg.tol("quadrature_slack")
    gap_needed = cfg.tol("strict_gap")
    base_len = cv.curve_length(base, metric)
    ok = abs(base_len - d) <= cfg.tol("zero_amplitude") * max(1.0, d)
    competitors = []
    for j in range(cfg.perturbations):
        amp = MINIMALITY_AMPLITUDES[j % len(MINIMALITY_AMPLITUDES)]
        curve = cv.perturb_curve(base, rng, amp, mode, algebra)
        excess = cv.curve_length(curve, metric) - d
        good = excess >= -slack
        if amp >= 0.1:
            good = good and excess > 0
        if amp >= 0.5:
            good = good and excess >= gap_needed
        ok = ok and good
        competitors.append({"amplitude": amp, "excess": excess, "pass": good})
    excess = [c["excess"] for c in competitors]
    big = [c["excess"] for c in competitors if c["amplitude"] >= 0.5]
    return {
        "manifold": manifold,
        "inputs": inputs_digest(*pts),
        "distance": d,
        "geodesic_length": base_len,
        "min_excess": min(excess),
        "min_excess_at_0.5": min(big) if big else None,
        "competitors": competitors,
        "pass": bool(ok),
    }


def _minimality_fixed(manifold, cfg, ctx) -> list[dict]:
    rng = np.random.default_rng([cfg.seed, 2**31])
    out = []
    base, d, metric, mode, algebra, _ = _minimality_setup(manifold, ctx, rng, cfg.spread)
    same = cv.perturb_curve(base, rng, 0.0, mode, algebra)
    length = cv.curve_length(same, metric)
    out.append({
        "manifold": manifold,
        "case": "amplitude 0 competitor",
        "excess": length - d,
        "pass": abs(length - d) <= cfg.tol("zero_amplitude") * max(1.0, d),
    })
    if manifold == "spd" and cfg.group == "full_gl":
        p = np.diag(np.arange(1.0, cfg.n + 1))
        a = rng.standard_normal((cfg.n, cfg.n))
        q = a @ a.T + np.eye(cfg.n)
        chord = cv.Curve(lambda t: (1 - t)[:, None, None] * p + t[:, None, None] * q,
                         lambda t: np.broadcast_to(q - p, (len(t), cfg.n, cfg.n)) + 0j)
        excess = cv.curve_length(chord, POSITIVE) - spd_dist(p, q)
        out.append({"manifold": manifold, "case": "straight chord", "excess": excess,
                    "pass": excess > cfg.tol("strict_gap")})
    return out


def verify_minimality(cfg: TrialConfig, manifold: str = "polar") -> SuiteReport:
    """Perturbed competitors are never shorter than the closed-form distance."""
    t0 = time.perf_counter()
    if manifold not in MANIFOLDS:
        raise ConfigInvalid(f"unknown manifold {manifold!r}")
    ctx = cfg.context()
    if manifold == "spd" and not ctx.split.m_basis.shape[0]:
        raise ConfigInvalid(f"{cfg.group} has no positive part")
    if manifold == "unitary" and not ctx.split.k_basis.shape[0]:
        raise ConfigInvalid(f"{cfg.group} has no unitary part")
    fixed = _minimality_fixed(manifold, cfg, ctx)
    recs = _run_trials(cfg, lambda rng, i: _minimality_record(manifold, cfg, ctx, rng))
    return _finish(f"minimality-{manifold}", cfg, fixed, recs, t0, {
        "min_excess": _agg(recs, "min_excess", min),
        "min_excess_at_0.5": _agg(recs, "min_excess_at_0.5", min),
    })


def verify_minimality_all(cfg: TrialConfig) -> SuiteReport:
    """Minimality on every configured manifold the group supports, merged."""
    t0 = time.perf_counter()
    ctx = cfg.context()
    parts, skipped = [], []
    for m in cfg.manifolds:
        if m == "spd" and not ctx.split.m_basis.shape[0]:
            skipped.append(m)
            continue
        parts.append(verify_minimality(cfg, m))
    fixed = [r for p in parts for r in p.trials if r["kind"] == "fixed"]
    recs = [r for p in parts for r in p.trials if r["kind"] != "fixed"]
    for p in parts:
        for r in p.trials:
            if r["kind"] != "fixed":
                r["index"] = f"{r['manifold']}-{r['index']}"
    extra = {f"{p.suite}": p.summary for p in parts}
    extra["skipped_manifolds"] = skipped
    rep = _finish("minimality", cfg, [], [], t0, extra)
    rep.trials = [{**r, "index": f"{r['manifold']}-{r['index']}"} for r in fixed] + recs
    rep.passed = all(p.passed for p in parts)
    rep.summary["trials"] = len(rep.trials)
    rep.summary["failures"] = sum(p.summary["failures"] for p in parts)
    return rep


# -- Minkowski step ----------------------------------------------------------


def factored_curve(ctx: SubgroupContext, rng, spread: float, unitary: bool = True,
                   positive: bool = True) -> tuple[cv.Curve, cv.Curve]:
    """Random smooth ``(β1, β2)`` with ``β1`` in ``K`` and ``β2`` in ``M_G``.

    ``β1 = u0 exp(t z1) exp(s(t) z2)``; ``β2 = G p0 G*`` with
    ``G = exp(t y1) exp(r(t) y2)``. Either factor can be frozen at its start.
    """
    n = ctx.spec.dim
    g0 = random_group_element(ctx.spec, rng, spread)
    u0, p0 = g0.u, g0.abs_g
    k = _sub_spec("k", n, ctx.split.k_basis)
    m = _sub_spec("m", n, ctx.split.m_basis)
    if unitary and k is not None:
        z1, z2 = (random_algebra_element(k, rng, spread) for _ in range(2))
        s, ds = cv.bump(rng, 1.0)

        def b1(t):
            return u0 @ exp_anti_hermitian(z1, t) @ exp_anti_hermitian(z2, s(t))

        def db1(t):
            a = u0 @ exp_anti_hermitian(z1, t)
            b = exp_anti_hermitian(z2, s(t))
            return a @ (z1 @ b + ds(t)[:, None, None] * (b @ z2))

        beta1 = cv.Curve(b1, db1)
    else:
        beta1 = cv.constant_curve(u0)
    if positive and m is not None:
        y1, y2 = (random_algebra_element(m, rng, spread) for _ in range(2))
        r, dr = cv.bump(rng, 1.0)

        def gfac(t):
            return exp_hermitian(y1, t) @ exp_hermitian(y2, r(t))

        def dgfac(t):
            a = exp_hermitian(y1, t)
            b = exp_hermitian(y2, r(t))
            return a @ (y1 @ b + dr(t)[:, None, None] * (b @ y2))

        def b2(t):
            g = gfac(t)
            return mf.hermitian_part(g @ p0 @ mf.adjoint(g))

        def db2(t):
            g, dg = gfac(t), dgfac(t)
            x = dg @ p0 @ mf.adjoint(g)
            return x + mf.adjoint(x)

        beta2 = cv.Curve(b2, db2)
    else:
        beta2 = cv.constant_curve(p0)
    return beta1, beta2


def product_curve(beta1: cv.Curve, beta2: cv.Curve) -> cv.Curve:
    return cv.Curve(
        lambda t: beta1(t) @ beta2(t),
        lambda t: beta1.velocity(t) @ beta2(t) + beta1(t) @ beta2.velocity(t),
        beta1.h,
        beta1.panels,
    )


def _minkowski_record(beta1, beta2, cfg) -> dict:
    beta1 = replace(beta1, panels=cfg.panels)
    beta2 = replace(beta2, panels=cfg.panels)
    beta = product_curve(beta1, beta2)
    t = np.linspace(0.0, 1.0, cfg.panels + 1)
    l_polar = cv.curve_length(beta, POLAR)
    a = cv.speed(beta1, LEFT, t)
    b = cv.speed(beta2, POSITIVE, t)
    l_left = cv.simpson(a, t)
    l_pos = cv.simpson(b, t)
    l_product = cv.simpson(np.hypot(a, b), t)
    scale = max(1.0, l_polar)
    isometry_gap = abs(l_polar - l_product)
    lhs, rhs = l_polar**2, l_left**2 + l_pos**2
    ok = lhs >= rhs - cfg.tol("minkowski_slack") and isometry_gap <= cfg.tol("isometry") * scale
    return {
        "polar_length": l_polar,
        "left_length": l_left,
        "positive_length": l_pos,
        "product_length": l_product,
        "isometry_gap": isometry_gap,
        "margin": lhs - rhs,
        "pass": bool(ok),
    }


def verify_minkowski(cfg: TrialConfig) -> SuiteReport:
    """``L_polar(β)^2 >= L_left(β1)^2 + L_cone(β2)^2`` on random factored curves."""
    t0 = time.perf_counter()
    ctx = cfg.context()
    rng = np.random.default_rng([cfg.seed, 2**31])
    fixed = []
    for label, unitary, positive in (("positive factor constant", True, False),
                                     ("unitary factor constant", False, True)):
        b1, b2 = factored_curve(ctx, rng, cfg.spread, unitary, positive)
        rec = _minkowski_record(b1, b2, cfg)
        single = rec["left_length"] if not positive else rec["positive_length"]
        rec["case"] = label
        rec["pass"] = rec["pass"] and abs(rec["polar_length"] - single) <= 1e-10 * max(
            1.0, single)
        fixed.append(rec)

    def trial(rng, i):
        b1, b2 = factored_curve(ctx, rng, cfg.spread)
        return _minkowski_record(b1, b2, cfg)

    recs = _run_trials(cfg, trial)
    return _finish("minkowski", cfg, fixed, recs, t0, {
        "min_margin": _agg(recs, "margin", min),
        "max_isometry_gap": _agg(recs, "isometry_gap"),
    })


# -- normal velocities -------------------------------------------------------


def random_unitary(n: int, rng) -> np.ndarray:
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))[None, :]


def random_normal_element(ctx: SubgroupContext, rng, spread: float) -> np.ndarray:
    """A random normal element of the algebra.

    For ``gl(n)`` this is ``u diag(c) u*`` with Gaussian complex ``c``.
    Otherwise a Hermitian ``y`` in ``m`` is drawn and paired with an
    anti-Hermitian ``x`` in ``k`` that commutes with it.
    """
    n = ctx.spec.dim
    if ctx.spec.name.startswith("full_gl"):
        u = random_unitary(n, rng)
        c = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * spread / np.sqrt(2)
        return (u * c[None, :]) @ mf.adjoint(u)
    k, m = ctx.split.k_basis, ctx.split.m_basis
    y = np.zeros((n, n), dtype=complex)
    if m.shape[0]:
        y = np.tensordot(rng.standard_normal(m.shape[0]), m, axes=(0, 0))
        y *= spread / max(mf.hs_norm(y), 1e-300)
    if not k.shape[0]:
        return y
    # commutant of y inside k
    ad = np.stack([(b @ y - y @ b).ravel() for b in k], axis=1)
    ad = np.concatenate([ad.real, ad.imag], axis=0)
    null = scipy.linalg.null_space(ad, rcond=1e-10)
    if null.shape[1] == 0:
        return y
    x = np.tensordot(null @ rng.standard_normal(null.shape[1]), k, axes=(0, 0))
    x *= spread / max(mf.hs_norm(x), 1e-300)
    return x + y


def coincidence_gap(ctx: SubgroupContext, v, grid: int = 33) -> float:
    """``sup_t ||Exp_1(t v) - exp(t x) exp(t y)||_2`` over a uniform grid."""
    t = np.linspace(0.0, 1.0, grid)
    left = cv.left_exp_curve(np.eye(ctx.spec.dim), v)(t)
    polar = cv.polar_group_geodesic_curve(ctx, v, tol=1e-8)(t)
    return _f(np.max(mf.hs_norm(left - polar)))


def verify_normal_coincidence(cfg: TrialConfig) -> SuiteReport:
    """Left-invariant and polar geodesics agree for normal initial velocity."""
    t0 = time.perf_counter()
    ctx = cfg.context()
    tol = cfg.tol("normal_gap")
    rng = np.random.default_rng([cfg.seed, 2**31])
    fixed = []
    for label, basis in (("hermitian", ctx.split.m_basis), ("anti-hermitian", ctx.split.k_basis)):
        if not basis.shape[0]:
            continue
        v = np.tensordot(rng.standard_normal(basis.shape[0]), basis, axes=(0, 0))
        gap = coincidence_gap(ctx, v)
        fixed.append({"case": label, "gap": gap, "pass": gap < tol})

    def trial(rng, i):
        v = random_normal_element(ctx, rng, cfg.spread)
        gap = coincidence_gap(ctx, v)
        w = random_algebra_element(ctx.spec, rng, cfg.spread)
        control = coincidence_gap(ctx, w)
        return {
            "inputs": inputs_digest(v, w),
            "gap": gap,
            "normality": _f(mf.hs_norm(v @ mf.adjoint(v) - mf.adjoint(v) @ v)),
            "control_gap": control,
            "control_separated": control > cfg.tol("control_gap"),
            "pass": gap < tol,
        }

    recs = _run_trials(cfg, trial)
    return _finish("normal", cfg, fixed, recs, t0, {
        "max_gap": _agg(recs, "gap"),
        "control_separated": sum(r["control_separated"] for r in recs),
        "min_control_gap": _agg(recs, "control_gap", min),
    })


# -- p-norm equivalence ------------------------------------------------------


def _pnorm_record(x, p, n, slack) -> dict:
    two = _f(mf.schatten_norm(x, 2))
    pn = _f(mf.schatten_norm(x, p))
    const = n ** (0.5 - (0.0 if np.isinf(p) else 1.0 / p))
    ok = pn <= two * (1 + slack) and two <= const * pn * (1 + slack) + slack
    return {"norm_2": two, "norm_p": pn, "ratio": two / pn if pn else None,
            "upper_constant": const, "pass": bool(ok)}


def verify_pnorm_equivalence(cfg: TrialConfig, p: float | None = None) -> SuiteReport:
    """``||x||_p <= ||x||_2 <= n^{1/2 - 1/p} ||x||_p`` and the same for lengths."""
    t0 = time.perf_counter()
    p = cfg.p_norm if p is None else p
    if not p >= 2:
        raise InvalidP(f"p-norm equivalence needs p >= 2, got {p}")
    n = cfg.n
    slack = cfg.tol("pnorm_slack")
    ctx = cfg.context()
    fixed = []
    rec = _pnorm_record(np.eye(n), p, n, slack)
    rec["case"] = "identity attains upper constant"
    rec["pass"] = rec["pass"] and abs(rec["ratio"] - rec["upper_constant"]) <= 1e-12 * n
    fixed.append(rec)
    rng = np.random.default_rng([cfg.seed, 2**31])
    a = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    rec = _pnorm_record(np.outer(a, b.conj()), p, n, slack)
    rec["case"] = "rank one attains lower constant"
    rec["pass"] = rec["pass"] and abs(rec["ratio"] - 1.0) <= 1e-12
    fixed.append(rec)

    def trial(rng, i):
        x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        rec = _pnorm_record(x, p, n, slack)
        # lengths of a random smooth curve in the group
        g0 = random_group_element(ctx.spec, rng, cfg.spread)
        va = random_algebra_element(ctx.spec, rng, cfg.spread)
        vb = random_algebra_element(ctx.spec, rng, cfg.spread)
        s, ds = cv.bump(rng, 1.0)
        tt = np.linspace(0.0, 1.0, cfg.panels + 1)
        # g0 exp(t a) exp(s(t) b) has body velocity exp(-s b) a exp(s b) + s' b
        e = cv._expm_stack(s(tt)[:, None, None] * vb)
        body = np.linalg.solve(e, va @ e) + ds(tt)[:, None, None] * vb
        sp2 = mf.schatten_norm(body, 2)
        spp = mf.schatten_norm(body, p)
        l2, lp = cv.simpson(sp2, tt), cv.simpson(spp, tt)
        const = rec["upper_constant"]
        lok = lp <= l2 * (1 + slack) and l2 <= const * lp * (1 + slack) + slack
        rec.update({"inputs": inputs_digest(x, g0, va, vb), "length_2": l2, "length_p": lp,
                    "pass": rec["pass"] and bool(lok)})
        return rec

    recs = _run_trials(cfg, trial)
    return _finish("pnorm", cfg, fixed, recs, t0, {
        "p": "inf" if np.isinf(p) else p,
        "min_ratio": _agg(recs, "ratio", min),
        "max_ratio": _agg(recs, "ratio"),
    })


# -- convergence proxy -------------------------------------------------------


def _approach(x: GroupPoint, w: np.ndarray, target: float) -> GroupPoint:
    """``x exp(eps w)`` with ``eps`` chosen so that the 2-norm gap equals ``target``."""

    def gap(eps):
        return mf.hs_norm(x.g @ mf.matrix_exp(eps * w) - x.g) - target

    hi = target / max(mf.hs_norm(x.g @ w), 1e-300)
    while gap(hi) < 0:
        hi *= 2
    eps = scipy.optimize.brentq(gap, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps)
    return GroupPoint.from_matrix(x.g @ mf.matrix_exp(eps * w))


def _upper_estimate(x: GroupPoint, y: GroupPoint) -> tuple[float, float, float]:
    c = bound_constant(x, y)
    d = polar_dist(x, y)
    _, isq = mf.spd_sqrt_pair(x.abs_g)
    w = np.linalg.eigvalsh(mf.hermitian_part(isq @ y.abs_g @ isq))
    return c * d, c, float(np.max(np.abs(np.log(w))))


def verify_convergence_proxy(cfg: TrialConfig, steps: int = 12) -> SuiteReport:
    """Upper estimates of the left-invariant distance along ``x_k -> x``."""
    t0 = time.perf_counter()
    ctx = cfg.context()
    target = cfg.tol("convergence_target")
    factor = cfg.tol("monotone_factor")

    def check(x, seq) -> dict:
        cap = convergence_cap(x)
        est, cs, lnv = zip(*(_upper_estimate(x, y) for y in seq))
        est = np.array(est)
        cs = np.array(cs)
        lnv = np.array(lnv)
        # the cap is only claimed once ||ln v_k|| <= 1
        in_range = lnv <= 1.0
        cap_ok = bool(np.all(cs[in_range] <= cap * (1 + 1e-12)))
        monotone = all(est[j] <= factor * est[k] + 1e-300
                       for k in range(len(est)) for j in range(k + 1, len(est)))
        final_ok = bool(est[-1] < target)
        return {
            "estimates": est.tolist(),
            "c_values": cs.tolist(),
            "cap": cap,
            "cap_checked_steps": int(np.sum(in_range)),
            "cap_ok": cap_ok,
            "monotone": monotone,
            "final_estimate": _f(est[-1]),
            "pass": cap_ok and monotone and final_ok,
        }

    x0 = random_group_element(ctx.spec, [cfg.seed, 2**31], cfg.spread)
    rec = check(x0, [x0] * steps)
    rec["case"] = "constant sequence"
    # rounding in the closed-form distance leaves ~1e-14
    rec["pass"] = rec["pass"] and max(rec["estimates"]) < 1e-12
    fixed = [rec]

    def trial(rng, i):
        x = random_group_element(ctx.spec, rng, cfg.spread)
        w = random_algebra_element(ctx.spec, rng, 1.0)
        w = w / mf.hs_norm(w)
        seq = [_approach(x, w, 2.0**-k) for k in range(1, steps + 1)]
        for y in seq:
            polar_parameters(x, y)
        out = check(x, seq)
        out["inputs"] = inputs_digest(x, w)
        return out

    recs = _run_trials(cfg, trial)
    return _finish("convergence", cfg, fixed, recs, t0, {
        "max_final_estimate": _agg(recs, "final_estimate"),
        "cap_violations": sum(not r["cap_ok"] for r in recs),
    })


# -- closed form versus quadrature -------------------------------------------


def verify_closed_form(cfg: TrialConfig) -> SuiteReport:
    """Closed-form distances against Simpson lengths of the closed-form geodesics."""
    t0 = time.perf_counter()
    ctx = cfg.context()
    rel = cfg.tol("closed_form_rel")
    n = cfg.n
    fixed = []
    x = np.diag(np.arange(1.0, n + 1) / n)
    d = spd_dist(np.eye(n), mf.herm_exp(x))
    fixed.append({"case": "spd identity base", "error": abs(d - mf.hs_norm(x)),
                  "pass": abs(d - mf.hs_norm(x)) < 1e-12})
    if n == 1 or cfg.group == "full_gl":
        q = np.zeros((n, n), dtype=complex)
        q[0, 0] = 2.0 * np.exp(0.7j)
        q += np.diag([0] + [1] * (n - 1))
        d = polar_dist(np.eye(n), q)
        want = np.hypot(0.7, np.log(2.0))
        fixed.append({"case": "scalar polar", "error": abs(d - want),
                      "pass": abs(d - want) < 1e-12})

    def trial(rng, i):
        p, q = _sample_pair(ctx, rng, cfg.spread)
        out = {"inputs": inputs_digest(p, q)}
        ok = True
        for name in cfg.manifolds:
            if name == "spd":
                d = spd_dist(p.abs_g, q.abs_g)
                c, metric = cv.spd_geodesic_curve(p.abs_g, q.abs_g), POSITIVE
            elif name == "unitary":
                d = unitary_dist(p.u, q.u)
                c, metric = cv.unitary_geodesic_curve(p.u, q.u), LEFT
            else:
                d = polar_dist(p, q)
                c, metric = cv.polar_geodesic_curve(p, q), POLAR
            length = cv.curve_length(replace(c, panels=cfg.panels), metric)
            err = abs(length - d) / d if d > 0 else abs(length)
            out[f"{name}_dist"] = d
            out[f"{name}_rel_error"] = err
            ok = ok and err < rel
        out["pass"] = bool(ok)
        return out

    recs = _run_trials(cfg, trial)
    extra = {f"max_{m}_rel_error": _agg(recs, f"{m}_rel_error") for m in cfg.manifolds}
    return _finish("closed_form", cfg, fixed, recs, t0, extra)


# -- geodesic equation residuals ---------------------------------------------


def _decay(curve, metric, cfg, exact: bool = False) -> dict:
    """Residual at ``cfg.h`` and the ratio after halving the step.

    ``exact`` marks curves whose discrete residual is pure rounding (a left
    exponential with normal velocity), for which no decay is expected.
    """
    r = cv.geodesic_residual(curve, metric, h=cfg.h)
    r_half = cv.geodesic_residual(curve, metric, h=cfg.h / 2)
    ratio = r / r_half if r_half > 0 else None
    ratio_ok = exact or (ratio is not None and cfg.tol("ratio_lo") <= ratio <= cfg.tol("ratio_hi"))
    return {"residual": r, "residual_half": r_half, "ratio": ratio, "exact": exact,
            "pass": r < cfg.tol("residual") and bool(ratio_ok)}


def verify_residuals(cfg: TrialConfig) -> SuiteReport:
    """Finite-difference geodesic residuals and their O(h^2) decay.

    Endpoints are drawn as usual, then each geodesic is stretched to length
    ``residual_length`` (the cone distance for the spd curve, ``||v||_2``
    for the left exponential). The second difference has a rounding floor of
    roughly ``eps * cond(γ) / h^2`` relative to the squared speed, and on
    short curves the truncation term does not clear it, so the halving ratio
    would measure rounding instead of the O(h^2) decay.
    """
    t0 = time.perf_counter()
    ctx = cfg.context()
    length = cfg.tol("residual_length")
    n = cfg.n
    const = cv.constant_curve(np.eye(n))
    fixed = [
        {"case": "constant curve (cone)", "residual": cv.geodesic_residual(const, POSITIVE)},
        {"case": "constant curve (left)", "residual": cv.geodesic_residual(const, LEFT)},
    ]
    for f in fixed:
        f["pass"] = f["residual"] == 0.0

    def trial(rng, i):
        p, q = _sample_pair(ctx, rng, cfg.spread)
        out = {"inputs": inputs_digest(p, q)}
        ok = True
        if ctx.split.m_basis.shape[0]:
            a, b = p.abs_g, q.abs_g
            b = spd_geodesic(a, b, length / spd_dist(a, b))
            spd = _decay(cv.spd_geodesic_curve(a, b).numeric(), POSITIVE, cfg)
            out["spd"] = spd
            ok = ok and spd["pass"]
        v = random_algebra_element(ctx.spec, rng, cfg.spread)
        v *= length / mf.hs_norm(v)
        normal = mf.hs_norm(v @ mf.adjoint(v) - mf.adjoint(v) @ v) <= 1e-12 * mf.hs_norm(v) ** 2
        left = _decay(cv.left_exp_curve(p, v).numeric(), LEFT, cfg, exact=bool(normal))
        out["left"] = left
        out["pass"] = bool(ok and left["pass"])
        return out

    recs = _run_trials(cfg, trial)
    ratios = [r[k]["ratio"] for r in recs for k in ("spd", "left")
              if k in r and not r[k]["exact"]]
    res = [r[k]["residual"] for r in recs for k in ("spd", "left") if k in r]
    return _finish("residuals", cfg, fixed, recs, t0, {
        "max_residual": max(res),
        "min_ratio": min(ratios) if ratios else None,
        "max_ratio": max(ratios) if ratios else None,
    })


# -- totally geodesic --------------------------------------------------------


def verify_tangency(cfg: TrialConfig) -> SuiteReport:
    """``α^{-1} D_t η`` stays in the Lie algebra for curves and fields of ``G``."""
    t0 = time.perf_counter()
    ctx = cfg.context()
    tol = cfg.tol("tangency")
    spec = ctx.spec

    def curve_for(v1, v2):
        def f(t):
            return cv._expm_stack(t[:, None, None] * v1) @ cv._expm_stack(t[:, None, None] * v2)

        return cv.Curve(f, lambda t: v1 @ f(t) + f(t) @ v2, cfg.h, cfg.panels)

    def trial(rng, i):
        v1, v2, w0, w1 = (random_algebra_element(spec, rng, cfg.spread) for _ in range(4))
        c = curve_for(v1, v2)
        r_vel = cv.tangency_residual(c, cv.velocity_field(c), spec, h=cfg.h)
        field = cv.TangentField(lambda t: c(t) @ (w0 + t[:, None, None] * w1))
        r_field = cv.tangency_residual(c, field, spec, h=cfg.h)
        return {"inputs": inputs_digest(v1, v2, w0, w1), "velocity_residual": r_vel,
                "field_residual": r_field, "pass": max(r_vel, r_field) < tol}

    full = SubgroupContext.builtin("full_gl", cfg.n)
    rng = np.random.default_rng([cfg.seed, 2**31])
    a = random_algebra_element(full.spec, rng, cfg.spread)
    c = curve_for(a, 0 * a)
    r_full = cv.tangency_residual(c, cv.velocity_field(c), full.spec)
    fixed = [{"case": "full gl", "velocity_residual": r_full, "pass": r_full < 1e-12}]
    recs = _run_trials(cfg, trial)
    return _finish("tangency", cfg, fixed, recs, t0, {
        "max_residual": max(max(r["velocity_residual"], r["field_residual"]) for r in recs),
    })


# -- Cartan structure --------------------------------------------------------


def verify_cartan(cfg: TrialConfig) -> SuiteReport:
    """Bracket table, polar closure, conjugation stability and the cone action."""
    t0 = time.perf_counter()
    ctx = cfg.context()
    val = validate_algebra(ctx.spec)
    tri = triple_system_check(ctx.split)
    fixed = [{
        "case": "algebra",
        "dims": list(ctx.split.dims),
        **{f"validation_{k}": v for k, v in val.as_dict().items() if k != "name"},
        **{f"triple_{k}": v for k, v in tri.as_dict().items()},
        "pass": val.passed and tri.max_residual < cfg.tol("triple"),
    }]
    k_spec = _sub_spec("k", cfg.n, ctx.split.k_basis)

    def trial(rng, i):
        g = random_group_element(ctx.spec, rng, cfg.spread)
        rm, rk = polar_closure_residuals(ctx, g)
        conj = 0.0
        if k_spec is not None and ctx.split.m_basis.shape[0]:
            k = random_algebra_element(k_spec, rng, cfg.spread)
            conj = max(conjugation_residual(ctx, k, x) for x in ctx.split.m_basis)
        p = random_group_element(ctx.spec, rng, cfg.spread).abs_g
        q = random_group_element(ctx.spec, rng, cfg.spread).abs_g
        action = abs(spd_dist(isometric_action(g, p), isometric_action(g, q)) - spd_dist(p, q))
        wit = transitivity_witness(p, q)
        witness = _f(mf.hs_norm(isometric_action(wit, p) - q) / mf.hs_norm(q))
        ok = (rm < cfg.tol("closure") and rk < cfg.tol("closure")
              and conj < cfg.tol("conjugation") and action < cfg.tol("action")
              and witness < cfg.tol("action"))
        return {"inputs": inputs_digest(g, p, q), "log_abs_residual": rm,
                "log_u_residual": rk, "conjugation_residual": conj,
                "action_error": action, "witness_error": witness, "pass": bool(ok)}

    recs = _run_trials(cfg, trial)
    return _finish("cartan", cfg, fixed, recs, t0, {
        "dims": list(ctx.split.dims),
        "max_triple_residual": tri.max_residual,
        "max_closure_residual": max(_agg(recs, "log_abs_residual"), _agg(recs, "log_u_residual")),
        "max_conjugation_residual": _agg(recs, "conjugation_residual"),
        "max_action_error": _agg(recs, "action_error"),
    })


SUITES: dict[str, Callable[[TrialConfig], SuiteReport]] = {
    "bound": verify_bound,
    "minimality": verify_minimality_all,
    "minimality-unitary": lambda cfg: verify_minimality(cfg, "unitary"),
    "minimality-spd": lambda cfg: verify_minimality(cfg, "spd"),
    "minimality-polar": lambda cfg: verify_minimality(cfg, "polar"),
    "minkowski": verify_minkowski,
    "normal": verify_normal_coincidence,
    "pnorm": verify_pnorm_equivalence,
    "convergence": verify_convergence_proxy,
    "closed_form": verify_closed_form,
    "residuals": verify_residuals,
    "tangency": verify_tangency,
    "cartan": verify_cartan,
}


def run_suite(name: str, cfg: TrialConfig | None = None) -> SuiteReport:
    """Run the suite called ``name``; see :data:`SUITES` for the list."""
    if name not in SUITES:
        raise UnknownSuite(name)
    return SUITES[name](cfg or TrialConfig())
