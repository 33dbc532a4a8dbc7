r"""Curves in matrix groups and the functionals measured along them.

A :class:`Curve` wraps a vectorised evaluator ``t -> matrix`` (``t`` a 1-D
array, result a stack) and, when known, an analytic velocity. Without one
the velocity is a central difference with step ``h``. Evaluators must make
sense slightly outside ``[0, 1]`` because differences at the endpoints
straddle them.

Lengths are composite Simpson sums of the metric speed. For the polar metric
the speed is obtained by differentiating the polar decomposition exactly:
with ``g = W S V*``, ``u = W V*`` and ``P = V S V*``, the derivative of
``P`` solves ``P dP + dP P = d(g* g)`` and is diagonal-divided in the ``V``
basis, after which ``u^{-1} du = (u* dg - dP) P^{-1}``.
"""

from __future__ import annotations

import csv
import io
from collections.abc import Callable
from dataclasses import dataclass, replace

import numpy as np
import scipy.integrate
import scipy.linalg

from . import matfun as mf
from .errors import NotInSubgroup, NotPositiveDefinite, Singular
from .manifolds import (
    LEFT,
    GroupPoint,
    MetricKind,
    as_group_point,
    exp_anti_hermitian,
    exp_hermitian,
    polar_parameters,
)
from .subgroups import LieAlgebraSpec, SubgroupContext, project, random_algebra_element

DEFAULT_H = 1e-3
DEFAULT_PANELS = 256

Evaluator = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Curve:
    """A smooth path ``[0, 1] -> M_n(C)``.

    Parameters
    ----------
    func : callable
        Maps a 1-D array of times to a ``(k, n, n)`` stack.
    velocity_func : callable, optional
        Analytic derivative with the same calling convention.
    h : float
        Central-difference step used when no velocity is supplied, and by the
        covariant derivative.
    panels : int
        Simpson panel count for lengths (even).
    """

    func: Evaluator
    velocity_func: Evaluator | None = None
    h: float = DEFAULT_H
    panels: int = DEFAULT_PANELS

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = self.func(np.atleast_1d(t))
        return out[0] if t.ndim == 0 else out

    def velocity(self, t):
        t = np.asarray(t, dtype=float)
        tt = np.atleast_1d(t)
        if self.velocity_func is not None:
            out = self.velocity_func(tt)
        else:
            out = (self.func(tt + self.h) - self.func(tt - self.h)) / (2 * self.h)
        return out[0] if t.ndim == 0 else out

    def with_step(self, h: float) -> Curve:
        return replace(self, h=h)

    def numeric(self) -> Curve:
        """The same curve with the analytic velocity dropped."""
        return replace(self, velocity_func=None)

    def check_velocity(self, seed=0, samples: int = 5, bound: float = 1.0) -> float:
        """Largest gap between analytic and central-difference velocity.

        Raises ``ValueError`` when it exceeds ``10 h^2 bound`` scaled by the
        speed.
        """
        if self.velocity_func is None:
            return 0.0
        t = np.random.default_rng(seed).uniform(0, 1, samples)
        fd = self.numeric().velocity(t)
        an = self.velocity(t)
        gap = float(np.max(mf.hs_norm(fd - an) / np.maximum(1.0, mf.hs_norm(an))))
        if gap > 10 * self.h**2 * bound:
            raise ValueError(f"velocity disagrees with evaluator (gap {gap:.2e})")
        return gap

    def sample(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        t = np.linspace(0.0, 1.0, k + 1)
        return t, self(t)


@dataclass(frozen=True)
class TangentField:
    """A matrix field ``t -> eta(t)`` along a curve (vectorised like Curve)."""

    func: Evaluator

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = self.func(np.atleast_1d(t))
        return out[0] if t.ndim == 0 else out


def constant_curve(a) -> Curve:
    a = mf.as_matrix(a)
    return Curve(
        lambda t: np.broadcast_to(a, (len(t), *a.shape)).copy(),
        lambda t: np.zeros((len(t), *a.shape), dtype=complex),
    )


# -- metric speeds -----------------------------------------------------------


def _left_speed(g, dg, p: float):
    beta = _solve(g, dg)
    return np.asarray(mf.schatten_norm(beta, p))


def _solve(g, x):
    s = np.linalg.svd(g, compute_uv=False)
    if np.any(s[..., -1] <= mf.SINGULAR_RTOL * s[..., 0]):
        raise Singular("curve passes through a singular matrix")
    return np.linalg.solve(g, x)


def _positive_speed(g, dg):
    w, q = mf.herm_eig(g)
    if not mf.is_hermitian(g, rtol=1e-10):
        raise NotPositiveDefinite("curve leaves the Hermitian matrices")
    if np.any(w <= mf.POSITIVITY_RTOL * np.max(np.abs(w), axis=-1, keepdims=True)):
        raise NotPositiveDefinite("curve leaves the positive cone")
    d = mf.adjoint(q) @ dg @ q
    scale = 1.0 / np.sqrt(w[..., :, None] * w[..., None, :])
    return mf.hs_norm(d * scale)


def polar_speed_components(g, dg) -> tuple[np.ndarray, np.ndarray]:
    """Speeds of the unitary and positive polar factors along a curve.

    Returns ``(||u^{-1} du||_2, ||P^{-1/2} dP P^{-1/2}||_2)`` for every
    sample in the stack ``g`` with derivative ``dg``.
    """
    w, s, vh = np.linalg.svd(g)
    if np.any(s[..., -1] <= mf.SINGULAR_RTOL * s[..., 0]):
        raise Singular("curve passes through a singular matrix")
    v = mf.adjoint(vh)
    # W* dg V: the derivative seen in the singular bases
    gh = mf.adjoint(w) @ dg @ v
    # V* d(g*g) V = gh* S + S gh
    d = mf.adjoint(gh) * s[..., None, :] + s[..., :, None] * gh
    dp = d / (s[..., :, None] + s[..., None, :])
    omega = (gh - dp) / s[..., None, :]
    pos = dp / np.sqrt(s[..., :, None] * s[..., None, :])
    return mf.hs_norm(omega), mf.hs_norm(pos)


def speed(c: Curve, metric: MetricKind, t) -> np.ndarray:
    """Metric speed of ``c`` at the times ``t``."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    g = c(t)
    dg = c.velocity(t)
    if metric.kind == "left":
        return _left_speed(g, dg, metric.p)
    if metric.kind == "positive":
        return _positive_speed(g, dg)
    a, b = polar_speed_components(g, dg)
    return np.hypot(a, b)


def simpson(values: np.ndarray, t: np.ndarray) -> float:
    return float(scipy.integrate.simpson(values, x=t))


def curve_length(c: Curve, metric: MetricKind = LEFT, panels: int | None = None) -> float:
    """Length ``∫_0^1 b(c(t), c'(t)) dt`` by composite Simpson."""
    k = panels or c.panels
    if k % 2:
        raise ValueError("Simpson needs an even panel count")
    t = np.linspace(0.0, 1.0, k + 1)
    return simpson(speed(c, metric, t), t)


def length_report(c: Curve, metric: MetricKind = LEFT) -> dict:
    """Length at ``panels`` and ``2 panels`` with the Richardson gap."""
    coarse = curve_length(c, metric, c.panels)
    fine = curve_length(c, metric, 2 * c.panels)
    return {"length": fine, "coarse": coarse, "doubling_gap": abs(fine - coarse)}


# -- covariant derivative and residuals --------------------------------------


def _bracket(a, b):
    return a @ b - b @ a


def covariant_derivative(c: Curve, eta: TangentField, t, h: float | None = None):
    r"""Covariant derivative of ``eta`` along ``c`` for the left-invariant metric.

    Returns :math:`\alpha(\dot\mu + \tfrac12([\beta,\mu] + [\beta,\mu^*] +
    [\mu,\beta^*]))` with :math:`\beta = \alpha^{-1}\dot\alpha` and
    :math:`\mu = \alpha^{-1}\eta`; :math:`\dot\mu` is a central difference.
    """
    alpha, body = _body_covariant(c, eta, t, h)
    out = alpha @ body
    return out[0] if np.ndim(t) == 0 else out


def _body_covariant(c: Curve, eta: TangentField, t, h=None):
    if h is None:
        h = c.h
    else:
        c = c.with_step(h)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    alpha = c(t)
    beta = _solve(alpha, c.velocity(t))
    mu = _solve(alpha, eta(t))

    def mu_at(s):
        return _solve(c(s), eta(s))

    mu_dot = (mu_at(t + h) - mu_at(t - h)) / (2 * h)
    bs, ms = mf.adjoint(beta), mf.adjoint(mu)
    body = mu_dot + 0.5 * (_bracket(beta, mu) + _bracket(beta, ms) + _bracket(mu, bs))
    return alpha, body


def velocity_field(c: Curve) -> TangentField:
    return TangentField(c.velocity)


def geodesic_residual(
    c: Curve, metric: MetricKind = LEFT, grid: int = 33, h: float | None = None
) -> float:
    """Normalised geodesic-equation residual of ``c`` on a uniform grid.

    For the positive cone the residual is ``γ'' - γ' γ^{-1} γ'`` measured at
    ``γ`` by the cone metric; for the left-invariant metric it is
    ``||α^{-1} D_t α'||_2``. Either is divided by the largest squared speed
    on the grid, so the result is scale free. Constant curves give 0.
    """
    if h is None:
        h = c.h
    else:
        c = c.with_step(h)
    t = np.linspace(0.0, 1.0, grid)
    if metric.kind == "positive":
        g = c(t)
        dg = c.velocity(t)
        if c.velocity_func is not None:
            ddg = (c.velocity(t + h) - c.velocity(t - h)) / (2 * h)
        else:
            dg = (c(t + h) - c(t - h)) / (2 * h)
            ddg = (c(t + h) - 2 * g + c(t - h)) / h**2
        res = ddg - dg @ _solve(g, dg)
        sp = _positive_speed(g, dg)
        res_norm = _positive_speed(g, mf.hermitian_part(res))
    elif metric.kind == "left" and metric.p == 2:
        alpha, body = _body_covariant(c, velocity_field(c), t)
        beta = _solve(alpha, c.velocity(t))
        sp = mf.hs_norm(beta)
        res_norm = mf.hs_norm(body)
    else:
        raise ValueError("geodesic residual needs the positive or left(2) metric")
    top = float(np.max(sp)) ** 2
    if top == 0.0:
        return 0.0
    return float(np.max(res_norm)) / top


def tangency_residual(
    c: Curve,
    eta: TangentField,
    spec: LieAlgebraSpec,
    grid: int = 33,
    h: float | None = None,
    tol: float = 1e-6,
) -> float:
    """Largest distance from ``α^{-1} D_t η`` to the Lie algebra on the grid.

    Raises
    ------
    NotInSubgroup
        If ``α^{-1} α'`` or ``α^{-1} η`` is farther than ``tol`` from the
        algebra, i.e. the inputs are not a curve and field of the subgroup.
    """
    t = np.linspace(0.0, 1.0, grid)
    alpha, body = _body_covariant(c, eta, t, h)
    for label, x in (("velocity", c.velocity(t)), ("field", eta(t))):
        y = _solve(alpha, x)
        if np.max(mf.hs_norm(y - project(spec.onb, y))) > tol:
            raise NotInSubgroup(f"curve {label} leaves the Lie algebra")
    return float(np.max(mf.hs_norm(body - project(spec.onb, body))))


# -- named curves ------------------------------------------------------------


def one_parameter_curve(x, base=None) -> Curve:
    """``t -> base exp(t x)``."""
    x = mf.as_matrix(x)
    b = np.eye(x.shape[0], dtype=complex) if base is None else mf.as_matrix(base)

    def f(t):
        return b @ _expm_stack(t[:, None, None] * x)

    return Curve(f, lambda t: f(t) @ x)


def spd_geodesic_curve(p, q) -> Curve:
    """``t -> p^{1/2} exp(t L) p^{1/2}``, ``L = log(p^{-1/2} q p^{-1/2})``."""
    sq, isq = mf.spd_sqrt_pair(p)
    w, vecs = mf.spd_eig(isq @ mf.as_matrix(q) @ isq)
    lw = np.log(w)

    def f(t):
        return mf.hermitian_part(sq @ mf.from_eig(np.exp(lw * t[:, None]), vecs) @ sq)

    def df(t):
        return mf.hermitian_part(sq @ mf.from_eig(lw * np.exp(lw * t[:, None]), vecs) @ sq)

    return Curve(f, df)


def unitary_geodesic_curve(u, w) -> Curve:
    """``t -> u exp(t z)`` with ``z`` the principal log of ``u^{-1} w``."""
    u = mf.as_matrix(u)
    z = mf.unitary_log(mf.adjoint(u) @ mf.as_matrix(w))

    def f(t):
        return u @ exp_anti_hermitian(z, t)

    return Curve(f, lambda t: f(t) @ z)


def polar_geodesic_curve(p, q) -> Curve:
    """The polar-metric geodesic from ``p`` to ``q`` as a curve in the group."""
    p, q, z = polar_parameters(p, q)
    up = p.u
    pos = spd_geodesic_curve(p.abs_g, q.abs_g)

    def f(t):
        return up @ exp_anti_hermitian(z, t) @ pos(t)

    def df(t):
        e = up @ exp_anti_hermitian(z, t)
        return e @ z @ pos(t) + e @ pos.velocity(t)

    return Curve(f, df)


def left_exp_curve(g, v) -> Curve:
    """``t -> g exp(t v*) exp(t (v - v*))``, the left-invariant geodesic."""
    g = as_group_point(g).g
    v = mf.as_matrix(v)
    vs = mf.adjoint(v)
    w = v - vs

    def f(t):
        return g @ _expm_stack(t[:, None, None] * vs) @ _expm_stack(t[:, None, None] * w)

    def df(t):
        a = _expm_stack(t[:, None, None] * vs)
        b = _expm_stack(t[:, None, None] * w)
        return g @ a @ (vs @ b + b @ w)

    return Curve(f, df)


def polar_group_geodesic_curve(ctx: SubgroupContext, v, tol: float = 1e-10) -> Curve:
    """``t -> exp(t x) exp(t y)`` with ``(x, y) = herm_split(v)``."""
    v = mf.as_matrix(v)
    res = float(mf.hs_norm(v - project(ctx.spec.onb, v)))
    if res > tol * max(1.0, float(mf.hs_norm(v))):
        raise NotInSubgroup(f"velocity is not in the algebra (residual {res:.2e})")
    x, y = mf.herm_split(v)

    def f(t):
        return exp_anti_hermitian(x, t) @ exp_hermitian(y, t)

    def df(t):
        a = exp_anti_hermitian(x, t)
        b = exp_hermitian(y, t)
        return a @ (x @ b + b @ y)

    return Curve(f, df)


def polar_group_geodesic(ctx: SubgroupContext, v, t: float):
    """Point ``exp(t x) exp(t y)`` of the polar geodesic through 1 with velocity ``v``."""
    x, y = mf.herm_split(mf.as_matrix(v))
    c = polar_group_geodesic_curve(ctx, v)
    u = exp_anti_hermitian(x, float(t))
    a = exp_hermitian(y, float(t))
    g = c(float(t))
    for m in (g, u, a):
        m.setflags(write=False)
    return GroupPoint(g, u, a)


def _expm_stack(a: np.ndarray) -> np.ndarray:
    out = np.asarray(scipy.linalg.expm(a), dtype=complex)
    zero = ~np.any(a, axis=(-2, -1))
    if np.any(zero):
        out[zero] = np.eye(a.shape[-1])
    return out


# -- perturbations -----------------------------------------------------------

PERTURB_MODES = ("group", "spd", "polar")


def bump(rng: np.random.Generator, amplitude: float) -> tuple[Callable, Callable]:
    """Endpoint-fixing bump ``s(t) = A sin(πt)(1 + c cos(πt + φ))`` and ``s'``."""
    c = rng.uniform(0.0, 0.5)
    phi = rng.uniform(0.0, 2 * np.pi)

    def s(t):
        return amplitude * np.sin(np.pi * t) * (1 + c * np.cos(np.pi * t + phi))

    def ds(t):
        a = np.pi * np.cos(np.pi * t) * (1 + c * np.cos(np.pi * t + phi))
        b = -np.pi * c * np.sin(np.pi * t) * np.sin(np.pi * t + phi)
        return amplitude * (a + b)

    return s, ds


def _random_direction(rng, n: int, mode: str, algebra: LieAlgebraSpec | None):
    if algebra is not None:
        w = random_algebra_element(algebra, rng, 1.0)
        if mode == "spd":
            w = mf.hermitian_part(w)
    else:
        w = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        if mode == "spd":
            w = mf.hermitian_part(w)
    norm = mf.hs_norm(w)
    if norm == 0:
        raise ValueError("algebra has no directions for this perturbation mode")
    return w / norm


def perturb_curve(
    base: Curve,
    seed,
    amplitude: float,
    mode: str = "group",
    algebra: LieAlgebraSpec | None = None,
) -> Curve:
    """Endpoint-preserving competitor to ``base``.

    ``group``/``polar`` mode returns ``t -> base(t) exp(s(t) w)`` with ``w`` a
    unit random direction (in ``algebra`` when given, else all of
    ``M_n(C)``). ``spd`` mode returns the congruence
    ``exp(s w / 2) base(t) exp(s w / 2)`` with ``w`` Hermitian, which stays
    positive definite. ``s`` vanishes at both endpoints.
    """
    if amplitude < 0:
        raise ValueError("amplitude must be non-negative")
    if mode not in PERTURB_MODES:
        raise ValueError(f"unknown perturbation mode {mode!r}")
    if amplitude == 0:
        return base
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    n = base(0.0).shape[-1]
    w = _random_direction(rng, n, mode, algebra)
    s, ds = bump(rng, amplitude)
    analytic = base.velocity_func is not None

    if mode == "spd":
        def f(t):
            e = exp_hermitian(w / 2, s(t))
            return mf.hermitian_part(e @ base(t) @ e)

        def df(t):
            e = exp_hermitian(w / 2, s(t))
            b = base(t)
            mid = e @ b @ e
            half = 0.5 * ds(t)[:, None, None]
            return half * (w @ mid + mid @ w) + e @ base.velocity(t) @ e
    else:
        def f(t):
            return base(t) @ _expm_stack(s(t)[:, None, None] * w)

        def df(t):
            e = _expm_stack(s(t)[:, None, None] * w)
            return base.velocity(t) @ e + ds(t)[:, None, None] * (base(t) @ w @ e)

    return Curve(f, df if analytic else None, base.h, base.panels)


# -- export ------------------------------------------------------------------


def curve_to_csv(c: Curve, samples: int) -> str:
    """``samples + 1`` equally spaced points as CSV: ``t, re_ij, im_ij, ...``."""
    t, mats = c.sample(samples)
    n = mats.shape[-1]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["t"]
    for i in range(n):
        for j in range(n):
            header += [f"re_{i}_{j}", f"im_{i}_{j}"]
    writer.writerow(header)
    for ti, m in zip(t, mats):
        row = [repr(float(ti))]
        for z in m.ravel():
            row += [repr(float(z.real)), repr(float(z.imag))]
        writer.writerow(row)
    return buf.getvalue()
