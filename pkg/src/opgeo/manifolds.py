r"""Metrics, geodesics and distances on matrix groups.

Four structures live here:

* the left-invariant metric :math:`\|g^{-1}v\|_p` on the invertible group,
* the affine-invariant metric :math:`\|p^{-1/2}xp^{-1/2}\|_2` on the
  positive-definite cone,
* the bi-invariant metric on the unitary group (the left-invariant metric
  restricted to unitaries),
* the polar product metric, obtained by pulling back the product of the
  last two through ``g -> (u_g, |g|)``.

Distances are closed forms. Curve-length quadrature lives in
:mod:`opgeo.curves` and is only used to check them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import matfun as mf
from .errors import InvalidP


@dataclass(frozen=True)
class GroupPoint:
    """An invertible matrix together with its polar factors ``g = u |g|``."""

    g: np.ndarray
    u: np.ndarray = field(repr=False)
    abs_g: np.ndarray = field(repr=False)

    @classmethod
    def from_matrix(cls, g) -> GroupPoint:
        g = mf.as_matrix(g)
        if g.ndim != 2:
            raise ValueError("GroupPoint wraps a single matrix")
        u, p = mf.polar_decompose(g)
        for a in (g, u, p):
            a.setflags(write=False)
        return cls(g, u, p)

    @property
    def n(self) -> int:
        return self.g.shape[0]

    def validate(self, rtol: float = 1e-12) -> bool:
        """Re-check ``u |g| = g``, unitarity of ``u`` and positivity of ``|g|``."""
        scale = mf.hs_norm(self.g)
        ok = mf.hs_norm(self.u @ self.abs_g - self.g) <= rtol * max(scale, 1.0) * self.n
        ok = ok and mf.is_unitary(self.u, rtol=1e-11)
        return bool(ok and np.min(np.linalg.eigvalsh(self.abs_g)) > 0)


def as_group_point(g) -> GroupPoint:
    if isinstance(g, GroupPoint):
        return g
    return GroupPoint.from_matrix(g)


def _mat(g) -> np.ndarray:
    return g.g if isinstance(g, GroupPoint) else mf.as_matrix(g)


@dataclass(frozen=True)
class MetricKind:
    """Which metric a length or residual is measured in.

    ``kind`` is one of ``"left"`` (left-invariant, with Schatten exponent
    ``p``), ``"positive"`` (affine-invariant cone metric) or ``"polar"``.
    """

    kind: str
    p: float = 2.0

    def __post_init__(self):
        if self.kind not in ("left", "positive", "polar"):
            raise ValueError(f"unknown metric kind {self.kind!r}")
        if self.kind == "left" and not self.p >= 1:
            raise InvalidP(f"left-invariant metric needs p >= 1, got {self.p}")

    @classmethod
    def left_invariant(cls, p: float = 2.0) -> MetricKind:
        return cls("left", p)

    @classmethod
    def positive_cone(cls) -> MetricKind:
        return cls("positive")

    @classmethod
    def polar_product(cls) -> MetricKind:
        return cls("polar")


LEFT = MetricKind.left_invariant()
POSITIVE = MetricKind.positive_cone()
POLAR = MetricKind.polar_product()


# -- left-invariant metric ---------------------------------------------------


def left_metric(g, v, p: float = 2.0) -> float:
    """``||g^{-1} v||_p`` for a tangent vector ``v`` at ``g``."""
    gm = _mat(g)
    mf.inv(gm)  # raises Singular
    return float(mf.schatten_norm(np.linalg.solve(gm, mf.as_matrix(v)), p))


def left_exp(g, v) -> GroupPoint:
    """Riemannian exponential of the left-invariant metric.

    ``Exp_g(v) = g exp(v*) exp(v - v*)``. For anti-Hermitian ``v`` this is
    ``g exp(v)``.
    """
    gm = _mat(g)
    v = mf.as_matrix(v)
    vs = mf.adjoint(v)
    return GroupPoint.from_matrix(gm @ mf.matrix_exp(vs) @ mf.matrix_exp(v - vs))


# -- positive cone -----------------------------------------------------------


def spd_metric(p, x) -> float:
    """``||p^{-1/2} x p^{-1/2}||_2`` for Hermitian ``x`` at SPD ``p``."""
    x = mf.check_hermitian(x)
    _, isq = mf.spd_sqrt_pair(p)
    return float(mf.hs_norm(isq @ x @ isq))


def _relative_position(p, q):
    """Return ``p^{1/2}`` and the spectrum of ``p^{-1/2} q p^{-1/2}``."""
    sq, isq = mf.spd_sqrt_pair(p)
    q = mf.as_matrix(q)
    mf.spd_eig(q)
    w, vecs = mf.spd_eig(isq @ q @ isq)
    return sq, isq, w, vecs


def spd_geodesic(p, q, t):
    """``p^{1/2} (p^{-1/2} q p^{-1/2})^t p^{1/2}``; ``t`` may be an array."""
    sq, _, w, vecs = _relative_position(p, q)
    t = np.asarray(t, dtype=float)
    wt = w ** t[..., None]
    return mf.hermitian_part(sq @ mf.from_eig(wt, vecs) @ sq)


def spd_exp(p, v) -> np.ndarray:
    """``p^{1/2} exp(p^{-1/2} v p^{-1/2}) p^{1/2}``."""
    v = mf.check_hermitian(v)
    sq, isq = mf.spd_sqrt_pair(p)
    w, vecs = mf.herm_eig(isq @ v @ isq)
    return mf.hermitian_part(sq @ mf.from_eig(np.exp(w), vecs) @ sq)


def spd_log(p, q) -> np.ndarray:
    """Inverse of :func:`spd_exp`: ``p^{1/2} log(p^{-1/2} q p^{-1/2}) p^{1/2}``."""
    sq, _, w, vecs = _relative_position(p, q)
    return mf.hermitian_part(sq @ mf.from_eig(np.log(w), vecs) @ sq)


def spd_dist(p, q) -> float:
    """Affine-invariant distance ``||log(p^{-1/2} q p^{-1/2})||_2``."""
    _, _, w, _ = _relative_position(p, q)
    return float(np.sqrt(np.sum(np.log(w) ** 2)))


# -- unitary group -----------------------------------------------------------


def unitary_dist(u, w) -> float:
    """``||log(u^{-1} w)||_2`` with the principal logarithm."""
    u = mf.as_matrix(u)
    w = mf.as_matrix(w)
    return float(mf.hs_norm(mf.unitary_log(mf.adjoint(u) @ w)))


# -- polar product -----------------------------------------------------------


def polar_metric(base, tangent) -> float:
    """Product metric ``(||x||_2^2 + ||P^{-1/2} y P^{-1/2}||_2^2)^{1/2}``.

    ``base`` is ``(u, P)`` and ``tangent`` is ``(x, y)`` with ``y``
    Hermitian. Following the left-invariant convention on the unitary factor,
    ``x`` is measured as ``||u^{-1} x||_2``, which equals ``||x||_2``.
    """
    _, p = base
    x, y = tangent
    ux = mf.hs_norm(mf.as_matrix(x))
    return float(np.hypot(ux, spd_metric(p, y)))


def polar_parameters(p, q) -> tuple[GroupPoint, GroupPoint, np.ndarray]:
    """Return ``(p, q, z)`` with ``u_q = u_p e^z`` and ``z`` the principal log."""
    p = as_group_point(p)
    q = as_group_point(q)
    z = mf.unitary_log(mf.adjoint(p.u) @ q.u)
    return p, q, z


def polar_geodesic(p, q, t: float) -> GroupPoint:
    r"""Point at time ``t`` on the polar-metric geodesic from ``p`` to ``q``.

    :math:`\alpha(t) = u_p e^{tz} |p|^{1/2}(|p|^{-1/2}|q||p|^{-1/2})^t|p|^{1/2}`
    with ``z`` the principal logarithm of ``u_p^{-1} u_q``.
    The returned point carries its polar factors exactly.
    """
    p, q, z = polar_parameters(p, q)
    u = p.u @ _exp_anti_hermitian(z, float(t))
    a = spd_geodesic(p.abs_g, q.abs_g, float(t))
    g = u @ a
    for m in (g, u, a):
        m.setflags(write=False)
    return GroupPoint(g, u, a)


def polar_dist(p, q) -> float:
    """``(d_U(u_p, u_q)^2 + d_cone(|p|, |q|)^2)^{1/2}``."""
    p, q, z = polar_parameters(p, q)
    return float(np.hypot(mf.hs_norm(z), spd_dist(p.abs_g, q.abs_g)))


def _exp_anti_hermitian(z: np.ndarray, t):
    """``exp(t z)`` for anti-Hermitian ``z`` via the spectrum of ``-i z``."""
    w, vecs = mf.herm_eig(-1j * z)
    t = np.asarray(t, dtype=float)
    phase = np.exp(1j * w * t[..., None])
    return (vecs * phase[..., None, :]) @ mf.adjoint(vecs)


def exp_anti_hermitian(z, t):
    z = mf.as_matrix(z)
    if not mf.is_hermitian(1j * z, rtol=1e-10):
        raise mf.NotHermitian("expected an anti-Hermitian generator")
    return _exp_anti_hermitian(z, t)


def exp_hermitian(y, t):
    """``exp(t y)`` for Hermitian ``y``; ``t`` may be an array."""
    w, vecs = mf.herm_eig(mf.check_hermitian(y, rtol=1e-10))
    t = np.asarray(t, dtype=float)
    return mf.from_eig(np.exp(w * t[..., None]), vecs)


__all__ = [
    "LEFT",
    "POLAR",
    "POSITIVE",
    "GroupPoint",
    "MetricKind",
    "as_group_point",
    "exp_anti_hermitian",
    "exp_hermitian",
    "left_exp",
    "left_metric",
    "polar_dist",
    "polar_geodesic",
    "polar_metric",
    "polar_parameters",
    "spd_dist",
    "spd_exp",
    "spd_geodesic",
    "spd_log",
    "spd_metric",
    "unitary_dist",
]
