"""Self-adjoint matrix subgroups described by a real basis of their Lie algebra.

A subgroup ``G`` is handled through its Lie algebra ``g``, given as a list of
complex matrices spanning ``g`` over the reals. Membership, projections and
the Cartan split ``g = k + m`` (anti-Hermitian plus Hermitian parts) are then
plain real linear algebra on the vectorised matrices, with the inner product
``Re Tr(b* a)``.

The compact part ``K = G ∩ U`` and the positive part ``M_G = exp(m)`` are
never enumerated; membership is tested by projecting logarithms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import matfun as mf
from .errors import DegenerateBasis, OddDimension
from .manifolds import GroupPoint, as_group_point, spd_dist

CLOSURE_TOL = 1e-10
BUILTIN_KINDS = ("full_gl", "unitary", "symplectic", "orthogonal")


def _vec(mats: np.ndarray) -> np.ndarray:
    """Real vectorisation, ``(k, n, n)`` complex -> ``(k, 2 n^2)`` real."""
    mats = np.asarray(mats, dtype=complex)
    flat = mats.reshape(mats.shape[0], -1)
    return np.concatenate([flat.real, flat.imag], axis=1)


def _unvec(vecs: np.ndarray, n: int) -> np.ndarray:
    half = n * n
    return (vecs[:, :half] + 1j * vecs[:, half:]).reshape(-1, n, n)


def orthonormalize(mats, rtol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (real trace pairing) for the real span of ``mats``."""
    mats = np.asarray(mats, dtype=complex)
    if mats.shape[0] == 0:
        return mats.reshape(0, *mats.shape[1:])
    n = mats.shape[-1]
    _, s, vh = np.linalg.svd(_vec(mats), full_matrices=False)
    rank = int(np.sum(s > rtol * s[0])) if s[0] > 0 else 0
    return _unvec(vh[:rank], n)


@dataclass(frozen=True)
class LieAlgebraSpec:
    """A real-linear basis of a matrix Lie algebra."""

    name: str
    dim: int
    basis: np.ndarray
    onb: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=complex)
        if basis.ndim != 3 or basis.shape[1:] != (self.dim, self.dim):
            raise ValueError("basis must have shape (k, dim, dim)")
        if basis.shape[0] == 0:
            raise DegenerateBasis("empty basis")
        gram = _vec(basis) @ _vec(basis).T
        sv = np.linalg.svd(gram, compute_uv=False)
        if sv[-1] <= 1e-12 * sv[0]:
            raise DegenerateBasis("basis is not real-linearly independent")
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "onb", orthonormalize(basis))

    @property
    def real_dim(self) -> int:
        return self.basis.shape[0]

    def gram_condition(self) -> float:
        return float(np.linalg.cond(_vec(self.basis) @ _vec(self.basis).T))


def project(onb: np.ndarray, x) -> np.ndarray:
    """Orthogonal projection of ``x`` (or a stack) onto the span of ``onb``."""
    x = np.asarray(x, dtype=complex)
    if onb.shape[0] == 0:
        return np.zeros_like(x)
    coeffs = np.einsum("kij,...ij->...k", onb.conj(), x).real
    return np.einsum("...k,kij->...ij", coeffs, onb)


def project_to_algebra(spec: LieAlgebraSpec, x) -> tuple[np.ndarray, float]:
    """Project ``x`` onto ``g``; returns ``(projection, ||x - projection||_2)``."""
    x = mf.as_matrix(x)
    proj = project(spec.onb, x)
    return proj, float(np.max(mf.hs_norm(x - proj)))


def in_algebra(spec: LieAlgebraSpec, x, tol: float = CLOSURE_TOL) -> bool:
    _, res = project_to_algebra(spec, x)
    return res < tol * max(1.0, float(np.max(mf.hs_norm(x))))


# -- builtin algebras --------------------------------------------------------


def _unit(n: int, i: int, j: int) -> np.ndarray:
    e = np.zeros((n, n), dtype=complex)
    e[i, j] = 1.0
    return e


def symplectic_form(n: int) -> np.ndarray:
    """Standard skew form ``J = [[0, I], [-I, 0]]`` of size ``n = 2m``."""
    if n % 2:
        raise OddDimension(f"symplectic algebra needs even size, got {n}")
    m = n // 2
    j = np.zeros((n, n))
    j[:m, m:] = np.eye(m)
    j[m:, :m] = -np.eye(m)
    return j


def _full_gl(n):
    real = [_unit(n, i, j) for i in range(n) for j in range(n)]
    return real + [1j * e for e in real]


def _unitary(n):
    out = [1j * _unit(n, i, i) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            out.append(_unit(n, i, j) - _unit(n, j, i))
            out.append(1j * (_unit(n, i, j) + _unit(n, j, i)))
    return out


def _orthogonal(n):
    return [_unit(n, i, j) - _unit(n, j, i) for i in range(n) for j in range(i + 1, n)]


def _symplectic(n):
    # [[A, B], [C, -A^T]] with B, C symmetric
    m = n // 2
    out = []
    for i in range(m):
        for j in range(m):
            out.append(_unit(n, i, j) - _unit(n, m + j, m + i))
    for i in range(m):
        for j in range(i, m):
            b = _unit(n, i, m + j) + _unit(n, j, m + i)
            out.append(b if i != j else b / 2)
            c = _unit(n, m + i, j) + _unit(n, m + j, i)
            out.append(c if i != j else c / 2)
    return out


_BUILDERS = {
    "full_gl": _full_gl,
    "unitary": _unitary,
    "orthogonal": _orthogonal,
    "symplectic": _symplectic,
}


def builtin_algebra(kind: str, n: int) -> LieAlgebraSpec:
    """Canonical basis for ``gl(n, C)``, ``u(n)``, ``sp(n, R)`` or ``so(n)``."""
    if kind not in _BUILDERS:
        raise ValueError(f"unknown algebra kind {kind!r}; choose from {BUILTIN_KINDS}")
    if n < 1:
        raise ValueError("size must be positive")
    if kind == "symplectic":
        symplectic_form(n)  # raises OddDimension
    if kind == "orthogonal" and n < 2:
        raise DegenerateBasis("so(1) is zero-dimensional")
    return LieAlgebraSpec(f"{kind}({n})", n, np.array(_BUILDERS[kind](n)))


# -- validation and Cartan split ---------------------------------------------


@dataclass
class ValidationReport:
    name: str
    real_dim: int
    bracket_residual: float
    adjoint_residual: float
    gram_condition: float
    tol: float = CLOSURE_TOL

    @property
    def passed(self) -> bool:
        return self.bracket_residual < self.tol and self.adjoint_residual < self.tol

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "real_dim": self.real_dim,
            "bracket_residual": self.bracket_residual,
            "adjoint_residual": self.adjoint_residual,
            "gram_condition": self.gram_condition,
            "pass": self.passed,
        }


def _bracket(a, b):
    return a @ b - b @ a


def validate_algebra(spec: LieAlgebraSpec) -> ValidationReport:
    """Check that the span of the basis is closed under brackets and adjoints.

    Residuals are computed on the orthonormalised basis, so they do not depend
    on how the supplied basis is scaled.
    """
    onb = spec.onb
    k = onb.shape[0]
    idx_i, idx_j = np.triu_indices(k, 1)
    brackets = _bracket(onb[idx_i], onb[idx_j])
    br = float(np.max(mf.hs_norm(brackets - project(onb, brackets)))) if len(idx_i) else 0.0
    adj = mf.adjoint(onb)
    ad = float(np.max(mf.hs_norm(adj - project(onb, adj))))
    return ValidationReport(spec.name, k, br, ad, spec.gram_condition())


@dataclass(frozen=True)
class CartanSplit:
    """Orthonormal bases of ``k = g ∩ u(n)`` and ``m = g ∩ Herm(n)``."""

    k_basis: np.ndarray
    m_basis: np.ndarray

    @property
    def dims(self) -> tuple[int, int]:
        return self.k_basis.shape[0], self.m_basis.shape[0]


def cartan_split(spec: LieAlgebraSpec) -> CartanSplit:
    """Split ``g`` into its anti-Hermitian and Hermitian parts.

    Each basis element is split with :func:`opgeo.matfun.herm_split` and the
    two families are re-orthonormalised. For a ``*``-closed algebra both parts
    stay inside ``g`` and their dimensions add up to ``dim g``.
    """
    anti, herm = mf.herm_split(spec.basis)
    k = orthonormalize(anti)
    m = orthonormalize(herm)
    if k.shape[0] + m.shape[0] != spec.real_dim:
        raise DegenerateBasis(
            f"split dimensions {k.shape[0]} + {m.shape[0]} != {spec.real_dim}; "
            "algebra is not closed under adjoints"
        )
    return CartanSplit(k, m)


@dataclass(frozen=True)
class SubgroupContext:
    spec: LieAlgebraSpec
    split: CartanSplit

    @classmethod
    def from_spec(cls, spec: LieAlgebraSpec) -> SubgroupContext:
        return cls(spec, cartan_split(spec))

    @classmethod
    def builtin(cls, kind: str, n: int) -> SubgroupContext:
        return cls.from_spec(builtin_algebra(kind, n))


@dataclass
class TripleSystemReport:
    kk_residual: float
    km_residual: float
    mm_residual: float
    orthogonality: float
    tol: float = CLOSURE_TOL

    @property
    def max_residual(self) -> float:
        return max(self.kk_residual, self.km_residual, self.mm_residual)

    @property
    def passed(self) -> bool:
        return self.max_residual < self.tol

    def as_dict(self) -> dict:
        return {
            "kk_residual": self.kk_residual,
            "km_residual": self.km_residual,
            "mm_residual": self.mm_residual,
            "orthogonality": self.orthogonality,
            "max_residual": self.max_residual,
            "pass": self.passed,
        }


def _pair_residual(a, b, target) -> float:
    if a.shape[0] == 0 or b.shape[0] == 0:
        return 0.0
    br = _bracket(a[:, None], b[None, :]).reshape(-1, *a.shape[1:])
    return float(np.max(mf.hs_norm(br - project(target, br))))


def triple_system_check(split: CartanSplit) -> TripleSystemReport:
    """Exhaustive bracket table: ``[k,k] ⊂ k``, ``[k,m] ⊂ m``, ``[m,m] ⊂ k``.

    Also reports the largest ``|Re Tr(k* m)|`` over basis pairs.
    """
    k, m = split.k_basis, split.m_basis
    orth = 0.0
    if k.shape[0] and m.shape[0]:
        orth = float(np.max(np.abs(_vec(k) @ _vec(m).T)))
    return TripleSystemReport(
        kk_residual=_pair_residual(k, k, k),
        km_residual=_pair_residual(k, m, m),
        mm_residual=_pair_residual(m, m, k),
        orthogonality=orth,
    )


# -- group level -------------------------------------------------------------


def isometric_action(g, p) -> np.ndarray:
    """``I_g(p) = g p g*``, an isometry of the positive cone."""
    gm = g.g if isinstance(g, GroupPoint) else mf.as_matrix(g)
    p = mf.as_matrix(p)
    mf.spd_eig(p)
    return mf.hermitian_part(gm @ p @ mf.adjoint(gm))


def transitivity_witness(p, q) -> np.ndarray:
    """An element ``g`` of the group with ``g p g* = q``.

    ``g = p^{1/2} (p^{-1/2} q p^{-1/2})^{1/2} p^{-1/2}``. The symmetric
    variant with ``p^{1/2}`` on both sides is the positive solution of
    ``g p^{-1} g = q`` instead; it maps ``p`` to ``q`` only when ``p = 1``.
    """
    sq, isq = mf.spd_sqrt_pair(p)
    mid = mf.herm_sqrt(mf.hermitian_part(isq @ mf.as_matrix(q) @ isq))
    return sq @ mid @ isq


def random_algebra_element(spec: LieAlgebraSpec, rng: np.random.Generator, spread: float):
    """Gaussian coefficients on the orthonormal basis, clipped to norm ``spread``."""
    coeffs = rng.standard_normal(spec.onb.shape[0]) * (spread / np.sqrt(spec.onb.shape[0]))
    v = np.tensordot(coeffs, spec.onb, axes=(0, 0))
    norm = mf.hs_norm(v)
    if norm > spread:
        v = v * (spread / norm)
    return v


def random_group_element(spec: LieAlgebraSpec, seed, spread: float) -> GroupPoint:
    """Product of one to three exponentials of random algebra elements.

    Deterministic in ``seed`` (an int, a sequence of ints or a Generator).
    """
    if not spread > 0:
        raise ValueError("spread must be positive")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    g = np.eye(spec.dim, dtype=complex)
    for _ in range(int(rng.integers(1, 4))):
        g = g @ mf.matrix_exp(random_algebra_element(spec, rng, spread))
    return GroupPoint.from_matrix(g)


def polar_closure_residuals(ctx: SubgroupContext, g) -> tuple[float, float]:
    """Residuals of ``log |g|`` against ``m`` and ``log u_g`` against ``k``.

    May raise :class:`~opgeo.errors.BranchCut` from the unitary logarithm.
    """
    g = as_group_point(g)
    log_abs = mf.herm_log(g.abs_g)
    log_u = mf.unitary_log(g.u)
    rm = float(mf.hs_norm(log_abs - project(ctx.split.m_basis, log_abs)))
    rk = float(mf.hs_norm(log_u - project(ctx.split.k_basis, log_u)))
    return rm, rk


def conjugation_residual(ctx: SubgroupContext, k_elem, x) -> float:
    """Residual of ``u x u*`` against ``m`` for ``u = exp(k_elem)``."""
    u = mf.matrix_exp(k_elem)
    y = u @ x @ mf.adjoint(u)
    return float(mf.hs_norm(y - project(ctx.split.m_basis, y)))


def action_preserves_distance(g, p, q) -> float:
    """``|d(I_g p, I_g q) - d(p, q)|``."""
    return abs(spd_dist(isometric_action(g, p), isometric_action(g, q)) - spd_dist(p, q))


__all__ = [
    "BUILTIN_KINDS",
    "CartanSplit",
    "LieAlgebraSpec",
    "SubgroupContext",
    "TripleSystemReport",
    "ValidationReport",
    "action_preserves_distance",
    "builtin_algebra",
    "cartan_split",
    "conjugation_residual",
    "in_algebra",
    "isometric_action",
    "orthonormalize",
    "polar_closure_residuals",
    "project",
    "project_to_algebra",
    "random_algebra_element",
    "random_group_element",
    "symplectic_form",
    "transitivity_witness",
    "triple_system_check",
    "validate_algebra",
]
