r"""Dense matrix functions on small complex matrices.

Everything here accepts either a single ``(n, n)`` array or a stack
``(..., n, n)`` and works in complex128. Hermitian functions go through a
full eigendecomposition; the general exponential is scaling-and-squaring
with a degree-13 Padé approximant (``scipy.linalg.expm``).

Inner products and norms use the real trace pairing
:math:`\langle a, b\rangle = \operatorname{Re}\operatorname{Tr}(b^* a)`, so
real-linear subspaces of :math:`M_n(\mathbb{C})` get honest orthogonal
projections.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import (
    BranchCut,
    InvalidP,
    NotHermitian,
    NotPositiveDefinite,
    NotUnitary,
    Singular,
)

HERMITIAN_RTOL = 1e-12
POSITIVITY_RTOL = 1e-12
SINGULAR_RTOL = 1e-12
BRANCH_TOL = 1e-8
UNITARY_RTOL = 1e-12

_FUNCS = ("exp", "log", "sqrt", "pow")


def as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ValueError(f"expected square matrix (or stack), got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def adjoint(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def eye_like(a: np.ndarray) -> np.ndarray:
    return np.broadcast_to(np.eye(a.shape[-1], dtype=complex), a.shape).copy()


def hs_norm(x) -> np.ndarray | float:
    """Hilbert-Schmidt (Frobenius) norm over the last two axes."""
    x = np.asarray(x)
    return np.sqrt(np.sum(np.abs(x) ** 2, axis=(-2, -1)))


def real_inner(a, b) -> np.ndarray | float:
    """``Re Tr(b* a)`` over the last two axes."""
    return np.sum(np.real(np.conj(b) * a), axis=(-2, -1))


def op_norm(x) -> np.ndarray | float:
    return np.linalg.norm(np.asarray(x, dtype=complex), ord=2, axis=(-2, -1))


def hermitian_part(x: np.ndarray) -> np.ndarray:
    return 0.5 * (x + adjoint(x))


def herm_split(x) -> tuple[np.ndarray, np.ndarray]:
    """Split ``x`` into anti-Hermitian and Hermitian parts.

    Returns ``((x - x*)/2, (x + x*)/2)``.
    """
    x = as_matrix(x)
    xs = adjoint(x)
    return 0.5 * (x - xs), 0.5 * (x + xs)


def is_hermitian(a, rtol: float = HERMITIAN_RTOL) -> bool:
    a = np.asarray(a, dtype=complex)
    gap = hs_norm(a - adjoint(a))
    return bool(np.all(gap <= rtol * np.maximum(hs_norm(a), 1e-300)))


def is_unitary(u, rtol: float = UNITARY_RTOL) -> bool:
    u = np.asarray(u, dtype=complex)
    n = u.shape[-1]
    gap = hs_norm(adjoint(u) @ u - np.eye(n))
    return bool(np.all(gap <= rtol * np.sqrt(n)))


def check_hermitian(a, rtol: float = HERMITIAN_RTOL) -> np.ndarray:
    a = as_matrix(a)
    if not is_hermitian(a, rtol):
        raise NotHermitian("matrix is not Hermitian to tolerance")
    return a


def herm_eig(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of the Hermitian part of ``a`` (no checks)."""
    return np.linalg.eigh(hermitian_part(a))


def from_eig(w: np.ndarray, q: np.ndarray) -> np.ndarray:
    r = (q * w[..., None, :]) @ adjoint(q)
    return hermitian_part(r)


def _check_positive(w: np.ndarray) -> None:
    scale = np.max(np.abs(w), axis=-1, keepdims=True)
    if np.any(w <= POSITIVITY_RTOL * scale):
        raise NotPositiveDefinite(
            f"eigenvalue {float(np.min(w)):.3e} at or below the positivity floor"
        )


def spd_eig(p) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of an SPD matrix, raising if it is not positive."""
    w, q = herm_eig(as_matrix(p))
    _check_positive(w)
    return w, q


def herm_funcalc(a, func: str, power: float | None = None) -> np.ndarray:
    """Apply a scalar function to a Hermitian matrix through its spectrum.

    Parameters
    ----------
    a : array_like, shape (..., n, n)
        Hermitian matrix or stack.
    func : {"exp", "log", "sqrt", "pow"}
    power : float, optional
        Exponent, required when ``func == "pow"``.

    Raises
    ------
    NotHermitian
    NotPositiveDefinite
        For ``log``, ``sqrt`` and non-integer powers when some eigenvalue is
        at or below ``1e-12 * ||a||``.
    """
    if func not in _FUNCS:
        raise ValueError(f"unknown matrix function {func!r}")
    if func == "pow" and power is None:
        raise ValueError("func='pow' needs a power")
    a = check_hermitian(a)
    w, q = herm_eig(a)
    if func == "exp":
        return from_eig(np.exp(w), q)
    integer_power = func == "pow" and float(power).is_integer() and power >= 0
    if not integer_power:
        _check_positive(w)
    if func == "log":
        fw = np.log(w)
    elif func == "sqrt":
        fw = np.sqrt(w)
    elif integer_power:
        fw = w ** int(power)
    else:
        fw = w ** float(power)
    return from_eig(fw, q)


def herm_exp(a) -> np.ndarray:
    return herm_funcalc(a, "exp")


def herm_log(a) -> np.ndarray:
    return herm_funcalc(a, "log")


def herm_sqrt(a) -> np.ndarray:
    return herm_funcalc(a, "sqrt")


def herm_pow(a, power: float) -> np.ndarray:
    return herm_funcalc(a, "pow", power)


def matrix_exp(x) -> np.ndarray:
    """General matrix exponential (scaling and squaring, Padé 13)."""
    x = as_matrix(x)
    if not np.any(x):
        return eye_like(x)
    return np.asarray(scipy.linalg.expm(x), dtype=complex)


def unitary_log(u, branch_tol: float = BRANCH_TOL) -> np.ndarray:
    """Principal logarithm of a unitary matrix.

    The result ``z`` is anti-Hermitian with eigenvalue phases in
    ``(-pi, pi]``, so ``||z|| <= pi`` in operator norm.

    Raises
    ------
    BranchCut
        If an eigenvalue phase lies within ``branch_tol`` of ``pi``.
    NotUnitary
        If ``u`` is visibly non-normal (Schur form not diagonal).
    """
    u = as_matrix(u)
    if u.ndim > 2:
        return np.stack([unitary_log(ui, branch_tol) for ui in u])
    t, z = scipy.linalg.schur(u, output="complex")
    d = np.diag(t)
    off = hs_norm(t - np.diag(d))
    if off > 1e-8 * np.sqrt(u.shape[0]) or np.any(np.abs(np.abs(d) - 1) > 1e-8):
        raise NotUnitary("matrix is not unitary to tolerance")
    theta = np.angle(d)
    if np.any(np.pi - np.abs(theta) < branch_tol):
        raise BranchCut("unitary has an eigenvalue at -1; principal log is ambiguous")
    r = (z * (1j * theta)[None, :]) @ adjoint(z)
    return 0.5 * (r - adjoint(r))


def polar_decompose(g) -> tuple[np.ndarray, np.ndarray]:
    """Polar decomposition ``g = u P`` with ``u`` unitary, ``P = (g* g)^{1/2}``.

    Computed from the SVD ``g = W S V*`` as ``u = W V*``, ``P = V S V*``.

    Raises
    ------
    Singular
        If the smallest singular value is at or below ``1e-12 * ||g||``.
    """
    g = as_matrix(g)
    w, s, vh = np.linalg.svd(g)
    if np.any(s[..., -1] <= SINGULAR_RTOL * s[..., 0]) or np.any(s[..., 0] == 0):
        raise Singular("matrix is numerically singular")
    u = w @ vh
    v = adjoint(vh)
    p = hermitian_part((v * s[..., None, :]) @ vh)
    return u, p


def schatten_norm(x, p: float = 2) -> float | np.ndarray:
    """Schatten p-norm: the l^p norm of the singular values.

    ``p=2`` is the Hilbert-Schmidt norm and ``p=inf`` the operator norm.
    """
    if not p >= 1:
        raise InvalidP(f"Schatten norm needs p >= 1, got {p}")
    x = as_matrix(x)
    if p == 2:
        return hs_norm(x)
    s = np.linalg.svd(x, compute_uv=False)
    if np.isinf(p):
        return s[..., 0]
    smax = s[..., :1]
    safe = np.where(smax > 0, smax, 1.0)
    return safe[..., 0] * np.sum((s / safe) ** p, axis=-1) ** (1.0 / p)


def inv(a) -> np.ndarray:
    a = as_matrix(a)
    s = np.linalg.svd(a, compute_uv=False)
    if np.any(s[..., -1] <= SINGULAR_RTOL * s[..., 0]) or np.any(s[..., 0] == 0):
        raise Singular("matrix is numerically singular")
    return np.linalg.inv(a)


def spd_sqrt_pair(p) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(p^{1/2}, p^{-1/2})`` for an SPD matrix."""
    w, q = spd_eig(p)
    r = np.sqrt(w)
    return from_eig(r, q), from_eig(1.0 / r, q)
