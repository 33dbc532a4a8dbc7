import itertools

import numpy as np
import pytest
import scipy.linalg
from conftest import (
    rand_anti_hermitian,
    rand_complex,
    rand_invertible,
    rand_spd,
    rand_unitary,
)
from hypothesis import given, settings
from hypothesis import strategies as st

from opgeo import matfun as mf
from opgeo.errors import (
    BranchCut,
    InvalidP,
    NotHermitian,
    NotPositiveDefinite,
    Singular,
)


def test_sqrt_identity_and_diagonal():
    assert np.allclose(mf.herm_sqrt(np.eye(2)), np.eye(2), atol=1e-15)
    np.testing.assert_allclose(mf.herm_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), atol=1e-14)


def test_exp_log_round_trip_against_scipy(rng):
    p = rand_spd(rng, 8)
    back = mf.herm_exp(mf.herm_log(p))
    assert mf.hs_norm(back - p) < 1e-12 * mf.hs_norm(p) * 10
    # independent oracle
    assert mf.hs_norm(mf.herm_log(p) - scipy.linalg.logm(p)) < 1e-11


def test_funcalc_keeps_eigenvectors(rng):
    p = rand_spd(rng, 5)
    w, v = np.linalg.eigh(p)
    r = mf.herm_pow(p, 0.3)
    np.testing.assert_allclose(r @ v, v * w**0.3, atol=1e-12)
    assert mf.is_hermitian(r)


def test_funcalc_errors():
    with pytest.raises(NotPositiveDefinite):
        mf.herm_log(np.diag([1.0, 0.0]))
    with pytest.raises(NotPositiveDefinite):
        mf.herm_sqrt(np.diag([1.0, -1.0]))
    with pytest.raises(NotPositiveDefinite):
        mf.herm_pow(np.diag([1.0, 1e-14]), 0.5)
    with pytest.raises(NotHermitian):
        mf.herm_exp(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        mf.herm_funcalc(np.eye(2), "sin")
    # integer powers do not need positivity
    np.testing.assert_allclose(mf.herm_pow(np.diag([-2.0, 3.0]), 2), np.diag([4.0, 9.0]))


def test_matrix_exp_examples():
    assert np.array_equal(mf.matrix_exp(np.zeros((3, 3))), np.eye(3))
    np.testing.assert_allclose(mf.matrix_exp(np.diag([1j * np.pi / 2, 0])), np.diag([1j, 1]),
                               atol=1e-15)
    nil = np.array([[0.0, 1.0], [0.0, 0.0]])
    np.testing.assert_allclose(mf.matrix_exp(nil), np.eye(2) + nil, atol=1e-15)


def test_unitary_log_examples(rng):
    assert np.allclose(mf.unitary_log(np.eye(3)), 0)
    np.testing.assert_allclose(mf.unitary_log(np.diag([1j, 1])), np.diag([1j * np.pi / 2, 0]),
                               atol=1e-15)
    z = rand_anti_hermitian(rng, 6, opnorm=np.pi - 0.1)
    back = mf.unitary_log(scipy.linalg.expm(z))
    assert mf.hs_norm(back - z) < 1e-10
    assert np.linalg.norm(back, 2) <= np.pi


def test_unitary_log_branch_cut():
    with pytest.raises(BranchCut):
        mf.unitary_log(np.diag([-1.0, 1.0]))
    with pytest.raises(BranchCut):
        mf.unitary_log(np.diag([np.exp(1j * (np.pi - 1e-9)), 1.0]))
    # just outside the tolerance still works
    z = mf.unitary_log(np.diag([np.exp(1j * (np.pi - 1e-6)), 1.0]))
    assert abs(z[0, 0].imag - (np.pi - 1e-6)) < 1e-12


def test_polar_examples(rng):
    u, p = mf.polar_decompose(np.eye(3))
    assert np.allclose(u, np.eye(3)) and np.allclose(p, np.eye(3))
    g = np.array([[0.0, -2.0], [1.0, 0.0]])
    u, p = mf.polar_decompose(g)
    np.testing.assert_allclose(u, [[0, -1], [1, 0]], atol=1e-15)
    np.testing.assert_allclose(p, np.diag([1.0, 2.0]), atol=1e-15)
    g = rand_invertible(rng, 8)
    u, p = mf.polar_decompose(g)
    assert mf.hs_norm(u @ p - g) < 1e-12 * mf.hs_norm(g)
    uo, po = scipy.linalg.polar(g)
    assert mf.hs_norm(p - po) < 1e-11 and mf.hs_norm(u - uo) < 1e-11
    with pytest.raises(Singular):
        mf.polar_decompose(np.diag([1.0, 1e-14]))


@pytest.mark.parametrize("n", [2, 4, 8, 16])
def test_polar_postconditions_many(n):
    rng = np.random.default_rng(n)
    for _ in range(250):
        g = rand_complex(rng, n)
        u, p = mf.polar_decompose(g)
        assert mf.is_unitary(u, rtol=1e-12)
        assert np.min(np.linalg.eigvalsh(p)) > 0
        assert mf.hs_norm(u @ p - g) <= 1e-12 * mf.hs_norm(g) * np.sqrt(n)


def test_schatten_examples(rng):
    assert mf.schatten_norm(np.eye(5), 2) == pytest.approx(np.sqrt(5), abs=1e-15)
    assert mf.schatten_norm(np.diag([3.0, 4.0]), 2) == pytest.approx(5.0, abs=1e-15)
    x = rand_complex(rng, 8)
    assert mf.schatten_norm(x, np.inf) == pytest.approx(np.linalg.norm(x, 2), rel=1e-14)
    assert mf.schatten_norm(x, 1) == pytest.approx(np.linalg.norm(x, "nuc"), rel=1e-14)
    with pytest.raises(InvalidP):
        mf.schatten_norm(x, 0.5)


def test_schatten_monotone_in_p(rng):
    for _ in range(50):
        x = rand_complex(rng, 6)
        vals = [mf.schatten_norm(x, p) for p in (1, 2, 4, 8, np.inf)]
        assert all(a >= b * (1 - 1e-14) for a, b in itertools.pairwise(vals))
        assert vals[1] ** 2 == pytest.approx(mf.real_inner(x, x), rel=1e-12)


def test_herm_split(rng):
    h = rand_spd(rng, 4)
    a, b = mf.herm_split(h)
    assert np.allclose(a, 0) and np.allclose(b, h)
    z = rand_anti_hermitian(rng, 4)
    a, b = mf.herm_split(z)
    assert np.allclose(a, z) and np.allclose(b, 0)
    x = rand_complex(rng, 4)
    a, b = mf.herm_split(x)
    assert np.array_equal(a + b, x) or mf.hs_norm(a + b - x) < 1e-15
    assert mf.hs_norm(a + a.conj().T) == 0 and mf.hs_norm(b - b.conj().T) == 0


def test_stacks_are_supported(rng):
    ps = np.stack([rand_spd(rng, 3) for _ in range(4)])
    logs = mf.herm_log(ps)
    for p, lg in zip(ps, logs):
        assert mf.hs_norm(lg - mf.herm_log(p)) < 1e-13
    us = np.stack([rand_unitary(rng, 3) for _ in range(3)])
    zs = mf.unitary_log(us)
    assert zs.shape == (3, 3, 3)


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        mf.as_matrix(np.array([[np.nan, 0], [0, 1]]))
    with pytest.raises(ValueError):
        mf.as_matrix(np.ones((2, 3)))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 16), st.integers(0, 2**32 - 1), st.floats(1.0, 1e6))
def test_log_exp_round_trip_property(n, seed, cond):
    p = rand_spd(np.random.default_rng(seed), n, cond=cond)
    back = mf.herm_exp(mf.herm_log(p))
    assert mf.op_norm(back - p) <= 1e-11 * mf.op_norm(p)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 10), st.integers(0, 2**32 - 1))
def test_exp_of_unitary_log_property(n, seed):
    rng = np.random.default_rng(seed)
    u = rand_unitary(rng, n)
    try:
        z = mf.unitary_log(u)
    except BranchCut:
        return
    assert mf.hs_norm(mf.matrix_exp(z) - u) < 1e-10
