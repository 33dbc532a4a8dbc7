import numpy as np
import pytest
import scipy.linalg
from conftest import rand_invertible, rand_spd

from opgeo import matfun as mf
from opgeo.errors import DegenerateBasis, OddDimension
from opgeo.fileio import dumps, read_spec, spec_to_dict
from opgeo.manifolds import spd_dist
from opgeo.subgroups import (
    BUILTIN_KINDS,
    LieAlgebraSpec,
    SubgroupContext,
    action_preserves_distance,
    builtin_algebra,
    cartan_split,
    conjugation_residual,
    in_algebra,
    isometric_action,
    polar_closure_residuals,
    project_to_algebra,
    random_group_element,
    symplectic_form,
    transitivity_witness,
    triple_system_check,
    validate_algebra,
)


def _constraint_nullity(n, constraints):
    """Dimension of real n x n matrices satisfying linear constraints (brute force)."""
    rows = []
    for k in range(n * n):
        e = np.zeros(n * n)
        e[k] = 1.0
        x = e.reshape(n, n)
        rows.append(np.concatenate([c(x).ravel() for c in constraints]))
    a = np.array(rows).T
    return n * n - np.linalg.matrix_rank(a)


def test_builtin_dimensions():
    spec = builtin_algebra("unitary", 2)
    assert spec.real_dim == 4
    assert cartan_split(spec).dims == (4, 0)
    spec = builtin_algebra("full_gl", 2)
    assert spec.real_dim == 8
    assert cartan_split(spec).dims == (4, 4)
    assert cartan_split(builtin_algebra("full_gl", 3)).dims == (9, 9)


def test_symplectic_dimensions_against_constraint_rank():
    j = symplectic_form(4)
    ham = lambda x: x.T @ j + j @ x
    skew = lambda x: x + x.T
    sym = lambda x: x - x.T
    spec = builtin_algebra("symplectic", 4)
    split = cartan_split(spec)
    assert spec.real_dim == _constraint_nullity(4, [ham]) == 10
    assert split.dims == (_constraint_nullity(4, [ham, skew]), _constraint_nullity(4, [ham, sym]))
    assert split.dims == (4, 6)
    assert triple_system_check(split).max_residual < 1e-12
    with pytest.raises(OddDimension):
        builtin_algebra("symplectic", 3)


@pytest.mark.parametrize("kind,n", [(k, n) for k in BUILTIN_KINDS for n in (2, 4)])
def test_builtins_validate_and_split(kind, n):
    spec = builtin_algebra(kind, n)
    assert validate_algebra(spec).passed
    split = cartan_split(spec)
    assert sum(split.dims) == spec.real_dim
    tri = triple_system_check(split)
    assert tri.max_residual < 1e-10
    assert tri.orthogonality < 1e-14
    for k in split.k_basis:
        assert mf.hs_norm(k + k.conj().T) < 1e-14
    for m in split.m_basis:
        assert mf.hs_norm(m - m.conj().T) < 1e-14


def test_validation_examples():
    assert validate_algebra(builtin_algebra("unitary", 3)).passed
    rep = validate_algebra(LieAlgebraSpec("d", 2, np.array([np.diag([1.0, 0.0])])))
    assert rep.passed
    e12 = np.array([[0.0, 1.0], [0.0, 0.0]])
    rep = validate_algebra(LieAlgebraSpec("nil", 2, np.array([e12])))
    assert not rep.passed
    assert rep.adjoint_residual == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(DegenerateBasis):
        LieAlgebraSpec("dup", 2, np.array([e12, 2 * e12]))


def test_projection_examples(rng):
    spec = builtin_algebra("symplectic", 4)
    b = spec.basis[3]
    proj, res = project_to_algebra(spec, b)
    assert mf.hs_norm(proj - b) < 1e-14 and res < 1e-14
    # a Hermitian imaginary matrix is orthogonal to the real algebra
    w = 1j * np.eye(4)
    proj, res = project_to_algebra(spec, w)
    assert mf.hs_norm(proj) < 1e-14 and res == pytest.approx(2.0)
    c = rng.standard_normal(spec.real_dim)
    x = np.tensordot(c, spec.basis, axes=(0, 0)) + 0.3 * w
    proj, res = project_to_algebra(spec, x)
    assert res == pytest.approx(0.3 * mf.hs_norm(w), abs=1e-12)
    assert in_algebra(spec, x - 0.3 * w)
    assert not in_algebra(spec, x)


def test_isometric_action(rng):
    p, q = rand_spd(rng, 6), rand_spd(rng, 6)
    assert mf.hs_norm(isometric_action(np.eye(6), p) - p) < 1e-14
    wit = transitivity_witness(p, q)
    assert mf.hs_norm(isometric_action(wit, p) - q) < 1e-10 * mf.hs_norm(q)
    for _ in range(500):
        g, p, q = rand_invertible(rng, 6), rand_spd(rng, 6), rand_spd(rng, 6)
        err = abs(spd_dist(isometric_action(g, p), isometric_action(g, q)) - spd_dist(p, q))
        assert err < 1e-10
        assert action_preserves_distance(g, p, q) < 1e-10


def test_symmetric_witness_solves_riccati(rng):
    # the symmetric midpoint form solves g p^{-1} g = q rather than g p g = q
    p, q = rand_spd(rng, 4), rand_spd(rng, 4)
    sq = scipy.linalg.sqrtm(p)
    isq = np.linalg.inv(sq)
    g = sq @ scipy.linalg.sqrtm(isq @ q @ isq) @ sq
    assert mf.hs_norm(g @ np.linalg.inv(p) @ g - q) < 1e-10 * mf.hs_norm(q)


def test_random_group_element():
    spec = builtin_algebra("full_gl", 3)
    for spread in (1e-2, 1e-4):
        g = random_group_element(spec, 1, spread)
        assert mf.hs_norm(g.g - np.eye(3)) <= 6 * spread
    g = random_group_element(builtin_algebra("unitary", 4), 3, 1.0)
    assert mf.is_unitary(g.g, rtol=1e-12)
    g = random_group_element(builtin_algebra("symplectic", 4), 42, 1.0)
    j = symplectic_form(4)
    assert mf.hs_norm(g.g.T @ j @ g.g - j) < 1e-10
    a = random_group_element(spec, 7, 0.5)
    b = random_group_element(spec, 7, 0.5)
    assert np.array_equal(a.g, b.g)


@pytest.mark.parametrize("kind,n", [("full_gl", 4), ("unitary", 4), ("symplectic", 4),
                                    ("orthogonal", 4)])
def test_polar_closure_and_conjugation(kind, n):
    ctx = SubgroupContext.builtin(kind, n)
    rng = np.random.default_rng(5)
    k_spec = LieAlgebraSpec("k", n, ctx.split.k_basis)
    for i in range(200):
        g = random_group_element(ctx.spec, rng, 1.0)
        rm, rk = polar_closure_residuals(ctx, g)
        assert rm < 1e-8 and rk < 1e-8
    for i in range(20):
        k = np.tensordot(rng.standard_normal(k_spec.real_dim), k_spec.onb, axes=(0, 0))
        for m in ctx.split.m_basis:
            assert conjugation_residual(ctx, k, m) < 1e-10


def test_spec_file_round_trip(tmp_path):
    spec = builtin_algebra("symplectic", 4)
    path = tmp_path / "sp4.json"
    path.write_text(dumps(spec_to_dict(spec)))
    back = read_spec(path)
    assert back.name == spec.name and np.allclose(back.basis, spec.basis, atol=0)
