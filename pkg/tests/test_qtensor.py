"""Tensor-basis algebra: orthonormality, round trips, projections, physicality."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cholq import qtensor as qt
from cholq.errors import DomainError

from conftest import random_physical, random_rotation


def test_basis_orthonormal_traceless_symmetric():
    gram = np.einsum("aij,bij->ab", qt.BASIS, qt.BASIS)
    assert np.allclose(gram, np.eye(5), atol=1e-14)
    assert np.allclose(np.trace(qt.BASIS, axis1=1, axis2=2), 0.0, atol=1e-14)
    assert np.allclose(qt.BASIS, np.swapaxes(qt.BASIS, 1, 2), atol=1e-15)


def test_to_from_matrix_roundtrip():
    rng = np.random.default_rng(0)
    q5 = rng.standard_normal((7, 5))
    m = qt.to_matrix(q5)
    assert np.allclose(np.trace(m, axis1=-2, axis2=-1), 0.0, atol=1e-13)
    assert np.allclose(m, np.swapaxes(m, -1, -2), atol=1e-14)
    assert np.allclose(qt.from_matrix(m), q5, atol=1e-13)


def test_component_dot_equals_frobenius():
    rng = np.random.default_rng(1)
    a, b = rng.standard_normal((2, 5))
    ma, mb = qt.to_matrix(a), qt.to_matrix(b)
    assert np.isclose(a @ b, np.einsum("ij,ij->", ma, mb), atol=1e-13)


def test_sigma_matches_definition():
    n = np.array([0.0, 0.0, 1.0])
    expect = np.outer(n, n) - np.eye(3) / 3.0
    assert np.allclose(qt.to_matrix(qt.sigma(n)), expect, atol=1e-14)
    # |sigma|^2 = tr (n x n - I/3)^2 = 2/3 for any axis
    rng = np.random.default_rng(2)
    dirs = rng.standard_normal((20, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    norms = np.linalg.norm(qt.sigma(dirs), axis=1)
    assert np.allclose(norms, np.sqrt(2.0 / 3.0), atol=1e-12)


def test_sigma_rejects_non_unit():
    with pytest.raises(DomainError):
        qt.sigma(np.array([1.0, 1.0, 0.0]))


def test_sigma_is_even_in_n():
    rng = np.random.default_rng(3)
    n = rng.standard_normal(3)
    n /= np.linalg.norm(n)
    assert np.allclose(qt.sigma(n), qt.sigma(-n), atol=1e-14)


def test_min_eigenvalue_and_physicality():
    s_vals = np.array([-0.6, -0.49, 0.0, 0.5, 0.99, 1.2])
    n = np.array([0.0, 0.0, 1.0])
    q5 = qt.uniaxial(s_vals, n)
    lam = qt.min_eigenvalue(q5)
    # uniaxial s has eigenvalues (2s/3, -s/3, -s/3)
    expect = np.where(s_vals >= 0, -s_vals / 3.0, 2.0 * s_vals / 3.0)
    assert np.allclose(lam, expect, atol=1e-12)
    assert list(qt.is_physical(q5)) == [False, True, True, True, True, False]


def test_biaxiality_zero_on_uniaxial_and_positive_otherwise():
    n = np.array([1.0, 0.0, 0.0])
    assert qt.biaxiality(qt.uniaxial(0.6, n)) < 1e-12
    assert qt.biaxiality(np.zeros(5)) == 0.0
    # maximally biaxial: eigenvalues (t, -t, 0)
    m = np.diag([0.2, -0.2, 0.0])
    assert qt.biaxiality(qt.from_matrix(m)) > 0.999


def test_uniaxial_project_roundtrip_and_residual():
    rng = np.random.default_rng(4)
    dirs = rng.standard_normal((30, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    s = rng.uniform(-0.4, 0.9, 30)
    q5 = qt.uniaxial(s, dirs)
    s_hat, n_hat, info = qt.uniaxial_project(q5)
    assert np.allclose(s_hat, s, atol=1e-10)
    align = np.abs(np.einsum("ka,ka->k", n_hat, dirs))
    assert np.allclose(align, 1.0, atol=1e-10)
    assert np.all(info["residual"] < 1e-10)


def test_rotate_preserves_invariants_and_physicality():
    rng = np.random.default_rng(5)
    q5 = random_physical(rng, 25)
    rot = random_rotation(rng)
    q5r = qt.rotate(q5, rot)
    assert np.allclose(np.linalg.norm(q5r, axis=1), np.linalg.norm(q5, axis=1), atol=1e-12)
    assert np.allclose(qt.min_eigenvalue(q5r), qt.min_eigenvalue(q5), atol=1e-12)


def test_skew_matrix_cross_product():
    rng = np.random.default_rng(6)
    z = rng.standard_normal((8, 3))
    x = rng.standard_normal((8, 3))
    w = qt.skew_matrix(z)
    assert np.allclose(np.einsum("kij,kj->ki", w, x), np.cross(z, x), atol=1e-14)


def test_bytes_roundtrip():
    rng = np.random.default_rng(7)
    q5 = rng.standard_normal((3, 5))
    assert np.array_equal(qt.from_bytes(qt.to_bytes(q5), shape=(3, 5)), q5)


@settings(deadline=None, max_examples=60)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_eigendecompose_reconstructs(seed):
    rng = np.random.default_rng(seed)
    q5 = rng.standard_normal(5)
    evals, evecs = qt.eigendecompose(q5)
    rebuilt = (evecs * evals[None, :]) @ evecs.T
    assert np.allclose(rebuilt, qt.to_matrix(q5), atol=1e-12)
    assert np.isclose(evals.sum(), 0.0, atol=1e-12)
