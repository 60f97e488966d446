"""Singular potential: inversion round trips, gradients, scalar ray, grading."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cholq import entropy, qtensor
from cholq.errors import ConvergenceError, DomainError, PhysicalityError
from cholq.quadrature import sphere_quadrature

from conftest import random_physical


def test_psi_s_at_zero_is_uniform_entropy():
    assert abs(entropy.psi_s(np.zeros(5)) + np.log(4.0 * np.pi)) < 1e-12


def test_roundtrip_inverse_of_lambda():
    rng = np.random.default_rng(10)
    q5 = random_physical(rng, 100)
    lam = entropy.lambda_of(q5)
    back = entropy.inverse_lambda(lam)
    assert np.abs(back - q5).max() < 1e-9


def test_lambda_of_warm_start_matches_cold():
    rng = np.random.default_rng(11)
    q5 = random_physical(rng, 20)
    lam_cold = entropy.lambda_of(q5)
    lam_warm = entropy.lambda_of(q5, init=lam_cold + 0.05)
    assert np.abs(lam_cold - lam_warm).max() < 1e-7


def test_lambda_of_rejects_unphysical():
    bad = qtensor.uniaxial(np.array([-0.55]), np.array([0.0, 0.0, 1.0]))
    with pytest.raises(PhysicalityError):
        entropy.lambda_of(bad)


def test_gradient_of_psi_is_lambda():
    rng = np.random.default_rng(12)
    q5 = random_physical(rng, 12, margin=0.05)
    ev = entropy.evaluate(q5)
    h = 1e-6
    worst = 0.0
    for a in range(5):
        shift = np.zeros(5)
        shift[a] = h
        fd = (entropy.psi_s(q5 + shift) - entropy.psi_s(q5 - shift)) / (2.0 * h)
        rel = np.abs(fd - ev.conjugate[:, a]) / np.maximum(np.abs(ev.conjugate[:, a]), 1.0)
        worst = max(worst, float(rel.max()))
    assert worst < 1e-5


def test_convexity_along_segments():
    rng = np.random.default_rng(13)
    a = random_physical(rng, 6, margin=0.05)
    b = random_physical(rng, 6, margin=0.05)
    mid = 0.5 * (a + b)
    psi = entropy.psi_s
    assert np.all(psi(mid) <= 0.5 * (psi(a) + psi(b)) + 1e-10)


def test_graded_rule_matches_reference_rule():
    rng = np.random.default_rng(14)
    q5 = random_physical(rng, 40)
    ref = entropy.evaluate(q5, quad=sphere_quadrature())
    graded = entropy.evaluate(q5)
    assert np.abs(ref.value - graded.value).max() < 1e-9
    assert np.abs(ref.conjugate - graded.conjugate).max() < 1e-7


def test_graded_rule_upgrades_near_boundary():
    # strongly ordered tensor: conjugate field far above the smallest rule's trust bound
    q5 = qtensor.uniaxial(np.array([0.985]), np.array([0.0, 0.0, 1.0]))
    ref = entropy.evaluate(q5, quad=sphere_quadrature())
    graded = entropy.evaluate(q5)
    assert np.linalg.norm(graded.conjugate) > 25.0
    assert np.abs(ref.value - graded.value).max() < 1e-9


def test_scalar_ray_matches_full_solver():
    for s in (-0.3, 0.1, 0.45, 0.8):
        lam_full = entropy.lambda_of(qtensor.uniaxial(np.array([s]), np.array([0.0, 0.0, 1.0])))
        # on the ray, Lambda = l sigma(n); recover l from the E2 component
        l_scalar = entropy.lambda_scalar(s)
        lam_ray = qtensor.uniaxial(np.array([l_scalar]), np.array([0.0, 0.0, 1.0]))
        assert np.abs(lam_full - lam_ray).max() < 1e-8


def test_psi_hat_matches_full_potential_on_ray():
    s = np.array([-0.2, 0.3, 0.7])
    on_ray = entropy.psi_s(qtensor.uniaxial(s, np.array([1.0, 0.0, 0.0])))
    assert np.abs(entropy.psi_hat(s) - on_ray).max() < 1e-9


def test_scalar_order_inverts_lambda_scalar():
    s = np.array([-0.35, -0.1, 0.0, 0.2, 0.6, 0.9])
    back = entropy.scalar_order(entropy.lambda_scalar(s))
    assert np.abs(back - s).max() < 1e-10
    assert entropy.scalar_order(0.0) == pytest.approx(0.0, abs=1e-14)


def test_scalar_order_small_field_slope():
    eps = 1e-6
    slope = entropy.scalar_order(eps) / eps
    assert slope == pytest.approx(2.0 / 15.0, rel=1e-4)


def test_lambda_scalar_domain():
    with pytest.raises(DomainError):
        entropy.lambda_scalar(1.0)
    with pytest.raises(DomainError):
        entropy.lambda_scalar(-0.5)


def test_sc_from_identity_coupling_reproduces_host():
    # when the dopant sees the same molecular field strength, its order matches
    s0 = 0.7041077646205268
    lam = entropy.lambda_scalar(s0)
    sc = entropy.sc_from(s0, lam / s0)
    assert sc == pytest.approx(s0, abs=1e-10)


@settings(deadline=None, max_examples=25)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_roundtrip_property(seed):
    rng = np.random.default_rng(seed)
    q5 = random_physical(rng, 4)
    lam = entropy.lambda_of(q5)
    assert np.abs(entropy.inverse_lambda(lam) - q5).max() < 1e-8


@settings(deadline=None, max_examples=25)
@given(st.floats(min_value=-0.45, max_value=0.95))
def test_scalar_ray_roundtrip_property(s):
    assert entropy.scalar_order(entropy.lambda_scalar(s)) == pytest.approx(s, abs=1e-9)
