"""Homogeneous thermodynamics: order parameters, transition, twisting power."""

import numpy as np
import pytest

from cholq import bulk, entropy
from cholq.errors import DomainError

TAUS = (0.08, 0.10, 0.12, 0.14)


def test_solve_s0_is_stationary_and_monotone():
    prev = 1.0
    for tau in TAUS:
        s0 = bulk.solve_s0(tau)
        assert 0.0 < s0 < prev
        # stationarity of the density: lambda(s0) = s0 / tau
        assert abs(entropy.lambda_scalar(s0) * tau - s0) < 1e-12
        prev = s0


def test_solve_s0_reference_value():
    # frozen reference for the demo temperature; stationarity above pins it
    assert bulk.solve_s0(0.12) == pytest.approx(0.704107764620, abs=1e-10)


def test_isotropic_above_transition():
    assert bulk.solve_s0(0.20) == 0.0
    with pytest.raises(DomainError):
        bulk.htp_dimensionless(0.20, 1.0)


def test_critical_coupling_and_order_jump():
    kc = bulk.critical_coupling(tol=1e-7)
    # classical values for the maximum-entropy (singular-potential) nematic:
    # transition coupling ~6.8122 with order-parameter jump ~0.4295
    assert kc == pytest.approx(6.81219, abs=2e-4)
    tau_ni = 1.0 / kc
    s_below = bulk.solve_s0(tau_ni * 0.99995)
    assert s_below == pytest.approx(0.42946, abs=5e-3)
    assert bulk.solve_s0(tau_ni * 1.0001) == 0.0
    # dual check: the energy gap really changes sign at kc
    def gap(k):
        tau = 1.0 / k
        s = bulk.solve_s0(tau)
        return float(bulk.bulk_energy(s, tau) - bulk.bulk_energy(0.0, tau))
    assert gap(kc + 0.01) < 0.0 <= gap(kc - 0.01)


def test_htp_is_one_at_equal_coupling():
    for tau in TAUS:
        assert abs(bulk.htp_dimensionless(tau, 1.0) - 1.0) < 1e-10


def test_solve_sc_dual_route():
    # bracketed inverse against the forward moment integral
    for tau in TAUS:
        s0 = bulk.solve_s0(tau)
        for alpha in (0.15, 0.75, 2.0):
            sc_a = bulk.solve_sc(tau, alpha, s0=s0)
            sc_b = entropy.sc_from(s0, alpha / tau)
            assert sc_a == pytest.approx(sc_b, abs=1e-10)


def test_htp_shape_in_alpha():
    # weaker-coupled dopant orders less than the host; stronger orders more
    tau = 0.12
    assert bulk.htp_dimensionless(tau, 0.15) < 1.0
    assert bulk.htp_dimensionless(tau, 0.75) < 1.0
    assert bulk.htp_dimensionless(tau, 2.0) > 1.0
    # monotone in alpha at fixed tau
    hs = [bulk.htp_dimensionless(tau, a) for a in (0.15, 0.5, 0.75, 1.0, 1.5, 2.0)]
    assert all(x < y for x, y in zip(hs, hs[1:]))


def test_htp_map_matches_pointwise_and_marks_isotropic():
    taus = np.array([0.10, 0.14, 0.18])
    alphas = np.array([0.5, 1.0])
    mat = bulk.htp_map(taus, alphas)
    assert mat.shape == (2, 3)
    assert np.isnan(mat[:, 2]).all()  # tau = 0.18 is isotropic
    for i, a in enumerate(alphas):
        for j, t in enumerate(taus[:2]):
            assert mat[i, j] == pytest.approx(bulk.htp_dimensionless(t, a), abs=1e-12)
    assert np.allclose(mat[1, :2], 1.0, atol=1e-10)


def test_model_params_validation():
    with pytest.raises(DomainError):
        bulk.ModelParams(tau=0.0)
    with pytest.raises(DomainError):
        bulk.ModelParams(tau=0.1, rho0=-1.0)
    with pytest.raises(DomainError):
        bulk.ModelParams(tau=0.1, eps=-0.5)
    p = bulk.ModelParams(tau=0.2, alpha=1.5)
    assert p.k_hh == pytest.approx(5.0)
    assert p.k_hd == pytest.approx(7.5)


def test_perturbed_equilibrium_limits():
    p0 = bulk.ModelParams(tau=0.12, alpha=1.0, rho0=0.0, eps=0.125)
    s0e, sce = bulk.perturbed_equilibrium(p0)
    assert s0e == pytest.approx(bulk.solve_s0(0.12), abs=1e-12)
    assert sce == pytest.approx(s0e, abs=1e-10)

    p = bulk.ModelParams(tau=0.12, alpha=1.0, rho0=0.25, eps=0.125, kDD0=4.0)
    s0e, sce, ok = bulk.perturbed_equilibrium(p, audit=True)
    assert ok  # minimizer stays on the uniaxial ray
    assert s0e > bulk.solve_s0(0.12)  # the dopant field deepens host order
    # stationarity of the relaxed density at the returned order
    d1 = (entropy.lambda_scalar(s0e) - p.k_hh * s0e
          - p.eps * p.rho0 * p.k_hd * entropy.scalar_order(p.k_hd * s0e))
    assert abs(d1) < 1e-9
    assert sce == pytest.approx(entropy.scalar_order(p.k_hd * s0e), abs=1e-12)


def test_perturbed_equilibrium_drift_is_order_eps():
    s0 = bulk.solve_s0(0.12)
    drifts = []
    for eps in (0.25, 0.125, 0.0625):
        p = bulk.ModelParams(tau=0.12, alpha=1.0, rho0=0.25, eps=eps)
        s0e, _ = bulk.perturbed_equilibrium(p)
        drifts.append(s0e - s0)
    ratios = [drifts[i] / drifts[i + 1] for i in range(2)]
    assert all(1.7 < r < 2.3 for r in ratios)  # halving eps halves the drift


def test_c_eps_definition_and_domain():
    p = bulk.ModelParams(tau=0.12, alpha=1.0, rho0=0.25, eps=0.125, kDD0=4.0)
    ce = bulk.c_eps(p)
    st = bulk.equilibrium_state(p)
    assert ce == pytest.approx(st.c_eps, abs=1e-12)
    assert ce == pytest.approx(-182.4712952134, abs=1e-6)  # frozen reference
    with pytest.raises(DomainError):
        bulk.c_eps(bulk.ModelParams(tau=0.12, eps=0.0))


def test_equilibrium_state_bundle():
    p = bulk.ModelParams(tau=0.12, alpha=1.0, rho0=0.25, eps=0.125, kDD0=4.0)
    st = bulk.equilibrium_state(p)
    assert st.htp_dimensionless == pytest.approx(1.0, abs=1e-10)
    assert st.s0 == pytest.approx(0.704107764620, abs=1e-9)
    assert st.s0_eps == pytest.approx(0.722604518516, abs=1e-9)
    assert st.sc_eps == pytest.approx(0.712754357179, abs=1e-9)
    assert st.sc_eps < st.s0_eps  # dopant locks slightly below the deepened host
