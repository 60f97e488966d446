"""Coarse-limit functional: coefficients, dual energy forms, gap table."""

import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cholq import bulk, kernels as km, oflimit, runtime
from cholq import nonlocal_energy as nl
from cholq.errors import AssumptionViolation, ConfigError, DomainError
from cholq.torus import QField, TorusGrid, helical_ansatz

SQRT_PI3 = math.pi**1.5
VOL = (2.0 * math.pi) ** 3
RHO0 = 0.45

# Frozen reference values for the built-in kernel set at concentration 0.45
# on the 4 x 4 x 64 box (spectral periodization).  Regenerate by running
# oflimit.gamma_gap with descent="none" and printing full-precision fields.
FROZEN_Q = 0.6013794236582376
FROZEN_F_OF = -123.22622166853725
FROZEN_CONSTANT = -33.20332958691473
FROZEN_TABLE = {
    0.5: (-97.7765272661155, 0.20652823772263482),
    0.25: (-115.88250758739437, 0.0595953846649338),
    0.125: (-121.29742475260258, 0.01565248767525215),
}


@pytest.fixture(scope="module")
def demo_ks():
    return km.demo_kernel_set()


@pytest.fixture(scope="module")
def coeffs(demo_ks):
    return oflimit.LimitCoefficients.from_kernels(demo_ks, RHO0)


def negate_chiral_set(ks):
    def flip(kern):
        def neg(p):
            return p if p.is_zero else dataclasses.replace(p, amplitude=-p.amplitude)

        return km.ChiralKernel(f1=neg(kern.f1), f2=neg(kern.f2))

    return dataclasses.replace(ks, cH=flip(ks.cH), cD=flip(ks.cD))


# ---------------------------------------------------------------------------
# Limit coefficients.
# ---------------------------------------------------------------------------


class TestLimitCoefficients:
    def test_demo_values(self, coeffs):
        assert coeffs.beta == pytest.approx(SQRT_PI3, rel=1e-10)
        assert coeffs.K22 == pytest.approx(25.0 / 6.0, rel=1e-9)
        assert coeffs.kdd0 == pytest.approx(4.0, rel=1e-8)
        assert coeffs.q == pytest.approx(FROZEN_Q, rel=1e-10)
        # equal mean couplings force equal host/dopant orders
        assert coeffs.sc == pytest.approx(coeffs.s0, rel=1e-10)
        assert coeffs.lock_ratio == pytest.approx(1.0, rel=1e-10)

    def test_wavenumber_composition(self, coeffs):
        assert coeffs.q * coeffs.K22 * coeffs.s0 == pytest.approx(
            coeffs.sc * coeffs.beta * coeffs.rho0, rel=1e-12
        )

    def test_condensation_constant(self, coeffs):
        expected = -(coeffs.sc**2 * coeffs.rho0**2 * coeffs.kdd0 / 3.0) * VOL
        assert coeffs.constant == pytest.approx(expected, rel=1e-12)

    def test_matches_bulk_solvers(self, demo_ks, coeffs):
        tau = 1.0 / km.k0(demo_ks.HH)
        s0 = bulk.solve_s0(tau)
        sc = bulk.solve_sc(tau, km.k0(demo_ks.HD) / km.k0(demo_ks.HH), s0=s0)
        assert coeffs.s0 == pytest.approx(s0, rel=1e-9)
        assert coeffs.sc == pytest.approx(sc, rel=1e-9)

    def test_isotropic_raises(self, demo_ks):
        with pytest.raises(DomainError):
            oflimit.LimitCoefficients.from_kernels(demo_ks, RHO0, kT=2.0)

    def test_negative_coupling_raises(self, demo_ks):
        neg = km.AchiralKernel(
            k1=km.RadialProfile("gaussian", amplitude=-1.0, width=1.0)
        )
        with pytest.raises(ConfigError):
            oflimit.LimitCoefficients.from_kernels(
                dataclasses.replace(demo_ks, HH=neg), RHO0
            )

    def test_negative_twist_raises(self, demo_ks):
        # narrow attractive channel keeps the mean coupling positive while a
        # wide repulsive second channel turns the twist constant negative
        weird = km.AchiralKernel(
            k1=km.RadialProfile("gaussian", amplitude=96.0, width=0.5),
            k2=km.RadialProfile("gaussian", amplitude=-4.0, width=1.0),
        )
        with pytest.raises(AssumptionViolation):
            oflimit.LimitCoefficients.from_kernels(
                dataclasses.replace(demo_ks, HH=weird), RHO0
            )

    def test_handedness_flip(self, demo_ks, coeffs):
        mirrored = oflimit.LimitCoefficients.from_kernels(
            negate_chiral_set(demo_ks), RHO0
        )
        assert mirrored.beta == -coeffs.beta
        assert mirrored.q == -coeffs.q
        assert oflimit.quantize_wavenumber(mirrored.q) == -oflimit.quantize_wavenumber(
            coeffs.q
        )


# ---------------------------------------------------------------------------
# Wavenumber quantization on the periodic box.
# ---------------------------------------------------------------------------


class TestQuantizeWavenumber:
    @pytest.mark.parametrize(
        "q,expected",
        [
            (0.0, 0.0),
            (0.3, 0.5),
            (0.24, 0.0),
            (0.25, 0.0),
            (-0.25, 0.0),
            (0.75, 0.5),
            (-0.75, -0.5),
            (-0.3, -0.5),
            (0.5, 0.5),
            (1.13, 1.0),
            (1.25, 1.0),
            (-1.9, -2.0),
            (FROZEN_Q, 0.5),
        ],
    )
    def test_exact_cases(self, q, expected):
        assert oflimit.quantize_wavenumber(q) == expected

    @settings(max_examples=200, deadline=None)
    @given(st.floats(min_value=-10.0, max_value=10.0))
    def test_half_integer_within_quarter(self, q):
        m = oflimit.quantize_wavenumber(q)
        assert 2.0 * m == round(2.0 * m)
        assert abs(q - m) <= 0.25 + 1e-9
        assert oflimit.quantize_wavenumber(-q) == -m


# ---------------------------------------------------------------------------
# Helix energies: closed form, tensor form, director form.
# ---------------------------------------------------------------------------


class TestHelixEnergies:
    @pytest.fixture(scope="class")
    def grid(self):
        return TorusGrid((4, 4, 64))

    def test_tensor_matches_closed_form(self, grid, coeffs):
        for m in (0.0, 0.5, 1.0, -0.5):
            fields = helical_ansatz(grid, m, coeffs.s0, coeffs.sc)
            val = oflimit.energy_F_OF(fields, coeffs)
            ref = oflimit.helix_energy_OF(coeffs, m)
            assert val == pytest.approx(ref, rel=1e-10)

    def test_half_turn_minimizes_over_windings(self, coeffs):
        ms = np.arange(-8, 9) / 2.0
        vals = [oflimit.helix_energy_OF(coeffs, m) for m in ms]
        assert ms[int(np.argmin(vals))] == 0.5

    def test_director_form_matches_tensor_integer_m(self, grid, coeffs):
        offset = -VOL * 0.5 * coeffs.s0**2 * coeffs.K22 * coeffs.q**2 + coeffs.constant
        for m in (1.0, 2.0, -1.0):
            tens = oflimit.energy_F_OF(helical_ansatz(grid, m, coeffs.s0, coeffs.sc), coeffs)
            dire = oflimit.energy_OF_director(oflimit.helix_director(grid, m), coeffs, grid)
            assert tens == pytest.approx(dire + offset, rel=1e-10)

    def test_director_form_half_integer_aligned(self, coeffs):
        # a half-turn helix is non-orientable on the box: only the
        # sign-aligned line-field derivative applies, second-order accurate
        offset = -VOL * 0.5 * coeffs.s0**2 * coeffs.K22 * coeffs.q**2 + coeffs.constant
        devs = []
        for npts in (32, 64):
            g = TorusGrid((4, 4, npts))
            tens = oflimit.energy_F_OF(helical_ansatz(g, 0.5, coeffs.s0, coeffs.sc), coeffs)
            dire = oflimit.energy_OF_director(
                oflimit.helix_director(g, 0.5), coeffs, g, grad_mode="aligned"
            )
            devs.append(abs(tens - dire - offset) / abs(tens))
        assert devs[1] < 2e-3
        assert devs[0] / devs[1] > 3.5

    def test_director_guards(self, grid, coeffs):
        n = oflimit.helix_director(grid, 1.0)
        with pytest.raises(ConfigError):
            oflimit.energy_OF_director(1.1 * n, coeffs, grid)
        with pytest.raises(ConfigError):
            oflimit.energy_OF_director(n, coeffs, grid, grad_mode="sideways")
        fields = helical_ansatz(grid, 1.0, coeffs.s0, coeffs.sc)
        with pytest.raises(ConfigError):
            oflimit.energy_F_OF(fields, coeffs, grad_mode="sideways")

    def test_helix_director_structure(self, grid):
        n = oflimit.helix_director(grid, 0.5)
        assert n.shape == grid.shape + (3,)
        norms = np.sqrt(np.sum(n * n, axis=-1))
        assert np.allclose(norms, 1.0, atol=1e-14)
        assert np.abs(n[..., 2]).max() == 0.0
        # constant across the transverse directions
        assert np.ptp(n, axis=(0, 1)).max() == 0.0


# ---------------------------------------------------------------------------
# Domain sentinel of the limit functional.
# ---------------------------------------------------------------------------


class TestLimitDomain:
    @pytest.fixture(scope="class")
    def grid(self):
        return TorusGrid((4, 4, 32))

    def test_exact_fields_in_domain(self, grid, coeffs):
        fields = helical_ansatz(grid, 0.5, coeffs.s0, coeffs.sc)
        val, report = oflimit.energy_F_OF(fields, coeffs, return_report=True)
        assert math.isfinite(val)
        assert report.ok
        assert "tolerance" in report.describe()

    def test_order_deviation_rejected(self, grid, coeffs):
        fields = helical_ansatz(grid, 0.5, coeffs.s0 + 0.01, coeffs.sc + 0.01)
        val, report = oflimit.energy_F_OF(fields, coeffs, return_report=True)
        assert val == float("inf")
        assert not report.ok
        assert report.max_order_deviation == pytest.approx(0.01, rel=1e-6)

    def test_lock_deviation_rejected(self, grid, coeffs):
        base = helical_ansatz(grid, 0.5, coeffs.s0, coeffs.sc)
        fields = QField(grid, base.host, 0.95 * base.dopant)
        val, report = oflimit.energy_F_OF(fields, coeffs, return_report=True)
        assert val == float("inf")
        assert not report.ok
        assert report.max_lock_deviation > 1e-3

    def test_tolerance_parameter(self, grid, coeffs):
        fields = helical_ansatz(grid, 0.5, coeffs.s0 + 5e-4, coeffs.sc + 5e-4)
        assert math.isfinite(oflimit.energy_F_OF(fields, coeffs))
        assert oflimit.energy_F_OF(fields, coeffs, tol=1e-6) == float("inf")


# ---------------------------------------------------------------------------
# Finite-width vs limit gap table.
# ---------------------------------------------------------------------------


class TestGammaGap:
    def test_frozen_gap_table(self, demo_ks):
        rows, coeffs, m_star = oflimit.gamma_gap(
            demo_ks, RHO0, (0.5, 0.25, 0.125), (4, 4, 64),
            mode="spectral", descent="none", threads=1,
        )
        assert m_star == 0.5
        assert coeffs.q == pytest.approx(FROZEN_Q, rel=1e-10)
        gaps = []
        for row in rows:
            f_ref, gap_ref = FROZEN_TABLE[row.eps]
            assert row.error == ""
            assert row.F_eps_recovery == pytest.approx(f_ref, rel=1e-8)
            assert row.F_OF == pytest.approx(FROZEN_F_OF, rel=1e-8)
            assert row.gap == pytest.approx(gap_ref, rel=1e-8)
            gaps.append(row.gap)
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[2] < 0.05

    def test_descent_diagnostics_at_finest(self, demo_ks):
        rows, _coeffs, m_star = oflimit.gamma_gap(
            demo_ks, RHO0, (0.125,), (4, 4, 64),
            mode="spectral", descent="helix",
            schedule=nl.DescentSchedule(max_iter=250), threads=1,
        )
        row = rows[0]
        assert row.error == ""
        assert row.m_minimizer == pytest.approx(m_star, abs=1e-9)
        assert row.s0_dev < 0.01
        assert row.xi_lock_dev < 0.02

    def test_option_guards(self, demo_ks):
        with pytest.raises(ConfigError):
            oflimit.gamma_gap(demo_ks, RHO0, (0.5,), (4, 4, 8), descent="sideways")
        with pytest.raises(ConfigError):
            oflimit.gamma_gap(demo_ks, RHO0, (0.0,), (4, 4, 8), descent="none")

    def test_tuple_grid_matches_grid_object(self, demo_ks):
        kw = dict(mode="spectral", descent="none", threads=1)
        rows_a, _, _ = oflimit.gamma_gap(demo_ks, RHO0, (0.5,), (4, 4, 8), **kw)
        rows_b, _, _ = oflimit.gamma_gap(demo_ks, RHO0, (0.5,), TorusGrid((4, 4, 8)), **kw)
        assert rows_a[0].F_eps_recovery == rows_b[0].F_eps_recovery
        assert rows_a[0].F_OF == rows_b[0].F_OF

    def test_error_rows_captured(self, demo_ks):
        rows, _, _ = oflimit.gamma_gap(
            demo_ks, RHO0, (6.0,), (4, 4, 8),
            mode="sampled", descent="none", threads=1,
        )
        assert rows[0].error.startswith("NumericalError")
        assert math.isnan(rows[0].F_eps_recovery)

    def test_threads_match_serial(self, demo_ks):
        kw = dict(mode="spectral", descent="none")
        rows_1, _, _ = oflimit.gamma_gap(demo_ks, RHO0, (0.5, 0.25), (4, 4, 8),
                                         threads=1, **kw)
        rows_2, _, _ = oflimit.gamma_gap(demo_ks, RHO0, (0.5, 0.25), (4, 4, 8),
                                         threads=2, **kw)
        for a, b in zip(rows_1, rows_2):
            assert a.F_eps_recovery == b.F_eps_recovery
            assert a.F_OF == b.F_OF
            assert a.gap == b.gap

    def test_csv_header_and_format(self):
        assert (
            oflimit.GammaRow.CSV_HEADER
            == "eps,F_eps_recovery,F_OF,gap,m_minimizer,s0_dev,xi_lock_dev"
        )
        empty = oflimit.GammaRow(eps=0.125)
        assert empty.csv() == "0.125,nan,nan,nan,nan,nan,nan"
        full = oflimit.GammaRow(
            eps=0.5, F_eps_recovery=1.5, F_OF=-2.0, gap=0.1,
            m_minimizer=0.5, s0_dev=0.01, xi_lock_dev=0.02,
        )
        cells = full.csv().split(",")
        assert cells == [runtime.fmt(v) for v in (0.5, 1.5, -2.0, 0.1, 0.5, 0.01, 0.02)]
