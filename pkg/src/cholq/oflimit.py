"""Coarse-grained limit of the nonlocal model: elastic + chiral functional.

As the interaction width shrinks, the discrete energy converges to a
functional defined only on locked states -- uniaxial host tensors of fixed
order s0 with the dopant tensor pinned to (s_c/s0) times the host.  On
that set the energy is quadratic in the host gradient (elastic moment
tensor of the host-host kernel) plus a term linear in the gradient
(chiral moment of the dopant-on-host kernel) plus a condensation
constant from the dopant-dopant mean coupling.

This module evaluates that limit in tensor form and in the equivalent
splay/twist/bend director form, locates the preferred helix wavenumber,
and measures the finite-width-vs-limit energy gap on recovery states.
"""

from __future__ import annotations

import concurrent.futures as _futures
import math
from dataclasses import dataclass, field

import numpy as np

from . import bulk, entropy, kernels as kmod, qtensor, runtime, torus
from . import nonlocal_energy as nl
from .errors import AssumptionViolation, ConfigError, DomainError

TWO_PI_CUBED = (2.0 * math.pi) ** 3


# ----------------------------------------------------------------------
# Limit coefficients
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class LimitCoefficients:
    """Everything the limit functional needs, derived from one kernel set."""

    elastic: kmod.ElasticTensor
    chiral: kmod.ChiralMoment
    K11: float
    K22: float
    K33: float
    beta: float
    q: float
    s0: float
    sc: float
    rho0: float
    kdd0: float
    constant: float      # dopant condensation term, already times the box volume

    @property
    def lock_ratio(self):
        return self.sc / self.s0

    @classmethod
    def from_kernels(cls, ks, rho0, kT=1.0):
        k0_hh = kmod.k0(ks.HH)
        if k0_hh <= 0:
            raise ConfigError("LimitCoefficients: host-host mean coupling must be positive")
        tau = kT / k0_hh
        s0 = bulk.solve_s0(tau)
        if s0 <= 0:
            raise DomainError(
                "LimitCoefficients: the host ground state is isotropic at this "
                "coupling; the coarse limit needs a nematic state")
        sc = entropy.sc_from(s0, kmod.k0(ks.HD) / kT)
        k11, k22, k33 = kmod.frank_constants(ks.HH, s0)
        if k22 <= 0:
            raise AssumptionViolation("LimitCoefficients: twist constant must be positive")
        beta = kmod.beta_coefficient(ks.cH)
        kdd0 = kmod.k0(ks.DD)
        q = sc * beta * rho0 / (s0 * k22)
        constant = -(sc**2 * rho0**2 * kdd0 / 3.0) * TWO_PI_CUBED
        return cls(elastic=kmod.elastic_tensor_L(ks.HH),
                   chiral=kmod.chiral_vector_V(ks.cH),
                   K11=k11, K22=k22, K33=k33, beta=beta, q=q,
                   s0=s0, sc=sc, rho0=rho0, kdd0=kdd0, constant=constant)


# ----------------------------------------------------------------------
# Limit energy, tensor form
# ----------------------------------------------------------------------

@dataclass
class DomainReport:
    """How far the fields sit from the limit functional's domain."""

    ok: bool
    max_order_deviation: float
    max_biaxiality: float
    max_lock_deviation: float
    tolerance: float

    def describe(self):
        return (f"order dev {self.max_order_deviation:.3e}, "
                f"biaxiality {self.max_biaxiality:.3e}, "
                f"lock dev {self.max_lock_deviation:.3e} "
                f"(tolerance {self.tolerance:.1e})")


def _gradient(arr, grid, grad_mode):
    if grad_mode == "spectral":
        return torus.grad_spectral(arr, grid)
    if grad_mode == "central":
        return torus.grad_central(arr, grid)
    raise ConfigError(f"unknown gradient mode '{grad_mode}'")


def energy_F_OF(fields, coeffs, grad_mode="spectral", tol=1e-3,
                return_report=False):
    """Limit energy of a (host, dopant) pair; +inf outside its domain.

    The domain requires per site: uniaxial host of order s0 (within
    ``tol`` in order deviation and biaxiality) and dopant locked to
    (s_c/s0) times the host (within ``tol`` per component norm).
    """
    grid = fields.grid
    q_arr, xi_arr = fields.host, fields.dopant
    s, _n, diag = qtensor.uniaxial_project(q_arr)
    order_dev = float(np.max(np.abs(s - coeffs.s0)))
    biax = float(np.max(diag["biaxiality"]))
    lock_diff = xi_arr - coeffs.lock_ratio * q_arr
    lock_dev = float(np.max(np.sqrt(np.einsum("...a,...a->...", lock_diff, lock_diff))))
    ok = order_dev <= tol and biax <= tol and lock_dev <= tol
    report = DomainReport(ok, order_dev, biax, lock_dev, tol)
    if not ok:
        value = float("inf")
    else:
        grad = _gradient(q_arr, grid, grad_mode)
        elastic = coeffs.elastic.density(grad)
        chiral = (coeffs.sc * coeffs.rho0 / coeffs.s0) * coeffs.chiral.density(q_arr, grad)
        value = grid.cell_volume * float(np.sum(elastic + chiral)) + coeffs.constant
    return (value, report) if return_report else value


# ----------------------------------------------------------------------
# Limit energy, director form
# ----------------------------------------------------------------------

def _grad_sign_aligned(n, grid):
    """Centered-difference gradient of a line field (n and -n identified).

    Each neighbor pair is sign-aligned before differencing, so sections
    with a global orientation flip (half-integer helices) differentiate
    cleanly; accuracy is second order in the spacing.
    """
    out = np.empty(n.shape[:3] + (3, 3))
    for a in range(3):
        fwd = np.roll(n, -1, axis=a)
        bwd = np.roll(n, 1, axis=a)
        sign_f = np.sign(np.einsum("...i,...i->...", fwd, n))[..., None]
        sign_b = np.sign(np.einsum("...i,...i->...", bwd, n))[..., None]
        out[..., a, :] = (sign_f * fwd - sign_b * bwd) / (2.0 * grid.spacing[a])
    return out


def energy_OF_director(n_field, coeffs, grid, grad_mode="spectral"):
    """Splay/twist/bend form on a unit director field (no constant term).

    Density (s0^2/2) [K11 (div n)^2 + K22 (n.curl n + q)^2 + K33 |n x curl n|^2];
    relative to the tensor form this omits the constant and shifts the twist
    reference, so the two differ by a field-independent offset.  grad_mode
    'aligned' differentiates the line field (sign-ambiguous director) and is
    the right choice for non-orientable sections such as half-turn helices.
    """
    n = np.asarray(n_field, dtype=float)
    norms = np.sqrt(np.einsum("...i,...i->...", n, n))
    if np.max(np.abs(norms - 1.0)) > 1e-8:
        raise ConfigError("energy_OF_director: director must be unit length per site")
    if grad_mode == "aligned":
        dn = _grad_sign_aligned(n, grid)
    else:
        dn = _gradient(n, grid, grad_mode)        # (..., 3 deriv, 3 comp)
    div = np.einsum("...aa->...", dn)
    curl = np.stack([dn[..., 1, 2] - dn[..., 2, 1],
                     dn[..., 2, 0] - dn[..., 0, 2],
                     dn[..., 0, 1] - dn[..., 1, 0]], axis=-1)
    twist = np.einsum("...i,...i->...", n, curl)
    bend = np.cross(n, curl)
    dens = 0.5 * coeffs.s0**2 * (coeffs.K11 * div**2
                                 + coeffs.K22 * (twist + coeffs.q)**2
                                 + coeffs.K33 * np.einsum("...i,...i->...", bend, bend))
    return grid.cell_volume * float(np.sum(dens))


def helix_director(grid, m):
    """Unit director of the standard helix about e3 on the grid."""
    phi = m * grid.axis(2)
    n = np.stack([np.cos(phi), np.sin(phi), np.zeros_like(phi)], axis=-1)
    return np.broadcast_to(n, grid.shape + (3,)).copy()


def helix_energy_OF(coeffs, m):
    """Closed-form limit energy of the helix with wavenumber m (tensor form)."""
    return TWO_PI_CUBED * (0.5 * coeffs.s0**2 * coeffs.K22 * (m - coeffs.q)**2
                           - 0.5 * coeffs.s0**2 * coeffs.K22 * coeffs.q**2) + coeffs.constant


def quantize_wavenumber(q):
    """Half-integer closest to q; midpoint ties break toward smaller |m|."""
    x = 2.0 * float(q)
    lo = math.floor(x)
    frac = x - lo
    if abs(frac - 0.5) < 1e-12:
        cands = (lo, lo + 1)
        pick = min(cands, key=lambda c: (abs(c), c > 0))
    elif frac > 0.5:
        pick = lo + 1
    else:
        pick = lo
    return 0.5 * pick


# ----------------------------------------------------------------------
# Finite-width vs limit gap on recovery states
# ----------------------------------------------------------------------

@dataclass
class GammaRow:
    """One eps entry of the gap table."""

    eps: float
    F_eps_recovery: float = float("nan")
    F_OF: float = float("nan")
    gap: float = float("nan")
    m_minimizer: float = float("nan")
    s0_dev: float = float("nan")
    xi_lock_dev: float = float("nan")
    error: str = ""

    CSV_HEADER = "eps,F_eps_recovery,F_OF,gap,m_minimizer,s0_dev,xi_lock_dev"

    def csv(self):
        cells = [runtime.fmt(v) for v in
                 (self.eps, self.F_eps_recovery, self.F_OF, self.gap,
                  self.m_minimizer, self.s0_dev, self.xi_lock_dev)]
        return ",".join(cells)


def _descent_diagnostics(model, params, start, schedule):
    res = nl.minimize(start, model, params, schedule=schedule)
    m_fit, _info = torus.extract_wavenumber(res.fields.host, model.grid)
    s_proj, _n, _d = qtensor.uniaxial_project(res.fields.host)
    s0e, _sce = bulk.perturbed_equilibrium(params)
    s0_dev = float(np.max(np.abs(s_proj - s0e)))
    lock = res.diagnostics.get("xi_lock_rel", float("nan"))
    return res, m_fit, s0_dev, lock


def _gamma_one(ks, rho0, eps, grid, coeffs, m_star, mode, descent, schedule, seed):
    row = GammaRow(eps=eps)
    try:
        params = nl.model_params_for(ks, rho0, eps)
        model = nl.DiscreteModel.build(ks, grid, params, mode=mode)
        s0e, sce = bulk.perturbed_equilibrium(params)
        recovery = torus.helical_ansatz(grid, m_star, s0e, sce)
        row.F_eps_recovery = nl.energy_F_eps(recovery, model, params)
        limit_fields = torus.helical_ansatz(grid, m_star, coeffs.s0, coeffs.sc)
        row.F_OF = energy_F_OF(limit_fields, coeffs)
        row.gap = abs(row.F_eps_recovery - row.F_OF) / abs(row.F_OF)

        starts = []
        if descent in ("helix", "both"):
            starts.append(recovery.copy())
        if descent in ("random", "both"):
            rng = runtime.make_rng(seed)
            starts.append(torus.random_field(grid, rng, amplitude=0.1))
        best = None
        for start in starts:
            res, m_fit, s0_dev, lock = _descent_diagnostics(model, params, start, schedule)
            if best is None or res.energy < best[0].energy:
                best = (res, m_fit, s0_dev, lock)
        if best is not None:
            row.m_minimizer, row.s0_dev, row.xi_lock_dev = best[1], best[2], best[3]
    except Exception as exc:  # per-eps failures become table rows
        row.error = f"{type(exc).__name__}: {exc}"
    return row


def gamma_gap(ks, rho0, eps_list, grid, mode="auto", descent="helix",
              schedule=None, seed=0, threads=None):
    """Gap table |F_eps(recovery) - F_OF| / |F_OF| over a list of widths.

    Recovery fields are helices at the preferred quantized wavenumber with
    the width-perturbed equilibrium orders; the limit energy is evaluated
    on the corresponding locked limit fields.  Optionally each width also
    runs a descent (from the helix, a seeded random state, or both) and
    reports the extracted wavenumber and deviation diagnostics of the best
    minimizer found.
    """
    if descent not in ("none", "helix", "random", "both"):
        raise ConfigError(f"gamma_gap: unknown descent option '{descent}'")
    if not isinstance(grid, torus.TorusGrid):
        grid = torus.TorusGrid(tuple(int(n) for n in grid))
    eps_list = [float(e) for e in eps_list]
    if any(e <= 0 for e in eps_list):
        raise ConfigError("gamma_gap: widths must be positive")
    coeffs = LimitCoefficients.from_kernels(ks, rho0)
    m_star = quantize_wavenumber(coeffs.q)
    schedule = schedule or nl.DescentSchedule()
    seeds = [seed + 1000 * i for i in range(len(eps_list))]
    workers = threads or runtime.thread_count()
    if workers > 1 and len(eps_list) > 1:
        with _futures.ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(
                lambda pair: _gamma_one(ks, rho0, pair[0], grid, coeffs, m_star,
                                        mode, descent, schedule, pair[1]),
                zip(eps_list, seeds)))
    else:
        rows = [_gamma_one(ks, rho0, e, grid, coeffs, m_star, mode, descent,
                           schedule, s) for e, s in zip(eps_list, seeds)]
    return rows, coeffs, m_star
