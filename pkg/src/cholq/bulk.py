"""Homogeneous two-species thermodynamics and the helical-twisting-power law.

A host nematic with mean-field self-coupling k_HH = 1/tau and a dilute
chiral dopant coupled to it with strength k_HD = alpha/tau relax, per unit
volume, the free-energy density

    e(Q)        = psi_s(Q) - (1/(2 tau)) |Q|^2                  (host alone)
    e_eps(Q,xi) = (1/eps^2) e(Q) + (rho0/eps) [psi_s(xi) - (alpha/tau) Q . xi]

Both minimizers are uniaxial with a shared axis, so everything reduces to
scalar order parameters: the host order s0(tau) solves lambda(s) = s/tau,
and the dopant order locks to s_c = scalar_order(alpha s0 / tau).  The
dimensionless helical twisting power is the ratio h = s_c/s0; it equals 1
exactly when alpha = 1 and approaches 1 as tau -> 0 for any alpha.

``c_eps`` is the ground-level constant subtracted from the spatially
resolved energy so that minimizers have finite energy as eps -> 0: the
minimum of the homogeneous density above over one species pair, divided by
eps^2 carried explicitly.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize, minimize_scalar

from . import entropy, qtensor
from .errors import DomainError, NumericalError
from .quadrature import sphere_quadrature
from .runtime import thread_count

S_MIN, S_MAX = -0.499, 0.995  # search window inside the physical interval


@dataclass(frozen=True)
class ModelParams:
    """Thermodynamic state of the host/dopant pair.

    tau   : reduced temperature (host self-coupling is 1/tau)
    alpha : dopant-to-host coupling ratio (k_HD = alpha/tau)
    rho0  : reduced dopant concentration
    eps   : interaction-range-to-box ratio of the spatial model
    kDD0  : mean dopant-dopant coupling (enters energies, not bulk order)
    """

    tau: float
    alpha: float = 1.0
    rho0: float = 0.0
    eps: float = 0.0
    kDD0: float = 0.0

    def __post_init__(self):
        if not (self.tau > 0):
            raise DomainError("ModelParams: tau must be positive")
        if self.rho0 < 0:
            raise DomainError("ModelParams: rho0 must be nonnegative")
        if self.eps < 0:
            raise DomainError("ModelParams: eps must be nonnegative")

    @property
    def k_hh(self):
        return 1.0 / self.tau

    @property
    def k_hd(self):
        return self.alpha / self.tau


@dataclass
class EquilibriumState:
    """Bundle of homogeneous equilibrium quantities at one parameter point."""

    s0: float
    sc: float
    htp_dimensionless: float
    c_eps: float
    s0_eps: float
    sc_eps: float


def bulk_energy(s, tau):
    """Host free-energy density on the uniaxial ray: psi_hat(s) - s^2/(3 tau)."""
    s = np.asarray(s, dtype=float)
    return entropy.psi_hat(s) - s * s / (3.0 * tau)


def _stationary_orders(tau, n_scan=240):
    """All stationary s > 0 of the host density: roots of lambda(s) - s/tau."""
    grid = np.linspace(1e-4, S_MAX, n_scan)
    g = entropy.lambda_scalar(grid) - grid / tau
    roots = []
    for i in range(len(grid) - 1):
        if g[i] == 0.0:
            roots.append(grid[i])
        elif g[i] * g[i + 1] < 0:
            roots.append(brentq(lambda s: float(entropy.lambda_scalar(s)) - s / tau,
                                grid[i], grid[i + 1], xtol=1e-14, rtol=1e-15))
    return roots


def solve_s0(tau, detail=False):
    """Equilibrium host order parameter at reduced temperature tau.

    Returns the global minimizer of the host density: 0 in the isotropic
    phase, the nematic branch value below the transition.  With ``detail``
    also returns a dict carrying all stationary points, their energies, and
    a coexistence flag raised when nematic and isotropic minima tie to 1e-12.
    """
    roots = _stationary_orders(tau)
    e_iso = float(bulk_energy(0.0, tau))
    best_s, best_e = 0.0, e_iso
    for r in roots:
        er = float(bulk_energy(r, tau))
        if er < best_e:
            best_s, best_e = r, er
    coexist = bool(roots) and abs(min(float(bulk_energy(r, tau)) for r in roots) - e_iso) < 1e-12
    if coexist:
        # at exact coexistence report the nematic branch but flag it
        best_s = max(roots, key=lambda r: r)
    if detail:
        return best_s, {
            "stationary": roots,
            "energies": [float(bulk_energy(r, tau)) for r in roots],
            "isotropic_energy": e_iso,
            "coexistence": coexist,
        }
    return best_s


def critical_coupling(tol=1e-6):
    """Self-coupling k* above which the nematic branch is the global minimum.

    Bisection on the nematic-isotropic energy gap; bracket is scanned first
    so no magic starting interval is assumed.
    """

    def gap(k):
        tau = 1.0 / k
        roots = _stationary_orders(tau)
        if not roots:
            return 1.0  # no nematic branch at all
        return min(float(bulk_energy(r, tau)) for r in roots) - float(bulk_energy(0.0, tau))

    lo, hi = 5.0, 9.0
    if not (gap(lo) > 0 and gap(hi) < 0):
        raise NumericalError("critical_coupling: bracket failed")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if gap(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve_sc(tau, alpha, s0=None):
    """Dopant order parameter locked to the host at (tau, alpha).

    Solves lambda(s_c) = alpha s0 / tau by bracketing the monotone scalar
    conjugate map; ``entropy.sc_from`` reaches the same number through the
    forward moment integral, and the two are cross-checked in the tests.
    """
    if s0 is None:
        s0 = solve_s0(tau)
    a = alpha * s0 / tau
    if a == 0.0:
        return 0.0
    f = lambda s: float(entropy.lambda_scalar(s)) - a
    return brentq(f, S_MIN, S_MAX, xtol=1e-14, rtol=1e-15)


def htp_dimensionless(tau, alpha):
    """Dimensionless helical twisting power s_c/s0; errors in the isotropic phase."""
    s0 = solve_s0(tau)
    if s0 <= 0.0:
        raise DomainError(f"htp_dimensionless: isotropic phase at tau={tau:g}")
    return solve_sc(tau, alpha, s0=s0) / s0


def htp_map(taus, alphas):
    """Map of s_c/s0 over a (alpha, tau) grid: rows follow alphas, columns taus.

    Isotropic cells are NaN.  Rows are computed in parallel, capped by the
    CHOLESTERIC_THREADS environment variable.
    """
    taus = np.asarray(taus, dtype=float)
    alphas = np.asarray(alphas, dtype=float)

    # s0 depends on tau only; solve once per column.
    s0s = np.array([solve_s0(t) for t in taus])

    def row(alpha):
        out = np.full(len(taus), np.nan)
        for j, (t, s0) in enumerate(zip(taus, s0s)):
            if s0 > 0.0:
                out[j] = solve_sc(t, alpha, s0=s0) / s0
        return out

    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        rows = list(pool.map(row, alphas))
    return np.vstack(rows)


def _xi_relaxed_log_partition(a):
    """ln of the dopant partition function at conjugate strength a (uniaxial)."""
    logi, _, _ = entropy._ray_integrals(np.asarray(a, dtype=float))
    return np.log(2.0 * np.pi) + logi


def _ground_density(s, params):
    """Homogeneous density at host order s with the dopant relaxed out."""
    val = entropy.psi_hat(s) - params.k_hh * s * s / 3.0
    if params.rho0 > 0.0:
        val = val - params.eps * params.rho0 * _xi_relaxed_log_partition(params.k_hd * s)
    return val


def perturbed_equilibrium(params, audit=False):
    """Host/dopant orders minimizing the homogeneous density at finite eps.

    Returns (s0_eps, sc_eps); at eps = 0 (or rho0 = 0) these reduce exactly
    to (s0, sc).  With ``audit`` the minimizer is re-derived over a
    two-parameter biaxial family and flagged if it leaves the uniaxial ray.
    """
    if params.eps == 0.0 or params.rho0 == 0.0:
        s0 = solve_s0(params.tau)
        sc = solve_sc(params.tau, params.alpha, s0=s0)
        return (s0, sc, True) if audit else (s0, sc)

    grid = np.linspace(S_MIN, S_MAX, 400)
    vals = _ground_density(grid, params)
    i = int(np.argmin(vals))
    lo, hi = grid[max(0, i - 1)], grid[min(len(grid) - 1, i + 1)]
    res = minimize_scalar(lambda s: float(_ground_density(s, params)),
                          bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-10})
    s0e = _polish_ground_min(float(res.x), params)
    sce = float(entropy.scalar_order(params.k_hd * s0e))
    if not audit:
        return s0e, sce
    ok = _uniaxial_ray_audit(params, s0e)
    return s0e, sce, ok


def _polish_ground_min(s, params):
    """Newton-polish a stationary point of the relaxed homogeneous density.

    Uses the exact first derivative (2/3)[lambda(s) - k_HH s
    - eps rho0 k_HD scalar_order(k_HD s)] and its analytic slope, so the
    returned s is limited only by roundoff, not by the bracketing search.
    """
    for _ in range(6):
        lam = float(entropy.lambda_scalar(s))
        _, _, var_h = entropy._ray_integrals(np.asarray(lam))
        sc = float(entropy.scalar_order(params.k_hd * s))
        _, _, var_c = entropy._ray_integrals(np.asarray(params.k_hd * s))
        d1 = lam - params.k_hh * s - params.eps * params.rho0 * params.k_hd * sc
        d2 = (1.0 / ((2.0 / 3.0) * float(var_h)) - params.k_hh
              - params.eps * params.rho0 * params.k_hd**2 * (2.0 / 3.0) * float(var_c))
        if d2 <= 0:
            break  # not locally convex here; keep the search result
        step = d1 / d2
        s = float(np.clip(s - step, S_MIN, S_MAX))
        if abs(step) < 1e-14:
            break
    return s


def _uniaxial_ray_audit(params, s0e, tol=1e-6):
    """Check the biaxial escape direction: minimize over s sigma(e1) + t diag(0,1,-1)."""
    quad = sphere_quadrature(32, 64)
    e1 = np.array([1.0, 0.0, 0.0])
    t_dir = qtensor.from_matrix(np.diag([0.0, 1.0, -1.0]))

    def density(v):
        s, t = v
        q = s * qtensor.sigma(e1) + t * t_dir
        if not qtensor.is_physical(q, margin=1e-9):
            return 1e6
        val = float(entropy.psi_s(q, quad)) - 0.5 * params.k_hh * float(q @ q)
        # dopant relaxed against the full biaxial molecular field
        u = params.k_hd * (q @ quad.sigma_nodes.T)
        shift = u.max()
        logz = shift + np.log(np.sum(np.exp(u - shift) * quad.weights))
        return val - params.eps * params.rho0 * logz

    res = minimize(density, x0=np.array([s0e, 0.0]), method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 400})
    return bool(abs(res.x[1]) < tol)


def c_eps(params):
    """Ground-level constant: min of the homogeneous density over (Q, xi), / eps^2."""
    if params.eps <= 0.0:
        raise DomainError("c_eps: requires eps > 0")
    s0e, _ = perturbed_equilibrium(params)
    return float(_ground_density(s0e, params)) / params.eps**2


def equilibrium_state(params):
    """Full homogeneous bundle: limit orders, twisting power, and eps-level data."""
    s0 = solve_s0(params.tau)
    sc = solve_sc(params.tau, params.alpha, s0=s0)
    htp = sc / s0 if s0 > 0 else float("nan")
    if params.eps > 0:
        s0e, sce = perturbed_equilibrium(params)
        ce = float(_ground_density(s0e, params)) / params.eps**2
    else:
        s0e, sce, ce = s0, sc, float("nan")
    return EquilibriumState(s0=s0, sc=sc, htp_dimensionless=htp,
                            c_eps=ce, s0_eps=s0e, sc_eps=sce)
