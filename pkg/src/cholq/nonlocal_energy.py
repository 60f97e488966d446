"""Discretized two-species nonlocal free energy on the periodic box.

The functional has a stiff local part (singular entropy at scale 1/eps^2
for the host, 1/eps for the dopant) plus pairwise interaction terms whose
kernels are rescaled-to-width-eps copies of the molecular kernels,
periodized over the box.  It is evaluated here in the exactly rewritten
form

    bulk block (entropy minus mean-coupling quadratics minus c_eps)
  + achiral finite-difference terms   (host-host, host-dopant, dopant-dopant)
  + chiral terms                      (dopant on host, dopant on dopant)

with every double sum computed through FFTs.  An audit path evaluates the
unrewritten product form; the two differ by exactly c_eps * (2*pi)^3.

Descent uses the analytic gradient (the mean-coupling quadratics cancel
against the finite-difference terms, leaving pure convolutions) with a
physicality-preserving backtracking line search.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import numpy as np

from . import bulk, entropy, kernels as kmod, qtensor
from .errors import ConfigError, NumericalError, PhysicalityError, SymmetryError
from .torus import (QField, TorusGrid, constant_field, extract_wavenumber,
                    helical_ansatz)

__all__ = [
    "PeriodizedKernel", "periodize", "DiscreteModel", "EnergyBreakdown",
    "energy_F_eps", "energy_F_eps_raw", "energy_gradient", "convolve_direct",
    "DescentSchedule", "MinimizeResult", "minimize",
    "helical_ansatz", "extract_wavenumber", "QField", "TorusGrid",
]

_IDENTITY5 = np.eye(5)
_DIRECT_SITE_LIMIT = 12**3


def _chiral_generators():
    """T[axis] = matrix of A -> (W(e_axis) A - A W(e_axis)) / 2 in the 5-basis."""
    gen = np.zeros((3, 5, 5))
    for axis in range(3):
        w = qtensor.skew_matrix(np.eye(3)[axis])
        for b in range(5):
            m = 0.5 * (w @ qtensor.BASIS[b] - qtensor.BASIS[b] @ w)
            gen[axis, :, b] = np.einsum("aij,ij->a", qtensor.BASIS, m)
    return gen


_CHIRAL_GEN = _chiral_generators()


# ----------------------------------------------------------------------
# Kernel periodization
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class PeriodizedKernel:
    """Box-periodized, eps-rescaled interaction kernel in Fourier form.

    ``khat[k]`` is the multiplier of the grid convolution: for a field B,
    (K (*) B)(x_j) = h^3 * sum_l K[j-l] B_l = IDFT(khat * DFT(B)).  In
    ``sampled`` mode khat is the DFT of real-space lattice-sum samples
    times the cell volume; in ``spectral`` mode it is the exact continuum
    transform evaluated at integer modes, which is the exact Fourier
    coefficient sequence of the periodized kernel (no sampling aliasing).
    """

    grid: TorusGrid
    eps: float
    khat: np.ndarray          # (n1, n2, n3, 5, 5) complex
    chiral: bool
    mode: str

    @property
    def mass(self):
        """Zeroth moment as a 5x5 matrix (h^3 * sum of real-space samples)."""
        return np.real(self.khat[0, 0, 0]).copy()

    @property
    def samples(self):
        """Real-space samples K[j] (lazy; per-site 5x5 matrices)."""
        cached = getattr(self, "_samples", None)
        if cached is None:
            cached = np.real(np.fft.ifftn(self.khat, axes=(0, 1, 2))) / self.grid.cell_volume
            object.__setattr__(self, "_samples", cached)
        return cached

    def convolve(self, field_arr):
        """Grid convolution h^3 * sum_l K[j-l] B_l via FFT."""
        fhat = np.fft.fftn(field_arr, axes=(0, 1, 2))
        out = np.einsum("...ab,...b->...a", self.khat, fhat)
        return np.real(np.fft.ifftn(out, axes=(0, 1, 2)))

    def convolve_direct(self, field_arr):
        """Literal double-sum convolution; O(N^2) oracle for the FFT path."""
        n = self.grid.shape
        if int(np.prod(n)) > _DIRECT_SITE_LIMIT:
            raise ConfigError("convolve_direct: grid too large for the direct oracle")
        samples = self.samples
        out = np.zeros(field_arr.shape)
        for d1, d2, d3 in itertools.product(*(range(m) for m in n)):
            shifted = np.roll(field_arr, shift=(d1, d2, d3), axis=(0, 1, 2))
            out += np.einsum("ab,...b->...a", samples[d1, d2, d3], shifted)
        return out * self.grid.cell_volume


def _profiles_of(kern):
    if isinstance(kern, kmod.AchiralKernel):
        return (kern.k1, kern.k2, kern.k3)
    if isinstance(kern, kmod.ChiralKernel):
        return (kern.f1, kern.f2)
    raise ConfigError("periodize: expected an achiral or chiral kernel")


def _is_zero_kernel(kern):
    return all(p.is_zero for p in _profiles_of(kern))


def _minimal_images(grid):
    """Site coordinates folded to [-pi, pi) per axis, shape (n1, n2, n3, 3)."""
    axes = [((grid.axis(i) + np.pi) % (2.0 * np.pi)) - np.pi for i in range(3)]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)


def _periodize_sampled(kern, eps, grid, matrix_fn):
    profiles = [p for p in _profiles_of(kern) if not p.is_zero]
    r_cut = max(p.r_cut() for p in profiles)
    # Image shells: shell s >= 1 can only reach |x + 2 pi nu| <= eps*r_cut
    # when (2s - 1) pi <= eps * r_cut.
    s_max = 0
    while (2 * (s_max + 1) - 1) * np.pi <= eps * r_cut:
        s_max += 1
        if s_max > 6:
            raise NumericalError(
                "periodize: kernel envelope too wide for the box at this eps; "
                "lattice-sum truncation would exceed tolerance")
    x = _minimal_images(grid).reshape(-1, 3)
    acc = np.zeros((x.shape[0], 5, 5))
    pad = 1.05 * eps * r_cut
    for nu in itertools.product(range(-s_max, s_max + 1), repeat=3):
        shifted = x + (2.0 * np.pi) * np.asarray(nu, dtype=float)
        mask = np.einsum("mi,mi->m", shifted, shifted) <= pad * pad
        if not mask.any():
            continue
        acc[mask] += matrix_fn(kern, shifted[mask] / eps)
    return acc.reshape(grid.shape + (5, 5)) / eps**3


def _parity_project(samples, grid, chiral):
    """Enforce the exact inversion/transpose symmetry of each kernel class.

    Achiral kernels satisfy K(-x) = K(x) = K(x)^T; chiral kernels satisfy
    K(-x) = -K(x) = K(x)^T.  Lattice sums obey these up to floating-point
    noise; projecting restores them exactly, which makes the chiral mass
    vanish identically and keeps convolution adjoints exact.
    """
    neg = np.ix_(*[(-np.arange(n)) % n for n in grid.shape])
    k_neg = samples[neg]
    k_t = np.swapaxes(samples, -1, -2)
    k_neg_t = np.swapaxes(k_neg, -1, -2)
    if chiral:
        proj = 0.25 * (samples - k_t - k_neg + k_neg_t)
    else:
        proj = 0.25 * (samples + k_t + k_neg + k_neg_t)
    adjust = float(np.max(np.abs(proj - samples)))
    scale = float(np.max(np.abs(samples))) or 1.0
    if adjust > 1e-6 * scale:
        raise SymmetryError(
            f"periodize: sampled kernel violates its parity class by {adjust:.3e}")
    return proj


def _spectral_khat_achiral(kern, eps, grid):
    if not kern.is_pure_k1 or kern.k1.hat3d(0.0) is None:
        raise ConfigError(
            "periodize: spectral mode needs a pure rank-0 gaussian achiral kernel")
    k1v, k2v, k3v = grid.k_vectors()
    kappa = eps * np.sqrt(k1v**2 + k2v**2 + k3v**2)
    ghat = kern.k1.hat3d(kappa)
    return ghat[..., None, None] * _IDENTITY5 + 0j


def _spectral_khat_chiral(kern, eps, grid):
    if not kern.is_pure_f1 or kern.f1.family != "gaussian":
        raise ConfigError(
            "periodize: spectral mode needs a pure first-order gaussian chiral kernel")
    k1v, k2v, k3v = grid.k_vectors()
    shape = np.broadcast_shapes(k1v.shape, k2v.shape, k3v.shape)
    kvec = np.empty(shape + (3,))
    kvec[..., 0], kvec[..., 1], kvec[..., 2] = eps * k1v, eps * k2v, eps * k3v
    kappa = np.sqrt(np.einsum("...i,...i->...", kvec, kvec))
    ghat = kern.f1.hat3d(kappa)
    # The pure-f1 kernel is (f1(|z|)/2)(A W(z) - W(z) A) = -sum_a f1 z_a T[a],
    # so its transform is sum_axis u_axis * T[axis] with
    # u = +i (width^2/2) ghat(|kappa|) kappa.
    u = (0.5j * kern.f1.width**2) * ghat[..., None] * kvec
    return np.einsum("...c,cab->...ab", u, _CHIRAL_GEN)


def periodize(kern, eps, grid, mode="auto"):
    """Periodize a molecular kernel at width eps onto the grid.

    mode 'sampled': real-space lattice sum over periodic images, then a
    parity projection; exact for the *grid* convolution but subject to
    sampling aliasing when the cell does not resolve the kernel width.
    mode 'spectral': exact Fourier coefficients of the periodized kernel
    (gaussian closed forms); required when eps is far below the cell size.
    mode 'auto' prefers spectral when a closed form exists.
    """
    if eps <= 0:
        raise ConfigError("periodize: eps must be positive")
    chiral = isinstance(kern, kmod.ChiralKernel)
    if mode not in ("auto", "sampled", "spectral"):
        raise ConfigError(f"periodize: unknown mode '{mode}'")
    if mode == "auto":
        if chiral:
            spectral_ok = kern.is_pure_f1 and kern.f1.family == "gaussian"
        else:
            spectral_ok = kern.is_pure_k1 and kern.k1.family == "gaussian"
        mode = "spectral" if spectral_ok else "sampled"
    if mode == "spectral":
        khat = (_spectral_khat_chiral if chiral else _spectral_khat_achiral)(kern, eps, grid)
        khat = np.ascontiguousarray(np.broadcast_to(khat, grid.shape + (5, 5)))
    else:
        matrix_fn = kmod.chiral_matrix if chiral else kmod.achiral_matrix
        samples = _periodize_sampled(kern, eps, grid, matrix_fn)
        samples = _parity_project(samples, grid, chiral)
        khat = grid.cell_volume * np.fft.fftn(samples, axes=(0, 1, 2))
    return PeriodizedKernel(grid=grid, eps=eps, khat=khat, chiral=chiral, mode=mode)


def convolve_direct(field_arr, pkern):
    """Module-level alias for the direct-sum convolution oracle."""
    return pkern.convolve_direct(field_arr)


# ----------------------------------------------------------------------
# The discrete model: periodized kernels + bulk constants
# ----------------------------------------------------------------------

def model_params_for(ks, rho0, eps, kT=1.0):
    """Bulk parameters consistent with a kernel set (couplings from moments)."""
    k_hh = kmod.k0(ks.HH)
    if k_hh <= 0:
        raise ConfigError("model_params_for: host-host mean coupling must be positive")
    return bulk.ModelParams(tau=kT / k_hh, alpha=kmod.k0(ks.HD) / k_hh,
                            rho0=rho0, eps=eps, kDD0=kmod.k0(ks.DD))


@dataclass
class DiscreteModel:
    """Everything needed to evaluate the discrete energy at one (grid, eps)."""

    grid: TorusGrid
    params: bulk.ModelParams
    HH: PeriodizedKernel | None
    HD: PeriodizedKernel | None
    DD: PeriodizedKernel | None
    cH: PeriodizedKernel | None
    cD: PeriodizedKernel | None
    c_eps: float
    m_hh: np.ndarray = field(default=None, repr=False)
    m_hd: np.ndarray = field(default=None, repr=False)
    m_dd: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        zero = np.zeros((5, 5))
        self.m_hh = self.HH.mass if self.HH else zero
        self.m_hd = self.HD.mass if self.HD else zero
        self.m_dd = self.DD.mass if self.DD else zero

    @classmethod
    def build(cls, ks, grid, params, mode="auto"):
        if params.eps <= 0:
            raise ConfigError("DiscreteModel: params.eps must be positive")

        def prep(kern):
            return None if _is_zero_kernel(kern) else periodize(kern, params.eps, grid, mode)

        return cls(grid=grid, params=params,
                   HH=prep(ks.HH), HD=prep(ks.HD), DD=prep(ks.DD),
                   cH=prep(ks.cH), cD=prep(ks.cD),
                   c_eps=bulk.c_eps(params))

    @property
    def lock_ratio(self):
        """Dopant/host order ratio s_c/s_0 of the limiting locked state."""
        cached = getattr(self, "_lock_ratio", None)
        if cached is None:
            s0 = bulk.solve_s0(self.params.tau)
            if s0 <= 0:
                cached = (0.0, 0.0, 0.0)
            else:
                sc = entropy.sc_from(s0, self.params.k_hd)
                cached = (sc / s0, s0, sc)
            self._lock_ratio = cached
        return cached[0]


@dataclass
class EnergyBreakdown:
    """Per-term decomposition of the rewritten energy."""

    total: float
    bulk_block: float
    fd_host_host: float
    fd_host_dopant: float
    fd_dopant_dopant: float
    chiral_host: float
    chiral_dopant: float
    min_eigenvalue: float
    physical: bool


def _site_dot(a, b):
    return float(np.einsum("ma,ma->", a.reshape(-1, 5), b.reshape(-1, 5)))


def _mass_quad(a, m, b):
    return float(np.einsum("ma,ab,mb->", a.reshape(-1, 5), m, b.reshape(-1, 5)))


class _EnergyEngine:
    """Shared evaluation core with conjugate-field warm starts."""

    def __init__(self, model):
        self.model = model
        self.lam_host = None
        self.lam_dopant = None

    def _entropy(self, arr, which):
        init = getattr(self, f"lam_{which}")
        if init is not None and init.shape != arr.shape:
            init = None
        try:
            ev = entropy.evaluate(arr, init=init)
        except (NumericalError, PhysicalityError):
            if init is None:
                raise
            ev = entropy.evaluate(arr)  # cold restart before giving up
        return ev

    def accept(self, ev_host, ev_dopant):
        self.lam_host = ev_host.conjugate
        self.lam_dopant = None if ev_dopant is None else ev_dopant.conjugate

    def evaluate(self, fields, want_grad=False, want_raw=False):
        m = self.model
        p = m.params
        eps, rho0 = p.eps, p.rho0
        w = m.grid.cell_volume
        q, xi = fields.host, fields.dopant

        min_eig = fields.min_eigenvalue()
        if min_eig <= qtensor.MIN_EIGENVALUE_BOUND:
            nan = float("nan")
            bd = EnergyBreakdown(float("inf"), nan, nan, nan, nan, nan, nan,
                                 min_eig, False)
            return {"breakdown": bd, "total": float("inf")}

        ev_q = self._entropy(q, "host")
        ev_xi = self._entropy(xi, "dopant") if rho0 > 0 else None

        conv = {}
        if m.HH is not None:
            conv["hh_q"] = m.HH.convolve(q)
        if m.HD is not None:
            conv["hd_xi"] = m.HD.convolve(xi)
        if m.DD is not None:
            conv["dd_xi"] = m.DD.convolve(xi)
        if m.cH is not None:
            conv["ch_q"] = m.cH.convolve(q)
        if m.cD is not None:
            conv["cd_xi"] = m.cD.convolve(xi)

        psi_q = float(ev_q.value.sum())
        psi_xi = float(ev_xi.value.sum()) if ev_xi is not None else 0.0
        quad_hh = _mass_quad(q, m.m_hh, q)
        quad_hd = _mass_quad(q, m.m_hd, xi)
        quad_dd = _mass_quad(xi, m.m_dd, xi)

        bulk_block = w * ((psi_q - 0.5 * quad_hh) / eps**2
                          + (rho0 / eps) * (psi_xi - quad_hd)
                          - 0.5 * rho0**2 * quad_dd) - m.c_eps * m.grid.volume
        fd_hh = (0.5 * w / eps**2) * (quad_hh - (_site_dot(q, conv["hh_q"]) if m.HH else quad_hh))
        fd_hd = (rho0 * w / eps) * (quad_hd - (_site_dot(q, conv["hd_xi"]) if m.HD else quad_hd))
        fd_dd = (0.5 * rho0**2 * w) * (quad_dd - (_site_dot(xi, conv["dd_xi"]) if m.DD else quad_dd))
        chi_h = (rho0 * w / eps) * _site_dot(xi, conv["ch_q"]) if m.cH else 0.0
        chi_d = rho0**2 * w * _site_dot(xi, conv["cd_xi"]) if m.cD else 0.0

        total = bulk_block + fd_hh + fd_hd + fd_dd + chi_h + chi_d
        out = {
            "total": total,
            "breakdown": EnergyBreakdown(total, bulk_block, fd_hh, fd_hd, fd_dd,
                                         chi_h, chi_d, min_eig, True),
            "ev_q": ev_q, "ev_xi": ev_xi,
        }

        if want_raw:
            out["raw"] = (w * (psi_q / eps**2 + (rho0 / eps) * psi_xi)
                          - (0.5 * w / eps**2) * (_site_dot(q, conv["hh_q"]) if m.HH else 0.0)
                          - (rho0 * w / eps) * (_site_dot(q, conv["hd_xi"]) if m.HD else 0.0)
                          - (0.5 * rho0**2 * w) * (_site_dot(xi, conv["dd_xi"]) if m.DD else 0.0)
                          + chi_h + chi_d)

        if want_grad:
            g_q = ev_q.conjugate.copy()
            if m.HH is not None:
                g_q -= conv["hh_q"]
            g_q /= eps**2
            if m.HD is not None:
                g_q -= (rho0 / eps) * conv["hd_xi"]
            if m.cH is not None:
                g_q += (rho0 / eps) * m.cH.convolve(xi)
            g_q *= w

            g_xi = np.zeros_like(xi)
            if rho0 > 0:
                g_xi = ev_xi.conjugate.copy()
                if m.HD is not None:
                    g_xi -= m.HD.convolve(q)
                g_xi *= rho0 / eps
                if m.DD is not None:
                    g_xi -= rho0**2 * conv["dd_xi"]
                if m.cH is not None:
                    g_xi += (rho0 / eps) * conv["ch_q"]
                if m.cD is not None:
                    g_xi += 2.0 * rho0**2 * conv["cd_xi"]
                g_xi *= w
            out["grad"] = (g_q, g_xi)
        return out


# ----------------------------------------------------------------------
# Public energy/gradient entry points (spec operation names)
# ----------------------------------------------------------------------

_MODEL_CACHE = {}


def _model_for(fields, ks, params, mode):
    key = (id(ks), fields.grid.shape, params, mode)
    model = _MODEL_CACHE.get(key)
    if model is None:
        model = DiscreteModel.build(ks, fields.grid, params, mode=mode)
        if len(_MODEL_CACHE) > 16:
            _MODEL_CACHE.clear()
        _MODEL_CACHE[key] = model
    return model


def energy_F_eps(fields, ks, params, mode="auto", return_breakdown=False):
    """Rewritten-form discrete energy; +inf sentinel on nonphysical fields."""
    model = ks if isinstance(ks, DiscreteModel) else _model_for(fields, ks, params, mode)
    out = _EnergyEngine(model).evaluate(fields)
    return (out["total"], out["breakdown"]) if return_breakdown else out["total"]


def energy_F_eps_raw(fields, ks, params, mode="auto"):
    """Unrewritten product-form energy (audit path, no c_eps normalization)."""
    model = ks if isinstance(ks, DiscreteModel) else _model_for(fields, ks, params, mode)
    out = _EnergyEngine(model).evaluate(fields, want_raw=True)
    return out.get("raw", float("inf"))


def energy_gradient(fields, ks, params, mode="auto"):
    """Analytic gradient pair (d/dhost, d/ddopant), cell volume included."""
    model = ks if isinstance(ks, DiscreteModel) else _model_for(fields, ks, params, mode)
    out = _EnergyEngine(model).evaluate(fields, want_grad=True)
    if "grad" not in out:
        raise PhysicalityError("energy_gradient: fields outside the physical domain")
    return out["grad"]


# ----------------------------------------------------------------------
# Constrained minimization
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class DescentSchedule:
    """Knobs for the preconditioned backtracking descent."""

    max_iter: int = 800
    gtol: float = 1e-7          # sup-norm of the preconditioned gradient
    flat_tol: float = 1e-13     # relative energy-change stop (0 disables)
    flat_window: int = 40
    margin: float = 1e-4        # eigenvalue distance kept from the physical boundary
    step0: float = 0.5
    step_min: float = 1e-14
    step_max: float = 8.0
    armijo: float = 1e-4
    shrink: float = 0.5
    use_bb: bool = True
    record_every: int = 1


@dataclass
class MinimizeResult:
    fields: QField
    energy: float
    breakdown: EnergyBreakdown
    iterations: int
    converged: bool
    stagnated: bool
    grad_norm: float
    energy_trace: list
    diagnostics: dict
    message: str


def _precondition(model, g_q, g_xi):
    """Per-block step scaling that tames the 1/eps^2 bulk stiffness."""
    p = model.params
    w = model.grid.cell_volume
    s_q = p.eps**2 / w
    s_xi = (p.eps / (p.rho0 * w)) if p.rho0 > 0 else 0.0
    return s_q * g_q, s_xi * g_xi


def minimize(initial, ks, params=None, schedule=None, mode="auto"):
    """Monotone descent of the discrete energy inside the physical set.

    ``initial`` is a QField; ``ks`` is a KernelSet (with ``params`` a bulk
    ModelParams) or a prebuilt DiscreteModel.  Returns the best iterate
    with an energy trace and locking/biaxiality diagnostics.
    """
    sched = schedule or DescentSchedule()
    model = ks if isinstance(ks, DiscreteModel) else DiscreteModel.build(ks, initial.grid, params, mode=mode)
    engine = _EnergyEngine(model)

    fields = initial.copy()
    if fields.min_eigenvalue() <= qtensor.MIN_EIGENVALUE_BOUND + sched.margin:
        raise PhysicalityError("minimize: initial fields violate the physicality margin")

    out = engine.evaluate(fields, want_grad=True)
    engine.accept(out["ev_q"], out["ev_xi"])
    energy_now = out["total"]
    g_q, g_xi = out["grad"]
    p_q, p_xi = _precondition(model, g_q, g_xi)

    trace = [energy_now]
    step = sched.step0
    prev = None  # (q, xi, p_q, p_xi) for the Barzilai-Borwein step
    n_evals = 1
    converged = stagnated = False
    message = "max_iter reached"
    iterations = 0

    for iterations in range(1, sched.max_iter + 1):
        gnorm = max(float(np.abs(p_q).max()), float(np.abs(p_xi).max()) if p_xi.size else 0.0)
        if gnorm < sched.gtol:
            converged, message = True, "gradient below tolerance"
            break

        if sched.use_bb and prev is not None:
            dz = np.concatenate([(fields.host - prev[0]).ravel(), (fields.dopant - prev[1]).ravel()])
            dp = np.concatenate([(p_q - prev[2]).ravel(), (p_xi - prev[3]).ravel()])
            num, den = float(dz @ dp), float(dp @ dp)
            if num > 0 and den > 0:
                step = float(np.clip(num / den, sched.step_min / sched.shrink, sched.step_max))
            else:
                # Negative curvature along the last move: probe a larger step
                # rather than trusting the quotient.
                step = min(step / sched.shrink, sched.step_max)
        prev = (fields.host.copy(), fields.dopant.copy(), p_q.copy(), p_xi.copy())

        slope = _site_dot(g_q, p_q) + _site_dot(g_xi, p_xi)  # = -dE/dt along -p
        accepted = False
        t = step
        while t >= sched.step_min:
            trial = QField(model.grid, fields.host - t * p_q, fields.dopant - t * p_xi)
            if trial.min_eigenvalue() <= qtensor.MIN_EIGENVALUE_BOUND + sched.margin:
                t *= sched.shrink
                continue
            try:
                cand = engine.evaluate(trial, want_grad=True)
            except (NumericalError, PhysicalityError):
                t *= sched.shrink
                continue
            n_evals += 1
            if cand["total"] <= energy_now - sched.armijo * t * slope:
                fields = trial
                energy_now = cand["total"]
                engine.accept(cand["ev_q"], cand["ev_xi"])
                g_q, g_xi = cand["grad"]
                p_q, p_xi = _precondition(model, g_q, g_xi)
                accepted = True
                step = t
                break
            t *= sched.shrink
        if not accepted:
            stagnated, message = True, "line search stagnated (step underflow)"
            break

        if iterations % sched.record_every == 0:
            trace.append(energy_now)
        if sched.flat_tol > 0 and len(trace) > sched.flat_window:
            older = trace[-sched.flat_window - 1]
            if abs(older - energy_now) <= sched.flat_tol * max(abs(energy_now), 1.0):
                converged, message = True, "energy change below flat tolerance"
                break

    if trace[-1] != energy_now:
        trace.append(energy_now)
    final = engine.evaluate(fields)
    gnorm = max(float(np.abs(p_q).max()), float(np.abs(p_xi).max()) if p_xi.size else 0.0)

    diagnostics = {
        "n_energy_evals": n_evals,
        "min_eigenvalue": fields.min_eigenvalue(),
        "biaxiality_max": float(np.max(qtensor.biaxiality(fields.host))),
    }
    ratio = model.lock_ratio
    if model.params.rho0 > 0 and ratio > 0:
        w = model.grid.cell_volume
        diff = fields.dopant - ratio * fields.host
        lock = float(np.sqrt(w * _site_dot(diff, diff)))
        ref = ratio * fields.host
        norm = float(np.sqrt(w * _site_dot(ref, ref)))
        diagnostics["xi_lock_l2"] = lock
        diagnostics["xi_lock_rel"] = lock / norm if norm > 0 else float("inf")

    return MinimizeResult(fields=fields, energy=energy_now,
                          breakdown=final["breakdown"], iterations=iterations,
                          converged=converged, stagnated=stagnated,
                          grad_norm=gnorm, energy_trace=trace,
                          diagnostics=diagnostics, message=message)
