"""Interaction kernels between rod ensembles and their moment integrals.

Pair interactions enter the model as operator-valued kernels acting on
order tensors.  An *achiral* kernel is built from three radial profiles:

    K(z) A = k1 A + k2 (A zz^T + zz^T A) + k3 (Az.z) zz^T
             - (Az.z)/3 (2 k2 + k3 |z|^2) I

(the trace correction keeps the output in the order-tensor space).  A
*chiral* kernel is built from two radial profiles and the skew map
W = skew(z), W x = z cross x:

    K_c(z) A = -(1/2) (f1 + (|z|^2 - 1) f2) (A W - W A)
               + (f2 / 2) (W A W^2 - W^2 A W)

which is the general form linear in A that flips sign under spatial
inversion while staying isotropic.  Its inner products reduce to

    [K_c(z) sigma(p)] . sigma(q) =
        (z . p x q) [ f1 (p.q) + f2 ((p.z)(q.z) - p.q) ],

so it rewards mutually twisted pairs; the achiral counterparts reduce to
even polynomials in (p.q), (p.z), (q.z).

Moment integrals of the kernels produce every coefficient of the coarse
theory: the mean couplings k0, the elastic tensor (hence Frank constants),
and the chiral-strength coefficient beta, with

    beta = (4 pi / 3) [ int f1 r^4 + (1/5) int f2 r^6 - int f2 r^4 ] dr.

The chiral first-moment contraction is fixed so that on a helix of pitch
wavenumber m the density equals beta s^2 (n . curl n) = -beta s^2 m; the
sign convention is pinned by requiring the fine-scale energy's chiral term
to converge to exactly this density (verified in the test suite).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import quad as _quad

from . import qtensor
from .errors import AssumptionViolation, ConfigError, NumericalError, SymmetryError
from .quadrature import radial_rule, sphere_quadrature

KERNEL_MOMENT_SPHERE = (48, 96)
_GAMMA_HALF = math.sqrt(math.pi)


# ----------------------------------------------------------------------
# Radial profiles
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class RadialProfile:
    """A scalar radial coefficient function on [0, inf).

    Families: ``gaussian`` amplitude*exp(-(r/width)^2), ``exponential``
    amplitude*exp(-rate*r), ``tabulated`` (linear interpolation, zero past
    the last knot), and ``zero``.
    """

    family: str
    amplitude: float = 0.0
    width: float = 1.0
    rate: float = 1.0
    radii: tuple = field(default=())
    values: tuple = field(default=())

    def __post_init__(self):
        if self.family not in ("gaussian", "exponential", "tabulated", "zero"):
            raise ConfigError(f"RadialProfile: unknown family '{self.family}'")
        if self.family == "gaussian" and self.width <= 0:
            raise ConfigError("RadialProfile: gaussian width must be positive")
        if self.family == "exponential" and self.rate <= 0:
            raise ConfigError("RadialProfile: exponential rate must be positive")
        if self.family == "tabulated":
            r = np.asarray(self.radii, dtype=float)
            v = np.asarray(self.values, dtype=float)
            if r.ndim != 1 or r.shape != v.shape or len(r) < 2:
                raise ConfigError("RadialProfile: tabulated needs matching radii/values")
            if np.any(np.diff(r) <= 0) or r[0] < 0:
                raise ConfigError("RadialProfile: tabulated radii must increase from >= 0")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.family == "zero":
            return np.zeros_like(r)
        if self.family == "gaussian":
            return self.amplitude * np.exp(-((r / self.width) ** 2))
        if self.family == "exponential":
            return self.amplitude * np.exp(-self.rate * r)
        return np.interp(r, self.radii, self.values, left=self.values[0], right=0.0)

    @property
    def is_zero(self):
        return self.family == "zero" or (self.family != "tabulated" and self.amplitude == 0.0)

    def r_cut(self):
        """Radius past which the profile (times r^6) is negligible at double precision."""
        if self.family == "zero":
            return 1.0
        if self.family == "gaussian":
            return 8.5 * self.width
        if self.family == "exponential":
            return 60.0 / self.rate
        return float(self.radii[-1])

    def moment(self, n):
        """int_0^inf f(r) r^n dr by adaptive quadrature on the truncated support."""
        if self.is_zero:
            return 0.0
        pts = list(self.radii) if self.family == "tabulated" else None
        val, _err = _quad(lambda r: float(self(r)) * r**n, 0.0, self.r_cut(),
                          points=pts, limit=200)
        return val

    def hat3d(self, kappa):
        """3D Fourier transform int f(|z|) exp(-i kappa . z) dz, radially symmetric.

        Closed form available for gaussians (used by the exact torus-transform
        path); other families return None and force the sampled path.
        """
        if self.family == "zero":
            return np.zeros_like(np.asarray(kappa, dtype=float))
        if self.family != "gaussian":
            return None
        k = np.asarray(kappa, dtype=float)
        return (self.amplitude * math.pi**1.5 * self.width**3
                * np.exp(-(k * self.width) ** 2 / 4.0))

    def to_dict(self):
        if self.family == "zero":
            return {"family": "zero"}
        if self.family == "gaussian":
            return {"family": "gaussian", "amplitude": self.amplitude, "width": self.width}
        if self.family == "exponential":
            return {"family": "exponential", "amplitude": self.amplitude, "rate": self.rate}
        return {"family": "tabulated", "radii": list(self.radii), "values": list(self.values)}

    @classmethod
    def from_dict(cls, d, where=""):
        if not isinstance(d, dict) or "family" not in d:
            raise ConfigError(f"kernel file: profile at '{where}' must be an object with a 'family'")
        fam = d["family"]
        allowed = {
            "zero": set(),
            "gaussian": {"amplitude", "width"},
            "exponential": {"amplitude", "rate"},
            "tabulated": {"radii", "values", "interpolation"},
        }
        if fam not in allowed:
            raise ConfigError(f"kernel file: unknown profile family '{fam}' at '{where}'")
        extra = set(d) - {"family"} - allowed[fam]
        if extra:
            raise ConfigError(f"kernel file: unknown key '{sorted(extra)[0]}' at '{where}'")
        if fam == "tabulated":
            interp = d.get("interpolation", "linear")
            if interp != "linear":
                raise ConfigError(f"kernel file: unsupported interpolation '{interp}' at '{where}'")
            return cls(family=fam, radii=tuple(d["radii"]), values=tuple(d["values"]))
        kwargs = {k: float(v) for k, v in d.items() if k != "family"}
        return cls(family=fam, **kwargs)


ZERO_PROFILE = RadialProfile(family="zero")


# ----------------------------------------------------------------------
# Kernel families and their pointwise action
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class AchiralKernel:
    k1: RadialProfile = ZERO_PROFILE
    k2: RadialProfile = ZERO_PROFILE
    k3: RadialProfile = ZERO_PROFILE

    @property
    def is_pure_k1(self):
        return self.k2.is_zero and self.k3.is_zero


@dataclass(frozen=True)
class ChiralKernel:
    f1: RadialProfile = ZERO_PROFILE
    f2: RadialProfile = ZERO_PROFILE

    @property
    def is_pure_f1(self):
        return self.f2.is_zero


def apply_achiral(kern, z, a5):
    """K(z) A for an achiral kernel; z (...,3) and a5 (...,5) broadcast together."""
    z = np.asarray(z, dtype=float)
    a = qtensor.to_matrix(a5)
    r2 = np.einsum("...i,...i->...", z, z)
    r = np.sqrt(r2)
    k1, k2, k3 = kern.k1(r), kern.k2(r), kern.k3(r)
    az = np.einsum("...ij,...j->...i", a, z)
    azz = np.einsum("...i,...i->...", az, z)
    out = k1[..., None, None] * a
    if not kern.k2.is_zero:
        sym = az[..., :, None] * z[..., None, :] + z[..., :, None] * az[..., None, :]
        out = out + k2[..., None, None] * sym
    if not kern.k3.is_zero:
        out = out + (k3 * azz)[..., None, None] * (z[..., :, None] * z[..., None, :])
    trace_fix = (azz / 3.0) * (2.0 * k2 + k3 * r2)
    out = out - trace_fix[..., None, None] * np.eye(3)
    return qtensor.from_matrix(out)


def apply_chiral(kern, z, a5):
    """K_c(z) A for a chiral kernel; odd in z, antisymmetric as an operator.

    Normalization: the f1 part satisfies sigma(p) . (K_c(z) sigma(q))
    = f1(|z|) (z . p x q)(p . q), i.e. the scalar invariant carries a plus
    sign in this argument order.  This orientation makes the first z-moment
    of the kernel (see chiral_vector_V) the coefficient of the gradient term
    that the pair-coupling energy produces in the small-interaction-range
    limit, with no extra sign.
    """
    z = np.asarray(z, dtype=float)
    a = qtensor.to_matrix(a5)
    r2 = np.einsum("...i,...i->...", z, z)
    r = np.sqrt(r2)
    f1, f2 = kern.f1(r), kern.f2(r)
    w = qtensor.skew_matrix(z)
    aw = a @ w
    comm = aw + np.swapaxes(aw, -1, -2)  # A W - W A, using (A W)^T = -W A
    out = (0.5 * (f1 + (r2 - 1.0) * f2))[..., None, None] * comm
    if not kern.f2.is_zero:
        w2 = w @ w
        y = w @ a @ w2
        # W A W^2 - W^2 A W = Y + Y^T, using (W A W^2)^T = -W^2 A W
        out = out - (0.5 * f2)[..., None, None] * (y + np.swapaxes(y, -1, -2))
    return qtensor.from_matrix(out)


def _matrix_of(apply_fn, kern, z):
    """Stack the kernel action on the basis into 5x5 matrices, batched over z."""
    z = np.asarray(z, dtype=float)
    cols = []
    for j in range(5):
        e5 = np.broadcast_to(np.eye(5)[j], z.shape[:-1] + (5,))
        cols.append(apply_fn(kern, z, e5))
    return np.stack(cols, axis=-1)  # (..., 5, 5): column j = K(z) E_j


def achiral_matrix(kern, z):
    return _matrix_of(apply_achiral, kern, z)


def chiral_matrix(kern, z):
    return _matrix_of(apply_chiral, kern, z)


# ----------------------------------------------------------------------
# Moment integrals
# ----------------------------------------------------------------------

def _moment_nodes(profiles, n_radial=160, sphere_degree=KERNEL_MOMENT_SPHERE):
    """Flattened 3D quadrature covering the kernel support: nodes (N,3), weights (N,)."""
    rmax = max(p.r_cut() for p in profiles if not p.is_zero)
    r, wr = radial_rule(rmax, n_radial)
    quad = sphere_quadrature(*sphere_degree)
    z = (r[:, None, None] * quad.nodes[None, :, :]).reshape(-1, 3)
    w = (wr * r * r)[:, None] * quad.weights[None, :]
    return z, w.reshape(-1)


def k0(kern, return_residual=False, n_radial=160):
    """Mean coupling: int K(z) dz is a multiple of the identity; return the scalar.

    The isotropy of the kernel family forces the matrix to be c * Id up to
    quadrature error; a deviation above 1e-8 |c| trips a symmetry error.
    """
    profiles = (kern.k1, kern.k2, kern.k3)
    if all(p.is_zero for p in profiles):
        return (0.0, 0.0) if return_residual else 0.0
    z, w = _moment_nodes(profiles, n_radial=n_radial)
    mat = np.einsum("m,mab->ab", w, achiral_matrix(kern, z))
    c = float(np.trace(mat) / 5.0)
    resid = float(np.linalg.norm(mat - c * np.eye(5)))
    if resid > 1e-8 * max(abs(c), 1e-30):
        raise SymmetryError(f"k0: anisotropy residual {resid:.3e} exceeds 1e-8 |c|")
    if return_residual:
        return c, resid
    return c


@dataclass
class ElasticTensor:
    """Second z-moment of an achiral kernel: M[a, b] = int K(z) z_a z_b dz.

    ``bilinear(G, H)`` evaluates (1/2) sum_ab G_a . M[a,b] H_b for gradient
    stacks shaped (..., 3, 5); the elastic energy density of the coarse
    theory is one half of the diagonal bilinear form.
    """

    moments: np.ndarray  # (3, 3, 5, 5)

    def bilinear(self, g, h=None):
        h = g if h is None else h
        return 0.5 * np.einsum("...as,abst,...bt->...", g, self.moments, h)

    def density(self, g):
        return 0.5 * self.bilinear(g, g)


@lru_cache(maxsize=64)
def elastic_tensor_L(kern, n_radial=160):
    """Elastic moment tensor of an achiral kernel (cached per kernel)."""
    profiles = (kern.k1, kern.k2, kern.k3)
    if all(p.is_zero for p in profiles):
        return ElasticTensor(moments=np.zeros((3, 3, 5, 5)))
    z, w = _moment_nodes(profiles, n_radial=n_radial)
    mats = achiral_matrix(kern, z)
    out = np.einsum("m,ma,mb,mst->abst", w, z, z, mats)
    return ElasticTensor(moments=out)


@dataclass
class ChiralMoment:
    """First z-moment of a chiral kernel: M[a] = int K_c(z) z_a dz.

    ``density(Q, G)`` = sum_a (M[a] Q) . G_a is the chiral energy density
    of the coarse theory; on a uniaxial helix it equals beta s^2 (n.curl n).
    The plus-sign contraction is the one the pair-coupling energy converges
    to (ground-state handedness pins it; see the convolution-energy module's
    helical diagnostics), so no compensating sign appears downstream.
    """

    moments: np.ndarray  # (3, 5, 5)

    def density(self, q5, g):
        return np.einsum("ast,...t,...as->...", self.moments, q5, g)


@lru_cache(maxsize=64)
def chiral_vector_V(kern, n_radial=160):
    """Chiral moment tensor of a chiral kernel (see ChiralMoment; cached)."""
    profiles = (kern.f1, kern.f2)
    if all(p.is_zero for p in profiles):
        return ChiralMoment(moments=np.zeros((3, 5, 5)))
    z, w = _moment_nodes(profiles, n_radial=n_radial)
    mats = chiral_matrix(kern, z)
    out = np.einsum("m,ma,mst->ast", w, z, mats)
    return ChiralMoment(moments=out)


def beta_coefficient(kern):
    """Chiral strength of a chiral kernel from three radial moments."""
    return (4.0 * math.pi / 3.0) * (kern.f1.moment(4)
                                    + 0.2 * kern.f2.moment(6)
                                    - kern.f2.moment(4))


def frank_constants(kern, s0=1.0, check=True):
    """Frank constants (K11, K22, K33) of an achiral kernel.

    Probes the elastic bilinear form with the exact tensor gradients of
    pure splay, twist, and bend director configurations of order s0; the
    s0^2 factor divides out, so the result does not depend on s0.  An
    amplitude-doubling consistency check guards the quadratic scaling.
    """
    el = elastic_tensor_L(kern)
    amp = 0.7

    def probe(alpha_slot, comp):
        g = np.zeros((3, 5))
        g[alpha_slot, comp] = s0 * amp * math.sqrt(2.0)
        return g

    g_splay = probe(0, 3)   # d1 Q of n = normalize(e3 + a x1 e1):  s a sqrt2 E4
    g_twist = probe(2, 2)   # d3 Q of n = (cos m x3, sin m x3, 0):  s m sqrt2 E3
    g_bend = probe(2, 3)    # d3 Q of n = normalize(e3 + a x3 e1):  s a sqrt2 E4
    denom = (s0 * amp) ** 2
    k11 = float(el.bilinear(g_splay, g_splay)) / denom
    k22 = float(el.bilinear(g_twist, g_twist)) / denom
    k33 = float(el.bilinear(g_bend, g_bend)) / denom
    if check:
        k11_2 = float(el.bilinear(2 * g_splay, 2 * g_splay)) / (4 * denom)
        if abs(k11_2 - k11) > 1e-6 * max(abs(k11), 1e-30):
            raise NumericalError("frank_constants: amplitude-doubling check failed")
    return k11, k22, k33


# ----------------------------------------------------------------------
# Kernel sets
# ----------------------------------------------------------------------

_ACHIRAL_NAMES = ("HH", "HD", "DD")
_CHIRAL_NAMES = ("cH", "cD")


@dataclass(frozen=True)
class KernelSet:
    """The five interaction kernels of the host/dopant model plus envelope.

    HH, HD, DD are achiral couplings (host-host, host-dopant,
    dopant-dopant); cH and cD are the chiral couplings a chiral dopant
    exerts on each species.  The envelope is the common integrable radial
    bound used by the structural-assumption validator.
    """

    HH: AchiralKernel
    HD: AchiralKernel
    DD: AchiralKernel
    cH: ChiralKernel
    cD: ChiralKernel
    envelope: RadialProfile

    def to_dict(self):
        d = {}
        for name in _ACHIRAL_NAMES:
            kern = getattr(self, name)
            d[name] = {lbl: p.to_dict() for lbl, p in
                       (("k1", kern.k1), ("k2", kern.k2), ("k3", kern.k3)) if not p.is_zero}
        for name in _CHIRAL_NAMES:
            kern = getattr(self, name)
            d[name] = {lbl: p.to_dict() for lbl, p in
                       (("f1", kern.f1), ("f2", kern.f2)) if not p.is_zero}
        d["envelope"] = self.envelope.to_dict()
        return d

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise ConfigError("kernel file: top level must be an object")
        unknown = set(d) - set(_ACHIRAL_NAMES) - set(_CHIRAL_NAMES) - {"envelope"}
        if unknown:
            raise ConfigError(f"kernel file: unknown section '{sorted(unknown)[0]}'")
        kw = {}
        for name in _ACHIRAL_NAMES:
            sec = d.get(name, {})
            extra = set(sec) - {"k1", "k2", "k3"}
            if extra:
                raise ConfigError(f"kernel file: unknown key '{sorted(extra)[0]}' in section '{name}'")
            kw[name] = AchiralKernel(**{lbl: RadialProfile.from_dict(sec[lbl], f"{name}.{lbl}")
                                        for lbl in sec})
        for name in _CHIRAL_NAMES:
            sec = d.get(name, {})
            extra = set(sec) - {"f1", "f2"}
            if extra:
                raise ConfigError(f"kernel file: unknown key '{sorted(extra)[0]}' in section '{name}'")
            kw[name] = ChiralKernel(**{lbl: RadialProfile.from_dict(sec[lbl], f"{name}.{lbl}")
                                       for lbl in sec})
        if "envelope" not in d:
            raise ConfigError("kernel file: missing 'envelope' section")
        kw["envelope"] = RadialProfile.from_dict(d["envelope"], "envelope")
        return cls(**kw)


def load_kernel_set(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"kernel file '{path}': {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"kernel file '{path}': invalid JSON ({exc})") from exc
    return KernelSet.from_dict(data)


def save_kernel_set(ks, path):
    with open(path, "w") as fh:
        json.dump(ks.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


DEMO_RHO0 = 0.45
"""Reference dopant concentration used with the demo set in examples."""


def demo_kernel_set():
    """Built-in kernel set (unit-width gaussians) used by examples and docs.

    Mean couplings: HH = HD = 25/3 (so tau = 0.12, coupling ratio 1, well
    inside the nematic phase) and DD = 4.  The chiral strength makes the
    twist-per-coupling ratio exactly pi^{3/2} : 25/6, which at the
    reference dopant concentration 0.45 puts the preferred wavenumber near
    0.60 -- deep inside the cell that rounds to the half-turn winding, so
    twist selection on the periodic box is unambiguous in both directions.
    The strength/concentration pair also balances two opposing shifts of
    the dopant amplitude at finite interaction range: the mean dopant-dopant
    coupling depresses it (more so at higher concentration) while the
    chiral coupling to a twisted host raises it (linearly in the chiral
    strength, independent of concentration), keeping the dopant locked to
    the host ray within about one percent at the coarsest range used in
    the recovery sweep.
    """
    pis = math.pi**1.5
    return KernelSet(
        HH=AchiralKernel(k1=RadialProfile("gaussian", amplitude=(25.0 / 3.0) / pis, width=1.0)),
        HD=AchiralKernel(k1=RadialProfile("gaussian", amplitude=(25.0 / 3.0) / pis, width=1.0)),
        DD=AchiralKernel(k1=RadialProfile("gaussian", amplitude=4.0 / pis, width=1.0)),
        cH=ChiralKernel(f1=RadialProfile("gaussian", amplitude=2.0, width=1.0)),
        cD=ChiralKernel(f1=RadialProfile("gaussian", amplitude=0.15, width=1.0)),
        envelope=RadialProfile("gaussian", amplitude=12.0, width=1.0),
    )


# ----------------------------------------------------------------------
# Structural assumptions
# ----------------------------------------------------------------------

@dataclass
class ValidationReport:
    """Fitted envelope constants and any pointwise violations found."""

    c1: float
    c2: float
    c_chiral: float
    per_kernel: dict
    violations: list
    n_samples: int

    @property
    def passed(self):
        return not self.violations


def validate_assumptions(ks, n_radii=32, n_dirs=24, seed=0, r_max=None):
    """Sample the operator bounds every kernel must satisfy against the envelope.

    For each achiral kernel the 5x5 matrix at sampled z must have eigenvalues
    inside [C1 g(|z|), C2 g(|z|)] for some 0 < C1 <= C2; for each chiral
    kernel the operator norm must be bounded by C g(|z|).  The returned
    report carries the best (tightest) fitted constants over the sample and
    lists violations (nonpositive lower eigenvalue ratio, nonfinite ratios,
    or a nonpositive envelope).  Report-only: raising is left to callers.
    """
    rng = np.random.default_rng(seed)
    if r_max is None:
        r_max = max(p.r_cut() for p in (ks.envelope,))
        r_max = min(r_max, 3.0 * ks.envelope.width if ks.envelope.family == "gaussian" else r_max)
    radii = np.linspace(0.05, r_max, n_radii)
    dirs = rng.normal(size=(n_dirs, 3))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    z = (radii[:, None, None] * dirs[None, :, :]).reshape(-1, 3)
    g = ks.envelope(np.linalg.norm(z, axis=1))

    violations = []
    per_kernel = {}
    c1_all, c2_all, cc_all = np.inf, -np.inf, 0.0
    if np.any(g <= 0):
        violations.append({"kernel": "envelope", "issue": "nonpositive envelope value"})

    for name in _ACHIRAL_NAMES:
        kern = getattr(ks, name)
        mats = achiral_matrix(kern, z)
        mats = 0.5 * (mats + np.swapaxes(mats, -1, -2))
        ev = np.linalg.eigvalsh(mats)
        lo = ev[:, 0] / g
        hi = ev[:, -1] / g
        bad = ~np.isfinite(lo) | ~np.isfinite(hi) | (lo <= 0)
        for i in np.flatnonzero(bad)[:5]:
            violations.append({"kernel": name, "z_norm": float(np.linalg.norm(z[i])),
                               "issue": "eigenvalue ratio not positive/finite",
                               "ratio": float(lo[i])})
        per_kernel[name] = (float(lo.min()), float(hi.max()))
        c1_all = min(c1_all, per_kernel[name][0])
        c2_all = max(c2_all, per_kernel[name][1])

    for name in _CHIRAL_NAMES:
        kern = getattr(ks, name)
        mats = chiral_matrix(kern, z)
        norms = np.linalg.norm(mats, axis=(-2, -1)) / g
        if not np.all(np.isfinite(norms)):
            violations.append({"kernel": name, "issue": "unbounded ratio against envelope"})
        per_kernel[name] = float(norms.max())
        cc_all = max(cc_all, per_kernel[name])

    return ValidationReport(c1=float(c1_all), c2=float(c2_all), c_chiral=float(cc_all),
                            per_kernel=per_kernel, violations=violations,
                            n_samples=len(z))


# ----------------------------------------------------------------------
# Derived wavenumbers and physical twisting power
# ----------------------------------------------------------------------

def wavenumber_q(ks, rho0, s0, sc):
    """Equilibrium cholesteric wavenumber q = sc beta rho0 / (s0 K22)."""
    _, k22, _ = frank_constants(ks.HH)
    if not (k22 > 0):
        raise AssumptionViolation("wavenumber_q: twist constant K22 must be positive")
    if s0 <= 0:
        raise NumericalError("wavenumber_q: requires a nematic host (s0 > 0)")
    beta = beta_coefficient(ks.cH)
    return sc * beta * rho0 / (s0 * k22)


def htp_physical(ks, rho_host, kT):
    """Physical helical twisting power of a dilute dopant in a given host.

    The kernel set carries temperature-independent interaction strengths;
    the host state (number density rho_host, thermal energy kT) fixes the
    reduced temperature tau = kT / (rho_host k0_HH) and the coupling ratio
    alpha = k0_HD / k0_HH.  Returns h = sc beta / (rho_host s0 K22), the
    pitch wavenumber per unit dopant concentration.
    """
    from . import bulk  # local import to avoid a cycle

    k_hh = k0(ks.HH)
    if k_hh <= 0:
        raise AssumptionViolation("htp_physical: k0_HH must be positive")
    tau = kT / (rho_host * k_hh)
    alpha = k0(ks.HD) / k_hh
    s0 = bulk.solve_s0(tau)
    if s0 <= 0:
        raise NumericalError(f"htp_physical: host is isotropic at tau={tau:g}")
    sc = bulk.solve_sc(tau, alpha, s0=s0)
    _, k22, _ = frank_constants(ks.HH)
    beta = beta_coefficient(ks.cH)
    return sc * beta / (rho_host * s0 * k22)
