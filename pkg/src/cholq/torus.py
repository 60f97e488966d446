"""Periodic grids on the 2*pi cube, tensor fields on them, and field I/O.

Fields are stored as arrays of shape (n1, n2, n3, 5): five order-tensor
components per site in the fixed basis of :mod:`cholq.qtensor`.  The state
of the two-species model is a pair of such arrays (host, dopant).  Dumps
are raw little-endian float64, row-major with x1 slowest, 10 floats per
site (host then dopant components), plus a JSON sidecar describing shape
and provenance.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import qtensor
from .errors import ConfigError, DomainError

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class TorusGrid:
    """Uniform periodic grid on [0, 2*pi)^3 with per-axis site counts."""

    shape: tuple

    def __post_init__(self):
        shape = tuple(int(n) for n in self.shape)
        object.__setattr__(self, "shape", shape)
        if len(shape) != 3:
            raise ConfigError("TorusGrid: shape must have three axes")
        for n in shape:
            if n < 4 or n % 2:
                raise ConfigError("TorusGrid: each axis needs an even count >= 4")

    @property
    def spacing(self):
        return tuple(TWO_PI / n for n in self.shape)

    @property
    def cell_volume(self):
        h1, h2, h3 = self.spacing
        return h1 * h2 * h3

    @property
    def volume(self):
        return TWO_PI**3

    def axis(self, i):
        return np.arange(self.shape[i]) * self.spacing[i]

    def k_int(self, i):
        """Integer Fourier frequencies along axis i (FFT layout)."""
        n = self.shape[i]
        return np.fft.fftfreq(n, d=1.0 / n)

    def k_vectors(self):
        """Broadcastable integer wave-vector components (k1, k2, k3)."""
        k1 = self.k_int(0)[:, None, None]
        k2 = self.k_int(1)[None, :, None]
        k3 = self.k_int(2)[None, None, :]
        return k1, k2, k3


@dataclass
class QField:
    """Host and dopant order-tensor fields on a common grid."""

    grid: TorusGrid
    host: np.ndarray
    dopant: np.ndarray

    def __post_init__(self):
        want = self.grid.shape + (5,)
        if self.host.shape != want or self.dopant.shape != want:
            raise ConfigError(f"QField: arrays must have shape {want}")

    def copy(self):
        return QField(self.grid, self.host.copy(), self.dopant.copy())

    def min_eigenvalue(self):
        return min(float(qtensor.min_eigenvalue(self.host).min()),
                   float(qtensor.min_eigenvalue(self.dopant).min()))

    def is_physical(self, margin=0.0):
        return self.min_eigenvalue() > qtensor.MIN_EIGENVALUE_BOUND + margin


def constant_field(grid, host5, dopant5):
    """Spatially constant state from two single tensors."""
    host = np.broadcast_to(np.asarray(host5, float), grid.shape + (5,)).copy()
    dop = np.broadcast_to(np.asarray(dopant5, float), grid.shape + (5,)).copy()
    return QField(grid, host, dop)


def helical_ansatz(grid, m, s_host, s_dopant):
    """Uniaxial helix twisting about e3: n = (cos m x3, sin m x3, 0).

    Periodicity of the tensor field on the 2*pi box requires 2m to be an
    integer (the director is sign-ambiguous, so half turns close up).
    """
    if abs(2.0 * m - round(2.0 * m)) > 1e-12:
        raise DomainError("helical_ansatz: wavenumber must be a half-integer")
    x3 = grid.axis(2)
    phi = m * x3
    n = np.stack([np.cos(phi), np.sin(phi), np.zeros_like(phi)], axis=-1)
    sig = qtensor.sigma(n)  # (n3, 5)
    host = np.broadcast_to(s_host * sig, grid.shape + (5,)).copy()
    dop = np.broadcast_to(s_dopant * sig, grid.shape + (5,)).copy()
    return QField(grid, host, dop)


def random_field(grid, rng, amplitude=0.1, margin=0.02):
    """Independent Gaussian tensor noise per site, rescaled into the physical set.

    Sites whose smallest eigenvalue would cross -1/3 + 2*margin are shrunk
    radially (eigenvalues scale with the tensor), preserving determinism.
    The default margin keeps every site where the entropy solver is
    comfortably convergent; the physical bound itself sits at -1/3.
    """
    def draw():
        arr = amplitude * rng.standard_normal(grid.shape + (5,))
        lam = qtensor.min_eigenvalue(arr)
        floor = qtensor.MIN_EIGENVALUE_BOUND + 2.0 * margin
        scale = np.where(lam < floor, floor / np.minimum(lam, -1e-300), 1.0)
        return arr * np.minimum(scale, 1.0)[..., None]

    return QField(grid, draw(), draw())


def random_profile_field(grid, rng, amplitude=0.1, margin=0.02):
    """Random tensor per x3-slice, constant across the transverse axes.

    This is the recommended unbiased start for probing the helical ground
    state.  Fully independent per-site noise (random_field) on a periodic
    box quenches into transverse winding mismatches: neighbouring columns
    wind by different amounts, and untwisting a column against its
    neighbours costs passing through the isotropic state, which plain
    descent will not do.  A transverse-constant profile carries no such
    frustration, yet leaves the winding of the profile completely free;
    the subspace is exactly preserved by gradient descent because the
    energy is translation invariant in the transverse directions.
    """
    def draw():
        prof = amplitude * rng.standard_normal((grid.shape[2], 5))
        arr = np.broadcast_to(prof, grid.shape + (5,)).copy()
        lam = qtensor.min_eigenvalue(arr)
        floor = qtensor.MIN_EIGENVALUE_BOUND + 2.0 * margin
        scale = np.where(lam < floor, floor / np.minimum(lam, -1e-300), 1.0)
        return arr * np.minimum(scale, 1.0)[..., None]

    return QField(grid, draw(), draw())


def transverse_average(field):
    """Average a (n1, n2, n3, 5) field over the two transverse axes -> (n3, 5)."""
    return field.mean(axis=(0, 1))


def extract_wavenumber(field, grid):
    """Fit the twist wavenumber of a nearly helical host field.

    Slices transverse to e3 are averaged and projected onto their closest
    uniaxial state; the in-plane director angle (defined modulo pi) is
    unwrapped along x3 and fit by least squares.  Returns (m, info) where
    info reports the fit residual (radians RMS), the largest out-of-plane
    director component, the order-parameter range, and the worst slice
    biaxiality -- all flags for "this was not actually a helix".
    """
    prof = transverse_average(np.asarray(field, dtype=float))
    s, n, diag = qtensor.uniaxial_project(prof)
    out_of_plane = float(np.abs(n[:, 2]).max())
    theta = np.arctan2(n[:, 1], n[:, 0])
    psi = 0.5 * np.unwrap(2.0 * theta)
    x3 = grid.axis(2)
    xc = x3 - x3.mean()
    denom = float(xc @ xc)
    slope = float(xc @ (psi - psi.mean())) / denom
    resid = float(np.sqrt(np.mean((psi - psi.mean() - slope * xc) ** 2)))
    info = {
        "residual": resid,
        "out_of_plane": out_of_plane,
        "s_min": float(s.min()),
        "s_max": float(s.max()),
        "biaxiality_max": float(np.max(diag["biaxiality"])),
    }
    return slope, info


def grad_spectral(field, grid):
    """Spectral gradient of a (n1,n2,n3,C) field -> (n1,n2,n3,3,C)."""
    fhat = np.fft.fftn(field, axes=(0, 1, 2))
    k1, k2, k3 = grid.k_vectors()
    out = np.empty(field.shape[:3] + (3, field.shape[-1]), dtype=float)
    for a, k in enumerate((k1, k2, k3)):
        out[..., a, :] = np.real(np.fft.ifftn(1j * k[..., None] * fhat, axes=(0, 1, 2)))
    return out


def grad_central(field, grid):
    """Second-order centered-difference gradient, same layout as grad_spectral."""
    out = np.empty(field.shape[:3] + (3, field.shape[-1]), dtype=float)
    for a in range(3):
        h = grid.spacing[a]
        out[..., a, :] = (np.roll(field, -1, axis=a) - np.roll(field, 1, axis=a)) / (2 * h)
    return out


# ----------------------------------------------------------------------
# Field dumps
# ----------------------------------------------------------------------

FIELD_MAGIC = "cholq-field-v1"


def save_fields(prefix, qf, meta=None):
    """Write PREFIX.f64 (raw data) and PREFIX.json (sidecar).

    Layout: row-major over (x1, x2, x3), 10 little-endian float64 per site:
    the five host components then the five dopant components, in the fixed
    tensor-basis order.
    """
    raw = np.concatenate([qf.host, qf.dopant], axis=-1).astype("<f8")
    data_path = f"{prefix}.f64"
    with open(data_path, "wb") as fh:
        fh.write(np.ascontiguousarray(raw).tobytes())
    sidecar = {
        "format": FIELD_MAGIC,
        "grid": list(qf.grid.shape),
        "dtype": "<f8",
        "layout": "row-major x1 slowest; per site: 5 host then 5 dopant components",
        "floats_per_site": 10,
        "data_file": data_path.rsplit("/", 1)[-1],
    }
    if meta:
        sidecar["meta"] = meta
    with open(f"{prefix}.json", "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return data_path


def load_fields(prefix):
    """Read a field dump written by :func:`save_fields`; returns (QField, meta)."""
    with open(f"{prefix}.json") as fh:
        sidecar = json.load(fh)
    if sidecar.get("format") != FIELD_MAGIC:
        raise ConfigError(f"load_fields: '{prefix}.json' is not a field sidecar")
    shape = tuple(sidecar["grid"])
    raw = np.fromfile(f"{prefix}.f64", dtype="<f8")
    expect = int(np.prod(shape)) * 10
    if raw.size != expect:
        raise ConfigError(f"load_fields: expected {expect} floats, found {raw.size}")
    raw = raw.reshape(shape + (10,)).astype(float)
    grid = TorusGrid(shape)
    return QField(grid, raw[..., :5].copy(), raw[..., 5:].copy()), sidecar.get("meta", {})
