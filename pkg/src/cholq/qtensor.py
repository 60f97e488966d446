"""Symmetric traceless 3x3 tensors in a fixed orthonormal 5-component basis.

Order tensors live in the five-dimensional space of symmetric traceless
3x3 matrices.  Everything downstream (entropy solves, kernel matrices,
grid fields, file dumps) uses the same fixed orthonormal basis E1..E5:

    E1 = (e1 x e1 - e2 x e2) / sqrt(2)
    E2 = (2 e3 x e3 - e1 x e1 - e2 x e2) / sqrt(6)
    E3 = (e1 x e2 + e2 x e1) / sqrt(2)
    E4 = (e1 x e3 + e3 x e1) / sqrt(2)
    E5 = (e2 x e3 + e3 x e2) / sqrt(2)

with Ei . Ej = delta_ij under the Frobenius inner product, so the 5-vector
dot product equals the matrix inner product.  Serialized fields store the
five components in exactly this order as little-endian float64.

A tensor Q is *physical* when every eigenvalue exceeds -1/3, the bound a
normalized orientation distribution imposes on its second-moment tensor.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError

SQRT2 = np.sqrt(2.0)
SQRT6 = np.sqrt(6.0)

# Fixed orthonormal basis of symmetric traceless matrices; see module docstring.
BASIS = np.zeros((5, 3, 3))
BASIS[0] = np.diag([1.0, -1.0, 0.0]) / SQRT2
BASIS[1] = np.diag([-1.0, -1.0, 2.0]) / SQRT6
BASIS[2, 0, 1] = BASIS[2, 1, 0] = 1.0 / SQRT2
BASIS[3, 0, 2] = BASIS[3, 2, 0] = 1.0 / SQRT2
BASIS[4, 1, 2] = BASIS[4, 2, 1] = 1.0 / SQRT2

MIN_EIGENVALUE_BOUND = -1.0 / 3.0


def to_matrix(q5):
    """Map component vectors (..., 5) to symmetric traceless matrices (..., 3, 3)."""
    q5 = np.asarray(q5, dtype=float)
    return np.einsum("...a,aij->...ij", q5, BASIS)


def from_matrix(m):
    """Project matrices (..., 3, 3) onto the basis, returning components (..., 5).

    Only the symmetric traceless part survives; callers are expected to pass
    matrices that already are one (we do not verify, for speed).
    """
    m = np.asarray(m, dtype=float)
    return np.einsum("...ij,aij->...a", m, BASIS)


def sigma(n, tol=1e-12):
    """Uniaxial shape tensor n x n - I/3 for a unit vector, as a 5-vector.

    ``n`` may carry leading batch dimensions.  Vectors whose norm deviates
    from 1 by more than ``tol`` are rejected; smaller deviations are
    normalized away.
    """
    n = np.asarray(n, dtype=float)
    norm = np.linalg.norm(n, axis=-1)
    if np.any(np.abs(norm - 1.0) > tol):
        raise DomainError("sigma: direction vector is not unit length")
    n = n / norm[..., None]
    outer = n[..., :, None] * n[..., None, :]
    outer[..., 0, 0] -= 1.0 / 3.0
    outer[..., 1, 1] -= 1.0 / 3.0
    outer[..., 2, 2] -= 1.0 / 3.0
    return from_matrix(outer)


def uniaxial(s, n, tol=1e-12):
    """Uniaxial tensor s (n x n - I/3) as a 5-vector; s may be any real scalar/array."""
    s = np.asarray(s, dtype=float)
    return s[..., None] * sigma(n, tol=tol)


def skew_matrix(z):
    """The skew matrix W with W x = z cross x, batched over leading dims of z."""
    z = np.asarray(z, dtype=float)
    w = np.zeros(z.shape[:-1] + (3, 3))
    w[..., 0, 1] = -z[..., 2]
    w[..., 0, 2] = z[..., 1]
    w[..., 1, 0] = z[..., 2]
    w[..., 1, 2] = -z[..., 0]
    w[..., 2, 0] = -z[..., 1]
    w[..., 2, 1] = z[..., 0]
    return w


def eigendecompose(q5):
    """Eigenvalues (ascending) and orthonormal eigenvector columns of Q.

    Returns ``(evals, evecs)`` with shapes (..., 3) and (..., 3, 3); the
    k-th column evecs[..., :, k] belongs to evals[..., k].
    """
    evals, evecs = np.linalg.eigh(to_matrix(q5))
    return evals, evecs


def min_eigenvalue(q5):
    """Smallest eigenvalue of Q, batched; cheap physicality probe."""
    return np.linalg.eigvalsh(to_matrix(q5))[..., 0]


def is_physical(q5, margin=0.0):
    """Whether all eigenvalues exceed -1/3 + margin (strict). Batched -> bool array."""
    return min_eigenvalue(q5) > MIN_EIGENVALUE_BOUND + margin


def biaxiality(q5):
    """Biaxiality measure b^2 = 1 - 6 (tr Q^3)^2 / (tr Q^2)^3 in [0, 1].

    Zero exactly on uniaxial tensors; defined as 0 at Q = 0.  Batched.
    """
    m = to_matrix(q5)
    tr2 = np.einsum("...ij,...ji->...", m, m)
    m3 = np.einsum("...ij,...jk->...ik", m, m)
    tr3 = np.einsum("...ij,...ji->...", m3, m)
    out = np.zeros(np.shape(tr2))
    nz = tr2 > 1e-300
    val = 1.0 - 6.0 * tr3[nz] ** 2 / tr2[nz] ** 3
    out[nz] = np.clip(val, 0.0, 1.0)
    if out.ndim == 0:
        return float(out)
    return out


def uniaxial_project(q5):
    """Closest uniaxial description (s, n) of Q, plus a residual diagnostic.

    The distinguished axis is the eigenvector whose eigenvalue sits farthest
    from the median one (ties resolved toward the largest eigenvalue), and
    s = 3/2 of that eigenvalue, so exact uniaxial tensors round-trip.
    Returns ``(s, n, info)`` where info carries the biaxiality and the
    Frobenius distance between Q and its projection.  Batched.
    """
    q5 = np.asarray(q5, dtype=float)
    evals, evecs = eigendecompose(q5)
    med = evals[..., 1]
    dev = np.abs(evals - med[..., None])
    # argmax picks the first maximizer; order candidates so that the largest
    # eigenvalue wins ties (index 2 before 0 in the scan order).
    order = np.array([2, 0, 1])
    pick = order[np.argmax(dev[..., order], axis=-1)]
    idx = pick[..., None, None]
    n = np.take_along_axis(evecs, np.broadcast_to(idx, evecs.shape[:-1] + (1,)), axis=-1)[..., 0]
    lam = np.take_along_axis(evals, pick[..., None], axis=-1)[..., 0]
    s = 1.5 * lam
    proj = uniaxial(s, n)
    resid = np.linalg.norm(q5 - proj, axis=-1)
    info = {"biaxiality": biaxiality(q5), "residual": resid}
    return s, n, info


def rotate(q5, rot):
    """Conjugate Q by a rotation matrix: Q -> R Q R^T, in components."""
    m = to_matrix(q5)
    rm = np.einsum("ij,...jk,lk->...il", rot, m, rot)
    return from_matrix(rm)


def to_bytes(q5):
    """Serialize components as little-endian float64 in basis order."""
    arr = np.ascontiguousarray(np.asarray(q5, dtype="<f8"))
    return arr.tobytes()


def from_bytes(buf, shape=(5,)):
    """Inverse of :func:`to_bytes`."""
    return np.frombuffer(buf, dtype="<f8").reshape(shape).astype(float)
