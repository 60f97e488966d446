"""Quadrature rules on the unit sphere and the positive radial axis.

The sphere rule is a product of Gauss-Legendre in cos(theta) with a uniform
trapezoid in phi (exact for trigonometric polynomials up to the node count),
which integrates spherical harmonics exactly to high degree and converges
exponentially for the smooth exponential-family integrands used here.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import qtensor

DEFAULT_SPHERE_DEGREE = (64, 128)


@lru_cache(maxsize=32)
def legendre_rule(n):
    """Cached Gauss-Legendre nodes/weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


@dataclass(frozen=True)
class SphereQuadrature:
    """Nodes (M, 3) on the unit sphere with weights summing to 4*pi.

    ``sigma_nodes`` caches the 5-component shape tensor of every node since
    all moment integrals contract against it.
    """

    nodes: np.ndarray
    weights: np.ndarray
    degree: tuple

    @property
    def sigma_nodes(self):
        cached = getattr(self, "_sigma", None)
        if cached is None:
            cached = qtensor.sigma(self.nodes)
            object.__setattr__(self, "_sigma", cached)
        return cached

    def integrate(self, values):
        """Weighted sum over nodes; values shaped (..., M)."""
        return values @ self.weights


@lru_cache(maxsize=8)
def sphere_quadrature(n_theta=None, n_phi=None):
    """Product Gauss-Legendre x trapezoid rule on the unit sphere."""
    if n_theta is None:
        n_theta, n_phi = DEFAULT_SPHERE_DEGREE
    ct, wt = legendre_rule(n_theta)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    st = np.sqrt(1.0 - ct**2)
    nodes = np.empty((n_theta * n_phi, 3))
    nodes[:, 0] = np.outer(st, np.cos(phi)).ravel()
    nodes[:, 1] = np.outer(st, np.sin(phi)).ravel()
    nodes[:, 2] = np.outer(ct, np.ones(n_phi)).ravel()
    weights = np.outer(wt, np.full(n_phi, 2.0 * np.pi / n_phi)).ravel()
    return SphereQuadrature(nodes=nodes, weights=weights, degree=(n_theta, n_phi))


def radial_rule(r_max, n=160):
    """Gauss-Legendre nodes/weights on [0, r_max] for radial moment integrals.

    The kernels integrated here decay like their envelope (Gaussian or
    exponential tails), so a fixed high-order rule on a tail-truncated
    interval converges well past double precision; tests double n to verify.
    """
    x, w = legendre_rule(n)
    r = 0.5 * r_max * (x + 1.0)
    return r, 0.5 * r_max * w
