"""Shared fixtures: kernel sets, kernel files, and random tensor helpers."""

import numpy as np
import pytest

from cholq import kernels as km
from cholq import qtensor


@pytest.fixture(scope="session")
def demo_ks():
    return km.demo_kernel_set()


@pytest.fixture(scope="session")
def demo_kernel_file(tmp_path_factory, demo_ks):
    path = tmp_path_factory.mktemp("kernels") / "demo.json"
    km.save_kernel_set(demo_ks, str(path))
    return str(path)


def random_physical(rng, n, margin=0.02):
    """n random tensors strictly inside the physical set (same recipe as fields)."""
    arr = 0.35 * rng.standard_normal((n, 5))
    lam = qtensor.min_eigenvalue(arr)
    floor = qtensor.MIN_EIGENVALUE_BOUND + 2.0 * margin
    scale = np.where(lam < floor, floor / np.minimum(lam, -1e-300), 1.0)
    return arr * np.minimum(scale, 1.0)[..., None]


def random_rotation(rng):
    """Haar-ish rotation matrix via QR of a Gaussian matrix."""
    m = rng.standard_normal((3, 3))
    q, r = np.linalg.qr(m)
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q
