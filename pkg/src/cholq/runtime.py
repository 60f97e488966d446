"""Small runtime helpers: thread caps, RNG construction, stable formatting."""

from __future__ import annotations

import json
import os

import numpy as np

THREADS_ENV = "CHOLESTERIC_THREADS"


def thread_count(default=4):
    """Worker cap for parallel sweeps; overridden by CHOLESTERIC_THREADS."""
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            n = int(raw)
        except ValueError:
            n = default
        return max(1, n)
    cpus = os.cpu_count() or 1
    return max(1, min(default, cpus))


def make_rng(seed):
    """Seeded 64-bit PCG64 generator (NumPy default_rng), stable across platforms."""
    return np.random.default_rng(int(seed))


def fmt(x):
    """Deterministic short float formatting used in all text outputs."""
    if isinstance(x, float) and np.isnan(x):
        return "nan"
    return format(float(x), ".12g")


def dump_json(obj, path):
    """Canonical JSON dump: sorted keys, newline-terminated."""
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
