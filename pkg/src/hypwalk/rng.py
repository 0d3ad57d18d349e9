"""Stateless counter-based uniforms keyed on (seed, trial, step).

Each draw is a pure function of its coordinates, so trials can be split
across workers in any way and still reproduce bit-for-bit.  The mixing
function is the SplitMix64 finalizer applied to the counter triple.
"""
from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_STEP_KEY = np.uint64(0xD1B54A32D192ED03)


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def uniforms(seed: int, trials, step: int) -> np.ndarray:
    """Uniform doubles in [0, 1) for each trial index at a given step."""
    t = np.atleast_1d(np.asarray(trials)).astype(np.uint64)
    with np.errstate(over="ignore"):
        key = _mix64(np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + _GOLDEN)
        x = _mix64(key ^ (t * _GOLDEN + _GOLDEN))
        x = _mix64(x ^ (np.uint64(step & 0xFFFFFFFFFFFFFFFF) * _STEP_KEY + _M2))
    return (x >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


def choose(cdf: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Indices drawn from a cumulative distribution by inversion."""
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, len(cdf) - 1)
