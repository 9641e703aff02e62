"""Seeded synthetic series used by the tests and the experiment scripts."""

from __future__ import annotations

import numpy as np


def ar_process(n: int, phi, seed: int, *, sigma: float = 1.0, mean: float = 0.0,
               burn: int = 200) -> np.ndarray:
    """Gaussian AR(p) with coefficients ``phi``, started from zeros and burnt in."""
    phi = np.atleast_1d(np.asarray(phi, dtype=np.float64))
    eps = np.random.default_rng(seed).standard_normal(n + burn) * sigma
    y = np.zeros(n + burn)
    p = phi.size
    for t in range(p, n + burn):
        y[t] = phi @ y[t - p:t][::-1] + eps[t]
    return y[burn:] + mean


def white_noise(n: int, seed: int, *, sigma: float = 1.0, mean: float = 0.0) -> np.ndarray:
    return mean + sigma * np.random.default_rng(seed).standard_normal(n)


def random_walk(n: int, seed: int, *, start: float = 0.0) -> np.ndarray:
    return start + np.cumsum(np.random.default_rng(seed).standard_normal(n))


def sine_ar(n: int, seed: int, *, burn: int = 200) -> np.ndarray:
    """y_t = 0.5 y_{t-1} + 0.4 sin(y_{t-2}) + eps_t."""
    eps = np.random.default_rng(seed).standard_normal(n + burn)
    y = np.zeros(n + burn)
    for t in range(2, n + burn):
        y[t] = 0.5 * y[t - 1] + 0.4 * np.sin(y[t - 2]) + eps[t]
    return y[burn:]
