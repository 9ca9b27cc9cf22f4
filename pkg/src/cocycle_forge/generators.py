"""Reproducible random cocycles used by tests, scripts and the CLI fixtures."""

from __future__ import annotations

import numpy as np

from .cocycle import PeriodicCocycle


def rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def slow_cocycle(rng: np.random.Generator, dim: int, period: int, *, spread: float = 0.1,
                 noise: float = 0.02, twist: float = 0.0) -> PeriodicCocycle:
    """A_n = exp(diag(chi)) (I + small noise), optionally with a slow planar twist.

    Exponents are drawn from [-spread, spread], so every gap is small per
    step: the regime where a budget-limited perturbation can reshape the
    spectrum over one period.
    """
    chi = np.sort(rng.uniform(-spread, spread, size=dim))
    base = np.diag(np.exp(chi))
    mats = []
    for _ in range(period):
        m = base @ (np.eye(dim) + noise * rng.standard_normal((dim, dim)))
        if twist:
            k = int(rng.integers(dim - 1))
            r = np.eye(dim)
            r[k:k + 2, k:k + 2] = rotation(twist * rng.uniform(0.5, 1.5))
            m = r @ m
        mats.append(m)
    return PeriodicCocycle(np.array(mats))
