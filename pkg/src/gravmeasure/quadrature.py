"""Composite Simpson weights on uniform grids, including the cumulative
(lower-triangular) form used for nested integrals."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


def simpson_weights(n: int, h: float) -> np.ndarray:
    """Weights for integrating ``n`` uniformly spaced samples.

    Odd ``n`` gives the classical 1-4-2-...-4-1 rule.  Even ``n`` closes the
    last three intervals with Simpson's 3/8 rule so the order stays four.
    """
    if n < 2:
        return np.zeros(n)
    return _unit_weights(n) * h


@lru_cache(maxsize=64)
def _unit_weights(n: int) -> np.ndarray:
    w = np.zeros(n)
    if n == 2:
        w[:] = 0.5
    elif n == 4:
        w[:] = np.array([3, 9, 9, 3]) / 8
    elif n % 2 == 1:
        w[0:n - 1:2] += 1 / 3
        w[1:n:2] += 4 / 3
        w[2:n:2] += 1 / 3
    else:
        m = n - 3
        w[:m] = _unit_weights(m)
        w[m - 1:] += np.array([3, 9, 9, 3]) / 8
    w.setflags(write=False)
    return w


@lru_cache(maxsize=8)
def _unit_cumulative(n: int) -> np.ndarray:
    W = np.zeros((n, n))
    if n > 1:
        # first interval: quadratic through nodes 0, 1, 2
        if n > 2:
            W[1, :3] = np.array([5, 8, -1]) / 12
        else:
            W[1, :2] = 0.5
    for i in range(2, n):
        W[i, : i + 1] = _unit_weights(i + 1)
    W.setflags(write=False)
    return W


def cumulative_simpson_matrix(n: int, h: float) -> np.ndarray:
    """Matrix ``W`` with ``(W @ f)[i]`` approximating the integral of f over
    ``[t_0, t_i]``.  Row 0 is zero; row 1 uses a three-point quadratic."""
    return _unit_cumulative(n) * h


def simpson(values: np.ndarray, h: float) -> complex | float:
    values = np.asarray(values)
    return np.dot(simpson_weights(values.shape[-1], h), values)


def simpson_with_error(values: np.ndarray, h: float):
    """Simpson value and a Richardson error estimate from the half grid."""
    values = np.asarray(values)
    full = simpson(values, h)
    coarse_samples = values[::2]
    if (values.shape[-1] - 1) % 2 == 0 and coarse_samples.shape[-1] >= 3:
        coarse = simpson(coarse_samples, 2 * h)
        err = abs(full - coarse) / 15.0
    else:
        err = 0.0
    return full, float(err)
