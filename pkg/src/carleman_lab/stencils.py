"""Centered finite-difference stencils on uniform grids (Fornberg weights)."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


def fornberg_weights(z: float, x: np.ndarray, max_deriv: int) -> np.ndarray:
    """Weights c[d, j] so that f^(d)(z) ~ sum_j c[d, j] f(x[j]).

    Standard Fornberg recursion; stable for the stencil widths used here.
    """
    x = np.asarray(x, dtype=float)
    npts = x.size
    c = np.zeros((max_deriv + 1, npts))
    c1, c4 = 1.0, x[0] - z
    c[0, 0] = 1.0
    for i in range(1, npts):
        mn = min(i, max_deriv)
        c2, c5, c4 = 1.0, c4, x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[k, i] = c1 * (k * c[k - 1, i - 1] - c5 * c[k, i - 1]) / c2
                c[0, i] = -c1 * c5 * c[0, i - 1] / c2
            for k in range(mn, 0, -1):
                c[k, j] = (c4 * c[k, j] - k * c[k - 1, j]) / c3
            c[0, j] = c4 * c[0, j] / c3
        c1 = c2
    return c


@lru_cache(maxsize=64)
def centered_weights(deriv: int, accuracy: int) -> tuple[float, ...]:
    """Unit-spacing centered weights for ``deriv`` with even ``accuracy`` order."""
    if accuracy % 2:
        raise ValueError("accuracy order must be even for centered stencils")
    half = (deriv + 1) // 2 - 1 + accuracy // 2
    offsets = np.arange(-half, half + 1, dtype=float)
    return tuple(fornberg_weights(0.0, offsets, deriv)[deriv])


def stencil_half_width(deriv: int, accuracy: int) -> int:
    return (len(centered_weights(deriv, accuracy)) - 1) // 2


def grid_derivatives(values: np.ndarray, h: float, max_order: int, accuracy: int = 8) -> np.ndarray:
    """Rows 0..max_order of derivatives; samples within the stencil margin are NaN."""
    values = np.asarray(values, dtype=float)
    out = np.full((max_order + 1, values.size), np.nan)
    out[0] = values
    for d in range(1, max_order + 1):
        w = np.asarray(centered_weights(d, accuracy))
        half = (w.size - 1) // 2
        if values.size <= 2 * half:
            raise ValueError("grid too short for the stencil")
        # correlate: out[i] = sum_j w[j] * values[i - half + j]
        inner = np.correlate(values, w, mode="valid") / h**d
        out[d, half : values.size - half] = inner
    return out
