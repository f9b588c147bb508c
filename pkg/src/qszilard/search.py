"""One-dimensional maximization helpers (grid scan plus golden section)."""

from __future__ import annotations

from typing import Callable

import numpy as np

_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


def golden_max(
    f: Callable[[float], float], a: float, b: float, xtol: float
) -> tuple[float, float]:
    """Golden-section maximization of ``f`` on [a, b] to width ``xtol``.

    Returns the best evaluated point (x, f(x)); assumes ``f`` is unimodal
    on the bracket, degrading gracefully (a local maximum) otherwise.
    """
    if b < a:
        a, b = b, a
    if b - a <= xtol:
        x = 0.5 * (a + b)
        return x, f(x)
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    best = (c, fc) if fc >= fd else (d, fd)
    while b - a > xtol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
            if fc > best[1]:
                best = (c, fc)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
            if fd > best[1]:
                best = (d, fd)
    return best


def parabolic_peak(
    f: Callable[[float], float],
    xs: tuple[float, float, float],
    ys: tuple[float, float, float],
) -> tuple[float, float]:
    """One-shot quadratic refinement of a grid maximum.

    Fits a parabola through three bracketing samples, evaluates ``f`` at
    its vertex (clamped inside the bracket) and returns the better of the
    vertex and the center sample.  Used where a full golden-section pass
    would be wastefully expensive and only the peak value matters.
    """
    x0, x1, x2 = xs
    y0, y1, y2 = ys
    denom = y0 - 2.0 * y1 + y2
    if denom >= 0.0:
        return x1, y1
    x = x1 - 0.5 * (y2 - y0) / denom * (x1 - x0)
    x = min(max(x, x0), x2)
    y = f(x)
    return (x, y) if y > y1 else (x1, y1)


def local_maxima(values: np.ndarray) -> list[int]:
    """Indices of local maxima of a sampled curve, plateau-tolerant."""
    idx = []
    n = len(values)
    for i in range(n):
        left = values[i - 1] if i > 0 else -np.inf
        right = values[i + 1] if i < n - 1 else -np.inf
        if values[i] >= left and values[i] >= right:
            if idx and idx[-1] == i - 1 and values[i] == values[i - 1]:
                continue  # collapse plateaus to their first sample
            idx.append(i)
    return idx
