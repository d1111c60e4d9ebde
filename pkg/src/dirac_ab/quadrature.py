"""Composite Gauss-Legendre rules on arbitrary breakpoints."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def _legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the ``order``-point rule on [-1, 1]."""
    if order < 1:
        raise ValueError("order must be positive")
    return _legendre(int(order))


def composite(breaks, order: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Composite rule with one ``order``-point panel per interval of ``breaks``.

    Returns flat arrays of nodes and weights for plain ``dx`` integration.
    """
    b = np.asarray(breaks, dtype=float)
    if b.ndim != 1 or b.size < 2 or np.any(np.diff(b) <= 0):
        raise ValueError("breaks must be a strictly increasing 1-D array")
    x, w = gauss_legendre(order)
    half = 0.5 * np.diff(b)
    mid = 0.5 * (b[1:] + b[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def graded_breaks(x_min: float, x_knee: float, x_max: float,
                  per_decade: float, width: float) -> np.ndarray:
    """Geometric breakpoints on [x_min, x_knee] followed by uniform ones up to x_max.

    The geometric part resolves power-law behaviour near the origin, the
    uniform part resolves oscillations of fixed wavelength.
    """
    if not 0 < x_min < x_knee <= x_max:
        raise ValueError("need 0 < x_min < x_knee <= x_max")
    n_log = max(1, int(np.ceil(per_decade * np.log10(x_knee / x_min))))
    geo = np.geomspace(x_min, x_knee, n_log + 1)
    if x_max <= x_knee:
        return geo
    n_lin = max(1, int(np.ceil((x_max - x_knee) / width)))
    lin = np.linspace(x_knee, x_max, n_lin + 1)
    return np.concatenate([geo, lin[1:]])


def panel_integrate(f, a: float, b: float, n_panels: int, order: int = 16):
    """Integrate a vectorised ``f`` over [a, b] with uniform panels."""
    nodes, weights = composite(np.linspace(a, b, n_panels + 1), order)
    return np.sum(weights * f(nodes), axis=-1)
