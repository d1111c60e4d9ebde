"""Test data with closed-form transforms."""

import math

import numpy as np

from dirac_ab.grids import ModeSpinor, SpectralGrid
from dirac_ab.hankel import mode_orders

SQRT2 = math.sqrt(2.0)


def power_gaussian(m, r, s=1.0):
    """r^m exp(-s r^2 / 2) and its r-derivative."""
    g = np.exp(-s * r * r / 2)
    return r ** m * g, (m * r ** (m - 1) - s * r ** (m + 1)) * g


def gaussian_mode(k, cfg, grid, c=0.7 - 0.3j, s=1.0):
    """(r^nu e^{-s r^2/2}, c r^partner e^{-s r^2/2}) with exact derivatives.

    H_m of r^m e^{-s r^2/2} is s^{-m-1} rho^m e^{-rho^2/2s}, so P_k of this mode
    is known in closed form (see gaussian_mode_transform).
    """
    nu, partner, _ = mode_orders(k, cfg.alpha, cfg.convention)
    r = grid.nodes
    f1, d1 = power_gaussian(nu, r, s)
    f2, d2 = power_gaussian(partner, r, s)
    return ModeSpinor.from_arrays(k, cfg.alpha, grid, f1, c * f2, d1, c * d2)


def gaussian_mode_transform(k, cfg, lam, c=0.7 - 0.3j, s=1.0):
    """(positive, negative) branches of P_k gaussian_mode at energies lam > 0."""
    nu, partner, sign = mode_orders(k, cfg.alpha, cfg.convention)
    g = np.exp(-lam * lam / (2 * s))
    a = s ** (-nu - 1) * lam ** nu * g
    b = c * s ** (-partner - 1) * lam ** partner * g
    return (a - sign * 1j * b) / SQRT2, (a + sign * 1j * b) / SQRT2


def spectral_for(grid, rho_max=20.0):
    return SpectralGrid.for_radial(grid, rho_max)
