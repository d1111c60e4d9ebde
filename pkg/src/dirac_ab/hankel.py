r"""Scalar Hankel transform and the relativistic Hankel transform on spinor modes.

The scalar transform is

    H_nu f(rho) = int_0^inf J_nu(r rho) f(r) r dr,

evaluated by the composite Gauss-Legendre rule of the input grid. The
relativistic transform P_k of a mode (f1, f2) is a signed-energy function
assembled from two scalar transforms:

* forms with a raised partner (k >= 1 with nu = k - alpha, and k = 0 with
  sin(gamma) = 0, nu = -alpha):
  P f(+rho) = (H_nu f1 - i H_{nu+1} f2) / sqrt 2,
  P f(-rho) = (H_nu f1 + i H_{nu+1} f2) / sqrt 2;
* forms with a lowered partner (k <= -1 with nu = alpha - k, and k = 0 with
  cos(gamma) = 0, nu = alpha): same with H_{nu-1} and the signs of i swapped.

Evaluation matrices J(r_i rho_n) are cached by grid fingerprint and order.
"""

from __future__ import annotations

import math
import threading
from collections import OrderedDict

import numpy as np

from .config import Convention, select_extension
from .errors import ConfigurationError, DomainError, ResolutionError
from .grids import (MAX_PANEL_PHASE, ModeSpinor, RadialGrid, RadialProfile,
                    SpectralGrid, SpectralProfile)
from .specfun import bessel_j

__all__ = [
    "RadialGrid", "SpectralGrid", "RadialProfile", "ModeSpinor", "SpectralProfile",
    "hankel_forward", "hankel_matrix", "hankel_involution_check",
    "rel_hankel_forward", "rel_hankel_inverse", "rel_hankel_forward_general",
    "mode_orders", "spectral_tail", "clear_cache",
]

SQRT2 = math.sqrt(2.0)
CACHE_BYTES = 400 * 2 ** 20


class _MatrixCache:
    """Thread-safe LRU for Bessel evaluation matrices, bounded in bytes."""

    def __init__(self, budget: int):
        self.budget = budget
        self.used = 0
        self.data: OrderedDict = OrderedDict()
        self.lock = threading.Lock()

    def get(self, key, build):
        with self.lock:
            if key in self.data:
                self.data.move_to_end(key)
                return self.data[key]
        mat = build()
        mat.setflags(write=False)
        with self.lock:
            if key not in self.data and mat.nbytes <= self.budget:
                self.data[key] = mat
                self.used += mat.nbytes
                while self.used > self.budget:
                    _, old = self.data.popitem(last=False)
                    self.used -= old.nbytes
        return mat

    def clear(self):
        with self.lock:
            self.data.clear()
            self.used = 0


_CACHE = _MatrixCache(CACHE_BYTES)


def _check_resolution(points: np.ndarray, grid) -> None:
    if points.size and points.max() * grid.max_panel_width > MAX_PANEL_PHASE * (1 + 1e-12):
        raise ResolutionError(
            f"grid panels of width {grid.max_panel_width:.3g} cannot resolve J(x y) "
            f"for y up to {points.max():.3g}; need width <= {MAX_PANEL_PHASE / points.max():.3g}")


def hankel_matrix(order: float, out_points, grid) -> np.ndarray:
    """Matrix M with (H_nu f)(out) = M @ f for samples f on ``grid``.

    ``grid`` is a RadialGrid (forward) or SpectralGrid (inverse); its weights
    already carry the r dr (or rho drho) measure. Not cached.
    """
    out = np.asarray(out_points, dtype=float).ravel()
    _check_resolution(out, grid)
    return bessel_j(order, np.multiply.outer(out, grid.nodes)) * grid.weights


def _pair_matrix(order: float, radial: RadialGrid, spectral: SpectralGrid) -> np.ndarray:
    """Cached J_order(r_i lambda_n), rows indexed by radial nodes."""
    key = (float(order), radial.key, spectral.key)
    return _CACHE.get(key, lambda: bessel_j(order, np.multiply.outer(radial.nodes, spectral.nodes)))


def clear_cache() -> None:
    _CACHE.clear()


def _forward(order: float, values: np.ndarray, radial: RadialGrid,
             spectral: SpectralGrid) -> np.ndarray:
    _check_resolution(spectral.nodes, radial)
    return _pair_matrix(order, radial, spectral).T @ (radial.weights * values)


def _backward(order: float, values: np.ndarray, spectral: SpectralGrid,
              radial: RadialGrid) -> np.ndarray:
    _check_resolution(radial.nodes, spectral)
    return _pair_matrix(order, radial, spectral) @ (spectral.weights * values)


def _check_forward_order(order: float) -> float:
    order = float(order)
    if order <= -1.0:
        raise DomainError("Hankel transform needs order > -1")
    return order


def hankel_forward(order: float, f: RadialProfile, out_energies) -> np.ndarray:
    """Sampled H_order f at the given positive energies."""
    order = _check_forward_order(order)
    rho = np.asarray(out_energies, dtype=float)
    if rho.size and np.any(rho <= 0):
        raise DomainError("energies must be positive")
    return (hankel_matrix(order, rho, f.grid) @ f.values).reshape(rho.shape)


def hankel_involution_check(order: float, f: RadialProfile,
                            spectral: SpectralGrid | None = None) -> float:
    """Relative L2(r dr) residual of H_nu(H_nu f) - f."""
    order = float(order)
    if order < -0.5:
        raise DomainError("Hankel inversion only holds for order >= -1/2")
    spectral = spectral or SpectralGrid.for_radial(f.grid)
    once = _forward(order, f.values, f.grid, spectral)
    twice = _backward(order, once, spectral, f.grid)
    diff = RadialProfile(f.grid, twice - f.values)
    return diff.norm() / f.norm()


def mode_orders(k: int, alpha: float, convention: Convention) -> tuple[float, float, int]:
    """(nu, partner order, sign) for mode k.

    ``sign`` is +1 when the partner order is nu + 1 and -1 when it is nu - 1;
    the positive-energy branch is (H_nu f1 - sign i H_partner f2) / sqrt 2.
    """
    k = int(k)
    if k >= 1:
        nu = k - alpha
        return nu, nu + 1.0, 1
    if k <= -1:
        nu = alpha - k
        return nu, nu - 1.0, -1
    if convention is Convention.COS_ONLY:
        return -alpha, 1.0 - alpha, 1
    return alpha, alpha - 1.0, -1


def _resolve_convention(alpha: float, convention) -> Convention:
    expected = select_extension(alpha).convention
    if convention is None:
        return expected
    if isinstance(convention, str):
        try:
            convention = Convention(convention)
        except ValueError as exc:
            raise ConfigurationError(f"unknown convention {convention!r}") from exc
    if convention is not expected:
        raise ConfigurationError(
            f"convention {convention.value} is not available for alpha={alpha}; "
            f"use {expected.value}")
    return convention


def rel_hankel_forward(mode: ModeSpinor, gamma_convention=None,
                       spectral: SpectralGrid | None = None) -> SpectralProfile:
    """P_k applied to a mode spinor; returns both energy branches."""
    conv = _resolve_convention(mode.alpha, gamma_convention)
    spectral = spectral or SpectralGrid.for_radial(mode.grid)
    nu, partner, sign = mode_orders(mode.k, mode.alpha, conv)
    lam = spectral.nodes
    a = _forward(nu, mode.phi.values, mode.grid, spectral)
    b = _forward(partner, mode.psi.values, mode.grid, spectral)
    pos = (a - sign * 1j * b) / SQRT2
    neg = (a + sign * 1j * b) / SQRT2
    return SpectralProfile(spectral, pos, neg, mode.k, mode.alpha)


def rel_hankel_inverse(spec: SpectralProfile, k: int, alpha: float, gamma_convention=None,
                       radial: RadialGrid | None = None) -> ModeSpinor:
    """Inverse of P_k, returning a mode spinor on ``radial``."""
    conv = _resolve_convention(alpha, gamma_convention)
    radial = radial or RadialGrid.graded()
    nu, partner, sign = mode_orders(k, alpha, conv)
    if min(nu, partner) < -0.5:
        raise DomainError("inversion needs every Hankel order >= -1/2")
    even = (spec.positive + spec.negative) / SQRT2
    odd = (spec.positive - spec.negative) / SQRT2
    f1 = _backward(nu, even, spec.grid, radial)
    f2 = sign * 1j * _backward(partner, odd, spec.grid, radial)
    return ModeSpinor.from_arrays(k, alpha, radial, f1, f2)


def rel_hankel_forward_general(mode: ModeSpinor, gamma: float,
                               spectral: SpectralGrid | None = None) -> SpectralProfile:
    """Mixed k = 0 transform for an arbitrary extension angle.

    Only a check: for sin(gamma) cos(gamma) != 0 no inverse is provided.
    """
    if mode.k != 0:
        raise DomainError("the mixed-angle transform exists only for k = 0")
    alpha = mode.alpha
    spectral = spectral or SpectralGrid.for_radial(mode.grid)
    c, s = math.cos(gamma), math.sin(gamma)
    a_m = _forward(-alpha, mode.phi.values, mode.grid, spectral)
    b_p = _forward(1.0 - alpha, mode.psi.values, mode.grid, spectral)
    a_p = _forward(alpha, mode.phi.values, mode.grid, spectral)
    b_m = _forward(alpha - 1.0, mode.psi.values, mode.grid, spectral)
    pos = (c * (a_m - 1j * b_p) + s * (a_p + 1j * b_m)) / SQRT2
    neg = (c * (a_m + 1j * b_p) + s * (a_p - 1j * b_m)) / SQRT2
    return SpectralProfile(spectral, pos, neg, 0, alpha)


def spectral_tail(mode: ModeSpinor, spec: SpectralProfile) -> float:
    """Fraction of the squared norm that the spectral grid fails to capture."""
    total = mode.norm() ** 2
    if total == 0.0:
        return 0.0
    return max(0.0, (total - spec.norm() ** 2) / total)
