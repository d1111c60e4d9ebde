r"""Radial Dirac operator on one angular mode, its eigenfunctions and domain checks.

On the mode (e^{ik theta} phi, e^{i(k+1) theta} psi) the operator acts as

    d_k (phi, psi) = (i d_{k+1-alpha} psi, i d_{alpha-k} phi),    d_s = d/dr + s/r.

The generalized eigenfunctions solve d_k Psi_k(rho r) = rho Psi_k(rho r); for
negative energies the second component changes sign.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import Convention, FluxConfig, q_threshold, select_extension
from .errors import DomainError, ResolutionError
from .grids import ModeSpinor, RadialGrid
from .specfun import bessel_j, bessel_j_prime, bessel_k

__all__ = [
    "Convention", "FluxConfig", "select_extension", "q_threshold",
    "eigen_orders", "eigenfunction_value", "eigenfunction_derivative",
    "apply_mode_operator", "log_derivative", "singular_element",
    "BoundaryReport", "boundary_diagnostic",
]

SQRT2 = math.sqrt(2.0)
# largest log-spacing of a finite-difference stencil before derivatives are
# considered unresolved
MAX_LOG_STEP = 0.35
STENCIL = 7


def eigen_orders(k: int, cfg: FluxConfig) -> tuple[float, float, complex]:
    """(order1, order2, c) with Psi_k(x) = (J_order1(x), c J_order2(x)) / sqrt 2."""
    a = cfg.alpha
    if k >= 1:
        return k - a, k + 1 - a, -1j
    if k <= -1:
        return a - k, a - k - 1, 1j
    if cfg.convention is Convention.COS_ONLY:
        return -a, 1 - a, -1j
    return a, a - 1, 1j


def eigenfunction_value(k: int, cfg: FluxConfig, rho, r):
    """Psi_k(|rho| r) as a pair of complex arrays; rho < 0 flips the second entry."""
    rho = np.asarray(rho, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.any(rho == 0):
        raise DomainError("eigenfunctions are only defined for rho != 0")
    x = np.abs(rho) * r
    o1, o2, c = eigen_orders(int(k), cfg)
    first = bessel_j(o1, x) / SQRT2 + 0j
    second = np.sign(rho) * c * bessel_j(o2, x) / SQRT2
    return first, second


def eigenfunction_derivative(k: int, cfg: FluxConfig, rho, r):
    """Radial derivative of eigenfunction_value with respect to r."""
    rho = np.asarray(rho, dtype=float)
    r = np.asarray(r, dtype=float)
    lam = np.abs(rho)
    x = lam * r
    o1, o2, c = eigen_orders(int(k), cfg)
    first = lam * bessel_j_prime(o1, x) / SQRT2 + 0j
    second = np.sign(rho) * c * lam * bessel_j_prime(o2, x) / SQRT2
    return first, second


def _fornberg(z: float, x: np.ndarray) -> np.ndarray:
    """First-derivative weights at z for nodes x (Fornberg's algorithm)."""
    n = x.size
    c = np.zeros((n, 2))
    c1, c4 = 1.0, x[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, 1)
        c2, c5, c4 = 1.0, c4, x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for m in range(mn, 0, -1):
                    c[i, m] = c1 * (m * c[i - 1, m - 1] - c5 * c[i - 1, m]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for m in range(mn, 0, -1):
                c[j, m] = (c4 * c[j, m] - m * c[j, m - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, 1]


_STENCILS: dict[str, tuple[np.ndarray, np.ndarray]] = {}


def _stencil(grid: RadialGrid) -> tuple[np.ndarray, np.ndarray]:
    """Seven-point stencil indices and weights for d/du, u = ln r, at every node."""
    if grid.key in _STENCILS:
        return _STENCILS[grid.key]
    u = np.log(grid.nodes)
    n = u.size
    if n < STENCIL:
        raise ResolutionError(f"need at least {STENCIL} radial nodes for derivatives")
    idx = np.empty((n, STENCIL), dtype=int)
    wts = np.empty((n, STENCIL))
    half = STENCIL // 2
    for i in range(n):
        lo = min(max(i - half, 0), n - STENCIL)
        sl = np.arange(lo, lo + STENCIL)
        idx[i] = sl
        wts[i] = _fornberg(u[i], u[sl])
    if len(_STENCILS) > 16:
        _STENCILS.clear()
    _STENCILS[grid.key] = (idx, wts)
    return idx, wts


def log_derivative(grid: RadialGrid, values: np.ndarray) -> np.ndarray:
    """d/dr of sampled values by 6th-order differences in ln r."""
    u = np.log(grid.nodes)
    if np.max(np.diff(u)) > MAX_LOG_STEP:
        raise ResolutionError(
            f"log-spacing {np.max(np.diff(u)):.3g} exceeds {MAX_LOG_STEP} for finite differences")
    idx, wts = _stencil(grid)
    du = np.sum(np.asarray(values)[idx] * wts, axis=1)
    return du / grid.nodes


def apply_mode_operator(k: int, cfg: FluxConfig, f: ModeSpinor) -> ModeSpinor:
    """(i d_{k+1-alpha} psi, i d_{alpha-k} phi) on the grid of ``f``.

    Uses the exact derivatives carried by ``f`` when present, otherwise
    sixth-order finite differences in ln r.
    """
    if int(k) != f.k:
        raise DomainError(f"mode index {k} does not match spinor index {f.k}")
    r = f.grid.nodes
    a = cfg.alpha
    dphi = f.dphi if f.dphi is not None else log_derivative(f.grid, f.phi.values)
    dpsi = f.dpsi if f.dpsi is not None else log_derivative(f.grid, f.psi.values)
    out1 = 1j * (dpsi + (k + 1 - a) / r * f.psi.values)
    out2 = 1j * (dphi + (a - k) / r * f.phi.values)
    return ModeSpinor.from_arrays(f.k, f.alpha, f.grid, out1, out2)


def singular_element(cfg: FluxConfig, r, gamma: float | None = None):
    """(cos g K_alpha(r), i sin g K_{1-alpha}(r)) spanning the singular part of the k = 0 domain."""
    g = cfg.gamma if gamma is None else float(gamma)
    r = np.asarray(r, dtype=float)
    c, s = math.cos(g), math.sin(g)
    # exact zeros avoid 6e-17 leakage from cos(pi/2)
    c = 0.0 if abs(c) < 1e-15 else c
    s = 0.0 if abs(s) < 1e-15 else s
    first = c * bessel_k(cfg.alpha, r) + 0j
    second = 1j * s * bessel_k(1 - cfg.alpha, r)
    return first, second


@dataclass(frozen=True)
class BoundaryReport:
    limit: complex
    drift: float
    exponents: tuple[float, float]
    admissible: bool
    in_domain: bool
    tolerance: float


def _leading_exponent(r: np.ndarray, v: np.ndarray) -> float:
    mag = np.abs(v)
    if np.all(mag < 1e-300):
        return math.inf
    keep = mag > 1e-300
    if keep.sum() < 2:
        return math.inf
    slope = np.polyfit(np.log(r[keep]), np.log(mag[keep]), 1)[0]
    return float(slope)


def boundary_diagnostic(f: ModeSpinor, cfg: FluxConfig | None = None, *,
                        gamma: float | None = None, tol: float = 1e-3) -> BoundaryReport:
    """Small-r limit of r (conj(f1) v2 + conj(f2) v1) against the singular element v.

    Also fits the leading power of each component: a spinor whose first
    component is more singular than r^{-alpha}, or whose second is more
    singular than r^{-(1-alpha)}, is outside the maximal domain even when
    the boundary form vanishes.
    """
    if f.k != 0:
        raise DomainError("the boundary condition only constrains the k = 0 mode")
    cfg = cfg or select_extension(f.alpha)
    r = f.grid.nodes
    if r[0] > 1e-3:
        raise ResolutionError("boundary diagnostic needs samples at r <= 1e-3")
    small = r <= max(1e-3, r[0] * 1e3)
    rs = r[small]
    v1, v2 = singular_element(cfg, rs, gamma)
    form = rs * (np.conj(f.phi.values[small]) * v2 + np.conj(f.psi.values[small]) * v1)
    limit = complex(form[0])
    drift = float(abs(form[0] - form[min(len(form) - 1, len(form) // 3)]))
    window = rs <= rs[0] * 100
    e1 = _leading_exponent(rs[window], f.phi.values[small][window])
    e2 = _leading_exponent(rs[window], f.psi.values[small][window])
    slack = 0.02
    admissible = e1 >= -cfg.alpha - slack and e2 >= -(1 - cfg.alpha) - slack
    in_domain = admissible and abs(limit) <= tol
    return BoundaryReport(limit, drift, (e1, e2), bool(admissible), bool(in_domain), tol)
