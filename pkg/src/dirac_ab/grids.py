"""Radial and spectral grids with quadrature weights, and the sampled profiles on them.

Both grids are composite Gauss-Legendre rules: geometric panels near the
origin (power-law behaviour) followed by uniform panels (oscillation).
Radial weights integrate against r dr, spectral weights against |rho| drho.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .quadrature import composite, graded_breaks

PANEL_ORDER = 16
# largest phase change (radians) across one panel that a 16-point rule still
# integrates to well below 1e-10
MAX_PANEL_PHASE = 4.0 * np.pi


def _fingerprint(*arrays: np.ndarray) -> str:
    h = hashlib.sha1()
    for a in arrays:
        h.update(np.ascontiguousarray(a).tobytes())
    return h.hexdigest()


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Quadrature nodes on (0, r_max] with weights for r dr."""

    nodes: np.ndarray
    weights: np.ndarray
    breaks: np.ndarray
    key: str = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "nodes", _frozen(self.nodes))
        object.__setattr__(self, "weights", _frozen(self.weights))
        object.__setattr__(self, "breaks", _frozen(self.breaks))
        if self.nodes.shape != self.weights.shape or self.nodes.ndim != 1:
            raise DomainError("nodes and weights must be 1-D arrays of equal length")
        if np.any(np.diff(self.nodes) <= 0) or self.nodes[0] <= 0:
            raise DomainError("radial nodes must be positive and strictly increasing")
        object.__setattr__(self, "key", _fingerprint(self.nodes, self.weights))

    @classmethod
    def graded(cls, r_min: float = 1e-12, r_max: float = 60.0, *,
               knee: float = 1.0, per_decade: float = 4.0, width: float = 0.6,
               order: int = PANEL_ORDER) -> "RadialGrid":
        breaks = graded_breaks(r_min, min(knee, r_max), r_max, per_decade, width)
        x, w = composite(breaks, order)
        return cls(x, w * x, breaks)

    @property
    def r_min(self) -> float:
        return float(self.breaks[0])

    @property
    def r_max(self) -> float:
        return float(self.breaks[-1])

    @property
    def count(self) -> int:
        return int(self.nodes.size)

    @property
    def max_panel_width(self) -> float:
        return float(np.max(np.diff(self.breaks)))

    def integrate(self, values) -> complex:
        """Integral of sampled values against r dr."""
        return np.sum(np.asarray(values) * self.weights, axis=-1)


@dataclass(frozen=True, eq=False)
class SpectralGrid:
    """Quadrature nodes lambda > 0 with weights for lambda dlambda.

    Both energy branches rho = +lambda and rho = -lambda use these nodes.
    """

    nodes: np.ndarray
    weights: np.ndarray
    breaks: np.ndarray
    key: str = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "nodes", _frozen(self.nodes))
        object.__setattr__(self, "weights", _frozen(self.weights))
        object.__setattr__(self, "breaks", _frozen(self.breaks))
        if self.nodes.shape != self.weights.shape or self.nodes.ndim != 1:
            raise DomainError("nodes and weights must be 1-D arrays of equal length")
        object.__setattr__(self, "key", _fingerprint(self.nodes, self.weights))

    @classmethod
    def for_radial(cls, radial: RadialGrid, rho_max: float = 20.0, *,
                   rho_min: float = 1e-12, per_decade: float = 4.0,
                   order: int = PANEL_ORDER) -> "SpectralGrid":
        """Spectral grid whose uniform panels resolve J(r rho) up to r = r_max."""
        width = MAX_PANEL_PHASE / radial.r_max
        # the last geometric panel must be no wider than the uniform ones
        knee = min(1.0, rho_max, width / (1.0 - 10.0 ** (-1.0 / per_decade)))
        breaks = graded_breaks(rho_min, knee, rho_max, per_decade, width)
        x, w = composite(breaks, order)
        return cls(x, w * x, breaks)

    @classmethod
    def band(cls, lo: float, hi: float, radial: RadialGrid,
             order: int = PANEL_ORDER) -> "SpectralGrid":
        """Uniform-panel grid on [lo, hi] only, for data known to live in that band."""
        if not 0 < lo < hi:
            raise DomainError("need 0 < lo < hi")
        n = max(1, int(np.ceil((hi - lo) * radial.r_max / MAX_PANEL_PHASE)))
        breaks = np.linspace(lo, hi, n + 1)
        x, w = composite(breaks, order)
        return cls(x, w * x, breaks)

    @property
    def rho_max(self) -> float:
        return float(self.breaks[-1])

    @property
    def count(self) -> int:
        return int(self.nodes.size)

    @property
    def max_panel_width(self) -> float:
        return float(np.max(np.diff(self.breaks)))


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Complex samples of a function of r on a RadialGrid."""

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != self.grid.nodes.shape:
            raise DomainError("profile values must match the grid")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, grid: RadialGrid, func) -> "RadialProfile":
        return cls(grid, func(grid.nodes))

    def norm(self) -> float:
        return float(np.sqrt(np.real(self.grid.integrate(np.abs(self.values) ** 2))))

    def inner(self, other: "RadialProfile") -> complex:
        """<self, other> = int conj(self) other r dr."""
        return complex(self.grid.integrate(np.conj(self.values) * other.values))


@dataclass(frozen=True, eq=False)
class ModeSpinor:
    """Radial pair (phi_k, psi_k) multiplying (e^{ik theta}, e^{i(k+1) theta}).

    ``dphi``/``dpsi`` optionally carry exact radial derivatives so that the
    mode operator can avoid finite differences.
    """

    k: int
    alpha: float
    phi: RadialProfile
    psi: RadialProfile
    dphi: np.ndarray | None = None
    dpsi: np.ndarray | None = None

    def __post_init__(self):
        if self.phi.grid is not self.psi.grid and self.phi.grid.key != self.psi.grid.key:
            raise DomainError("phi and psi must share one radial grid")
        object.__setattr__(self, "k", int(self.k))

    @classmethod
    def from_arrays(cls, k: int, alpha: float, grid: RadialGrid, phi, psi,
                    dphi=None, dpsi=None) -> "ModeSpinor":
        return cls(k, alpha, RadialProfile(grid, phi), RadialProfile(grid, psi),
                   None if dphi is None else np.asarray(dphi, dtype=complex),
                   None if dpsi is None else np.asarray(dpsi, dtype=complex))

    @classmethod
    def zeros(cls, k: int, alpha: float, grid: RadialGrid) -> "ModeSpinor":
        z = np.zeros(grid.count, dtype=complex)
        return cls.from_arrays(k, alpha, grid, z, z)

    @property
    def grid(self) -> RadialGrid:
        return self.phi.grid

    def norm(self) -> float:
        return float(np.hypot(self.phi.norm(), self.psi.norm()))

    def inner(self, other: "ModeSpinor") -> complex:
        return self.phi.inner(other.phi) + self.psi.inner(other.psi)

    def scaled(self, c: complex) -> "ModeSpinor":
        return ModeSpinor.from_arrays(self.k, self.alpha, self.grid,
                                      c * self.phi.values, c * self.psi.values)

    def __add__(self, other: "ModeSpinor") -> "ModeSpinor":
        if other.k != self.k:
            raise DomainError("cannot add spinors of different modes")
        return ModeSpinor.from_arrays(self.k, self.alpha, self.grid,
                                      self.phi.values + other.phi.values,
                                      self.psi.values + other.psi.values)

    def __sub__(self, other: "ModeSpinor") -> "ModeSpinor":
        return self + other.scaled(-1.0)


@dataclass(frozen=True, eq=False)
class SpectralProfile:
    """Values of a function of signed energy, one array per branch."""

    grid: SpectralGrid
    positive: np.ndarray
    negative: np.ndarray
    k: int = 0
    alpha: float = 0.0

    def __post_init__(self):
        pos = np.asarray(self.positive, dtype=complex)
        neg = np.asarray(self.negative, dtype=complex)
        if pos.shape != self.grid.nodes.shape or neg.shape != self.grid.nodes.shape:
            raise DomainError("branch arrays must match the spectral grid")
        object.__setattr__(self, "positive", pos)
        object.__setattr__(self, "negative", neg)

    @property
    def energies(self) -> np.ndarray:
        """Signed energies, negative branch first (descending magnitude reversed)."""
        return np.concatenate([-self.grid.nodes[::-1], self.grid.nodes])

    @property
    def values(self) -> np.ndarray:
        return np.concatenate([self.negative[::-1], self.positive])

    @property
    def weights(self) -> np.ndarray:
        return np.concatenate([self.grid.weights[::-1], self.grid.weights])

    def norm(self) -> float:
        w = self.grid.weights
        return float(np.sqrt(np.sum(w * (np.abs(self.positive) ** 2 + np.abs(self.negative) ** 2))))

    def inner(self, other: "SpectralProfile") -> complex:
        w = self.grid.weights
        return complex(np.sum(w * (np.conj(self.positive) * other.positive
                                   + np.conj(self.negative) * other.negative)))

    def map(self, func) -> "SpectralProfile":
        """Multiply by func(rho) evaluated on the signed energies."""
        lam = self.grid.nodes
        return SpectralProfile(self.grid, func(lam) * self.positive,
                               func(-lam) * self.negative, self.k, self.alpha)
