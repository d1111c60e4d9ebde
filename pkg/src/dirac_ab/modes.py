r"""Angular decomposition of spinor fields into the modes h_k and the mode projections.

A field u = (u1, u2) on a polar grid is written as

    u1 = sum_k phi_k(r) e^{ik theta} / sqrt(2 pi),
    u2 = sum_k psi_k(r) e^{i(k+1) theta} / sqrt(2 pi),

so that the map to {(phi_k, psi_k)} is unitary: sum_k ||(phi_k, psi_k)||^2
equals the L2(R^2) norm of u. The angular integrals are trapezoidal sums,
exact for trigonometric polynomials resolved by the theta grid.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ResolutionError
from .grids import ModeSpinor, RadialGrid
from .quadrature import composite

__all__ = ["SpinorField", "ModeSet", "decompose", "reconstruct", "project",
           "PROJECTIONS", "DEFAULT_K_MAX"]

DEFAULT_K_MAX = 32
SQRT_2PI = math.sqrt(2 * math.pi)
PROJECTIONS = ("P0", "Pperp", "Pgt", "Plt")


@dataclass(frozen=True, eq=False)
class SpinorField:
    """Two complex components sampled on (radial nodes) x (uniform theta nodes)."""

    grid: RadialGrid
    n_theta: int
    u1: np.ndarray
    u2: np.ndarray

    def __post_init__(self):
        shape = (self.grid.count, int(self.n_theta))
        u1 = np.asarray(self.u1, dtype=complex)
        u2 = np.asarray(self.u2, dtype=complex)
        if u1.shape != shape or u2.shape != shape:
            raise DomainError(f"field components must have shape {shape}")
        object.__setattr__(self, "u1", u1)
        object.__setattr__(self, "u2", u2)
        object.__setattr__(self, "n_theta", int(self.n_theta))

    @property
    def theta(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.n_theta) / self.n_theta

    @classmethod
    def from_function(cls, grid: RadialGrid, n_theta: int, func) -> "SpinorField":
        """Sample func(r, theta) -> (u1, u2) on the polar mesh."""
        r = grid.nodes[:, None]
        th = 2 * np.pi * np.arange(n_theta)[None, :] / n_theta
        u1, u2 = func(r, th)
        shape = (grid.count, n_theta)
        return cls(grid, n_theta, np.broadcast_to(u1, shape), np.broadcast_to(u2, shape))

    def norm(self) -> float:
        dth = 2 * np.pi / self.n_theta
        dens = np.sum(np.abs(self.u1) ** 2 + np.abs(self.u2) ** 2, axis=1) * dth
        return float(math.sqrt(max(0.0, float(np.sum(dens * self.grid.weights)))))

    def to_csv(self, path_or_buffer, extra: dict | None = None) -> None:
        """Write columns (r, theta, re1, im1, re2, im2) with a JSON '#' header."""
        meta = {
            "normalization": "L2(R^2), modes paired with (e^{ik theta}, e^{i(k+1) theta})/sqrt(2 pi)",
            "grid": {"breaks": self.grid.breaks.tolist(),
                     "order": self.grid.count // (len(self.grid.breaks) - 1)},
            "n_theta": self.n_theta,
        }
        if extra:
            meta.update(extra)
        r = np.repeat(self.grid.nodes, self.n_theta)
        th = np.tile(self.theta, self.grid.count)
        data = np.column_stack([r, th, self.u1.real.ravel(), self.u1.imag.ravel(),
                                self.u2.real.ravel(), self.u2.imag.ravel()])
        header = json.dumps(meta, sort_keys=True) + "\nr,theta,re1,im1,re2,im2"
        np.savetxt(path_or_buffer, data, delimiter=",", header=header, fmt="%.17g")

    @classmethod
    def from_csv(cls, path_or_buffer) -> "SpinorField":
        if isinstance(path_or_buffer, (str, bytes)) or hasattr(path_or_buffer, "__fspath__"):
            with open(path_or_buffer) as fh:
                text = fh.read()
        else:
            text = path_or_buffer.read()
        first = text.splitlines()[0]
        if not first.startswith("#"):
            raise DomainError("spinor CSV must start with a '#' JSON metadata line")
        meta = json.loads(first[1:].strip())
        breaks = np.asarray(meta["grid"]["breaks"], dtype=float)
        x, w = composite(breaks, int(meta["grid"]["order"]))
        grid = RadialGrid(x, w * x, breaks)
        n_theta = int(meta["n_theta"])
        data = np.loadtxt(io.StringIO(text), delimiter=",", comments="#", ndmin=2)
        if data.shape != (grid.count * n_theta, 6):
            raise DomainError("spinor CSV rows do not match the declared grid")
        if not np.allclose(data[::n_theta, 0], grid.nodes, rtol=1e-12):
            raise DomainError("radial column does not match the declared grid")
        shape = (grid.count, n_theta)
        u1 = (data[:, 2] + 1j * data[:, 3]).reshape(shape)
        u2 = (data[:, 4] + 1j * data[:, 5]).reshape(shape)
        return cls(grid, n_theta, u1, u2)


@dataclass(eq=False)
class ModeSet:
    """Mode spinors indexed by k, all on one radial grid."""

    alpha: float
    grid: RadialGrid
    modes: dict[int, ModeSpinor] = field(default_factory=dict)
    tail: float = 0.0

    def __post_init__(self):
        for k, m in self.modes.items():
            if m.k != k:
                raise DomainError(f"mode stored under {k} carries index {m.k}")
            if m.grid.key != self.grid.key:
                raise DomainError("all modes must share the radial grid of the set")

    def norm(self) -> float:
        return float(math.sqrt(sum(m.norm() ** 2 for m in self.modes.values())))

    def ks(self) -> list[int]:
        return sorted(self.modes)

    def __getitem__(self, k: int) -> ModeSpinor:
        return self.modes[k]

    def __contains__(self, k: int) -> bool:
        return k in self.modes

    def with_modes(self, modes: dict[int, ModeSpinor]) -> "ModeSet":
        return ModeSet(self.alpha, self.grid, dict(modes), self.tail)


def decompose(field_: SpinorField, k_max: int = DEFAULT_K_MAX, alpha: float = 0.5) -> ModeSet:
    """Mode coefficients for |k| <= k_max; ``tail`` is the unresolved norm fraction."""
    k_max = int(k_max)
    if k_max < 0:
        raise DomainError("k_max must be non-negative")
    n = field_.n_theta
    if n < 4 * k_max:
        raise ResolutionError(f"{n} angular nodes cannot resolve |k| <= {k_max}; need >= {4 * k_max}")
    c1 = np.fft.fft(field_.u1, axis=1) * (SQRT_2PI / n)
    c2 = np.fft.fft(field_.u2, axis=1) * (SQRT_2PI / n)
    modes = {}
    for k in range(-k_max, k_max + 1):
        modes[k] = ModeSpinor.from_arrays(k, alpha, field_.grid, c1[:, k % n], c2[:, (k + 1) % n])
    total = field_.norm() ** 2
    out = ModeSet(alpha, field_.grid, modes)
    kept = out.norm() ** 2
    out.tail = max(0.0, (total - kept) / total) if total > 0 else 0.0
    return out


def reconstruct(modes: ModeSet, n_theta: int) -> SpinorField:
    """Sum the modes back into a field on ``n_theta`` uniform angles."""
    n = int(n_theta)
    ks = modes.ks()
    if ks and max(max(ks) + 1, -min(ks)) > n // 2:
        raise ResolutionError("theta grid too coarse for the modes present")
    c1 = np.zeros((modes.grid.count, n), dtype=complex)
    c2 = np.zeros((modes.grid.count, n), dtype=complex)
    for k in ks:
        c1[:, k % n] += modes[k].phi.values
        c2[:, (k + 1) % n] += modes[k].psi.values
    u1 = np.fft.ifft(c1, axis=1) * (n / SQRT_2PI)
    u2 = np.fft.ifft(c2, axis=1) * (n / SQRT_2PI)
    return SpinorField(modes.grid, n, u1, u2)


def project(modes: ModeSet, which: str) -> ModeSet:
    """Keep k = 0 (P0), k != 0 (Pperp), k > 0 (Pgt) or k < 0 (Plt)."""
    keep = {
        "P0": lambda k: k == 0,
        "Pperp": lambda k: k != 0,
        "Pgt": lambda k: k > 0,
        "Plt": lambda k: k < 0,
    }
    if which not in keep:
        raise DomainError(f"unknown projection {which!r}; choose from {PROJECTIONS}")
    return modes.with_modes({k: m for k, m in modes.modes.items() if keep[which](k)})
