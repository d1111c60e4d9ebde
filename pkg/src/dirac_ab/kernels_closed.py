r"""Closed-form heat and Schrodinger kernels of the squared operator L, and their mode-sum oracle.

For complex time tau with Re tau >= 0 both kernels share the form

    K(tau; x, y) = G(tau) + D(tau),
    G = pi * e^{-|x-y|^2 / 4 tau} / tau * A_alpha(theta1, theta2),
    D = -e^{-(r1^2+r2^2)/4 tau} / (4 pi^2 tau) * int_0^inf e^{-(r1 r2 / 2 tau) cosh s}
        (B_alpha(s) + C_alpha(s, theta1 - theta2 + pi)) ds,

with tau = t for e^{-tL} and tau = it for e^{-itL}. The extra factor pi on G
restores the free-space limit e^{-|x-y|^2/4t} / (4 pi t); D needs no change.

The oracle sums the modes directly:

    K = e^{-(r1^2+r2^2)/4 tau} / (4 pi tau) * sum_k e^{ik(theta1-theta2)} I_{|k-alpha|}(r1 r2 / 2 tau),

with tau = eps + it and a Richardson step in eps for the Schrodinger case.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import AccuracyWarning, DomainError, TruncationError
from .quadrature import composite
from .specfun import ORDER_MAX, bessel_i_complex

__all__ = [
    "angular_factor_A", "diffraction_B", "diffraction_C", "diffraction_B_C",
    "ClosedKernelValue", "closed_kernel", "heat_kernel_closed", "schrodinger_kernel_closed",
    "OracleValue", "kernel_spectral_oracle", "heat_kernel_spectral",
    "semigroup_constant", "compare_with_oracle", "write_kernel_csv", "KERNEL_CSV_COLUMNS",
    "GEOMETRIC_FACTOR", "BOUNDARY_TOL",
]

# ratio between the geometric term of the true kernel and e^{-|x-y|^2/4tau}/tau * A_alpha
GEOMETRIC_FACTOR = math.pi
BOUNDARY_TOL = 1e-12
OSCILLATION_BUDGET = 200.0


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    return alpha


def _branch(dtheta: np.ndarray):
    """(phase exponent multiplier, on-boundary mask) for theta1 - theta2 in (-2 pi, 2 pi)."""
    d = np.asarray(dtheta, dtype=float)
    on = np.abs(np.abs(d) - math.pi) <= BOUNDARY_TOL
    shift = np.where(d > math.pi, -2 * math.pi, np.where(d < -math.pi, 2 * math.pi, 0.0))
    return d + shift, on


def angular_factor_A(alpha, theta1, theta2):
    """Piecewise phase e^{i alpha (theta1 - theta2 + 2 pi n)} / (4 pi^2).

    On |theta1 - theta2| = pi both adjacent branches apply and their sum
    2 cos(pi alpha) / (4 pi^2) is returned.
    """
    alpha = _check_alpha(alpha)
    d = np.asarray(theta1, dtype=float) - np.asarray(theta2, dtype=float)
    if np.any(np.abs(d) >= 2 * math.pi):
        raise DomainError("angles must lie in [0, 2 pi)")
    wrapped, on = _branch(d)
    val = np.exp(1j * alpha * wrapped) / (4 * math.pi ** 2)
    val = np.where(on, 2 * math.cos(math.pi * alpha) / (4 * math.pi ** 2), val)
    return val[()] if val.ndim == 0 else val


def diffraction_B(alpha, s):
    alpha = abs(float(alpha))
    return math.sin(alpha * math.pi) * np.exp(-alpha * np.asarray(s))


def diffraction_C(alpha, s, theta):
    """C_alpha(s, theta); at theta = 0 (mod 2 pi) the removable form is used."""
    alpha = float(alpha)
    s = np.asarray(s)
    theta = np.asarray(theta, dtype=float)
    num = (np.exp(-s) - np.cos(theta)) * np.sinh(alpha * s) - 1j * np.sin(theta) * np.cosh(alpha * s)
    den = np.cosh(s) - np.cos(theta)
    flat = np.abs(np.sin(theta / 2)) <= 1e-15
    with np.errstate(divide="ignore", invalid="ignore"):
        val = num / den
        # theta = 0: (e^{-s} - 1) sinh(alpha s) / (cosh s - 1)
        small = np.abs(s) < 1e-4
        s_safe = np.where(small, 1.0, s)
        removable = (np.exp(-s_safe) - 1) * np.sinh(alpha * s_safe) / (np.cosh(s_safe) - 1)
        removable = np.where(small, -2 * alpha * (1 - s / 2 + 0j), removable)
    val = np.where(flat, removable, val)
    return math.sin(alpha * math.pi) * val


def diffraction_B_C(alpha, s, theta):
    """B_alpha(s) + C_alpha(s, theta)."""
    s_arr = np.asarray(s)
    th = np.asarray(theta, dtype=float)
    if np.any((s_arr == 0) & (np.abs(np.sin(th / 2)) <= 1e-15)):
        raise DomainError("B + C is singular at (s, theta) = (0, 0)")
    val = diffraction_B(alpha, s) + diffraction_C(alpha, s, theta)
    return val[()] if np.ndim(val) == 0 else val


@dataclass(frozen=True)
class ClosedKernelValue:
    G_term: complex
    D_term: complex
    total: complex
    err: float


def _polar(p):
    r, th = float(p[0]), float(p[1])
    if r <= 0:
        raise DomainError("polar radius must be positive")
    if not 0.0 <= th < 2 * math.pi:
        raise DomainError("polar angle must lie in [0, 2 pi)")
    return r, th


def _s_path(sign: int, tilt: bool):
    """Contour s(u) = u + i phi(u) and ds/du; phi bends into the decaying half-strip."""
    if not tilt:
        return (lambda u: u + 0j), (lambda u: np.ones_like(u) + 0j)
    amp = sign * math.pi / 2
    return (lambda u: u + 1j * amp * np.tanh(u)), (lambda u: 1 + 1j * amp / np.cosh(u) ** 2)


def _d_integral(alpha: float, tau: complex, r1: float, r2: float, theta_p: float,
                per_decade: int) -> complex:
    z = r1 * r2 / (2 * tau)
    # with tau = it, e^{-z cosh s} = e^{i w cosh s}, w = r1 r2 / 2t; bending the
    # path toward sign(t) turns the oscillation into super-exponential decay
    tilt = tau.real == 0.0
    path, dpath = _s_path(1 if tau.imag > 0 else -1, tilt)
    decay = min(alpha, 1 - alpha)
    # end of the contour: integrand below e^{-45} of its start
    u_end = 1.0
    while True:
        s = path(np.array([u_end]))[0]
        expo = (z * (np.cosh(s) - 1)).real + decay * u_end
        if expo > 45 or u_end > 200:
            break
        u_end *= 1.5
    delta = abs(math.remainder(theta_p, 2 * math.pi))
    u_lo = 1e-3 * (delta if delta > BOUNDARY_TOL else 1.0)
    u_lo = min(u_lo, 1e-3)
    n = max(4, int(math.ceil(per_decade * math.log10(u_end / u_lo))))
    breaks = np.concatenate([[0.0], np.geomspace(u_lo, u_end, n + 1)])
    u, w = composite(breaks, 16)
    s = path(u)
    integrand = np.exp(-z * (np.cosh(s) - 1)) * diffraction_B_C(alpha, s, theta_p) * dpath(u)
    # e^{-z} pulled out of the integral so large real z does not underflow early
    return complex(np.sum(w * integrand))


def closed_kernel(alpha: float, tau: complex, x, y, *, normalization: float = 1.0,
                  per_decade: int = 6, estimate_error: bool = True) -> ClosedKernelValue:
    """G + D at complex time tau (Re tau >= 0, tau != 0)."""
    alpha = _check_alpha(alpha)
    tau = complex(tau)
    if tau == 0 or tau.real < 0:
        raise DomainError("need tau != 0 with Re tau >= 0")
    r1, th1 = _polar(x)
    r2, th2 = _polar(y)
    d = th1 - th2
    dist2 = r1 * r1 + r2 * r2 - 2 * r1 * r2 * math.cos(d)
    wrapped, on = _branch(np.array(d))
    if on:
        phase = math.cos(math.pi * alpha)
    else:
        phase = np.exp(1j * alpha * float(wrapped))
    A = phase / (4 * math.pi ** 2)
    G = GEOMETRIC_FACTOR * np.exp(-dist2 / (4 * tau)) / tau * A
    theta_p = d + math.pi
    z = r1 * r2 / (2 * tau)
    pref = -np.exp(-(r1 * r1 + r2 * r2) / (4 * tau) - z) / (4 * math.pi ** 2 * tau)
    fine = _d_integral(alpha, tau, r1, r2, theta_p, per_decade * 2)
    D = pref * fine
    err = math.nan
    if estimate_error:
        coarse = _d_integral(alpha, tau, r1, r2, theta_p, per_decade)
        err = abs(pref * (fine - coarse))
    c = float(normalization)
    return ClosedKernelValue(complex(c * G), complex(c * D), complex(c * (G + D)), c * err)


def heat_kernel_closed(alpha: float, t: float, x, y, *, normalization: float = 1.0) -> ClosedKernelValue:
    """Kernel of e^{-tL} at polar points x = (r1, theta1), y = (r2, theta2)."""
    if not t > 0:
        raise DomainError("heat kernel needs t > 0")
    return closed_kernel(alpha, complex(t), x, y, normalization=normalization)


def schrodinger_kernel_closed(alpha: float, t: float, x, y, *,
                              normalization: float = 1.0) -> ClosedKernelValue:
    """Kernel of e^{-itL}, the closed form with tau = it."""
    t = float(t)
    if t == 0:
        raise DomainError("Schrodinger kernel needs t != 0")
    r1, _ = _polar(x)
    r2, _ = _polar(y)
    if r1 * r2 / abs(t) > OSCILLATION_BUDGET:
        warnings.warn(f"r1 r2 / |t| = {r1 * r2 / abs(t):.3g} exceeds the oscillation budget",
                      AccuracyWarning, stacklevel=2)
    return closed_kernel(alpha, complex(0.0, t), x, y, normalization=normalization)


# ---------------------------------------------------------------------------
# mode-sum oracle


@dataclass(frozen=True)
class OracleValue:
    value: complex
    tail: float
    k_max: int
    eps: float
    richardson_delta: float


def _mode_sum(alpha: float, tau: complex, r1: float, r2: float, dtheta: float,
              k_max: int) -> tuple[complex, float, float]:
    """(value, tail, mass): mass is the prefactor times sum |term|, the round-off scale."""
    z = r1 * r2 / (2 * tau)
    total = 0.0j
    last = 0.0
    mass = 0.0
    for k in range(-k_max, k_max + 1):
        term = np.exp(1j * k * dtheta) * bessel_i_complex(abs(k - alpha), z)
        total += term
        mass += abs(term)
        if abs(k) >= k_max - 1:
            last += abs(term)
    pref = np.exp(-(r1 * r1 + r2 * r2) / (4 * tau)) / (4 * math.pi * tau)
    return pref * total, abs(pref) * last, abs(pref) * mass


def _default_k_max(z: complex) -> int:
    """Smallest n with (|z|/2)^n / n! below e^{-40} relative to the leading terms."""
    zabs = abs(z)
    # leading terms are of size e^{Re z} / sqrt|z| for large |z|, at least (|z|/2)^1 for small |z|
    floor = (-40.0 + max(z.real, 0.0) - 0.5 * math.log(max(zabs, 1.0))
             + min(0.0, math.log(max(zabs, 1e-300) / 2)))
    n = 4
    while n < int(ORDER_MAX) - 1:
        if n * math.log(max(zabs, 1e-300) / 2) - math.lgamma(n + 1) < floor:
            break
        n += 1
    return n


def kernel_spectral_oracle(alpha: float, t: float, x, y, *, kind: str = "heat",
                           k_max: int | None = None, eps_rel: float = 1e-3,
                           tail_tol: float = 1e-12) -> OracleValue:
    """Mode-sum value of the heat (kind='heat') or Schrodinger (kind='schrodinger') kernel.

    The Schrodinger value is the limit eps -> 0 of tau = eps + it, estimated
    from eps and eps/2 by one Richardson step.
    """
    alpha = _check_alpha(alpha)
    r1, th1 = _polar(x)
    r2, th2 = _polar(y)
    d = th1 - th2
    t = float(t)
    if kind == "heat":
        if not t > 0:
            raise DomainError("heat kernel needs t > 0")
        km = k_max or _default_k_max(complex(r1 * r2 / (2 * t)))
        val, tail, mass = _mode_sum(alpha, complex(t), r1, r2, d, km)
        eps, delta = 0.0, 0.0
    elif kind == "schrodinger":
        if t == 0:
            raise DomainError("Schrodinger kernel needs t != 0")
        eps = eps_rel * abs(t)
        km = k_max or _default_k_max(complex(0.0, r1 * r2 / (2 * abs(t))))
        v1, tail1, m1 = _mode_sum(alpha, complex(eps, t), r1, r2, d, km)
        v2, tail2, m2 = _mode_sum(alpha, complex(eps / 2, t), r1, r2, d, km)
        mass = max(m1, m2)
        val = 2 * v2 - v1
        tail = 2 * tail2 + tail1
        delta = abs(v2 - v1)
    else:
        raise DomainError(f"unknown kernel kind {kind!r}")
    if tail > tail_tol * max(mass, 1e-300):
        raise TruncationError(f"mode sum tail {tail:.2e} exceeds tolerance at k_max={km}")
    return OracleValue(complex(val), float(tail), km, float(eps), float(delta))


def heat_kernel_spectral(alpha: float, t: float, x, y, k_max: int | None = None) -> complex:
    return kernel_spectral_oracle(alpha, t, x, y, kind="heat", k_max=k_max).value


# ---------------------------------------------------------------------------
# normalization from the semigroup law


def semigroup_constant(alpha: float, t1: float, t2: float, x, y, *,
                       radius: float | None = None, n_panels: int = 10,
                       n_theta: int = 32) -> float:
    """c such that c K is a semigroup, K being the closed heat kernel with c = 1.

    If K_c = c K satisfies int K_c(t1; x, z) K_c(t2; z, y) dz = K_c(t1 + t2; x, y)
    then c = K(t1 + t2; x, y) / int K(t1; x, z) K(t2; z, y) dz.
    """
    alpha = _check_alpha(alpha)
    r1, _ = _polar(x)
    r2, _ = _polar(y)
    tmax = max(t1, t2)
    radius = radius or (max(r1, r2) + 12 * math.sqrt(tmax))
    # radial panels cluster at the origin, where the kernel carries r^{|k-alpha|} factors
    breaks = np.concatenate([[0.0], np.geomspace(1e-3, radius, n_panels)])
    rho, wr = composite(breaks, 16)
    phis = 2 * math.pi * np.arange(n_theta) / n_theta
    total = 0.0j
    for rr, ww in zip(rho, wr):
        for ph in phis:
            z = (rr, ph)
            k1 = closed_kernel(alpha, complex(t1), x, z, estimate_error=False).total
            k2 = closed_kernel(alpha, complex(t2), z, y, estimate_error=False).total
            total += k1 * k2 * ww * rr * (2 * math.pi / n_theta)
    target = closed_kernel(alpha, complex(t1 + t2), x, y).total
    return float((target / total).real)


# ---------------------------------------------------------------------------
# grid comparison

KERNEL_CSV_COLUMNS = ("t", "r1", "th1", "r2", "th2", "re", "im", "G_re", "G_im",
                      "D_re", "D_im", "err", "oracle_re", "oracle_im", "rel_err")


def compare_with_oracle(alpha: float, kind: str, times, xs, ys, *, normalization: float = 1.0,
                        jobs: int = 1) -> list[dict]:
    """Closed form against the mode sum on every (t, x, y) of the grid, in grid order."""
    if kind not in ("heat", "schrodinger"):
        raise DomainError(f"unknown kernel kind {kind!r}")
    closed_fn = heat_kernel_closed if kind == "heat" else schrodinger_kernel_closed
    cases = [(float(t), tuple(x), tuple(y)) for t in times for x in xs for y in ys]

    def one(case):
        t, x, y = case
        c = closed_fn(alpha, t, x, y, normalization=normalization)
        o = kernel_spectral_oracle(alpha, t, x, y, kind=kind).value
        rel = abs(c.total - o) / abs(o)
        return {"t": t, "r1": x[0], "th1": x[1], "r2": y[0], "th2": y[1],
                "re": c.total.real, "im": c.total.imag, "G_re": c.G_term.real,
                "G_im": c.G_term.imag, "D_re": c.D_term.real, "D_im": c.D_term.imag,
                "err": c.err, "oracle_re": o.real, "oracle_im": o.imag, "rel_err": rel}

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(one, cases))
    return [one(c) for c in cases]


def write_kernel_csv(rows: list[dict], fh, meta: dict) -> None:
    """CSV with a '#' JSON header naming the normalization and grid."""
    fh.write("# " + json.dumps(meta, sort_keys=True) + "\n")
    fh.write(",".join(KERNEL_CSV_COLUMNS) + "\n")
    for row in rows:
        fh.write(",".join(repr(float(row[c])) for c in KERNEL_CSV_COLUMNS) + "\n")
