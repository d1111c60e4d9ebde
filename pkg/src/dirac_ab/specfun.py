r"""Real-order Bessel functions J, K and the modified function I of complex argument.

All routines are vectorised over the argument; the order is a scalar.

J is evaluated in three regimes:

* ascending power series (extended-precision accumulation) for ``x < 12``;
* Hankel's asymptotic expansion for ``x >= max(12, 2 nu^2)``; negative orders go
  through the reflection ``J_{-nu} = cos(nu pi) J_nu - sin(nu pi) Y_nu``;
* upward recurrence from the two lowest orders of the same fractional part
  in between while ``nu < x`` (stable because every order stays below ``x``);
* Miller's downward recurrence for ``12 <= x <= nu``, normalised against the
  upward-recurrence values at the two orders just below ``x``.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError
from .quadrature import composite

ORDER_MIN = -2.0
ORDER_MAX = 60.0
SWITCH_MIN = 12.0

_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _lanczos(x: np.ndarray) -> np.ndarray:
    # valid for x >= 0.5
    xm = x - 1.0
    acc = np.full_like(xm, _LANCZOS[0])
    for i, c in enumerate(_LANCZOS[1:], start=1):
        acc = acc + c / (xm + i)
    t = xm + _LANCZOS_G + 0.5
    return math.sqrt(2 * math.pi) * t ** (xm + 0.5) * np.exp(-t) * acc


def _is_nonpositive_int(x: np.ndarray) -> np.ndarray:
    return (x <= 0) & (x == np.round(x))


def gamma(x):
    """Gamma function by a Lanczos approximation with reflection below 1/2.

    Poles (non-positive integers) give ``inf``.
    """
    arr, scalar = _as_array(x)
    out = np.empty_like(arr)
    pole = _is_nonpositive_int(arr)
    left = (arr < 0.5) & ~pole
    right = arr >= 0.5
    out[pole] = np.inf
    out[right] = _lanczos(arr[right])
    xl = arr[left]
    out[left] = math.pi / (np.sin(math.pi * xl) * _lanczos(1.0 - xl))
    return out[()] if scalar else out


def rgamma(x):
    """Reciprocal gamma function, zero at the poles of gamma."""
    arr, scalar = _as_array(x)
    out = np.empty_like(arr)
    pole = _is_nonpositive_int(arr)
    left = (arr < 0.5) & ~pole
    right = arr >= 0.5
    out[pole] = 0.0
    out[right] = 1.0 / _lanczos(arr[right])
    xl = arr[left]
    out[left] = np.sin(math.pi * xl) * _lanczos(1.0 - xl) / math.pi
    return out[()] if scalar else out


def _check_order(nu: float) -> float:
    nu = float(nu)
    if not math.isfinite(nu) or nu < ORDER_MIN or nu > ORDER_MAX:
        raise DomainError(f"order {nu} outside supported range [{ORDER_MIN}, {ORDER_MAX}]")
    return nu


def _check_positive(arr: np.ndarray) -> None:
    if arr.size and (not np.all(np.isfinite(arr)) or np.any(arr <= 0)):
        raise DomainError("argument must be finite and strictly positive")


# ---------------------------------------------------------------------------
# J_nu


def _series_sum(nu: float, x: np.ndarray, dtype, rel: float) -> np.ndarray:
    """sum_m (-x^2/4)^m / (m! (nu+1)_m), dropping elements as they converge."""
    xd = x.astype(dtype)
    q = -(xd * xd) / 4
    term = np.ones_like(xd)
    total = np.ones_like(xd)
    peak = np.ones_like(xd)
    idx = np.arange(x.size)
    for m in range(1, 500):
        term = term * q / (m * (m + nu))
        total[idx] += term
        mag = np.abs(term)
        np.maximum(peak, mag, out=peak)
        live = mag > rel * peak
        if not live.any():
            break
        if live.sum() < 0.75 * live.size:
            idx, term, q, peak = idx[live], term[live], q[live], peak[live]
    return total


def _j_series(nu: float, x: np.ndarray) -> np.ndarray:
    if x.size == 0:
        return np.zeros(0)
    out = np.empty(x.shape, dtype=float)
    # cancellation grows like e^x / |J|: plain doubles suffice for small x
    small = x < 4.0
    out[small] = _series_sum(nu, x[small], np.float64, 1e-17)
    out[~small] = _series_sum(nu, x[~small], np.longdouble, 1e-21).astype(float)
    # prefactor (x/2)^nu / Gamma(nu+1) in log form to dodge overflow at large nu
    pref = np.exp(nu * np.log(x / 2.0)) * float(rgamma(nu + 1.0))
    return out * pref


def _hankel_pq(nu: float, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Hankel's P and Q, each truncated before its terms start to grow."""
    mu = 4.0 * nu * nu
    p = np.ones_like(x)
    q = np.zeros_like(x)
    term = np.ones_like(x)
    prev = np.full_like(x, np.inf)
    xs = x
    idx = np.arange(x.size)
    k_turn = 0.5 * math.sqrt(mu) + 1.5
    for k in range(1, 80):
        term = term * (mu - (2 * k - 1) ** 2) / (8.0 * k * xs)
        mag = np.abs(term)
        live = mag > 1e-17
        if k > k_turn:
            live &= mag < prev
        sign = -1.0 if (k // 2) % 2 else 1.0
        target = q if k % 2 else p
        target[idx[live]] += sign * term[live]
        if not live.any():
            break
        if live.sum() < 0.75 * live.size:
            idx, term, xs, mag = idx[live], term[live], xs[live], mag[live]
        else:
            # dead elements must not restart once the terms start to grow
            term = np.where(live, term, 0.0)
        prev = mag
    return p, q


def _j_asymptotic(nu: float, x: np.ndarray) -> np.ndarray:
    if x.size == 0:
        return np.zeros(0)
    a = abs(nu)
    p, q = _hankel_pq(a, x)
    amp = np.sqrt(2.0 / (math.pi * x))
    omega = x - (0.5 * a + 0.25) * math.pi
    c, s = np.cos(omega), np.sin(omega)
    j = amp * (p * c - q * s)
    if nu >= 0:
        return j
    y = amp * (p * s + q * c)
    return math.cos(a * math.pi) * j - math.sin(a * math.pi) * y


def _j_recurrence(nu: float, x: np.ndarray) -> np.ndarray:
    if x.size == 0:
        return np.zeros(0)
    base = nu - math.floor(nu)
    lo = _j_asymptotic(base, x)
    hi = _j_asymptotic(base + 1.0, x)
    steps = int(round(nu - base))
    if steps < 0:
        # downward J_{m-1} = (2m / x) J_m - J_{m+1}, stable here since x > |nu|
        order = base
        for _ in range(-steps):
            lo, hi = (2.0 * order / x) * lo - hi, lo
            order -= 1.0
        return lo
    order = base + 1.0
    for _ in range(steps - 1):
        lo, hi = hi, (2.0 * order / x) * hi - lo
        order += 1.0
    return hi if nu - base >= 1 else lo


def _j_miller(nu: float, x: np.ndarray) -> np.ndarray:
    """Downward recurrence for SWITCH_MIN <= x < nu.

    Normalised against the two orders just below x, which the upward
    recurrence delivers accurately.
    """
    if x.size == 0:
        return np.zeros(0)
    base = nu - math.floor(nu)
    n_target = int(round(nu - base))
    n_low = np.floor(x - base).astype(int) - 1
    # anchors at orders base + n_low and base + n_low + 1
    lo = _j_asymptotic(base, x)
    hi = _j_asymptotic(base + 1.0, x)
    anchor0 = np.where(n_low == 0, lo, 0.0)
    anchor1 = np.where(n_low == 0, hi, 0.0)
    for n in range(1, int(n_low.max()) + 1):
        lo, hi = hi, (2.0 * (base + n) / x) * hi - lo
        hit = n_low == n
        anchor0 = np.where(hit, lo, anchor0)
        anchor1 = np.where(hit, hi, anchor1)
    n_start = n_target + 30 + int(math.ceil(4.0 * float(x.max()) ** (1.0 / 3.0)))
    upper = np.zeros_like(x)
    cur = np.full_like(x, 1e-30)
    target = np.zeros_like(x)
    miller0 = np.zeros_like(x)
    miller1 = np.zeros_like(x)
    for n in range(n_start, -1, -1):
        # cur holds order base + n, upper holds base + n + 1
        if n == n_target:
            target = cur.copy()
        hit1 = n_low + 1 == n
        miller1 = np.where(hit1, cur, miller1)
        hit0 = n_low == n
        miller0 = np.where(hit0, cur, miller0)
        if n == 0 or np.all(n_low >= n):
            break
        nxt = (2.0 * (base + n) / x) * cur - upper
        upper, cur = cur, nxt
        big = np.abs(cur) > 1e250
        if big.any():
            scale = np.where(big, 1e-250, 1.0)
            cur, upper = cur * scale, upper * scale
            target, miller0, miller1 = target * scale, miller0 * scale, miller1 * scale
    scale = (anchor0 * miller0 + anchor1 * miller1) / (miller0 ** 2 + miller1 ** 2)
    return target * scale


def _bessel_j(nu: float, x: np.ndarray) -> np.ndarray:
    """J_nu on a positive float array, no validation."""
    if nu < 0 and nu == round(nu):
        n = int(round(-nu))
        return (-1.0) ** n * _bessel_j(float(n), x)
    out = np.empty_like(x)
    asym = x >= max(SWITCH_MIN, 2.0 * nu * nu)
    series = ~asym & (x < SWITCH_MIN)
    miller = ~asym & ~series & (x <= nu)
    rec = ~asym & ~series & ~miller
    out[asym] = _j_asymptotic(nu, x[asym])
    out[series] = _j_series(nu, x[series])
    out[miller] = _j_miller(nu, x[miller])
    out[rec] = _j_recurrence(nu, x[rec])
    return out


def bessel_j(order, x):
    """Bessel function of the first kind J_order(x) for x > 0."""
    nu = _check_order(order)
    arr, scalar = _as_array(x)
    _check_positive(arr)
    out = _bessel_j(nu, arr.ravel()).reshape(arr.shape)
    return out[()] if scalar else out


def bessel_j_prime(order, x):
    """Derivative J'_order(x) from J'_nu = J_{nu-1} - nu J_nu / x."""
    nu = _check_order(order)
    arr, scalar = _as_array(x)
    _check_positive(arr)
    flat = arr.ravel()
    out = (_bessel_j(nu - 1.0, flat) - nu * _bessel_j(nu, flat) / flat).reshape(arr.shape)
    return out[()] if scalar else out


def _bessel_y_asymptotic(nu: float, x: np.ndarray) -> np.ndarray:
    # internal: only used for checks of the reflection formula
    p, q = _hankel_pq(nu, x)
    omega = x - (0.5 * nu + 0.25) * math.pi
    return np.sqrt(2.0 / (math.pi * x)) * (p * np.sin(omega) + q * np.cos(omega))


# ---------------------------------------------------------------------------
# K_nu


def _k_log_integral(a: float, x: np.ndarray) -> np.ndarray:
    """log of int_0^inf exp(-x cosh t) cosh(a t) dt, trapezoidal in t."""
    if x.size == 0:
        return np.zeros(0)
    t_peak = np.arcsinh(a / x)
    g_peak = -x * (np.cosh(t_peak) - 1.0) + a * t_peak
    # push the cut until the integrand has dropped by e^-45 everywhere
    t_end = t_peak + 1.0
    for _ in range(200):
        g_end = -x * (np.cosh(t_end) - 1.0) + a * t_end
        short = g_end > g_peak - 45.0
        if not short.any():
            break
        t_end = np.where(short, t_end + 0.5, t_end)
    h = min(0.1, 0.5 / math.sqrt(max(float(x.max()), 1.0)))
    n = int(math.ceil(float(t_end.max()) / h)) + 1
    t = np.arange(n) * h
    g = -np.outer(x, np.cosh(t) - 1.0)
    shift = g_peak[:, None]
    vals = 0.5 * (np.exp(g + a * t - shift) + np.exp(g - a * t - shift))
    vals[:, 0] *= 0.5
    s = h * vals.sum(axis=1)
    return -x + g_peak + np.log(s)


def bessel_k(order, x):
    """Macdonald function K_order(x) for x > 0, with K_{-nu} = K_nu exactly."""
    nu = _check_order(order)
    arr, scalar = _as_array(x)
    _check_positive(arr)
    out = np.exp(_k_log_integral(abs(nu), arr.ravel())).reshape(arr.shape)
    return out[()] if scalar else out


def bessel_k_prime(order, x):
    """Derivative K'_order(x), from differentiating the cosh integral under the sign."""
    nu = abs(_check_order(order))
    arr, scalar = _as_array(x)
    _check_positive(arr)
    flat = arr.ravel()
    # cosh(t) cosh(nu t) = (cosh((nu+1)t) + cosh((nu-1)t)) / 2
    up = np.exp(_k_log_integral(nu + 1.0, flat))
    down = np.exp(_k_log_integral(abs(nu - 1.0), flat))
    out = (-0.5 * (up + down)).reshape(arr.shape)
    return out[()] if scalar else out


# ---------------------------------------------------------------------------
# I_nu(z), complex z


def _i_series(nu: float, z: np.ndarray) -> np.ndarray:
    zl = z.astype(np.clongdouble)
    q = zl * zl / 4
    term = np.ones_like(zl)
    total = np.ones_like(zl)
    peak = np.ones(z.shape, dtype=np.longdouble)
    for m in range(1, 600):
        term = term * q / (m * (m + nu))
        total += term
        mag = np.abs(term)
        np.maximum(peak, mag, out=peak)
        if np.all(mag <= 1e-21 * peak):
            break
    with np.errstate(divide="ignore", invalid="ignore"):
        pref = np.exp(nu * np.log(z / 2.0)) * float(rgamma(nu + 1.0))
    return (total * pref).astype(complex)


def _i_quadrature(nu: float, z: np.ndarray) -> np.ndarray:
    zmax = float(np.abs(z).max())
    # first integral over [0, pi]; panel count follows the oscillation budget
    n_pan = int(math.ceil((zmax + abs(nu)) / 4.0)) + 2
    prev = None
    for _ in range(6):
        tau, w = composite(np.linspace(0.0, math.pi, n_pan + 1), 20)
        first = (np.exp(np.outer(z, np.cos(tau))) * (w * np.cos(nu * tau))).sum(axis=1)
        if prev is not None:
            scale = np.exp(np.abs(z.real))
            if np.all(np.abs(first - prev) <= 1e-14 * scale):
                break
        prev = first
        n_pan *= 2
    out = first / math.pi
    if math.sin(nu * math.pi) == 0.0:
        return out
    return out - math.sin(nu * math.pi) / math.pi * _i_tail(nu, z)


def _i_tail(nu: float, z: np.ndarray) -> np.ndarray:
    """int_0^inf exp(-z cosh tau - nu tau) dtau with the ray turned by -arg z."""
    res = np.empty(z.shape, dtype=complex)
    for idx, zz in enumerate(z):
        beta = -math.atan2(zz.imag, zz.real)
        r = abs(zz)
        total = 0.0j
        if beta != 0.0:
            n_seg = 4 + int(math.ceil(r * abs(beta) / 3.0))
            y, wy = composite(np.linspace(min(0.0, beta), max(0.0, beta), n_seg + 1), 20)
            sign = 1.0 if beta > 0 else -1.0
            # tau = i y: d tau = i dy, orientation from 0 to beta
            total += sign * 1j * np.sum(wy * np.exp(-zz * np.cos(y) - 1j * nu * y))
        # ray tau = s + i beta: Re(z cosh tau) >= r sinh s
        s_end = 1.0
        while r * math.sinh(s_end) + nu * s_end < 50.0 + math.log1p(r):
            s_end += 0.5
        # the integrand falls off on the scale 1/r near s = 0, so grade the panels
        s0 = min(0.25, 0.5 / max(r, 1e-300))
        breaks = np.concatenate([[0.0], np.geomspace(s0, max(s_end, 2 * s0), 12),
                                 np.arange(0.25, s_end, 0.25)])
        s, ws = composite(np.unique(breaks), 20)
        tau = s + 1j * beta
        total += np.sum(ws * np.exp(-zz * np.cosh(tau) - nu * tau))
        res[idx] = total
    return res


def bessel_i_complex(order, z):
    """Modified Bessel function I_order(z) for complex z with Re z >= 0.

    Uses the two-integral representation: a Gauss-Legendre rule on [0, pi] and
    a contour-rotated ray for the decaying tail. When |z| is small compared
    with the order the integrals cancel catastrophically, so the ascending
    series is used there instead. On the imaginary axis the tail integral
    only converges for positive order.
    """
    nu = _check_order(order)
    arr = np.asarray(z, dtype=complex)
    scalar = arr.ndim == 0
    flat = arr.ravel()
    if flat.size and (not np.all(np.isfinite(flat)) or np.any(flat.real < 0)):
        raise DomainError("I_nu(z) needs finite z with Re z >= 0")
    zero = flat == 0
    if np.any(zero) and nu < 0 and nu != round(nu):
        raise DomainError("I_nu(0) is infinite for negative non-integer order")
    imag_axis = (flat.real == 0) & ~zero
    if np.any(imag_axis) and nu <= 0 and math.sin(nu * math.pi) != 0.0:
        raise DomainError("tail integral diverges on the imaginary axis for order <= 0")
    out = np.empty(flat.shape, dtype=complex)
    if nu < 0 and nu == round(nu):
        out = bessel_i_complex(-nu, flat) if flat.size else out
        return out.reshape(arr.shape)[()] if scalar else out.reshape(arr.shape)
    mag = np.abs(flat)
    use_series = ~zero & ((mag <= 2.0 * math.sqrt(abs(nu) + 1.0)) | (mag < abs(nu)))
    use_quad = ~zero & ~use_series
    out[zero] = 1.0 if nu == 0 else 0.0
    if use_series.any():
        out[use_series] = _i_series(nu, flat[use_series])
    if use_quad.any():
        out[use_quad] = _i_quadrature(nu, flat[use_quad])
    out = out.reshape(arr.shape)
    return out[()] if scalar else out


# ---------------------------------------------------------------------------
# amplitude representation J_nu(x) = x^{-1/2} (e^{ix} a_+ + e^{-ix} a_-)


def amplitude_pair(order, x):
    """Amplitudes (a_plus, a_minus) of the oscillatory representation of J_order.

    Solved from the 2x2 system given by J and the derivative of sqrt(x) J, so
    the reconstruction is exact and a_minus = conj(a_plus).
    """
    nu = _check_order(order)
    arr, scalar = _as_array(x)
    if arr.size and (not np.all(np.isfinite(arr)) or np.any(arr < 1.0)):
        raise DomainError("amplitude representation is only used for x >= 1")
    flat = arr.ravel()
    j = _bessel_j(nu, flat)
    jp = _bessel_j(nu - 1.0, flat) - nu * j / flat
    b = 0.5 * np.sqrt(flat) * (j - 1j * (jp + j / (2.0 * flat)))
    a_plus = (np.exp(-1j * flat) * b).reshape(arr.shape)
    a_minus = np.conj(a_plus)
    if scalar:
        return a_plus[()], a_minus[()]
    return a_plus, a_minus
