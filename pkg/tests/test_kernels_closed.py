import io
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dirac_ab.errors import AccuracyWarning, DomainError, TruncationError
from dirac_ab.kernels_closed import (GEOMETRIC_FACTOR, angular_factor_A, compare_with_oracle,
                                     diffraction_B, diffraction_B_C, diffraction_C,
                                     heat_kernel_closed, heat_kernel_spectral,
                                     kernel_spectral_oracle, schrodinger_kernel_closed,
                                     semigroup_constant, write_kernel_csv)

FOUR_PI2 = 4 * math.pi ** 2

# mode sums in mpmath at 30 digits, frozen; Schrodinger values use I_nu(-iy) = e^{-i pi nu/2} J_nu(y)
HEAT_CASES = [
    (0.5, 1.0, (1.0, 0.0), (1.0, 0.0), 0.067059998372703472),
    (0.3, 0.5, (0.8, 1.0), (1.4, 5.5), complex(0.026020824095173693, 0.013640222001300149)),
    (0.7, 2.0, (1.2, math.pi), (0.6, math.pi / 2),
     complex(0.0053071183477454562, 0.016907605105977151)),
]
SCHRODINGER_CASES = [
    (0.3, 1.0, (0.8, 1.0), (1.4, 5.5), complex(0.049936320821348117, -0.052896587753021867)),
    (0.6, 0.5, (1.2, math.pi), (0.9, 3.0), complex(0.0087512214971872375, -0.21009707160480754)),
]

points = st.tuples(st.floats(0.2, 2.5), st.floats(0.0, 6.28))


# ---------------------------------------------------------------- A, B, C


def test_angular_factor_on_diagonal():
    assert angular_factor_A(0.3, 1.0, 1.0) == pytest.approx(1 / FOUR_PI2, rel=1e-15)


def test_angular_factor_second_branch():
    alpha = 0.3
    got = angular_factor_A(alpha, 3 * math.pi / 2, 0.0)
    expected = np.exp(1j * alpha * 3 * math.pi / 2) * np.exp(-2j * math.pi * alpha) / FOUR_PI2
    assert got == pytest.approx(expected, rel=1e-14)


def test_angular_factor_on_cut():
    assert angular_factor_A(0.3, math.pi, 0.0) == pytest.approx(
        2 * math.cos(0.3 * math.pi) / FOUR_PI2, rel=1e-15)


@pytest.mark.parametrize("d", [0.4, 2.0, -3.0, 5.5])
def test_angular_factor_small_flux_limit(d):
    th1, th2 = (d, 0.0) if d >= 0 else (0.0, -d)
    assert angular_factor_A(1e-9, th1, th2) == pytest.approx(1 / FOUR_PI2, rel=1e-7)


def test_angular_factor_rejects_angles():
    with pytest.raises(DomainError):
        angular_factor_A(0.3, 7.0, 0.0)
    with pytest.raises(DomainError):
        angular_factor_A(1.0, 0.0, 0.0)


def test_b_at_zero_half_flux():
    assert diffraction_B(0.5, 0.0) == pytest.approx(1.0, rel=1e-15)


@pytest.mark.parametrize("theta", [0.5, 2.0, 4.0])
def test_c_at_zero(theta):
    a = 0.4
    expected = -1j * math.sin(a * math.pi) * math.sin(theta) / (1 - math.cos(theta))
    assert diffraction_C(a, 0.0, theta) == pytest.approx(expected, rel=1e-14)


def test_c_removable_point_continuous():
    a, s = 0.35, 0.7
    assert diffraction_C(a, s, 0.0) == pytest.approx(diffraction_C(a, s, 1e-7), rel=1e-6)


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.8])
def test_b_plus_c_decay_rate(alpha):
    s = np.linspace(5, 40, 30)
    v = np.abs(diffraction_B_C(alpha, s, 1.0))
    rate = np.polyfit(s, np.log(v), 1)[0]
    assert rate == pytest.approx(-min(alpha, 1 - alpha), abs=0.01)


def test_b_plus_c_singular_point():
    with pytest.raises(DomainError):
        diffraction_B_C(0.5, 0.0, 0.0)


# ---------------------------------------------------------------- heat kernel


@pytest.mark.parametrize("alpha,t,x,y,value", HEAT_CASES)
def test_heat_closed_frozen(alpha, t, x, y, value):
    got = heat_kernel_closed(alpha, t, x, y)
    assert abs(got.total - value) <= 1e-10 * abs(value)
    assert got.total == got.G_term + got.D_term


@pytest.mark.parametrize("alpha,t,x,y,value", HEAT_CASES)
def test_heat_oracle_frozen(alpha, t, x, y, value):
    assert abs(heat_kernel_spectral(alpha, t, x, y) - value) <= 1e-12 * abs(value)


@given(st.sampled_from([0.2, 0.5, 0.85]), st.floats(0.2, 3.0), points, points)
def test_heat_hermitian(alpha, t, x, y):
    a = heat_kernel_closed(alpha, t, x, y).total
    b = heat_kernel_closed(alpha, t, y, x).total
    assert abs(a - np.conj(b)) <= 1e-12 * max(abs(a), 1e-300)


@given(st.sampled_from([0.2, 0.5, 0.85]), st.floats(0.2, 3.0), points)
def test_heat_positive_on_diagonal(alpha, t, x):
    v = heat_kernel_spectral(alpha, t, x, x)
    assert v.real > 0 and abs(v.imag) <= 1e-14 * v.real


def test_heat_gaussian_bound_constant_stable():
    # sup over the (x, y) grid of |K| t e^{|x-y|^2/4t}, one constant per t
    consts = []
    for t in (0.25, 0.5, 1.0, 2.0, 4.0):
        c_t = 0.0
        for x in ((0.5, 0.0), (1.0, 1.0), (2.0, 3.0)):
            for y in ((0.7, 0.2), (1.5, 4.0), (1.0, 1.0)):
                v = heat_kernel_closed(0.4, t, x, y).total
                dist2 = x[0] ** 2 + y[0] ** 2 - 2 * x[0] * y[0] * math.cos(x[1] - y[1])
                c_t = max(c_t, abs(v) * t * math.exp(dist2 / (4 * t)))
        consts.append(c_t)
    consts = np.array(consts)
    assert np.all(np.isfinite(consts))
    assert consts.max() / consts.min() < 2.0
    assert consts.max() <= 1 / (4 * math.pi) + 1e-12


def test_free_space_normalization_near_small_flux():
    # geometric term alone at tiny alpha reproduces e^{-|x-y|^2/4t}/(4 pi t) away from the cut
    v = heat_kernel_closed(1e-6, 1.0, (1.0, 0.0), (1.0, 0.5)).G_term
    dist2 = 2 - 2 * math.cos(0.5)
    assert v.real == pytest.approx(math.exp(-dist2 / 4) / (4 * math.pi), rel=1e-5)
    assert GEOMETRIC_FACTOR == math.pi


def test_heat_needs_positive_time():
    with pytest.raises(DomainError):
        heat_kernel_closed(0.5, 0.0, (1.0, 0.0), (1.0, 0.0))


def test_semigroup_constant_is_one():
    c = semigroup_constant(0.4, 0.5, 0.7, (1.0, 0.3), (0.8, 2.0), n_panels=6, n_theta=16)
    assert c == pytest.approx(1.0, abs=1e-6)


# ---------------------------------------------------------------- Schrodinger kernel


@pytest.mark.parametrize("alpha,t,x,y,value", SCHRODINGER_CASES)
def test_schrodinger_closed_frozen(alpha, t, x, y, value):
    assert abs(schrodinger_kernel_closed(alpha, t, x, y).total - value) <= 1e-10 * abs(value)


@pytest.mark.parametrize("alpha,t,x,y,value", SCHRODINGER_CASES)
def test_schrodinger_oracle_frozen(alpha, t, x, y, value):
    o = kernel_spectral_oracle(alpha, t, x, y, kind="schrodinger")
    assert abs(o.value - value) <= 1e-5 * abs(value)
    assert o.eps == pytest.approx(1e-3 * t)


@pytest.mark.parametrize("alpha,t,x,y,value", SCHRODINGER_CASES)
def test_regularization_sequence_converges(alpha, t, x, y, value):
    errs = [abs(kernel_spectral_oracle(alpha, t, x, y, kind="schrodinger", eps_rel=e).value - value)
            for e in (1e-2, 1e-3, 1e-4)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-7 * abs(value)


@given(st.sampled_from([0.2, 0.5, 0.85]), st.floats(0.3, 3.0), points, points)
def test_time_reversal(alpha, t, x, y):
    # e^{itL} is the adjoint of e^{-itL}
    a = schrodinger_kernel_closed(alpha, -t, x, y).total
    b = schrodinger_kernel_closed(alpha, t, y, x).total
    assert abs(a - np.conj(b)) <= 1e-12 * max(abs(a), 1e-300)


def test_dispersive_constant_uniform():
    consts = [max(abs(schrodinger_kernel_closed(0.3, t, x, y).total) * t
                  for x in ((0.5, 0.0), (1.5, 2.0), (1.0, 1.0))
                  for y in ((0.8, 1.0), (2.0, 5.0), (1.0, 1.0)))
              for t in (0.5, 1.0, 2.0, 4.0)]
    assert max(consts) / min(consts) < 2.0


def test_oscillation_budget_warning():
    with pytest.warns(AccuracyWarning):
        schrodinger_kernel_closed(0.5, 0.01, (2.0, 0.0), (2.0, 1.0))


def test_schrodinger_needs_nonzero_time():
    with pytest.raises(DomainError):
        schrodinger_kernel_closed(0.5, 0.0, (1.0, 0.0), (1.0, 0.0))


# ---------------------------------------------------------------- oracle


def test_oracle_tail_at_forty_modes():
    o = kernel_spectral_oracle(0.5, 1.0, (1.0, 0.0), (1.0, 0.0), k_max=40)
    assert o.tail < 1e-12 and o.k_max == 40


def test_oracle_truncation_error():
    with pytest.raises(TruncationError):
        kernel_spectral_oracle(0.5, 0.1, (3.0, 0.0), (3.0, 0.0), k_max=5)


def test_oracle_unknown_kind():
    with pytest.raises(DomainError):
        kernel_spectral_oracle(0.5, 1.0, (1.0, 0.0), (1.0, 0.0), kind="wave")


def test_oracle_phase_jump_across_cut():
    # just either side of |dtheta| = pi the phase e^{i alpha dtheta} jumps from e^{i pi alpha} to e^{-i pi alpha}
    alpha, t = 0.3, 0.05
    x = (1.0, 0.0)
    below = kernel_spectral_oracle(alpha, t, (1.0, math.pi - 0.3), x).value
    above = kernel_spectral_oracle(alpha, t, (1.0, math.pi + 0.3), x).value
    assert below == pytest.approx(np.conj(above), rel=1e-10)
    for th in (math.pi / 3, math.pi - 0.3, math.pi, math.pi + 0.3):
        o = kernel_spectral_oracle(alpha, 0.5, (1.0, th), x).value
        c = heat_kernel_closed(alpha, 0.5, (1.0, th), x).total
        assert abs(c - o) <= 1e-9 * abs(o)


def test_compare_and_csv():
    rows = compare_with_oracle(0.4, "heat", [1.0], [(1.0, 0.0)], [(0.5, 1.0), (1.5, 3.0)])
    assert [r["r2"] for r in rows] == [0.5, 1.5]
    assert max(r["rel_err"] for r in rows) < 1e-9
    buf = io.StringIO()
    write_kernel_csv(rows, buf, {"normalization": 1.0, "grid": "test"})
    lines = buf.getvalue().splitlines()
    assert lines[0].startswith("# {") and lines[1].startswith("t,r1,th1")
    assert len(lines) == 4
