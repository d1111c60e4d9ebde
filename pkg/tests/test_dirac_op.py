import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dirac_ab import RadialGrid
from dirac_ab.config import Convention, FluxConfig, q_threshold, select_extension
from dirac_ab.dirac_op import (apply_mode_operator, boundary_diagnostic, eigen_orders,
                               eigenfunction_derivative, eigenfunction_value, log_derivative,
                               singular_element)
from dirac_ab.errors import ConfigurationError, DomainError, ResolutionError
from dirac_ab.grids import ModeSpinor, RadialProfile
from dirac_ab.specfun import bessel_j, bessel_k

from helpers import gaussian_mode

SQRT2 = math.sqrt(2.0)


@pytest.fixture(scope="module")
def window():
    """Grid covering [0.1, 20] for pointwise eigen-equation checks."""
    return RadialGrid.graded(r_min=0.05, r_max=25.0)


def eigen_spinor(k, cfg, rho, grid):
    r = grid.nodes
    e1, e2 = eigenfunction_value(k, cfg, rho, r)
    d1, d2 = eigenfunction_derivative(k, cfg, rho, r)
    return ModeSpinor.from_arrays(k, cfg.alpha, grid, e1, e2, d1, d2)


# ---------------------------------------------------------------- extension choice


@pytest.mark.parametrize("alpha,conv,q", [
    (0.3, Convention.COS_ONLY, 2 / 0.3),
    (0.5, Convention.COS_ONLY, 4.0),
    (0.75, Convention.SIN_ONLY, 8.0),
])
def test_select_extension(alpha, conv, q):
    cfg = select_extension(alpha)
    assert cfg.convention is conv
    assert cfg.q_alpha == pytest.approx(q, rel=1e-15)


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.2, 1.2])
def test_select_extension_rejects_alpha(alpha):
    with pytest.raises(DomainError):
        select_extension(alpha)


def test_mismatched_convention_rejected():
    with pytest.raises(ConfigurationError):
        FluxConfig(0.3, Convention.SIN_ONLY, q_threshold(0.3))


@given(st.floats(min_value=0.01, max_value=0.49))
def test_threshold_symmetric_under_reflection(alpha):
    assert q_threshold(alpha) == pytest.approx(q_threshold(1 - alpha), rel=1e-12)


# ---------------------------------------------------------------- eigenfunctions


def test_eigenfunction_half_flux_at_pi():
    cfg = select_extension(0.5)
    e1, e2 = eigenfunction_value(1, cfg, 1.0, math.pi)
    assert abs(e1) < 1e-16
    assert e2 == pytest.approx(-1j * bessel_j(1.5, math.pi) / SQRT2, rel=1e-14)


@pytest.mark.parametrize("k,expected", [
    (2, (1.75, 2.75, -1j)),
    (-3, (3.25, 2.25, 1j)),
])
def test_eigen_orders_nonzero_modes(k, expected):
    assert eigen_orders(k, select_extension(0.25)) == pytest.approx(expected)


def test_small_r_exponents_cos_only():
    cfg = select_extension(0.3)
    r = np.geomspace(1e-9, 1e-7, 5)
    e1, e2 = eigenfunction_value(0, cfg, 1.0, r)
    assert np.polyfit(np.log(r), np.log(np.abs(e1)), 1)[0] == pytest.approx(-0.3, abs=1e-6)
    assert np.polyfit(np.log(r), np.log(np.abs(e2)), 1)[0] == pytest.approx(0.7, abs=1e-6)


def test_small_r_exponents_sin_only():
    cfg = select_extension(0.75)
    r = np.geomspace(1e-9, 1e-7, 5)
    e1, e2 = eigenfunction_value(0, cfg, 1.0, r)
    assert np.polyfit(np.log(r), np.log(np.abs(e1)), 1)[0] == pytest.approx(0.75, abs=1e-6)
    assert np.polyfit(np.log(r), np.log(np.abs(e2)), 1)[0] == pytest.approx(-0.25, abs=1e-6)


@given(st.integers(-6, 6), st.sampled_from([0.25, 0.5, 0.75]), st.floats(0.1, 10.0),
       st.floats(0.01, 30.0))
def test_negative_energy_flips_second_component(k, alpha, rho, r):
    cfg = select_extension(alpha)
    p1, p2 = eigenfunction_value(k, cfg, rho, r)
    m1, m2 = eigenfunction_value(k, cfg, -rho, r)
    assert m1 == p1 and m2 == -p2


def test_eigenfunction_rejects_zero_energy():
    with pytest.raises(DomainError):
        eigenfunction_value(1, select_extension(0.5), 0.0, 1.0)


@pytest.mark.parametrize("k", range(-8, 9))
@pytest.mark.parametrize("rho", [0.7, -2.5])
def test_eigen_equation_residual(window, cfg, k, rho):
    f = eigen_spinor(k, cfg, rho, window)
    out = apply_mode_operator(k, cfg, f)
    r = window.nodes
    inside = (r >= 0.1) & (r <= 20)
    res1 = np.abs(out.phi.values - rho * f.phi.values)[inside]
    res2 = np.abs(out.psi.values - rho * f.psi.values)[inside]
    assert max(res1.max(), res2.max()) < 1e-8


@pytest.mark.parametrize("k", [-3, 0, 2])
def test_second_order_bessel_equation(window, cfg, k):
    # d_k^2 Psi = rho^2 Psi; the second application uses finite differences
    rho = 1.3
    f = eigen_spinor(k, cfg, rho, window)
    once = apply_mode_operator(k, cfg, f)
    twice = apply_mode_operator(k, cfg, once)
    r = window.nodes
    inside = (r >= 0.1) & (r <= 20)
    res = np.abs(twice.phi.values - rho ** 2 * f.phi.values)[inside]
    assert res.max() < 1e-6


# ---------------------------------------------------------------- mode operator


@pytest.mark.parametrize("k", [-2, 0, 1, 3])
def test_annihilated_power_law(cfg, k):
    grid = RadialGrid.graded(r_min=0.5, r_max=2.0, knee=1.0, width=0.1)
    r = grid.nodes
    s = k + 1 - cfg.alpha
    f = ModeSpinor.from_arrays(k, cfg.alpha, grid, np.zeros_like(r), r ** -s,
                               np.zeros_like(r), -s * r ** (-s - 1))
    out = apply_mode_operator(k, cfg, f)
    assert np.max(np.abs(out.phi.values)) < 1e-12 * np.max(np.abs(r ** -s / r))


def test_annihilated_power_law_by_finite_differences():
    cfg = select_extension(0.3)
    grid = RadialGrid.graded(r_min=0.5, r_max=2.0, knee=1.0, width=0.1)
    r = grid.nodes
    s = 2 - cfg.alpha
    f = ModeSpinor.from_arrays(1, cfg.alpha, grid, np.zeros_like(r), r ** -s)
    out = apply_mode_operator(1, cfg, f)
    assert np.max(np.abs(out.phi.values)) < 1e-8


def test_singular_element_cos_only(grid):
    cfg = select_extension(0.3)
    r = grid.nodes
    a = cfg.alpha
    v1, v2 = singular_element(cfg, r)
    assert np.all(v2 == 0)
    # K_a' = -K_{a-1} - (a / r) K_a and K_{a-1} = K_{1-a}
    dv1 = -bessel_k(1 - a, r) - a / r * bessel_k(a, r)
    f = ModeSpinor.from_arrays(0, a, grid, v1, v2, dv1, np.zeros_like(r))
    out = apply_mode_operator(0, cfg, f)
    assert np.all(out.phi.values == 0)
    # dv1 cancels to K_{1-a} near r = 0, costing digits in the reference derivative
    np.testing.assert_allclose(out.psi.values, -1j * bessel_k(1 - a, r), rtol=1e-8)


def test_singular_element_sin_only():
    cfg = select_extension(0.75)
    r = np.array([0.5, 1.0, 2.0])
    v1, v2 = singular_element(cfg, r)
    assert np.all(v1 == 0)
    np.testing.assert_allclose(v2, 1j * bessel_k(0.25, r), rtol=1e-15)


def test_mode_index_must_match(grid):
    cfg = select_extension(0.5)
    with pytest.raises(DomainError):
        apply_mode_operator(2, cfg, gaussian_mode(1, cfg, grid))


def test_finite_differences_need_resolution():
    coarse = RadialGrid(np.geomspace(0.1, 10, 12), np.ones(12), np.geomspace(0.1, 10, 13))
    with pytest.raises(ResolutionError):
        log_derivative(coarse, np.ones(12))


def test_finite_differences_match_exact(small_grid):
    r = small_grid.nodes
    vals = r ** 0.6 * np.exp(-r * r / 2)
    exact = (0.6 / r - r) * vals
    inside = (r > 1e-6) & (r < 8)
    d = log_derivative(small_grid, vals)
    assert np.max(np.abs(d - exact)[inside]) < 1e-6 * np.max(np.abs(exact[inside]))


@pytest.mark.parametrize("k", [-2, 0, 1, 4])
def test_operator_symmetric(grid, cfg, k):
    f = gaussian_mode(k, cfg, grid, c=0.7 - 0.3j, s=1.0)
    g = gaussian_mode(k, cfg, grid, c=-0.2 + 1.1j, s=1.6)
    lhs = apply_mode_operator(k, cfg, f).inner(g)
    rhs = f.inner(apply_mode_operator(k, cfg, g))
    assert abs(lhs - rhs) < 1e-6 * f.norm() * g.norm()


# ---------------------------------------------------------------- boundary diagnostic


def test_regular_spinor_in_domain(grid):
    r = grid.nodes
    f = ModeSpinor.from_arrays(0, 0.3, grid, np.exp(-r * r), np.exp(-r))
    rep = boundary_diagnostic(f)
    # the form is O(r^{1-alpha}) at the smallest node r = 1e-12
    assert rep.in_domain and abs(rep.limit) < 1e-7


def test_too_singular_spinor_out_of_domain(grid):
    r = grid.nodes
    f = ModeSpinor.from_arrays(0, 0.3, grid, r ** -0.7 * np.exp(-r), np.zeros_like(r))
    rep = boundary_diagnostic(f)
    assert not rep.in_domain and not rep.admissible
    assert rep.exponents[0] == pytest.approx(-0.7, abs=1e-3)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.75])
def test_own_singular_element_in_domain(grid, alpha):
    cfg = select_extension(alpha)
    v1, v2 = singular_element(cfg, grid.nodes)
    rep = boundary_diagnostic(ModeSpinor.from_arrays(0, alpha, grid, v1, v2), cfg)
    assert rep.in_domain and abs(rep.limit) < 1e-9


def test_opposite_extension_violates_boundary_form(grid):
    # (0, i K_{0.7}) satisfies the SinOnly condition but pairs with (K_0.3, 0) to a nonzero limit
    cfg = select_extension(0.3)
    v1, v2 = singular_element(cfg, grid.nodes, math.pi / 2)
    rep = boundary_diagnostic(ModeSpinor.from_arrays(0, 0.3, grid, v1, v2), cfg)
    assert not rep.in_domain
    # r K_0.3 K_0.7 -> Gamma(0.3) Gamma(0.7) / 2 = pi / (2 sin(0.3 pi))
    assert abs(rep.limit) == pytest.approx(math.pi / (2 * math.sin(0.3 * math.pi)), rel=1e-6)


def test_boundary_only_for_k0(grid):
    with pytest.raises(DomainError):
        boundary_diagnostic(ModeSpinor.zeros(1, 0.3, grid))


def test_boundary_needs_small_r():
    grid = RadialGrid.graded(r_min=0.01, r_max=5.0)
    with pytest.raises(ResolutionError):
        boundary_diagnostic(ModeSpinor.zeros(0, 0.3, grid))
