import io
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dirac_ab import RadialGrid
from dirac_ab.errors import DomainError, ResolutionError
from dirac_ab.grids import ModeSpinor
from dirac_ab.modes import ModeSet, SpinorField, decompose, project, reconstruct
from dirac_ab.specfun import bessel_k

SQRT_2PI = math.sqrt(2 * math.pi)
N_THETA = 64


@pytest.fixture(scope="module")
def coarse():
    return RadialGrid.graded(r_max=12.0)


def band_limited_field(grid, seed, k_band=6, n_theta=N_THETA):
    """Random trigonometric polynomial in theta with Gaussian radial profiles."""
    rng = np.random.default_rng(seed)
    r = grid.nodes[:, None]
    th = 2 * np.pi * np.arange(n_theta)[None, :] / n_theta
    u1 = np.zeros((grid.count, n_theta), dtype=complex)
    u2 = np.zeros_like(u1)
    for k in range(-k_band, k_band + 1):
        a, b = rng.normal(size=2) + 1j * rng.normal(size=2)
        s1, s2 = rng.uniform(0.5, 2.0, size=2)
        u1 += a * r ** abs(k) * np.exp(-s1 * r * r) * np.exp(1j * k * th)
        u2 += b * r ** abs(k + 1) * np.exp(-s2 * r * r) * np.exp(1j * (k + 1) * th)
    return SpinorField(grid, n_theta, u1, u2)


# ---------------------------------------------------------------- decompose


def test_single_mode_is_isolated(coarse):
    g = np.exp(-coarse.nodes ** 2)
    f = SpinorField.from_function(coarse, N_THETA, lambda r, th: (np.exp(1j * th) * np.exp(-r * r), 0 * th))
    modes = decompose(f, 8)
    np.testing.assert_allclose(modes[1].phi.values, SQRT_2PI * g, atol=1e-14)
    assert np.all(modes[1].psi.values == 0)
    for k in modes.ks():
        if k != 1:
            assert modes[k].norm() < 1e-14


def test_singular_element_lives_in_k0(coarse):
    alpha, c = 0.3, 0.4 - 0.2j
    f = SpinorField.from_function(
        coarse, N_THETA,
        lambda r, th: (c * bessel_k(alpha, r) + 0 * th, 1j * c * np.exp(1j * th) * bessel_k(1 - alpha, r)))
    modes = decompose(f, 8, alpha)
    r = coarse.nodes
    np.testing.assert_allclose(modes[0].phi.values, SQRT_2PI * c * bessel_k(alpha, r), rtol=1e-13)
    np.testing.assert_allclose(modes[0].psi.values, SQRT_2PI * 1j * c * bessel_k(1 - alpha, r),
                               rtol=1e-13)
    others = math.sqrt(sum(modes[k].norm() ** 2 for k in modes.ks() if k != 0))
    assert others < 1e-13 * modes[0].norm()


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_parseval(coarse, seed):
    f = band_limited_field(coarse, seed)
    modes = decompose(f, 12)
    # direct summation of the mode norms
    total = sum(m.norm() ** 2 for m in modes.modes.values())
    assert math.sqrt(total) == pytest.approx(f.norm(), rel=1e-10)
    assert modes.tail < 1e-10


def test_tail_reports_unresolved_modes(coarse):
    f = band_limited_field(coarse, 3, k_band=6)
    modes = decompose(f, 3)
    assert modes.tail > 1e-3
    assert modes.norm() ** 2 == pytest.approx((1 - modes.tail) * f.norm() ** 2, rel=1e-10)


def test_decompose_rejects_coarse_theta_grid(coarse):
    f = band_limited_field(coarse, 0, k_band=2, n_theta=16)
    with pytest.raises(ResolutionError):
        decompose(f, 5)


def test_decompose_rejects_negative_k_max(coarse):
    with pytest.raises(DomainError):
        decompose(band_limited_field(coarse, 0, k_band=1), -1)


def test_decompose_is_linear(coarse):
    f = band_limited_field(coarse, 4)
    g = band_limited_field(coarse, 5)
    a = 0.3 - 1.2j
    h = SpinorField(coarse, N_THETA, f.u1 + a * g.u1, f.u2 + a * g.u2)
    mf, mg, mh = decompose(f, 10), decompose(g, 10), decompose(h, 10)
    for k in mh.ks():
        assert (mh[k] - (mf[k] + mg[k].scaled(a))).norm() < 1e-12 * mh.norm()


@pytest.mark.parametrize("shift", [1, 5, 17])
def test_rotation_shifts_phases(coarse, shift):
    f = band_limited_field(coarse, 6)
    theta0 = 2 * np.pi * shift / N_THETA
    # (f o R)(theta) = f(theta + theta0): roll the theta samples
    rot = SpinorField(coarse, N_THETA, np.roll(f.u1, -shift, axis=1), np.roll(f.u2, -shift, axis=1))
    m, mr = decompose(f, 10), decompose(rot, 10)
    for k in m.ks():
        np.testing.assert_allclose(mr[k].phi.values, np.exp(1j * k * theta0) * m[k].phi.values,
                                   atol=1e-12)
        np.testing.assert_allclose(mr[k].psi.values,
                                   np.exp(1j * (k + 1) * theta0) * m[k].psi.values, atol=1e-12)


# ---------------------------------------------------------------- reconstruct


def test_single_negative_mode_angular_dependence(coarse):
    r = coarse.nodes
    m = ModeSpinor.from_arrays(-2, 0.5, coarse, np.exp(-r * r), r * np.exp(-r * r))
    f = reconstruct(ModeSet(0.5, coarse, {-2: m}), 16)
    th = f.theta
    np.testing.assert_allclose(f.u1, np.outer(np.exp(-r * r), np.exp(-2j * th)) / SQRT_2PI,
                               atol=1e-15)
    np.testing.assert_allclose(f.u2, np.outer(r * np.exp(-r * r), np.exp(-1j * th)) / SQRT_2PI,
                               atol=1e-15)


def test_empty_set_is_zero_field(coarse):
    f = reconstruct(ModeSet(0.5, coarse, {}), 8)
    assert np.all(f.u1 == 0) and np.all(f.u2 == 0)


def test_reconstruct_rejects_coarse_grid(coarse):
    m = ModeSpinor.zeros(5, 0.5, coarse)
    with pytest.raises(ResolutionError):
        reconstruct(ModeSet(0.5, coarse, {5: m}), 8)


def test_mode_set_rejects_mixed_grids(coarse):
    other = RadialGrid.graded(r_max=10.0)
    with pytest.raises(DomainError):
        ModeSet(0.5, coarse, {0: ModeSpinor.zeros(0, 0.5, other)})


@given(st.integers(0, 2 ** 31 - 1))
def test_round_trip_property(seed):
    grid = RadialGrid.graded(r_max=12.0)
    f = band_limited_field(grid, seed, k_band=5)
    back = reconstruct(decompose(f, 12), N_THETA)
    scale = max(np.max(np.abs(f.u1)), np.max(np.abs(f.u2)))
    assert np.max(np.abs(back.u1 - f.u1)) < 1e-10 * scale
    assert np.max(np.abs(back.u2 - f.u2)) < 1e-10 * scale


# ---------------------------------------------------------------- projections


@pytest.fixture(scope="module")
def modeset(coarse):
    return decompose(band_limited_field(coarse, 7), 12)


def test_p0_then_pperp_is_zero(modeset):
    assert project(project(modeset, "P0"), "Pperp").ks() == []


@pytest.mark.parametrize("which", ["P0", "Pperp", "Pgt", "Plt"])
def test_idempotent(modeset, which):
    once = project(modeset, which)
    assert project(once, which).ks() == once.ks()


def test_pgt_plus_plt_is_pperp(modeset):
    gt, lt, perp = (project(modeset, w) for w in ("Pgt", "Plt", "Pperp"))
    assert sorted(gt.ks() + lt.ks()) == perp.ks()
    for k in perp.ks():
        src = gt if k > 0 else lt
        assert src[k] is perp[k]


def test_norm_splits(modeset):
    n0 = project(modeset, "P0").norm()
    nperp = project(modeset, "Pperp").norm()
    assert n0 ** 2 + nperp ** 2 == pytest.approx(modeset.norm() ** 2, rel=1e-12)


def test_projected_fields_are_orthogonal(coarse, modeset):
    a = reconstruct(project(modeset, "Pgt"), N_THETA)
    b = reconstruct(project(modeset, "Plt"), N_THETA)
    dth = 2 * np.pi / N_THETA
    inner = np.sum(coarse.weights[:, None] * (np.conj(a.u1) * b.u1 + np.conj(a.u2) * b.u2)) * dth
    assert abs(inner) < 1e-12 * a.norm() * b.norm()


def test_unknown_projection(modeset):
    with pytest.raises(DomainError):
        project(modeset, "Pk")


# ---------------------------------------------------------------- CSV


def test_csv_round_trip(coarse):
    f = band_limited_field(coarse, 8, k_band=2, n_theta=12)
    buf = io.StringIO()
    f.to_csv(buf, {"t": 0.5})
    header = buf.getvalue().splitlines()[0]
    assert '"normalization"' in header and '"t": 0.5' in header
    buf.seek(0)
    g = SpinorField.from_csv(buf)
    np.testing.assert_array_equal(g.grid.nodes, coarse.nodes)
    np.testing.assert_array_equal(g.u1, f.u1)
    np.testing.assert_array_equal(g.u2, f.u2)


def test_csv_without_header_rejected():
    with pytest.raises(DomainError):
        SpinorField.from_csv(io.StringIO("1,0,0,0,0,0\n"))


def test_field_shape_checked(coarse):
    with pytest.raises(DomainError):
        SpinorField(coarse, 8, np.zeros((coarse.count, 7)), np.zeros((coarse.count, 8)))
