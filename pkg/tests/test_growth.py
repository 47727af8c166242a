import math

import numpy as np
import pytest

from mhdrt import (
    FluidParams,
    Frequency,
    HermiteSpace,
    LinearSpace,
    MagneticConfig,
    Orientation,
    StableConfigurationError,
    Status,
    alpha_of_s,
    build_mesh,
    critical_freq_horizontal,
    critical_freq_vertical,
    dispersion_sweep,
    euler_lambda,
    find_s_star,
    growth_bound,
    reconstruct_mode,
    solve_growth_rate,
)
from mhdrt.growth import (
    NoModeError,
    UnboundedWindowError,
    euler_lambda_discrete,
    momentum_residuals,
    tangential_stress_jump,
)

BASE = FluidParams(2.0, 1.0, 0.1, 0.1, 1.0)
VERT = MagneticConfig(Orientation.VERTICAL, 0.5)
HORIZ = MagneticConfig(Orientation.HORIZONTAL, 0.5)
EULER_UNIT = math.sqrt(math.tanh(1.0) / 3.0)


@pytest.fixture(scope="module")
def vertical_critical(hermite32):
    return critical_freq_vertical(BASE, VERT, hermite32)


def test_unstable_beyond_critical_and_below_bound(hermite32, vertical_critical):
    r = solve_growth_rate(BASE, VERT, Frequency(2 * vertical_critical), hermite32)
    assert r.status is Status.UNSTABLE
    assert 0 < r.lam <= growth_bound(BASE, VERT)
    assert r.phi_residual <= 1e-10
    assert r.pencil_residual <= 1e-8
    assert 0 < r.s_star and r.lam < r.s_star


def test_supercritical_field_stable(hermite32, vertical_critical):
    r = solve_growth_rate(BASE, MagneticConfig(Orientation.VERTICAL, 1.0),
                          Frequency(2 * vertical_critical), hermite32)
    assert r.status is Status.STABLE
    assert r.lam is None and r.psi0() is None


def test_weak_field_rate_rises_toward_euler_as_viscosity_drops(hermite32):
    rates = []
    for mu in (0.1, 0.03, 0.01, 0.003):
        p = FluidParams(2.0, 1.0, mu, mu, 1.0)
        rates.append(solve_growth_rate(p, MagneticConfig(Orientation.VERTICAL, 1e-8),
                                       Frequency(1.0), hermite32).lam)
    assert np.all(np.diff(rates) > 0)
    assert rates[-1] < EULER_UNIT
    assert EULER_UNIT - rates[-1] < 0.05


def test_window_edge_sign_change(hermite32, vertical_critical):
    xi = Frequency(1.5 * vertical_critical)
    s_star = find_s_star(BASE, VERT, xi, hermite32)
    delta = 1e-6 * s_star
    assert alpha_of_s(s_star - delta, BASE, VERT, xi, hermite32).alpha < 0
    assert alpha_of_s(s_star + delta, BASE, VERT, xi, hermite32).alpha > 0


def test_no_window_when_stabilized(hermite32, vertical_critical):
    assert find_s_star(BASE, VERT, Frequency(0.9 * vertical_critical), hermite32) is None
    assert find_s_star(BASE, MagneticConfig(Orientation.VERTICAL, 0.8), Frequency(5.0),
                       hermite32) is None


def test_inviscid_window_unbounded(hermite16):
    p = FluidParams(2.0, 1.0, 0.0, 0.0, 1.0)
    with pytest.raises(UnboundedWindowError):
        find_s_star(p, VERT, Frequency(8.0), hermite16)
    r = dispersion_sweep(p, VERT, [8.0], hermite16).samples[0]
    assert r.status is Status.STABLE and "negative" in r.error


def test_vertical_sweep_invariants(hermite32, vertical_critical):
    grid = vertical_critical * np.array([0.5, 0.9, 1.01, 1.1, 1.5, 2.0, 4.0, 8.0])
    curve = dispersion_sweep(BASE, VERT, list(grid), hermite32)
    unstable = [r.xi.mag > vertical_critical for r in curve.samples]
    assert [r.unstable for r in curve.samples] == unstable
    bound = growth_bound(BASE, VERT)
    assert all(r.lam <= bound for r in curve.unstable_samples())
    first = curve.unstable_samples()[0]
    assert first.lam < 0.1 * curve.lambda_max
    xi, lam = curve.arrays()
    np.testing.assert_array_equal(xi, grid)
    assert np.all(lam[:2] == 0.0)


def test_horizontal_sweep_invariants(hermite32):
    xc = critical_freq_horizontal(BASE, HORIZ, hermite32)
    grid = xc * np.array([0.01, 0.1, 0.3, 0.6, 0.9, 0.99, 1.1, 2.0])
    curve = dispersion_sweep(BASE, HORIZ, list(grid), hermite32)
    assert [r.unstable for r in curve.samples] == [k < xc for k in grid]
    _, lam = curve.arrays()
    peak = curve.lambda_max
    assert lam[0] < 0.1 * peak and lam[5] < 0.1 * peak
    assert np.argmax(lam) not in (0, 5)


def test_horizontal_field_does_not_stabilize_across_itself(hermite32):
    assert solve_growth_rate(BASE, HORIZ, Frequency(0.0, 3.0), hermite32).unstable
    assert not solve_growth_rate(BASE, HORIZ, Frequency(3.0, 0.0), hermite32).unstable


def test_rate_continuous_along_refined_grids(hermite16, vertical_critical):
    def max_slope(n):
        grid = np.linspace(1.5, 3.0, n) * vertical_critical
        _, lam = dispersion_sweep(BASE, VERT, list(grid), hermite16).arrays()
        return np.max(np.abs(np.diff(lam)) / np.diff(grid))

    coarse, fine = max_slope(6), max_slope(11)
    assert fine <= 1.5 * coarse


def test_rate_even_in_frequency(hermite16):
    for mag, xi in ((VERT, Frequency(6.0, -2.0)), (HORIZ, Frequency(1.0, 0.5))):
        a = solve_growth_rate(BASE, mag, xi, hermite16)
        b = solve_growth_rate(BASE, mag, -xi, hermite16)
        assert (a.status, a.lam) == (b.status, b.lam)


def test_empty_grid_rejected(hermite16):
    with pytest.raises(ValueError):
        dispersion_sweep(BASE, VERT, [], hermite16)


def test_growth_bound_values():
    assert growth_bound(BASE, VERT) == pytest.approx(2.0 / (0.5 * 2 ** 0.25), rel=1e-15)
    assert growth_bound(BASE, VERT) == pytest.approx(3.3636, abs=1e-4)
    doubled = growth_bound(BASE, MagneticConfig(Orientation.VERTICAL, 1.0))
    assert doubled == pytest.approx(growth_bound(BASE, VERT) / 2, rel=1e-15)
    assert growth_bound(BASE, MagneticConfig(Orientation.VERTICAL, 0.0)) == math.inf


def test_euler_rate_values():
    assert euler_lambda(BASE, 1.0) == pytest.approx(EULER_UNIT, rel=1e-15)
    assert euler_lambda(BASE, Frequency(0.6, 0.8)) == euler_lambda(BASE, 1.0)
    big = 400.0
    assert euler_lambda(BASE, big) ** 2 == pytest.approx(big / 3.0, rel=1e-12)
    assert euler_lambda(BASE, 1e-6) < 1e-6
    with pytest.raises(StableConfigurationError):
        euler_lambda(FluidParams(1.0, 2.0), 1.0)


def test_euler_rate_matches_fine_linear_quotient():
    space = LinearSpace(build_mesh(512, 0.0))
    assert euler_lambda_discrete(BASE, 1.0, space) == pytest.approx(EULER_UNIT, rel=1e-5)


@pytest.mark.parametrize("mag, xi", [(VERT, Frequency(6.0, 2.0)), (HORIZ, Frequency(1.0, 0.5))],
                         ids=["vertical", "horizontal"])
def test_reconstructed_mode_consistency(mag, xi):
    momentum, tangential = [], []
    for n in (8, 16, 32, 64):
        space = HermiteSpace(build_mesh(n, 0.5))
        r = solve_growth_rate(BASE, mag, xi, space)
        mode = reconstruct_mode(r, BASE, mag)
        assert np.max(np.abs(mode.divergence())) <= 1e-12
        momentum.append(np.max(np.abs(momentum_residuals(mode, BASE, mag, space.mesh))))
        tangential.append(tangential_stress_jump(r, BASE, mag, space))
    assert np.all(np.log2(np.array(momentum[:-1]) / momentum[1:]) > 0.9)
    assert np.all(np.log2(np.array(tangential[:-1]) / tangential[1:]) > 1.5)


def test_reconstruction_needs_unstable_mode(hermite16):
    r = solve_growth_rate(BASE, MagneticConfig(Orientation.VERTICAL, 1.0), Frequency(5.0),
                          hermite16)
    with pytest.raises(NoModeError):
        reconstruct_mode(r, BASE, MagneticConfig(Orientation.VERTICAL, 1.0))
