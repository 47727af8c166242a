import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mhdrt import (
    FluidParams,
    Frequency,
    HermiteSpace,
    MagneticConfig,
    Orientation,
    alpha_of_s,
    assemble_forms,
    build_mesh,
    critical_freq_vertical,
    jump_residuals,
    smallest_eigenpair,
)
from mhdrt.eigen import MassMatrixError, alpha_scale, rayleigh_quotient

BASE = FluidParams(2.0, 1.0, 0.1, 0.1, 1.0)
VERT = MagneticConfig(Orientation.VERTICAL, 0.5)
HORIZ = MagneticConfig(Orientation.HORIZONTAL, 0.5)


def test_identity_pencil():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((6, 6))
    m = a @ a.T + 6 * np.eye(6)
    value, x = smallest_eigenpair(m, m)
    assert value == pytest.approx(1.0, rel=1e-14)
    assert x @ m @ x == pytest.approx(1.0, rel=1e-14)


def test_diagonal_pencil():
    value, x = smallest_eigenpair(np.diag([-2.0, 5.0]), np.eye(2))
    assert value == -2.0
    np.testing.assert_allclose(x, [1.0, 0.0], atol=1e-15)


def test_random_pencil_bounded_by_sampled_quotients():
    rng = np.random.default_rng(11)
    a = rng.standard_normal((30, 30))
    k = 0.5 * (a + a.T)
    b = rng.standard_normal((30, 30))
    m = b @ b.T + 30 * np.eye(30)
    value, _ = smallest_eigenpair(k, m)

    def best(count):
        v = rng.standard_normal((count, 30))
        return np.min(np.einsum("ij,jk,ik->i", v, k, v) / np.einsum("ij,jk,ik->i", v, m, v))

    coarse, fine = best(1000), best(100_000)
    assert coarse >= value and fine >= value
    assert fine - value <= coarse - value


def test_indefinite_mass_rejected():
    with pytest.raises(MassMatrixError):
        smallest_eigenpair(np.eye(2), np.diag([1.0, -1.0]))


def test_rayleigh_quotient_of_eigenvector():
    k = np.diag([3.0, 1.0, 2.0])
    assert rayleigh_quotient(k, np.eye(3), np.array([0.0, 2.0, 0.0])) == 1.0


@pytest.mark.parametrize("mag", [VERT, HORIZ], ids=["vertical", "horizontal"])
def test_minimizer_normalized_with_small_residual(mag, hermite16):
    r = alpha_of_s(0.3, BASE, mag, Frequency(2.0, 1.0), hermite16)
    assert r.psi @ r.forms.J @ r.psi == pytest.approx(1.0, abs=1e-12)
    assert r.residual() <= 1e-10
    assert r.lambda2 == -r.alpha


@pytest.mark.parametrize("b", [0.71, 1.0, 2.0])
@pytest.mark.parametrize("orient", list(Orientation))
def test_nonnegative_above_critical_field(b, orient, hermite16):
    mag = MagneticConfig(orient, b)
    for k in (0.3, 3.0, 20.0):
        xi = Frequency(k)
        for s in (0.0, 0.5):
            r = alpha_of_s(s, BASE, mag, xi, hermite16)
            assert r.alpha >= -1e-10 * alpha_scale(BASE, mag, xi)


def test_inviscid_field_free_limit_from_above():
    p = FluidParams(2.0, 1.0, 0.0, 0.0, 1.0)
    target = -math.tanh(1.0) / 3.0
    values = [alpha_of_s(0.0, p, MagneticConfig(Orientation.VERTICAL, 0.0), Frequency(1.0),
                         HermiteSpace(build_mesh(n, 0.5))).alpha for n in (4, 8, 16, 32, 64)]
    gaps = np.array(values) - target
    assert np.all(gaps > 0)
    assert np.all(np.diff(gaps) < 0)
    assert gaps[-1] < 5e-4


def test_negative_for_small_modification_beyond_critical(hermite16):
    xc = critical_freq_vertical(BASE, VERT, hermite16)
    xi = Frequency(1.5 * xc)
    for s in (0.0, 1e-3, 1e-2):
        assert alpha_of_s(s, BASE, VERT, xi, hermite16).alpha < 0


def test_jump_residuals_converge():
    xi = Frequency(6.0)
    res = []
    for n in (8, 16, 32, 64):
        r = alpha_of_s(0.3, BASE, VERT, xi, HermiteSpace(build_mesh(n, 0.5)))
        res.append(jump_residuals(r, BASE, VERT))
    res = np.array(res)
    orders = np.log2(res[:-1] / res[1:])
    assert np.all(orders >= 1.0)


def test_jump_residuals_vanish_for_zero_field(hermite16):
    r = alpha_of_s(0.3, BASE, VERT, Frequency(6.0), hermite16)
    zero = type(r)(r.alpha, np.zeros_like(r.psi), r.s, r.xi, r.forms, r.space)
    assert jump_residuals(zero, BASE, VERT) == (0.0, 0.0)


def test_jump_residuals_detect_perturbation():
    space = HermiteSpace(build_mesh(64, 0.5))
    r = alpha_of_s(0.3, BASE, VERT, Frequency(6.0), space)
    # a C1 bump sitting on the interface, clamped well inside the slab
    bump = space.interpolate(lambda t: np.where(np.abs(t) < 0.5, (1 - 4 * t * t) ** 2, 0.0),
                             lambda t: np.where(np.abs(t) < 0.5, -16 * t * (1 - 4 * t * t), 0.0))
    shifted = bump * (np.arange(bump.size) % 2 == 1)  # slopes only: breaks the balance
    bad = type(r)(r.alpha, r.psi + 0.3 * shifted / np.max(np.abs(shifted)), r.s, r.xi,
                  r.forms, r.space)
    good = jump_residuals(r, BASE, VERT)
    worse = jump_residuals(bad, BASE, VERT)
    assert max(worse) > 0.1
    assert max(worse) > 10 * max(good)


@given(s1=st.floats(0.0, 2.0), s2=st.floats(0.0, 2.0))
@settings(max_examples=25, deadline=None)
def test_alpha_increasing_in_s(s1, s2):
    if abs(s1 - s2) < 1e-3:
        return
    space = HermiteSpace(build_mesh(8, 0.5))
    forms = assemble_forms(space, BASE, VERT, Frequency(5.0))
    lo, hi = sorted((s1, s2))
    a_lo = alpha_of_s(lo, BASE, VERT, Frequency(5.0), space, forms).alpha
    a_hi = alpha_of_s(hi, BASE, VERT, Frequency(5.0), space, forms).alpha
    assert a_hi > a_lo


@pytest.mark.parametrize("mag", [VERT, HORIZ], ids=["vertical", "horizontal"])
def test_alpha_lower_bound(mag, hermite16):
    # psi(0)^2 (rho+ + rho-) <= 2 J / |xi| and the field term is nonnegative,
    # so alpha >= -g[rho] |xi| / (rho+ + rho-) + s * inf E1 / J
    c2 = BASE.drive() / (BASE.rho_plus + BASE.rho_minus)
    for k in (0.5, 2.0, 8.0):
        xi = Frequency(k)
        forms = assemble_forms(hermite16, BASE, mag, xi)
        c3, _ = smallest_eigenpair(forms.E1, forms.J)
        for s in (0.0, 0.2, 1.0):
            alpha = alpha_of_s(s, BASE, mag, xi, hermite16, forms).alpha
            assert alpha >= -c2 * k + s * c3 - 1e-12


def test_alpha_upper_bound_from_witness(hermite16):
    xc = critical_freq_vertical(BASE, VERT, hermite16)
    b = 1.5 * xc
    witness = alpha_of_s(0.0, BASE, VERT, Frequency(b), hermite16).psi
    for k in (b, 2 * b, 4 * b):
        forms = assemble_forms(hermite16, BASE, VERT, Frequency(k))
        jw = witness @ forms.J @ witness
        c0 = -k * k * (witness @ forms.E0 @ witness) / jw
        c1 = (witness @ forms.E1 @ witness) / jw
        assert c0 > 0
        for s in (0.0, 0.1, 1.0):
            assert alpha_of_s(s, BASE, VERT, Frequency(k), hermite16, forms).alpha <= \
                -c0 + s * c1 + 1e-12


@pytest.mark.parametrize("mag", [VERT, HORIZ], ids=["vertical", "horizontal"])
def test_even_in_frequency(mag, hermite16):
    a = alpha_of_s(0.2, BASE, mag, Frequency(1.3, -2.1), hermite16)
    b = alpha_of_s(0.2, BASE, mag, -Frequency(1.3, -2.1), hermite16)
    assert a.alpha == b.alpha
    np.testing.assert_array_equal(a.psi, b.psi)


def test_interface_value_nonzero_when_unstable(hermite16):
    for k in (4.0, 8.0, 16.0):
        r = alpha_of_s(0.005, BASE, VERT, Frequency(k), hermite16)
        assert r.alpha < 0
        assert r.psi0() > 1e-8
