"""Critical magnetic number and critical frequencies.

Each extremal problem is homogeneous of degree zero, so it is solved as a
symmetric generalized eigenproblem on the discrete space:

* ``|B|_c^2 = sup g[rho] psi(0)^2 / int psi'^2`` is a rank-one quotient, so
  its value is ``g[rho] e^T S^{-1} e`` (one linear solve).
* ``(xi_vc)^2 = inf |B|^2 int psi''^2 / D(psi)`` over directions with
  ``D(psi) = g[rho] psi(0)^2 - |B|^2 int psi'^2 > 0``. ``D`` has at most
  one positive eigenvalue relative to the positive definite numerator, so
  the infimum is the reciprocal of the largest eigenvalue of ``D`` against
  the numerator.
* ``(xi_hc)^2 = sup D(psi) / (|B|^2 int psi^2)`` is the largest eigenvalue
  of ``D`` against the mass form.

The transcendental oracles at the bottom solve the Euler-Lagrange equations
of the same problems in closed form per side and are independent of the
finite element path.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.optimize import brentq

from .core import (
    FluidParams,
    MagneticConfig,
    ParameterError,
    SupercriticalFieldError,
)
from .forms import HermiteSpace, LinearSpace


@dataclass(frozen=True)
class CriticalValues:
    b_critical: float
    xi_vc: float | None = None
    xi_hc: float | None = None
    extremizers: dict | None = None


def _bandwidth(a: np.ndarray) -> int:
    rows, cols = np.nonzero(a)
    return int(np.max(np.abs(rows - cols))) if rows.size else 0


def spd_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``a x = b`` for symmetric positive definite banded ``a``."""
    u = _bandwidth(a)
    n = a.shape[0]
    ab = np.zeros((u + 1, n))
    for k in range(u + 1):
        ab[u - k, k:] = np.diagonal(a, k)
    return scipy.linalg.solveh_banded(ab, b)


def _interface_compliance(a: np.ndarray, e: np.ndarray) -> tuple[float, np.ndarray]:
    w = spd_solve(a, e)
    return float(e @ w), w


def critical_magnetic_number(params: FluidParams,
                             space: LinearSpace | HermiteSpace,
                             return_extremizer: bool = False):
    """sqrt of the sup of g[rho] psi(0)^2 / int psi'^2 over ``space``.

    The maximizer is the minimizer of int psi'^2 subject to psi(0) = 1,
    i.e. ``S^{-1} e`` rescaled.
    """
    params.require_unstable_stratification()
    c, w = _interface_compliance(space.stiffness(), space.interface_vector())
    bc = math.sqrt(params.drive() * c)
    if return_extremizer:
        return bc, w / c
    return bc


def _check_subcritical(params: FluidParams, mag: MagneticConfig, bc: float) -> None:
    if not mag.magnitude > 0:
        raise ParameterError("critical frequencies need a nonzero field")
    if mag.magnitude >= bc:
        raise SupercriticalFieldError(
            f"|B|={mag.magnitude} is not below the critical number {bc:.12g}")


def _secular_root(h, lo: float, hi: float) -> float:
    """Root of a decreasing function with h(lo) > 0; ``hi`` is expanded."""
    for _ in range(200):
        if h(hi) < 0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise SupercriticalFieldError("secular equation has no sign change")
    return brentq(h, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def critical_freq_vertical(params: FluidParams, mag: MagneticConfig,
                           space: HermiteSpace, return_extremizer: bool = False):
    """Critical wavenumber below which a vertical field stabilizes every mode.

    With ``N = |B|^2 int psi''^2`` and ``D = g[rho] e e^T - |B|^2 S`` the
    quotient ``N / D`` reaches Lambda on the positive cone of ``D`` exactly
    when ``N + Lambda |B|^2 S - Lambda g[rho] e e^T`` is singular, i.e. when
    ``g[rho] e^T (N / Lambda + |B|^2 S)^{-1} e = 1``. The left side is
    increasing in Lambda, so the smallest admissible Lambda is that root.
    """
    params.require_unstable_stratification()
    _check_subcritical(params, mag, critical_magnetic_number(params, space))
    n_form = mag.b2 * space.base("M2")
    s_form = mag.b2 * space.stiffness()
    e = space.interface_vector()
    drive = params.drive()

    def h(u):  # u = 1 / Lambda
        return drive * _interface_compliance(u * n_form + s_form, e)[0] - 1.0

    u = _secular_root(h, 0.0, 1.0)
    xi = 1.0 / math.sqrt(u)
    if return_extremizer:
        return xi, _interface_compliance(u * n_form + s_form, e)[1]
    return xi


def critical_freq_horizontal(params: FluidParams, mag: MagneticConfig,
                             space: LinearSpace | HermiteSpace,
                             return_extremizer: bool = False):
    """Critical wavenumber above which a horizontal field stabilizes (2D).

    The sup of ``D / (|B|^2 M)`` is the root of the decreasing function
    ``g[rho] e^T (|B|^2 S + Lambda |B|^2 M)^{-1} e - 1``.
    """
    params.require_unstable_stratification()
    _check_subcritical(params, mag, critical_magnetic_number(params, space))
    s_form = mag.b2 * space.stiffness()
    m_form = mag.b2 * space.mass()
    e = space.interface_vector()
    drive = params.drive()

    def h(lam):
        return drive * _interface_compliance(s_form + lam * m_form, e)[0] - 1.0

    lam = _secular_root(h, 0.0, 1.0)
    xi = math.sqrt(lam)
    if return_extremizer:
        return xi, _interface_compliance(s_form + lam * m_form, e)[1]
    return xi


def critical_values(params: FluidParams, mag: MagneticConfig,
                    hermite: HermiteSpace, linear: LinearSpace | None = None) -> CriticalValues:
    """All three critical quantities; frequencies only when subcritical."""
    bc = critical_magnetic_number(params, linear if linear is not None else hermite)
    if not 0 < mag.magnitude < bc:
        return CriticalValues(bc)
    xi_vc = critical_freq_vertical(params, mag, hermite)
    xi_hc = critical_freq_horizontal(params, mag, linear if linear is not None else hermite)
    return CriticalValues(bc, xi_vc, xi_hc)


def _xi_coth(x: float) -> float:
    return x / math.tanh(x)


def xi_hc_oracle(params: FluidParams, mag: MagneticConfig) -> float:
    """Root of 2|B|^2 xi coth(xi) = g[rho] by bisection.

    The maximizer of the horizontal quotient is sinh(xi (1 - |x|)) on each
    side; the interface balance gives the equation above. Since
    ``xi coth xi >= 1`` there is no root once ``|B|^2 >= g[rho]/2``.
    """
    params.require_unstable_stratification()
    target = params.drive() / (2.0 * mag.b2) if mag.b2 > 0 else math.inf
    if not target > 1.0:
        raise SupercriticalFieldError("2|B|^2 xi coth(xi) > g[rho] for every xi > 0")
    if math.isinf(target):
        raise ParameterError("|B| must be positive")
    lo, hi = 0.0, target + 1.0
    # xi coth xi is increasing and exceeds xi, so hi is above the root
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if (_xi_coth(mid) if mid > 0 else 1.0) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _vc_system(k: float, b2: float, drive: float) -> np.ndarray:
    """Conditions on f = a + b x + c e^{-kx} + d e^{-k(1-x)} on (0, 1).

    The minimizer of the vertical quotient is even, so f'(0) = 0; the walls
    are clamped, and the point load balances b = -g[rho] f(0) / (2|B|^2).
    Decaying exponentials keep the system well conditioned at large k.
    """
    q = math.exp(-k)
    return np.array([
        [1.0, 1.0, q, 1.0],
        [0.0, 1.0, -k * q, k],
        [0.0, 1.0, -k, k * q],
        [drive, 2.0 * b2, drive, drive * q],
    ])


def xi_vc_oracle(params: FluidParams, mag: MagneticConfig,
                 k_max: float = 200.0, n_scan: int = 4000) -> float:
    """Smallest k > 0 at which the clamped even solution of psi'''' = k^2 psi''
    satisfies the interface balance; equals the vertical critical wavenumber."""
    params.require_unstable_stratification()
    bc2 = params.drive() / 2.0
    if not 0 < mag.b2 < bc2:
        raise SupercriticalFieldError("vertical oracle needs 0 < |B| < |B|_c")

    def det(k):
        return float(np.linalg.det(_vc_system(k, mag.b2, params.drive())))

    ks = np.geomspace(1e-3, k_max, n_scan)
    vals = [det(k) for k in ks]
    for i in range(len(ks) - 1):
        if vals[i] == 0.0:
            return float(ks[i])
        if vals[i] * vals[i + 1] < 0:
            return brentq(det, ks[i], ks[i + 1], xtol=1e-15, rtol=1e-15, maxiter=500)
    raise SupercriticalFieldError("no critical wavenumber found below k_max")
