"""Growth rates of normal modes via the fixed point s = lambda(|xi|, s).

For fixed xi the modified eigenvalue alpha(s) is increasing in s. If it is
negative at s = 0 there is a window (0, s_star) on which the modified growth
rate sqrt(-alpha(s)) exists, and the true viscous growth rate is the unique
s in that window with Phi(s) = s / sqrt(-alpha(s)) = 1. Both s_star and the
fixed point are found by bisection.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    FluidParams,
    Frequency,
    MagneticConfig,
    MHDRTError,
    Orientation,
)
from .eigen import ModifiedEigenResult, alpha_of_s, alpha_scale
from .forms import GAUSS_T, GAUSS_W, FormSet, HermiteSpace, LinearSpace, assemble_forms

# alpha(0) must fall below -STABILITY_TOL * alpha_scale to count as unstable
STABILITY_TOL = 1e-12
MAX_BISECTIONS = 200


class ConvergenceError(MHDRTError):
    pass


class UnboundedWindowError(MHDRTError):
    pass


class NoModeError(MHDRTError):
    pass


class Status(str, enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"


@dataclass(frozen=True, eq=False)
class GrowthResult:
    xi: Frequency
    status: Status
    lam: float | None = None
    s_star: float | None = None
    psi: np.ndarray | None = None
    eig: ModifiedEigenResult | None = None
    phi_residual: float | None = None
    pencil_residual: float | None = None
    iterations: int = 0
    error: str | None = None

    @property
    def unstable(self) -> bool:
        return self.status is Status.UNSTABLE

    def psi0(self) -> float | None:
        return None if self.eig is None else self.eig.psi0()


def _characteristic_rate(params: FluidParams, mag: MagneticConfig, xi: Frequency) -> float:
    return math.sqrt(alpha_scale(params, mag, xi))


def find_s_star(params: FluidParams, mag: MagneticConfig, xi: Frequency,
                space: HermiteSpace, forms: FormSet | None = None,
                cap_factor: float = 1e6) -> float | None:
    """Right end of the instability window {s : alpha(s) < 0}, or None."""
    xi.require_nonzero()
    if forms is None:
        forms = assemble_forms(space, params, mag, xi)
    scale = alpha_scale(params, mag, xi)
    if alpha_of_s(0.0, params, mag, xi, space, forms).alpha >= -STABILITY_TOL * scale:
        return None
    rate = _characteristic_rate(params, mag, xi)
    lo, hi = 0.0, rate
    while alpha_of_s(hi, params, mag, xi, space, forms).alpha < 0:
        lo, hi = hi, 2.0 * hi
        if hi > cap_factor * rate:
            raise UnboundedWindowError(
                f"alpha(s) still negative at s={hi:.3g}; viscosity may vanish")
    for _ in range(MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if alpha_of_s(mid, params, mag, xi, space, forms).alpha < 0:
            lo = mid
        else:
            hi = mid
    return hi


def phi(s: float, params, mag, xi, space, forms) -> float:
    """s / sqrt(-alpha(s)); +inf outside the instability window."""
    a = alpha_of_s(s, params, mag, xi, space, forms).alpha
    return s / math.sqrt(-a) if a < 0 else math.inf


def solve_growth_rate(params: FluidParams, mag: MagneticConfig, xi: Frequency,
                      space: HermiteSpace) -> GrowthResult:
    """Growth rate lambda(|xi|) of the viscous normal mode, or Stable."""
    xi.require_nonzero()
    forms = assemble_forms(space, params, mag, xi)
    s_star = find_s_star(params, mag, xi, space, forms)
    if s_star is None:
        return GrowthResult(xi, Status.STABLE)
    # Phi(s) < 1  <=>  s^2 + alpha(s) < 0 inside the window
    lo, hi = 0.0, s_star
    it = 0
    for it in range(1, MAX_BISECTIONS + 1):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        a = alpha_of_s(mid, params, mag, xi, space, forms).alpha
        if mid * mid + a < 0:
            lo = mid
        else:
            hi = mid
    else:
        raise ConvergenceError("fixed-point bisection did not reach machine resolution")
    lam = lo if abs(lo * lo + alpha_of_s(lo, params, mag, xi, space, forms).alpha) <= \
        abs(hi * hi + alpha_of_s(hi, params, mag, xi, space, forms).alpha) else hi
    eig = alpha_of_s(lam, params, mag, xi, space, forms)
    if not eig.alpha < 0:
        raise ConvergenceError("fixed point landed outside the instability window")
    phi_res = abs(lam / math.sqrt(-eig.alpha) - 1.0)
    P = forms.pencil(lam)
    pencil_res = float(np.max(np.abs(P @ eig.psi)) / np.max(np.sum(np.abs(P), axis=1)))
    return GrowthResult(xi, Status.UNSTABLE, lam, s_star, eig.psi, eig,
                        phi_res, pencil_res, it)


@dataclass(frozen=True, eq=False)
class DispersionCurve:
    samples: list
    orientation: Orientation
    params: FluidParams
    mag: MagneticConfig
    meta: dict = field(default_factory=dict)

    def unstable_samples(self) -> list:
        return [r for r in self.samples if r.unstable]

    @property
    def lambda_max(self) -> float | None:
        """Empirical fastest growth rate over the sampled frequencies."""
        rates = [r.lam for r in self.unstable_samples()]
        return max(rates) if rates else None

    def arrays(self):
        xi = np.array([r.xi.mag for r in self.samples])
        lam = np.array([r.lam if r.unstable else 0.0 for r in self.samples])
        return xi, lam


def dispersion_sweep(params: FluidParams, mag: MagneticConfig, xi_grid,
                     space: HermiteSpace) -> DispersionCurve:
    """Growth rate at every grid frequency; failures are recorded, not raised."""
    if len(xi_grid) == 0:
        raise ValueError("frequency grid is empty")
    samples = []
    for xi in xi_grid:
        if not isinstance(xi, Frequency):
            xi = Frequency(float(xi))
        xi.require_nonzero()
        try:
            samples.append(solve_growth_rate(params, mag, xi, space))
        except MHDRTError as exc:
            samples.append(GrowthResult(xi, Status.STABLE, error=str(exc)))
    return DispersionCurve(samples, mag.orientation, params, mag)


def growth_bound(params: FluidParams, mag: MagneticConfig) -> float:
    """Upper bound 2 sqrt(g[rho]) / (|B| rho_+^{1/4}) on vertical growth rates.

    Returns ``inf`` for a vanishing field.
    """
    if mag.magnitude == 0:
        return math.inf
    return 2.0 * math.sqrt(params.drive()) / (mag.magnitude * params.rho_plus ** 0.25)


def euler_lambda(params: FluidParams, xi: Frequency | float) -> float:
    """Inviscid, field-free growth rate sqrt(g[rho] k tanh(k) / (rho_+ + rho_-))."""
    params.require_unstable_stratification()
    k = xi.mag if isinstance(xi, Frequency) else abs(float(xi))
    if not k > 0:
        raise ValueError("|xi| must be positive")
    return math.sqrt(params.drive() * k * math.tanh(k) / (params.rho_plus + params.rho_minus))


def euler_lambda_discrete(params: FluidParams, xi: Frequency | float,
                          space: LinearSpace | HermiteSpace) -> float:
    """Largest discrete value of g[rho] k^2 psi(0)^2 / int rho (k^2 psi^2 + psi'^2).

    Rank-one numerator, so the maximum is ``g[rho] k^2 e^T A^{-1} e``.
    """
    from .variational import spd_solve

    params.require_unstable_stratification()
    k2 = xi.mag2 if isinstance(xi, Frequency) else float(xi) ** 2
    rp, rm = params.rho_plus, params.rho_minus
    A = (k2 * (rp * space.base("M0", 1) + rm * space.base("M0", -1))
         + rp * space.base("M1", 1) + rm * space.base("M1", -1))
    e = space.interface_vector()
    return math.sqrt(params.drive() * k2 * float(e @ spd_solve(A, e)))


@dataclass(frozen=True, eq=False)
class NormalMode:
    """Mode profiles sampled at Gauss points of every element.

    ``phi``, ``theta`` are the horizontal velocity amplitudes, ``psi`` the
    vertical one and ``pi`` the pressure, following w = (-i phi, -i theta,
    psi) e^{i x'.xi}. ``d`` holds derivatives 0..3 of psi.
    """

    x: np.ndarray
    d: np.ndarray
    phi: np.ndarray
    theta: np.ndarray
    pi: np.ndarray
    lam: float
    xi: Frequency
    orientation: Orientation

    @property
    def psi(self) -> np.ndarray:
        return self.d[0]

    def divergence(self) -> np.ndarray:
        return self.xi.xi1 * self.phi + self.xi.xi2 * self.theta + self.d[1]


def _side_array(mesh, plus, minus):
    return np.where(mesh.element_side() > 0, plus, minus)[:, None]


def reconstruct_mode(result: GrowthResult, params: FluidParams, mag: MagneticConfig,
                     space: HermiteSpace | None = None,
                     t: np.ndarray = GAUSS_T) -> NormalMode:
    """Rebuild (phi, theta, psi, pi) from the vertical amplitude of a mode.

    Horizontal amplitudes follow from incompressibility (the rotational part
    solves a coercive homogeneous problem and vanishes). The pressure is
    obtained on each side by integrating the vertical momentum equation from
    the wall. On the upper side the constant is fixed by the horizontal
    momentum balance at the wall x = 1, where phi = theta = 0; on the lower
    side it is fixed by the normal stress jump at x = 0.
    """
    if not result.unstable:
        raise NoModeError("reconstruction needs an unstable mode")
    if space is None:
        space = result.eig.space
    lam, xi = result.lam, result.xi
    k2 = xi.mag2
    mesh = space.mesh
    vertical = mag.orientation is Orientation.VERTICAL
    b2 = mag.b2
    rho = _side_array(mesh, params.rho_plus, params.rho_minus)
    mu = _side_array(mesh, params.mu_plus, params.mu_minus)
    h = mesh.sizes
    k = mesh.interface_index

    x, d = space.sample(result.psi, t)
    phi = -xi.xi1 * d[1] / k2
    theta = -xi.xi2 * d[1] / k2

    def dpi(dd):
        mag_term = b2 * dd[2] if vertical else -b2 * xi.xi1 ** 2 * dd[0]
        return -lam * rho * dd[0] - mu * (k2 * dd[0] - dd[2]) + mag_term / lam

    def integral(upto):
        # int_0^upto of dpi on every element; the integrand is a polynomial of
        # degree <= 3, so the mapped 4-point rule is exact
        _, dd = space.sample(result.psi, upto * GAUSS_T)
        return (dpi(dd) * GAUSS_W[None, :]).sum(axis=1) * upto * h

    whole = integral(1.0)
    lower_nodes = np.concatenate([[0.0], np.cumsum(whole[:k])])
    upper_nodes = np.concatenate([-np.cumsum(whole[k:][::-1])[::-1], [0.0]])
    left = np.concatenate([lower_nodes[:-1], upper_nodes[:-1]])
    rel = left[:, None] + np.stack([integral(tt) for tt in np.atleast_1d(t)], axis=1)

    top = space.element_derivatives(result.psi, mesh.n_elements - 1, 1.0)
    if vertical:
        c_plus = (params.mu_plus * lam + b2) * top[3] / (lam * k2)
    else:
        c_plus = params.mu_plus * top[3] / k2

    below, above = space.interface_one_sided(result.psi)
    b_eff = b2 if vertical else 0.0
    stress_p = -(2 * params.mu_plus * lam + b_eff) * above[1]
    stress_m = -(2 * params.mu_minus * lam + b_eff) * below[1]
    pi_plus_0 = c_plus + upper_nodes[0]
    pi_minus_0 = pi_plus_0 - (params.drive() * above[0] - (stress_p - stress_m)) / lam
    c_minus = pi_minus_0 - lower_nodes[-1]

    pi = rel + np.where(mesh.element_side()[:, None] > 0, c_plus, c_minus)
    return NormalMode(x, d, phi, theta, pi, lam, xi, mag.orientation)


def momentum_residuals(mode: NormalMode, params: FluidParams, mag: MagneticConfig,
                       mesh) -> np.ndarray:
    """Pointwise residual of the horizontal momentum equations.

    Returns the residual of the xi1-equation when xi1 != 0, otherwise of the
    xi2-equation, normalized by the largest term magnitude.
    """
    lam, xi = mode.lam, mode.xi
    k2 = xi.mag2
    rho = _side_array(mesh, params.rho_plus, params.rho_minus)
    mu = _side_array(mesh, params.mu_plus, params.mu_minus)
    use1 = xi.xi1 != 0
    comp, kc = (mode.phi, xi.xi1) if use1 else (mode.theta, xi.xi2)
    comp2 = -kc * mode.d[3] / k2  # second derivative of phi (or theta)
    if mag.orientation is Orientation.VERTICAL:
        mag_term = -mag.b2 * comp2
    else:
        mag_term = mag.b2 * xi.xi1 ** 2 * comp
    terms = [lam * lam * rho * comp, -lam * kc * mode.pi,
             mu * lam * (k2 * comp - comp2), mag_term]
    total = sum(terms)
    size = max(float(np.max(np.abs(tt))) for tt in terms)
    return total / size


def tangential_stress_jump(result: GrowthResult, params: FluidParams,
                           mag: MagneticConfig, space: HermiteSpace) -> float:
    """Relative jump of mu lam (xi1 psi - phi') + |B|^2 phi' across x = 0."""
    xi, lam = result.xi, result.lam
    kc = xi.xi1 if xi.xi1 != 0 else xi.xi2
    below, above = space.interface_one_sided(result.psi)
    b_eff = mag.b2 if mag.orientation is Orientation.VERTICAL else 0.0

    def stress(d, mu):
        dphi = -kc * d[2] / xi.mag2
        return mu * lam * (kc * d[0] - dphi) + b_eff * dphi

    sp, sm = stress(above, params.mu_plus), stress(below, params.mu_minus)
    return abs(sp - sm) / max(abs(sp), abs(sm), 1e-300)
