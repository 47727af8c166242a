"""Time integration of one Fourier mode of the linearized problem.

The semi-discrete system is ``J a'' + E1 a' + |xi|^2 E0 a = 0`` for the
vertical displacement amplitude ``a(t)`` in the clamped Hermite space. An
eigenpair (lam, psi) of the quadratic pencil gives the exact solution
``a = exp(lam t) psi``, and along any solution

    d/dt [a'.J a' + |xi|^2 a.E0 a] = -2 a'.E1 a'

which is what the energy checks below measure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import FluidParams, Frequency, MagneticConfig, MHDRTError
from .eigen import smallest_eigenpair
from .forms import FormSet, HermiteSpace, assemble_forms


class IntegrationError(MHDRTError):
    pass


@dataclass(frozen=True, eq=False)
class ModeTrajectory:
    times: np.ndarray
    displacement: np.ndarray  # (steps + 1, dofs)
    velocity: np.ndarray
    energy: np.ndarray
    dissipation: np.ndarray
    forms: FormSet

    def __post_init__(self):
        n = len(self.times)
        if not (len(self.displacement) == len(self.velocity) == len(self.energy)
                == len(self.dissipation) == n):
            raise ValueError("trajectory series have inconsistent lengths")
        if n > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("times must increase strictly")

    def norms(self) -> np.ndarray:
        """J-norm of the displacement at every step."""
        Ja = self.displacement @ self.forms.J
        return np.sqrt(np.maximum(np.einsum("ij,ij->i", Ja, self.displacement), 0.0))


def _energies(forms: FormSet, a: np.ndarray, v: np.ndarray) -> tuple[float, float]:
    k2 = forms.xi.mag2
    e = float(v @ forms.J @ v) + k2 * float(a @ forms.E0 @ a)
    return e, float(v @ forms.E1 @ v)


def evolve_mode(params: FluidParams, mag: MagneticConfig, xi: Frequency,
                space: HermiteSpace, init: tuple[np.ndarray, np.ndarray],
                dt: float, t_end: float, forms: FormSet | None = None) -> ModeTrajectory:
    """Average-acceleration Newmark integration (beta = 1/4, gamma = 1/2).

    The scheme is the trapezoidal rule on the first-order system, so it is
    A-stable, second order, and conserves the quadratic energy exactly when
    E1 = 0. The step matrix ``J + dt/2 E1 + dt^2/4 |xi|^2 E0`` is factored
    once.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if not t_end >= dt:
        raise ValueError("t_end must be at least one step")
    xi.require_nonzero()
    if forms is None:
        forms = assemble_forms(space, params, mag, xi)
    J, C = forms.J, forms.E1
    K = xi.mag2 * forms.E0
    a = np.array(init[0], dtype=float)
    v = np.array(init[1], dtype=float)
    if a.shape != (J.shape[0],) or v.shape != a.shape:
        raise ValueError(f"initial data must have shape ({J.shape[0]},)")

    n_steps = max(1, int(math.ceil(t_end / dt - 1e-9)))
    times = dt * np.arange(n_steps + 1)
    disp = np.empty((n_steps + 1, a.size))
    vel = np.empty_like(disp)
    energy = np.empty(n_steps + 1)
    diss = np.empty(n_steps + 1)

    acc = scipy.linalg.cho_solve(scipy.linalg.cho_factor(J), -(C @ v) - K @ a)
    try:
        lu = scipy.linalg.lu_factor(J + 0.5 * dt * C + 0.25 * dt * dt * K,
                                    check_finite=True)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise IntegrationError("implicit step matrix is singular") from exc
    if np.any(np.diag(lu[0]) == 0):
        raise IntegrationError("implicit step matrix is singular")

    disp[0], vel[0] = a, v
    energy[0], diss[0] = _energies(forms, a, v)
    for n in range(1, n_steps + 1):
        a_pred = a + dt * v + 0.25 * dt * dt * acc
        v_pred = v + 0.5 * dt * acc
        acc_new = scipy.linalg.lu_solve(lu, -(C @ v_pred) - K @ a_pred)
        a = a_pred + 0.25 * dt * dt * acc_new
        v = v_pred + 0.5 * dt * acc_new
        acc = acc_new
        disp[n], vel[n] = a, v
        energy[n], diss[n] = _energies(forms, a, v)
    return ModeTrajectory(times, disp, vel, energy, diss, forms)


def energy_balance_residual(traj: ModeTrajectory, floor: float = 1e-300) -> float:
    """max_n |dE/dt + 2 D_mid| / (|E| + |D| dt + floor) over the steps.

    ``D_mid`` is the average of the dissipation at the two ends of a step, so
    the defect is the trapezoidal quadrature error and shrinks like dt^2.
    """
    if len(traj.times) < 2:
        raise ValueError("need at least two samples")
    dt = np.diff(traj.times)
    d_mid = 0.5 * (traj.dissipation[1:] + traj.dissipation[:-1])
    defect = np.abs(np.diff(traj.energy) / dt + 2.0 * d_mid)
    scale = (np.abs(traj.energy[1:]) + np.abs(traj.dissipation[1:]) * dt + floor)
    return float(np.max(defect / scale))


def fit_growth_exponent(traj: ModeTrajectory, tail: float = 0.6) -> float:
    """Least-squares slope of log |a(t)|_J over the last ``tail`` of the run."""
    if not 0 < tail <= 1:
        raise ValueError("tail must lie in (0, 1]")
    norms = traj.norms()
    start = traj.times[-1] * (1.0 - tail)
    keep = (traj.times >= start) & (norms > 0)
    if np.count_nonzero(keep) < 2:
        raise ValueError("not enough nonzero samples to fit")
    slope, _ = np.polyfit(traj.times[keep], np.log(norms[keep]), 1)
    return float(slope)


def coercivity_margin(params: FluidParams, mag: MagneticConfig, xi: Frequency,
                      space: HermiteSpace, forms: FormSet | None = None) -> float:
    """Smallest eigenvalue of E0 against the form (1/2) int psi'^2.

    For a field above the critical number this is at least |B|^2 - |B|_c^2,
    since the interface term is dominated by |B|_c^2 int psi'^2 / 2.
    """
    if forms is None:
        forms = assemble_forms(space, params, mag, xi)
    value, _ = smallest_eigenpair(forms.E0, 0.5 * space.stiffness(), refine=0)
    return value


def eigenmode_initial_data(psi: np.ndarray, lam: float) -> tuple[np.ndarray, np.ndarray]:
    """(a0, a0') that start the trajectory exactly on the mode exp(lam t) psi."""
    return psi.copy(), lam * psi
