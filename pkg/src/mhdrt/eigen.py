"""The modified eigenvalue problem alpha(s) = inf E / J for fixed (xi, s).

Replacing the viscosity mu by s*mu turns the growth-rate problem into a
symmetric pencil, so alpha(s) is simply the smallest generalized eigenvalue
of ``|xi|^2 E0 + s E1`` against ``J``. The growth rate squared of the
modified problem is ``-alpha``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import FluidParams, Frequency, MagneticConfig, MHDRTError, Orientation
from .forms import FormSet, HermiteSpace, assemble_forms


class MassMatrixError(MHDRTError):
    """The weighting matrix of a generalized eigenproblem is not SPD."""


def _banded(a: np.ndarray) -> tuple[int, np.ndarray]:
    rows, cols = np.nonzero(a)
    u = int(np.max(np.abs(rows - cols))) if rows.size else 0
    n = a.shape[0]
    ab = np.zeros((2 * u + 1, n))
    for k in range(-u, u + 1):
        diag = np.diagonal(a, k)
        if k >= 0:
            ab[u - k, k:] = diag
        else:
            ab[u - k, :n + k] = diag
    return u, ab


def _inverse_iteration_step(K: np.ndarray, M: np.ndarray, x: np.ndarray) -> np.ndarray:
    sigma = rayleigh_quotient(K, M, x)
    u, ab = _banded(K - sigma * M)
    try:
        y = scipy.linalg.solve_banded((u, u), ab, M @ x, check_finite=False)
    except np.linalg.LinAlgError:
        return x
    if not np.all(np.isfinite(y)) or not np.any(y):
        return x
    y = y / math.sqrt(float(y @ M @ y))
    return y if float(y @ M @ x) >= 0 else -y


def smallest_eigenpair(K: np.ndarray, M: np.ndarray,
                       refine: int = 2) -> tuple[float, np.ndarray]:
    """Smallest eigenvalue of ``K x = a M x`` and an M-normalized eigenvector.

    ``M`` is Cholesky-factored and the pencil reduced to the standard
    symmetric problem ``L^{-1} K L^{-T}``. The returned value is the Rayleigh
    quotient evaluated with the original matrices after ``refine`` steps of
    inverse iteration on the (banded) pencil itself; the dense reduction alone
    only resolves the eigenvalue to roundoff times the largest eigenvalue.
    The sign of the eigenvector is fixed so its largest entry is positive.
    """
    try:
        L = scipy.linalg.cholesky(M, lower=True)
    except np.linalg.LinAlgError as exc:
        raise MassMatrixError("mass matrix is not positive definite") from exc
    tmp = scipy.linalg.solve_triangular(L, K, lower=True)
    C = scipy.linalg.solve_triangular(L, tmp.T, lower=True)
    C = 0.5 * (C + C.T)
    _, y = scipy.linalg.eigh(C, subset_by_index=[0, 0])
    x = scipy.linalg.solve_triangular(L, y[:, 0], lower=True, trans="T")
    x = x / math.sqrt(float(x @ M @ x))
    for _ in range(refine):
        x = _inverse_iteration_step(K, M, x)
    if x[np.argmax(np.abs(x))] < 0:
        x = -x
    return rayleigh_quotient(K, M, x), x


def rayleigh_quotient(K: np.ndarray, M: np.ndarray, x: np.ndarray) -> float:
    """x^T K x / x^T M x accumulated in extended precision.

    For smooth x the double-precision sum cancels terms of size |x|^T |K| |x|,
    which grows like the inverse cube of the smallest element.
    """
    xl = x.astype(np.longdouble)
    num = xl @ (K.astype(np.longdouble) @ xl)
    den = xl @ (M.astype(np.longdouble) @ xl)
    return float(num / den)


@dataclass(frozen=True, eq=False)
class ModifiedEigenResult:
    alpha: float
    psi: np.ndarray
    s: float
    xi: Frequency
    forms: FormSet
    space: HermiteSpace

    @property
    def lambda2(self) -> float:
        return -self.alpha

    def psi0(self) -> float:
        return float(self.space.interface_vector() @ self.psi)

    def residual(self) -> float:
        """||(K - alpha J) psi|| / ||K|| with ||.|| the max-row-sum norm."""
        K = self.forms.energy(self.s)
        r = K @ self.psi - self.alpha * (self.forms.J @ self.psi)
        return float(np.max(np.abs(r)) / np.max(np.sum(np.abs(K), axis=1)))


def alpha_scale(params: FluidParams, mag: MagneticConfig, xi: Frequency) -> float:
    """Typical size of alpha, used to turn relative tolerances into absolute ones."""
    rho = min(params.rho_plus, params.rho_minus)
    return xi.mag2 * max(abs(params.drive()), mag.b2, 1e-300) / rho


def alpha_of_s(s: float, params: FluidParams, mag: MagneticConfig, xi: Frequency,
               space: HermiteSpace, forms: FormSet | None = None) -> ModifiedEigenResult:
    """alpha(s) with its J-normalized minimizer.

    ``forms`` may be passed to reuse an assembly across many values of s.
    """
    if s < 0:
        raise ValueError("s must be nonnegative")
    if forms is None:
        forms = assemble_forms(space, params, mag, xi)
    _, psi = smallest_eigenpair(forms.energy(s), forms.J)
    e = space.interface_vector()
    if e @ psi < 0:
        psi = -psi
    alpha = forms.energy_quotient(s, psi)
    return ModifiedEigenResult(alpha, psi, s, xi, forms, space)


def jump_residuals(result: ModifiedEigenResult, params: FluidParams,
                   mag: MagneticConfig) -> tuple[float, float]:
    """Relative defects of the two natural interface conditions at x = 0.

    One-sided derivatives come from the element polynomials on each side of
    the interface (the third derivative of a cubic is an element constant).
    Each defect is divided by the largest magnitude among the terms that make
    it up, so a converged minimizer gives small numbers.
    """
    space = result.space
    k2 = result.xi.mag2
    s = result.s
    lam2 = -result.alpha
    below, above = space.interface_one_sided(result.psi)
    if not np.any(result.psi):
        return 0.0, 0.0
    vertical = mag.orientation is Orientation.VERTICAL
    b2 = mag.b2 if vertical else 0.0

    def side_terms(d, mu, rho):
        f, df, d2f, d3f = d
        bend = s * mu * (k2 * f + d2f) + b2 * d2f
        shear = s * mu * (d3f - 3 * k2 * df) + b2 * d3f
        return bend, shear, lam2 * rho * df

    bm, sm, im = side_terms(below, params.mu_minus, params.rho_minus)
    bp, sp, ip = side_terms(above, params.mu_plus, params.rho_plus)
    point = params.drive() * k2 * 0.5 * (above[0] + below[0])

    r1 = abs(bp - bm) / max(abs(bp), abs(bm), 1e-300)
    terms2 = (sp, sm, ip, im, point)
    r2 = abs((sp - sm) - (ip - im) - point) / max(max(abs(t) for t in terms2), 1e-300)
    return float(r1), float(r2)
