"""Finite element spaces on the slab and the quadratic energy forms.

Two spaces are provided:

* :class:`HermiteSpace` -- piecewise cubics with a value and a slope per
  node, clamped at both walls. Fields are C^1, so the kinematic interface
  conditions hold strongly and the stress conditions come out weakly.
* :class:`LinearSpace` -- piecewise linears vanishing at the walls.

Densities and viscosities are constant on each element because the interface
is a mesh node, so a 4-point Gauss rule makes every form exact. Each space
precomputes its base integrals split by fluid side; the physical forms are
linear combinations of those.

Every form matrix ``A`` represents a quadratic functional through
``F(psi) = c @ A @ c`` where ``c`` are the free coefficients of ``psi``.
The factors of 1/2 in the energies are included in the matrices.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    FluidParams,
    Frequency,
    InterfaceMesh,
    MagneticConfig,
    Orientation,
    OrientationMismatchError,
)

_GAUSS_T, _GAUSS_W = np.polynomial.legendre.leggauss(4)
GAUSS_T = 0.5 * (_GAUSS_T + 1.0)
GAUSS_W = 0.5 * _GAUSS_W


def hermite_basis(t: np.ndarray, h: np.ndarray | float, dtype=float) -> np.ndarray:
    """Derivatives 0..3 (in x) of the four cubic Hermite shape functions.

    Returns an array of shape ``(4, 4, *broadcast(t, h))`` indexed as
    ``[derivative order, local dof]``; local dofs are (value, slope) at the
    left node followed by (value, slope) at the right node.
    """
    t = np.asarray(t, dtype=dtype)
    h = np.asarray(h, dtype=dtype)
    t, h = np.broadcast_arrays(t, h)
    one = np.ones_like(t)
    t2, t3 = t * t, t * t * t
    d0 = [1 - 3 * t2 + 2 * t3, h * (t - 2 * t2 + t3), 3 * t2 - 2 * t3, h * (t3 - t2)]
    d1 = [(6 * t2 - 6 * t) / h, 1 - 4 * t + 3 * t2, (6 * t - 6 * t2) / h, 3 * t2 - 2 * t]
    d2 = [(12 * t - 6) / h**2, (6 * t - 4) / h, (6 - 12 * t) / h**2, (6 * t - 2) / h]
    d3 = [12 * one / h**3, 6 * one / h**2, -12 * one / h**3, 6 * one / h**2]
    return np.array([d0, d1, d2, d3])


def _scatter(local: np.ndarray, dofs: np.ndarray, size: int) -> np.ndarray:
    out = np.zeros((size, size))
    rows = np.repeat(dofs[:, :, None], dofs.shape[1], axis=2)
    cols = np.repeat(dofs[:, None, :], dofs.shape[1], axis=1)
    np.add.at(out, (rows.ravel(), cols.ravel()), local.ravel())
    return out


def _symmetrize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


@dataclass(frozen=True, eq=False)
class _SpaceBase:
    mesh: InterfaceMesh
    _base: dict = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_base", self._assemble_base())

    def _assemble_base(self) -> dict:
        raise NotImplementedError

    def base(self, name: str, side: int | None = None) -> np.ndarray:
        """Base integral ``name`` over the upper (+1), lower (-1) or whole slab."""
        if side is None:
            return self._base[name, 1] + self._base[name, -1]
        return self._base[name, side]

    def stiffness(self) -> np.ndarray:
        """Matrix of  int psi' phi'."""
        return self.base("M1")

    def mass(self) -> np.ndarray:
        """Matrix of  int psi phi."""
        return self.base("M0")

    def interface_vector(self) -> np.ndarray:
        """Coefficient vector e with e @ c = psi(0)."""
        raise NotImplementedError

    def interface_form(self) -> np.ndarray:
        e = self.interface_vector()
        return np.outer(e, e)


@dataclass(frozen=True, eq=False)
class HermiteSpace(_SpaceBase):
    """Clamped C^1 cubic Hermite space (discrete H^2_0)."""

    @property
    def n_nodes(self) -> int:
        return len(self.mesh.nodes)

    @property
    def dof_count(self) -> int:
        return 2 * (self.n_nodes - 2)

    def element_dofs(self) -> np.ndarray:
        """Global (unreduced) dof indices per element, shape (E, 4)."""
        e = np.arange(self.mesh.n_elements)
        return np.stack([2 * e, 2 * e + 1, 2 * e + 2, 2 * e + 3], axis=1)

    def _assemble_base(self) -> dict:
        h = self.mesh.sizes
        basis = hermite_basis(GAUSS_T[None, :], h[:, None])  # (4, 4, E, Q)
        w = GAUSS_W[None, :] * h[:, None]
        v0, v1, v2 = basis[0], basis[1], basis[2]

        def local(a, b):
            return np.einsum("ieq,jeq,eq->eij", a, b, w)

        locals_ = {
            "M0": local(v0, v0),
            "M1": local(v1, v1),
            "M2": local(v2, v2),
            "C02": local(v0, v2) + local(v2, v0),
        }
        dofs = self.element_dofs()
        size = 2 * self.n_nodes
        free = np.arange(2, size - 2)
        side = self.mesh.element_side()
        out = {}
        for name, loc in locals_.items():
            for s in (1, -1):
                mask = side == s
                full = _scatter(loc[mask], dofs[mask], size)
                out[name, s] = _symmetrize(full[np.ix_(free, free)])
        return out

    def interface_vector(self) -> np.ndarray:
        e = np.zeros(self.dof_count)
        e[2 * (self.mesh.interface_index - 1)] = 1.0
        return e

    def full_coefficients(self, c: np.ndarray) -> np.ndarray:
        """Pad free coefficients with the clamped wall dofs, shape (n_nodes, 2)."""
        full = np.zeros(2 * self.n_nodes)
        full[2:-2] = c
        return full.reshape(-1, 2)

    def interpolate(self, f, df) -> np.ndarray:
        """Coefficients of the Hermite interpolant of ``f`` with slope ``df``."""
        x = self.mesh.nodes[1:-1]
        c = np.empty(self.dof_count)
        c[0::2] = f(x)
        c[1::2] = df(x)
        return c

    def element_derivatives(self, c: np.ndarray, elem: int, t) -> np.ndarray:
        """Derivatives 0..3 of the field on element ``elem`` at local ``t``."""
        full = self.full_coefficients(c).ravel()
        loc = full[self.element_dofs()[elem]]
        h = self.mesh.sizes[elem]
        return np.einsum("dj...,j->d...", hermite_basis(t, h), loc)

    def sample(self, c: np.ndarray, t: np.ndarray = GAUSS_T):
        """Evaluate the field at local points ``t`` of every element.

        Returns ``(x, d)`` where ``x`` has shape (E, len(t)) and ``d`` has
        shape (4, E, len(t)) holding derivatives 0..3.
        """
        full = self.full_coefficients(c).ravel()
        loc = full[self.element_dofs()]  # (E, 4)
        h = self.mesh.sizes
        basis = hermite_basis(np.asarray(t)[None, :], h[:, None])  # (4, 4, E, T)
        d = np.einsum("djet,ej->det", basis, loc)
        x = self.mesh.nodes[:-1, None] + h[:, None] * np.asarray(t)[None, :]
        return x, d

    def interface_one_sided(self, c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Derivatives 0..3 at x = 0 from the element below and above."""
        k = self.mesh.interface_index
        below = self.element_derivatives(c, k - 1, 1.0)
        above = self.element_derivatives(c, k, 0.0)
        return below, above

    def form_values(self, c: np.ndarray, params: FluidParams, mag: MagneticConfig,
                    xi: Frequency) -> tuple:
        """(J, E0, E1) at the field ``c`` by element quadrature in long double."""
        ld = np.longdouble
        full = self.full_coefficients(c).ravel().astype(ld)
        loc = full[self.element_dofs()]
        h = self.mesh.sizes.astype(ld)
        t = np.asarray(GAUSS_T, dtype=ld)
        basis = hermite_basis(t[None, :], h[:, None], dtype=ld)
        d0, d1, d2 = (np.einsum("jet,ej->et", basis[k], loc) for k in range(3))
        w = np.asarray(GAUSS_W, dtype=ld)[None, :] * h[:, None]
        upper = self.mesh.element_side() > 0
        rho = np.where(upper, ld(params.rho_plus), ld(params.rho_minus))[:, None]
        mu = np.where(upper, ld(params.mu_plus), ld(params.mu_minus))[:, None]
        k1s, k2s = ld(xi.xi1) ** 2, ld(xi.xi2) ** 2
        k2 = k1s + k2s
        half = ld(0.5)
        j = half * np.sum(w * rho * (k2 * d0 * d0 + d1 * d1))
        e1 = half * np.sum(w * mu * (4 * k2 * d1 * d1 + (k2 * d0 + d2) ** 2))
        b2 = ld(mag.magnitude) ** 2
        if mag.orientation is Orientation.VERTICAL:
            magnetic = half * b2 * np.sum(w * (d1 * d1 + d2 * d2 / k2))
        else:
            magnetic = half * b2 * (k1s / k2) * np.sum(w * (k2 * d0 * d0 + d1 * d1))
        psi0 = full[2 * self.mesh.interface_index]
        e0 = magnetic - half * ld(params.drive()) * psi0 * psi0
        return j, e0, e1


@dataclass(frozen=True, eq=False)
class LinearSpace(_SpaceBase):
    """Piecewise linear space vanishing at the walls (discrete H^1_0)."""

    @property
    def dof_count(self) -> int:
        return len(self.mesh.nodes) - 2

    def _assemble_base(self) -> dict:
        h = self.mesh.sizes
        n = len(self.mesh.nodes)
        e = np.arange(self.mesh.n_elements)
        dofs = np.stack([e, e + 1], axis=1)
        m0 = h[:, None, None] / 6.0 * np.array([[2.0, 1.0], [1.0, 2.0]])
        m1 = 1.0 / h[:, None, None] * np.array([[1.0, -1.0], [-1.0, 1.0]])
        side = self.mesh.element_side()
        free = np.arange(1, n - 1)
        out = {}
        for name, loc in (("M0", m0), ("M1", m1)):
            for s in (1, -1):
                mask = side == s
                full = _scatter(loc[mask], dofs[mask], n)
                out[name, s] = _symmetrize(full[np.ix_(free, free)])
        return out

    def interface_vector(self) -> np.ndarray:
        e = np.zeros(self.dof_count)
        e[self.mesh.interface_index - 1] = 1.0
        return e

    def interpolate(self, f) -> np.ndarray:
        return np.asarray(f(self.mesh.nodes[1:-1]), dtype=float)


@dataclass(frozen=True, eq=False)
class FormSet:
    """Assembled energies for one (params, field, frequency) triple.

    ``E0`` is the vertical E_0 or the horizontal analog depending on
    ``mag.orientation``; the full modified energy is ``xi^2 E0 + s E1``.
    """

    J: np.ndarray
    E0: np.ndarray
    E1: np.ndarray
    params: FluidParams
    mag: MagneticConfig
    xi: Frequency
    space: HermiteSpace | None = None

    def energy(self, s: float) -> np.ndarray:
        return self.xi.mag2 * self.E0 + s * self.E1

    def energy_quotient(self, s: float, psi: np.ndarray) -> float:
        """(xi^2 E0 + s E1)[psi] / J[psi] evaluated accurately.

        ``psi^T K psi`` in the nodal basis cancels terms as large as
        ``|psi|^T |K| |psi|``, roughly 1/h^2 times the result. Here the
        integrals are summed element by element from derivative values in
        extended precision, so the integrands are sums of squares and the
        quotient resolves cancellations between the two energies down to
        ~1e-18 relative. Without a space the matrix forms are used.
        """
        if self.space is None:
            x = psi.astype(np.longdouble)

            def q(a):
                return x @ (a.astype(np.longdouble) @ x)

            k2 = np.longdouble(self.xi.xi1) ** 2 + np.longdouble(self.xi.xi2) ** 2
            return float((k2 * q(self.E0) + np.longdouble(s) * q(self.E1)) / q(self.J))
        j, e0, e1 = self.space.form_values(psi, self.params, self.mag, self.xi)
        k2 = np.longdouble(self.xi.xi1) ** 2 + np.longdouble(self.xi.xi2) ** 2
        return float((k2 * e0 + np.longdouble(s) * e1) / j)

    def pencil(self, lam: float) -> np.ndarray:
        """lam^2 J + lam E1 + xi^2 E0, singular at a normal-mode growth rate."""
        return lam * lam * self.J + lam * self.E1 + self.xi.mag2 * self.E0


def _by_side(space: _SpaceBase, name: str, plus: float, minus: float) -> np.ndarray:
    return plus * space.base(name, 1) + minus * space.base(name, -1)


def assemble_J(space: HermiteSpace, params: FluidParams, xi: Frequency) -> np.ndarray:
    """Kinetic form 1/2 int rho (|xi|^2 psi^2 + psi'^2)."""
    xi.require_nonzero()
    k2 = xi.mag2
    rp, rm = params.rho_plus, params.rho_minus
    return 0.5 * (k2 * _by_side(space, "M0", rp, rm) + _by_side(space, "M1", rp, rm))


def assemble_E0_vertical(space: HermiteSpace, params: FluidParams,
                         mag: MagneticConfig, xi: Frequency) -> np.ndarray:
    """1/2 int |B|^2 (psi'^2 + psi''^2/|xi|^2) - 1/2 g[rho] psi(0)^2."""
    if mag.orientation is not Orientation.VERTICAL:
        raise OrientationMismatchError("vertical E0 requested for a horizontal field")
    xi.require_nonzero()
    magnetic = 0.5 * mag.b2 * (space.base("M1") + space.base("M2") / xi.mag2)
    return magnetic - 0.5 * params.drive() * space.interface_form()


def assemble_E0_horizontal(space: HermiteSpace, params: FluidParams,
                           mag: MagneticConfig, xi: Frequency) -> np.ndarray:
    """Horizontal-field analog of E0.

    The magnetic part only sees the along-field wavenumber, hence the
    ``xi1^2 / |xi|^2`` weight; in 2D this is exactly E0' of the horizontal
    energy.
    """
    if mag.orientation is not Orientation.HORIZONTAL:
        raise OrientationMismatchError("horizontal E0 requested for a vertical field")
    xi.require_nonzero()
    weight = xi.xi1 * xi.xi1 / xi.mag2
    magnetic = 0.5 * mag.b2 * weight * (xi.mag2 * space.base("M0") + space.base("M1"))
    return magnetic - 0.5 * params.drive() * space.interface_form()


def assemble_E1(space: HermiteSpace, params: FluidParams, xi: Frequency) -> np.ndarray:
    """Viscous form 1/2 int mu (4|xi|^2 psi'^2 + (|xi|^2 psi + psi'')^2)."""
    xi.require_nonzero()
    k2 = xi.mag2
    mp, mm = params.mu_plus, params.mu_minus
    out = (4 * k2 * _by_side(space, "M1", mp, mm)
           + k2 * k2 * _by_side(space, "M0", mp, mm)
           + k2 * _by_side(space, "C02", mp, mm)
           + _by_side(space, "M2", mp, mm))
    return 0.5 * out


def assemble_E0(space: HermiteSpace, params: FluidParams,
                mag: MagneticConfig, xi: Frequency) -> np.ndarray:
    if mag.orientation is Orientation.VERTICAL:
        return assemble_E0_vertical(space, params, mag, xi)
    return assemble_E0_horizontal(space, params, mag, xi)


def assemble_forms(space: HermiteSpace, params: FluidParams,
                   mag: MagneticConfig, xi: Frequency) -> FormSet:
    return FormSet(
        J=assemble_J(space, params, xi),
        E0=assemble_E0(space, params, mag, xi),
        E1=assemble_E1(space, params, xi),
        params=params, mag=mag, xi=xi, space=space,
    )


def assemble_h1_forms(space: LinearSpace | HermiteSpace, params: FluidParams):
    """(int psi' phi', int psi phi, psi(0) phi(0)) on the given space.

    ``params`` is accepted for interface symmetry with the other assemblers;
    none of the three forms depends on it.
    """
    return space.stiffness(), space.mass(), space.interface_form()
