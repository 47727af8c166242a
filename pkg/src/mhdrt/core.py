"""Physical parameters, field configuration, wavenumbers and the slab mesh.

Everything here is nondimensional on the slab half-width, so the domain is
always ``(-1, 1)`` with the two fluids separated at ``x = 0``. The upper
fluid (``x > 0``) carries the ``+`` subscript.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np


class MHDRTError(Exception):
    """Base class for domain errors raised by this package."""


class InvalidMeshError(MHDRTError):
    pass


class StableConfigurationError(MHDRTError):
    """The density jump is not positive, so there is no Rayleigh-Taylor drive."""


class DegenerateFrequencyError(MHDRTError):
    pass


class OrientationMismatchError(MHDRTError):
    pass


class SupercriticalFieldError(MHDRTError):
    """The field is at or above the critical magnetic number."""


class ParameterError(MHDRTError):
    pass


class Orientation(str, enum.Enum):
    VERTICAL = "vertical"
    HORIZONTAL = "horizontal"


@dataclass(frozen=True)
class FluidParams:
    rho_plus: float
    rho_minus: float
    mu_plus: float = 0.0
    mu_minus: float = 0.0
    g: float = 1.0

    def __post_init__(self):
        if not (self.rho_plus > 0 and self.rho_minus > 0):
            raise ParameterError("densities must be positive")
        if self.mu_plus < 0 or self.mu_minus < 0:
            raise ParameterError("viscosities must be nonnegative")
        if not self.g > 0:
            raise ParameterError("gravity must be positive")

    def density_jump(self) -> float:
        return self.rho_plus - self.rho_minus

    def drive(self) -> float:
        """g[rho], the strength of the destabilizing interface term."""
        return self.g * self.density_jump()

    def require_unstable_stratification(self) -> None:
        if self.density_jump() <= 0:
            raise StableConfigurationError(
                f"rho_plus={self.rho_plus} must exceed rho_minus={self.rho_minus} "
                "(heavier fluid on top)")

    def swapped(self) -> "FluidParams":
        """Fluid labels exchanged; pairs with mesh reflection x -> -x."""
        return FluidParams(self.rho_minus, self.rho_plus,
                           self.mu_minus, self.mu_plus, self.g)


@dataclass(frozen=True)
class MagneticConfig:
    orientation: Orientation
    magnitude: float

    def __post_init__(self):
        object.__setattr__(self, "orientation", Orientation(self.orientation))
        if not self.magnitude >= 0:
            raise ParameterError("field magnitude must be nonnegative")

    @property
    def b2(self) -> float:
        return self.magnitude * self.magnitude


@dataclass(frozen=True)
class Frequency:
    xi1: float
    xi2: float = 0.0

    @property
    def mag2(self) -> float:
        return self.xi1 * self.xi1 + self.xi2 * self.xi2

    @property
    def mag(self) -> float:
        return math.sqrt(self.mag2)

    def require_nonzero(self) -> None:
        if not self.mag2 > 0:
            raise DegenerateFrequencyError("|xi| must be positive")

    def __neg__(self) -> "Frequency":
        return Frequency(-self.xi1, -self.xi2)


@dataclass(frozen=True, eq=False)
class InterfaceMesh:
    nodes: np.ndarray
    interface_index: int

    def __post_init__(self):
        x = np.asarray(self.nodes, dtype=float)
        x.setflags(write=False)
        object.__setattr__(self, "nodes", x)
        if x[0] != -1.0 or x[-1] != 1.0 or np.any(np.diff(x) <= 0):
            raise InvalidMeshError("nodes must increase strictly from -1 to 1")
        k = self.interface_index
        if not (0 < k < len(x) - 1) or x[k] != 0.0:
            raise InvalidMeshError("interface node must sit exactly at 0")
        if k < 4 or len(x) - 1 - k < 4:
            raise InvalidMeshError("need at least 4 elements on each side")

    @property
    def n_elements(self) -> int:
        return len(self.nodes) - 1

    @property
    def sizes(self) -> np.ndarray:
        return np.diff(self.nodes)

    def element_side(self) -> np.ndarray:
        """+1 for elements in the upper fluid, -1 for the lower fluid."""
        e = np.arange(self.n_elements)
        return np.where(e >= self.interface_index, 1, -1)

    def reflected(self) -> "InterfaceMesh":
        return InterfaceMesh(-self.nodes[::-1], self.n_elements - self.interface_index)


def build_mesh(n_per_side: int, grading: float = 0.0) -> InterfaceMesh:
    """Mesh of ``2 * n_per_side`` elements with a node pinned at ``x = 0``.

    ``grading`` blends a uniform spacing with a cosine stretch on each half,
    so ``grading = 1`` packs nodes quadratically toward the interface and
    the walls, where eigenfunction layers sit at large wavenumber.
    """
    if int(n_per_side) != n_per_side or n_per_side < 4:
        raise InvalidMeshError(f"n_per_side must be an integer >= 4, got {n_per_side}")
    if not 0.0 <= grading <= 1.0:
        raise InvalidMeshError("grading must lie in [0, 1]")
    n = int(n_per_side)
    t = np.arange(n + 1) / n
    half = (1.0 - grading) * t + grading * 0.5 * (1.0 - np.cos(np.pi * t))
    half[0], half[-1] = 0.0, 1.0
    nodes = np.concatenate([-half[::-1], half[1:]])
    nodes[n] = 0.0
    return InterfaceMesh(nodes, n)
