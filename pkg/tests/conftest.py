import numpy as np
import pytest
from scipy.integrate import quad
from scipy.interpolate import CubicHermiteSpline

from mhdrt import FluidParams, HermiteSpace, LinearSpace, build_mesh


@pytest.fixture(scope="session")
def params():
    return FluidParams(rho_plus=2.0, rho_minus=1.0, mu_plus=0.1, mu_minus=0.1, g=1.0)


@pytest.fixture(scope="session")
def inviscid():
    return FluidParams(rho_plus=2.0, rho_minus=1.0, g=1.0)


@pytest.fixture(scope="session")
def hermite16():
    return HermiteSpace(build_mesh(16, 0.5))


@pytest.fixture(scope="session")
def hermite32():
    return HermiteSpace(build_mesh(32, 0.5))


@pytest.fixture(scope="session")
def linear64():
    return LinearSpace(build_mesh(64, 0.0))


def spline_of(space, c):
    """Independent evaluator of a Hermite field through scipy's spline."""
    full = space.full_coefficients(c)
    return CubicHermiteSpline(space.mesh.nodes, full[:, 0], full[:, 1])


def integrate_pieces(space, f):
    """Adaptive quadrature of f element by element, split by side."""
    nodes = space.mesh.nodes
    k = space.mesh.interface_index
    lower = sum(quad(f, nodes[i], nodes[i + 1], epsabs=1e-15, epsrel=1e-13)[0]
                for i in range(k))
    upper = sum(quad(f, nodes[i], nodes[i + 1], epsabs=1e-15, epsrel=1e-13)[0]
                for i in range(k, len(nodes) - 1))
    return lower, upper


def random_field(space, rng):
    return rng.standard_normal(space.dof_count)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULT_LINES

    if RESULT_LINES:
        terminalreporter.section("acceptance criteria")
        for line in RESULT_LINES:
            terminalreporter.write_line(line)
