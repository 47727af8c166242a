import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mhdrt import (
    FluidParams,
    Frequency,
    InterfaceMesh,
    InvalidMeshError,
    MagneticConfig,
    Orientation,
    ParameterError,
    StableConfigurationError,
    build_mesh,
)


def test_uniform_mesh_of_four():
    mesh = build_mesh(4, 0.0)
    np.testing.assert_array_equal(
        mesh.nodes, [-1, -0.75, -0.5, -0.25, 0, 0.25, 0.5, 0.75, 1])
    assert mesh.interface_index == 4


def test_interface_node_is_exact():
    mesh = build_mesh(64, 0.0)
    assert len(mesh.nodes) == 129
    assert mesh.nodes[64] == 0.0
    assert mesh.n_elements == 128


def test_too_coarse_mesh_rejected():
    with pytest.raises(InvalidMeshError):
        build_mesh(3, 0.0)


@pytest.mark.parametrize("grading", [-0.1, 1.5])
def test_grading_out_of_range(grading):
    with pytest.raises(InvalidMeshError):
        build_mesh(8, grading)


@given(n=st.integers(4, 80), grading=st.floats(0.0, 1.0))
@settings(max_examples=60, deadline=None)
def test_mesh_invariants(n, grading):
    mesh = build_mesh(n, grading)
    x = mesh.nodes
    assert x[0] == -1.0 and x[-1] == 1.0
    assert np.all(np.diff(x) > 0)
    assert x[mesh.interface_index] == 0.0
    # symmetric about the interface
    np.testing.assert_allclose(x, -x[::-1], atol=1e-15)


def test_grading_packs_nodes_at_interface_and_walls():
    uniform = build_mesh(16, 0.0).sizes
    graded = build_mesh(16, 1.0).sizes
    k = 16
    assert graded[k] < uniform[k] and graded[0] < uniform[0]
    assert graded[k // 2 + k] > uniform[k // 2 + k]


def test_mesh_rejects_interface_off_zero():
    nodes = np.linspace(-1, 1, 10)
    with pytest.raises(InvalidMeshError):
        InterfaceMesh(nodes, 5)


def test_mesh_needs_four_elements_per_side():
    nodes = np.array([-1, -0.5, 0, 0.25, 0.5, 0.75, 0.9, 1.0])
    with pytest.raises(InvalidMeshError):
        InterfaceMesh(nodes, 2)


def test_reflection_round_trip():
    nodes = np.concatenate([np.linspace(-1, 0, 6), [0.1, 0.3, 0.6, 0.8, 1.0]])
    mesh = InterfaceMesh(nodes, 5)
    back = mesh.reflected().reflected()
    np.testing.assert_array_equal(back.nodes, mesh.nodes)
    assert mesh.reflected().interface_index == 5


def test_density_jump_and_drive():
    p = FluidParams(3.0, 1.0, g=2.0)
    assert p.density_jump() == 2.0
    assert p.drive() == 4.0
    p.require_unstable_stratification()


@pytest.mark.parametrize("rp,rm", [(1.0, 1.0), (1.0, 2.0)])
def test_stable_stratification_is_flagged(rp, rm):
    with pytest.raises(StableConfigurationError):
        FluidParams(rp, rm).require_unstable_stratification()


@pytest.mark.parametrize("kwargs", [
    dict(rho_plus=0.0, rho_minus=1.0),
    dict(rho_plus=2.0, rho_minus=1.0, mu_plus=-1.0),
    dict(rho_plus=2.0, rho_minus=1.0, g=0.0),
])
def test_parameter_validation(kwargs):
    with pytest.raises(ParameterError):
        FluidParams(**kwargs)


def test_swapped_exchanges_labels():
    p = FluidParams(2.0, 1.0, 0.3, 0.1, 9.8)
    assert p.swapped() == FluidParams(1.0, 2.0, 0.1, 0.3, 9.8)


def test_magnetic_config_accepts_strings():
    mag = MagneticConfig("horizontal", 0.5)
    assert mag.orientation is Orientation.HORIZONTAL
    assert mag.b2 == 0.25
    with pytest.raises(ParameterError):
        MagneticConfig(Orientation.VERTICAL, -0.1)
    with pytest.raises(ValueError):
        MagneticConfig("diagonal", 0.1)


def test_frequency_magnitude_and_negation():
    xi = Frequency(3.0, 4.0)
    assert xi.mag == 5.0 and xi.mag2 == 25.0
    assert (-xi).mag2 == xi.mag2
    with pytest.raises(Exception):
        Frequency(0.0, 0.0).require_nonzero()
