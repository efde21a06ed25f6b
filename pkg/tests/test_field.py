import numpy as np
import pytest

from nsreg import (
    FlowParams,
    Grid3,
    Snapshot,
    SpaceTimeField,
    ValidationError,
    constant_field,
    generate_field,
    rescale_field,
)
from nsreg.generate import FIELD_KINDS


def test_grid_rejects_small_or_odd_sizes():
    with pytest.raises(ValidationError):
        Grid3(8)
    with pytest.raises(ValidationError):
        Grid3(48)


def test_grid_geometry(grid16):
    assert grid16.shape == (16, 16, 16)
    assert np.isclose(grid16.spacing * 16, grid16.box_length)
    assert np.isclose(grid16.cell_volume, grid16.spacing**3)


def test_fft_roundtrip(grid16, rng):
    a = rng.standard_normal(grid16.shape)
    assert np.allclose(grid16.ifft(grid16.fft(a)), a, atol=1e-13)


def test_snapshot_validates_shape(grid16):
    with pytest.raises(ValidationError):
        Snapshot(grid16, 0.0, np.zeros((3, 8, 8, 8)))
    with pytest.raises(ValidationError):
        Snapshot(grid16, 0.0, np.zeros((2, 16, 16, 16)), kind="velocity")
    s = Snapshot(grid16, 0.0, np.zeros((16, 16, 16)), kind="pressure")
    assert s.ncomp == 1


def test_flow_params_validation():
    with pytest.raises(ValidationError):
        FlowParams(nu=0.0)
    with pytest.raises(ValidationError):
        FlowParams(dt=0.5, end_time=0.1)
    assert FlowParams(end_time=1.0, dt=0.25).steps == 4


@pytest.mark.parametrize("kind", FIELD_KINDS)
def test_generated_fields_are_solenoidal(kind, grid16):
    from nsreg.spectral import divergence_residual

    U = generate_field(kind, FlowParams(end_time=0.125, dt=1 / 16), grid16)
    assert len(U) == 3
    for s in U.snapshots:
        assert divergence_residual(s) < 1e-10
        assert np.all(np.isfinite(s.data))


def test_constant_field_is_constant(grid16):
    F = constant_field(grid16, [1.0, 2.0, 3.0], times=[0.0, 0.5])
    assert np.allclose(F.values(1)[2], 3.0)


def test_rescale_relabels_nodes(tg32):
    U, _ = tg32
    R = rescale_field(U, 2.0)
    assert np.isclose(R.grid.box_length, U.grid.box_length / 2)
    assert np.allclose(R.values(0), 2.0 * U.values(0))
    assert np.allclose(R.times, U.times / 4)


def test_time_index(tg32):
    U, _ = tg32
    assert U.time_index(U.times[2]) == 2
    with pytest.raises(ValidationError):
        U.time_index(0.01234)


def test_unknown_kind_rejected(grid16):
    with pytest.raises(ValidationError):
        SpaceTimeField(grid16, [0.0], np.zeros((1, 3, 16, 16, 16)), kind="tensor")
