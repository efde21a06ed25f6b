import numpy as np
import pytest

from nsreg import Snapshot, ValidationError, decompose_cutoff, decompose_sec3, solve_pressure
from nsreg.pressure import CUTOFF_MODES, harmonic_residual, pressure_residual, slice_projections


def test_taylor_green_pressure(tg32):
    U, P = tg32
    x, y, _ = U.grid.mesh()
    ref = 0.25 * (np.cos(2 * x) + np.cos(2 * y))
    assert np.allclose(P.values(0)[0], ref, atol=1e-13)
    assert pressure_residual(U.snapshot(0), P.snapshot(0)) < 1e-10


@pytest.mark.parametrize("fixture", ["tg32", "abc32", "random32"])
def test_sec3_identities(fixture, request):
    F = request.getfixturevalue(fixture)
    U = F[0] if isinstance(F, tuple) else F
    dec = decompose_sec3(U.snapshot(0))
    res = dec.identity_residuals()
    assert res["completeness"] < 1e-10
    assert res["d3_rewrite"] < 1e-10


@pytest.mark.parametrize("mode", CUTOFF_MODES)
def test_cutoff_remainder_is_harmonic(mode, random32):
    dec = decompose_cutoff("full_pi", random32.snapshot(0), rho=2.0, mode=mode)
    assert dec.identity_residuals()["completeness"] < 1e-10
    assert harmonic_residual(dec) < 1e-6


def test_cutoff_rejects_unknown_source(random32):
    with pytest.raises(ValidationError):
        decompose_cutoff("pi9", random32.snapshot(0), rho=1.0)


def test_slice_projections_average_exactly(grid32, rng):
    a = rng.standard_normal(grid32.shape)
    f = Snapshot(grid32, 0.0, a, kind="scalar")
    proj = slice_projections(f, 0.7, center=(0.1, -0.3, 0.2))
    assert proj.P3.shape == (32, 32) and proj.Ph.shape == (32,) and proj.Phr.shape == (32,)
    const = Snapshot(grid32, 0.0, np.full(grid32.shape, 2.5), kind="scalar")
    cp = slice_projections(const, 0.7)
    assert np.allclose(cp.P3, 2.5) and np.allclose(cp.Ph, 2.5) and np.allclose(cp.Phr, 2.5)


def test_solve_pressure_of_zero_field(grid16):
    u = Snapshot(grid16, 0.0, np.zeros((3,) + grid16.shape))
    assert np.abs(solve_pressure(u).data).max() == 0.0
