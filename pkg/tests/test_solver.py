import math

import numpy as np
import pytest

from nsreg import FlowParams, Snapshot, ValidationError, generate_field, ns_evolve, random_solenoidal
from nsreg.solver import kinetic_energy
from nsreg.spectral import divergence_residual


def test_taylor_green_decays_exactly(grid16):
    params = FlowParams(nu=1.0, end_time=0.1, dt=1e-2)
    U0 = generate_field("taylor_green_2d", params, grid16)
    U, P = ns_evolve(U0.snapshot(0), params)
    assert len(U) == len(P) == 11
    ratio = kinetic_energy(U.values(-1), grid16) / kinetic_energy(U.values(0), grid16)
    assert ratio == pytest.approx(math.exp(-0.4), rel=1e-8)
    assert np.allclose(U.values(-1), U0.values(-1), atol=1e-9)


def test_axis_heat_matches_propagator(grid16):
    params = FlowParams(nu=0.5, end_time=0.2, dt=0.05)
    U0 = generate_field("axis_heat", params, grid16)
    U, _ = ns_evolve(U0.snapshot(0), params)
    assert np.allclose(U.values(-1), U0.values(-1), rtol=0, atol=1e-12)


def test_random_flow_stays_solenoidal_and_dissipates(grid16):
    u0 = random_solenoidal(grid16, seed=3, amplitude=0.5)
    U, P = ns_evolve(u0.snapshot(0), FlowParams(nu=0.1, end_time=0.2, dt=0.02), save_every=5)
    assert len(U) == 3
    e = U.meta["energy"]
    assert all(a >= b for a, b in zip(e, e[1:]))
    assert divergence_residual(U.snapshot(-1)) < 1e-10


def test_unstable_step_rejected(grid16):
    u0 = random_solenoidal(grid16, seed=3, amplitude=1e4)
    with pytest.raises(ValidationError, match="stability"):
        ns_evolve(u0.snapshot(0), FlowParams(nu=1e-3, end_time=1.0, dt=0.5))


def test_compressible_start_rejected(grid16):
    x, _, _ = grid16.mesh()
    data = np.zeros((3,) + grid16.shape)
    data[0] = np.sin(x)
    with pytest.raises(ValidationError, match="divergence"):
        ns_evolve(Snapshot(grid16, 0.0, data), FlowParams(end_time=0.1, dt=0.01))
