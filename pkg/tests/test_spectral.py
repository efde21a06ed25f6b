import numpy as np
import pytest

from nsreg import Snapshot, ValidationError, differential_op, leray_project
from nsreg.spectral import divergence_residual, interpolate


def test_derivatives_of_trig(grid16):
    x, y, z = grid16.mesh()
    f = Snapshot(grid16, 0.0, np.sin(x) * np.cos(2 * y) * np.sin(3 * z), kind="scalar")
    g = differential_op(f, "grad").data
    assert np.allclose(g[0], np.cos(x) * np.cos(2 * y) * np.sin(3 * z), atol=1e-12)
    assert np.allclose(g[1], -2 * np.sin(x) * np.sin(2 * y) * np.sin(3 * z), atol=1e-12)
    assert np.allclose(differential_op(f, "d3").data[0], g[2], atol=1e-12)
    assert np.allclose(differential_op(f, "laplacian").data[0], -14 * f.data[0], atol=1e-11)


def test_curl_and_div(grid16):
    x, y, z = grid16.mesh()
    u = Snapshot(grid16, 0.0, np.stack([np.sin(y), np.sin(z), np.sin(x)]))
    w = differential_op(u, "curl")
    assert w.kind == "vorticity"
    assert np.allclose(w.data, -np.stack([np.cos(z), np.cos(x), np.cos(y)]), atol=1e-12)
    assert np.abs(differential_op(w, "div").data).max() < 1e-12


def test_leray_projection_is_idempotent(grid16, rng):
    v = Snapshot(grid16, 0.0, rng.standard_normal((3,) + grid16.shape))
    p1 = leray_project(v)
    p2 = leray_project(p1)
    assert divergence_residual(p1) < 1e-10
    assert np.allclose(p1.data, p2.data, atol=1e-12)


def test_unknown_operator(grid16):
    with pytest.raises(ValidationError):
        differential_op(Snapshot(grid16, 0.0, np.zeros(grid16.shape), kind="scalar"), "hessian")


def test_interpolation_reproduces_nodes_and_modes(grid16):
    x, y, z = grid16.mesh()
    a = np.cos(x + 2 * y) * np.sin(z)
    spec = grid16.fft(a[None])
    ax = grid16.axis()
    assert np.allclose(interpolate(spec, grid16, ax, ax, ax)[0], a, atol=1e-12)
    s = np.array([0.123, 1.7])
    got = interpolate(spec, grid16, s, s, s)[0]
    S1, S2, S3 = np.meshgrid(s, s, s, indexing="ij")
    assert np.allclose(got, np.cos(S1 + 2 * S2) * np.sin(S3), atol=1e-12)
