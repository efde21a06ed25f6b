import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nsreg import kernels

BACKENDS = [kernels.python_backend]
if kernels.compiled_backend is not None:
    BACKENDS.append(kernels.compiled_backend)


def _stencil(rng, n=12, m=200, ncomp=3):
    values = np.ascontiguousarray(rng.standard_normal((ncomp, n, n, n)))
    idx = [np.ascontiguousarray(rng.integers(0, n, m).astype(np.intp)) for _ in range(3)]
    w = np.ascontiguousarray(rng.random(m))
    return values, idx, w


def test_backend_selected():
    assert kernels.BACKEND in ("cython", "python")
    if kernels.BACKEND == "cython":
        assert kernels.power_sum is kernels.compiled_backend.power_sum


@pytest.mark.parametrize("backend", BACKENDS, ids=lambda b: b.__name__.rsplit(".", 1)[-1])
@pytest.mark.parametrize("p", [1.0, 2.0, 3.0, 4.5])
def test_power_sum_matches_reference(backend, p, rng):
    values, (i, j, k), w = _stencil(rng)
    ref = np.dot(w, np.linalg.norm(values[:, i, j, k], axis=0) ** p)
    assert np.isclose(backend.power_sum(values, i, j, k, w, p), ref, rtol=1e-12)


@pytest.mark.parametrize("backend", BACKENDS, ids=lambda b: b.__name__.rsplit(".", 1)[-1])
def test_other_kernels_match_reference(backend, rng):
    values, (i, j, k), w = _stencil(rng)
    assert np.isclose(backend.max_norm(values, i, j, k), np.linalg.norm(values[:, i, j, k], axis=0).max())
    assert backend.max_norm(values, i[:0], j[:0], k[:0]) == 0.0
    scalar = np.ascontiguousarray(values[0])
    assert np.isclose(backend.weighted_sum(scalar, i, j, k, w), np.dot(w, scalar[i, j, k]))
    assert np.allclose(backend.slice_sums(scalar, i, j, w), w @ scalar[i, j, :])


@pytest.mark.skipif(kernels.compiled_backend is None, reason="compiled extension not built")
@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(1.0, 8.0))
def test_backends_agree(seed, p):
    values, (i, j, k), w = _stencil(np.random.default_rng(seed), n=8, m=64)
    a = kernels.python_backend.power_sum(values, i, j, k, w, p)
    b = kernels.compiled_backend.power_sum(values, i, j, k, w, p)
    assert np.isclose(a, b, rtol=1e-12)
