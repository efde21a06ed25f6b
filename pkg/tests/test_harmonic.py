import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nsreg import ValidationError, check_harmonic_lemma
from nsreg.harmonic import (
    PointSourceSample,
    ball_rule,
    harmonic_extension,
    laplacian,
    monomial,
    point_source_library,
    polynomial_library,
)


def test_library_is_a_harmonic_basis():
    lib = polynomial_library(6)
    # dim of harmonic polynomials of degree <= 6 is sum (2d + 1) = 49
    assert len(lib) == 49
    assert all(f.harmonic_residual() == 0 for f in lib)
    assert max(f.degree for f in lib) == 6


@given(st.integers(0, 5), st.integers(0, 5), st.sampled_from([0, 1]))
def test_extension_traces(a, b, c):
    poly = harmonic_extension(a, b, c)
    assert laplacian(poly) == {}
    trace = {k: v for k, v in poly.items() if k[2] == c}
    assert trace == {(a, b, c): Fraction(1)}


def test_ball_rule_volume_and_moments():
    x, y, z, w = ball_rule(16)
    assert w.sum() == pytest.approx(4 * math.pi / 3, rel=1e-13)
    assert np.dot(w, z**2) == pytest.approx(4 * math.pi / 15, rel=1e-13)
    assert np.dot(w, np.abs(z)) == pytest.approx(math.pi / 2, rel=1e-13)


def test_point_sources_are_harmonic():
    for f in point_source_library():
        assert f.harmonic_residual() < 1e-6
    with pytest.raises(ValidationError):
        PointSourceSample((0.5, 0.0, 0.0))


def test_vertical_coordinate_constant():
    vertical, horizontal = check_harmonic_lemma(monomial(0, 0, 1))
    assert vertical.lhs == pytest.approx(1.0)
    assert vertical.rhs == pytest.approx(math.pi / 2, rel=1e-12)
    assert vertical.implied_constant == pytest.approx(2 / math.pi, abs=1e-3)
    assert horizontal.degenerate


def test_constant_is_degenerate():
    vertical, horizontal = check_harmonic_lemma(monomial(0, 0, 0))
    assert vertical.degenerate and horizontal.degenerate


def test_triple_product():
    # int_{B_1} |x y z| = 1/6
    vertical, _ = check_harmonic_lemma(monomial(1, 1, 1))
    assert vertical.lhs == pytest.approx(1 / 8, rel=1e-12)
    assert vertical.rhs == pytest.approx(1 / 6, rel=5e-3)
    assert math.isfinite(vertical.implied_constant)


def test_non_harmonic_rejected():
    with pytest.raises(ValidationError):
        check_harmonic_lemma(monomial(2, 0, 0))


@settings(max_examples=10, deadline=None)
@given(st.sampled_from(polynomial_library(4)), st.floats(0.1, 10.0))
def test_constants_are_homogeneous(f, scale):
    from nsreg.harmonic import PolynomialSample

    g = PolynomialSample({k: v * Fraction(scale) for k, v in f.poly.items()}, f.name)
    for a, b in zip(check_harmonic_lemma(f, resolution=12), check_harmonic_lemma(g, resolution=12)):
        assert a.degenerate == b.degenerate
        if not a.degenerate:
            assert b.implied_constant == pytest.approx(a.implied_constant, rel=1e-9)
