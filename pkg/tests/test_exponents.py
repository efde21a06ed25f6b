from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from nsreg import ExponentError, ExponentPair
from nsreg.exponents import INF, conjugate, fmt, parse_exponent, reciprocal

finite = st.fractions(min_value=1, max_value=50, max_denominator=12)
exponent = st.one_of(finite, st.just(INF))


@pytest.mark.parametrize(
    "text, expected",
    [("3", Fraction(3)), ("9/2", Fraction(9, 2)), (1.5, Fraction(3, 2)), ("inf", INF), (float("inf"), INF)],
)
def test_parse(text, expected):
    assert parse_exponent(text) == expected


@pytest.mark.parametrize("bad", ["0.5", "abc", "1/0", float("nan"), -2, None])
def test_parse_rejects(bad):
    with pytest.raises(ExponentError):
        parse_exponent(bad)


@given(exponent)
def test_conjugate_is_an_involution(p):
    assert conjugate(conjugate(p)) == p
    assert reciprocal(p) + reciprocal(conjugate(p)) == 1


@given(exponent, exponent)
def test_kappa_is_exact(p, q):
    pair = ExponentPair(p, q)
    assert pair.kappa == 3 * reciprocal(p) + 2 * reciprocal(q)
    assert ExponentPair(fmt(p), fmt(q)) == pair


def test_serrin_pairs():
    assert ExponentPair(9, 3).kappa == 1
    assert ExponentPair(3, "inf").kappa == 1
    assert ExponentPair(3, 2).kappa == 2
    assert str(ExponentPair("9/2", INF)) == "(9/2,inf)"
