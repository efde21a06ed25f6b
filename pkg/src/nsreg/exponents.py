"""Integrability exponent pairs with exact rational bookkeeping."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import ExponentError

INF = math.inf

Number = Union[Fraction, float]


def parse_exponent(value) -> Number:
    """Parse ``3``, ``"9/2"``, ``1.5``, ``"inf"`` into a Fraction (or ``inf``).

    Floats are converted through their shortest decimal representation, so
    ``1.5`` becomes ``3/2`` rather than a binary approximation.
    """
    if isinstance(value, Fraction):
        out = value
    elif isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "infinity", "oo", "∞"):
            return INF
        try:
            out = Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ExponentError(f"cannot parse exponent {value!r}") from exc
    elif isinstance(value, float) and math.isinf(value):
        if value < 0:
            raise ExponentError("exponents must be >= 1")
        return INF
    elif isinstance(value, (int, float)):
        if isinstance(value, float) and math.isnan(value):
            raise ExponentError("exponent is NaN")
        out = Fraction(repr(value)) if isinstance(value, float) else Fraction(value)
    else:
        raise ExponentError(f"cannot parse exponent {value!r}")
    if out < 1:
        raise ExponentError(f"exponents must be >= 1, got {out}")
    return out


def reciprocal(x: Number) -> Fraction:
    """``1/x`` with ``1/inf = 0``."""
    return Fraction(0) if x == INF else 1 / Fraction(x)


def from_reciprocal(y: Fraction) -> Number:
    return INF if y == 0 else 1 / y


def conjugate(x: Number) -> Number:
    """Hölder conjugate: ``1/x + 1/x' = 1``."""
    return from_reciprocal(1 - reciprocal(x))


def as_float(x: Number) -> float:
    return INF if x == INF else float(x)


def fmt(x: Number) -> str:
    if x == INF:
        return "inf"
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class ExponentPair:
    """Spatial exponent ``p`` and temporal exponent ``q``, both in ``[1, inf]``."""

    p: Number
    q: Number

    def __post_init__(self):
        object.__setattr__(self, "p", parse_exponent(self.p))
        object.__setattr__(self, "q", parse_exponent(self.q))

    @classmethod
    def parse(cls, p, q) -> ExponentPair:
        return cls(p, q)

    @property
    def kappa(self) -> Fraction:
        """``3/p + 2/q``."""
        return 3 * reciprocal(self.p) + 2 * reciprocal(self.q)

    @property
    def conjugate(self) -> ExponentPair:
        return ExponentPair(conjugate(self.p), conjugate(self.q))

    @property
    def pf(self) -> float:
        return as_float(self.p)

    @property
    def qf(self) -> float:
        return as_float(self.q)

    def transform(self, fp, fq) -> ExponentPair:
        """Apply maps to the reciprocals: ``1/p -> fp(1/p)``, ``1/q -> fq(1/q)``."""
        return ExponentPair(from_reciprocal(fp(reciprocal(self.p))), from_reciprocal(fq(reciprocal(self.q))))

    def __str__(self) -> str:
        return f"({fmt(self.p)},{fmt(self.q)})"
