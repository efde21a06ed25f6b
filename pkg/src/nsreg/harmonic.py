"""Harmonic sample functions and the quadratures used to test them.

The polynomial library is built from the Cauchy-Kovalevskaya expansion: for
``g = x^a y^b`` and ``c`` in ``{0, 1}``::

    f = sum_k (-1)^k z^(2k+c) / (2k+c)!  Lap_h^k g

is harmonic with ``f = g`` (``c = 0``) or ``d_z f = g`` (``c = 1``) on
``z = 0``.  The 49 samples with ``a + b + c <= 6`` form a basis of harmonic
polynomials of degree at most 6.  Coefficients are exact rationals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import ValidationError

Poly = dict  # {(i, j, k): Fraction}


def _lap_h(poly: Poly) -> Poly:
    out: Poly = {}
    for (i, j, k), c in poly.items():
        if i >= 2:
            key = (i - 2, j, k)
            out[key] = out.get(key, 0) + c * i * (i - 1)
        if j >= 2:
            key = (i, j - 2, k)
            out[key] = out.get(key, 0) + c * j * (j - 1)
    return {k: v for k, v in out.items() if v != 0}


def _derivative(poly: Poly, axis: int) -> Poly:
    out: Poly = {}
    for e, c in poly.items():
        if e[axis] == 0:
            continue
        key = list(e)
        key[axis] -= 1
        key = tuple(key)
        out[key] = out.get(key, 0) + c * e[axis]
    return {k: v for k, v in out.items() if v != 0}


def laplacian(poly: Poly) -> Poly:
    out: Poly = {}
    for axis in range(3):
        for e, c in _derivative(_derivative(poly, axis), axis).items():
            out[e] = out.get(e, 0) + c
    return {k: v for k, v in out.items() if v != 0}


def harmonic_extension(a: int, b: int, c: int) -> Poly:
    """Harmonic polynomial with trace ``x^a y^b`` (c=0) or normal derivative ``x^a y^b`` (c=1)."""
    if c not in (0, 1):
        raise ValidationError("c must be 0 or 1")
    g: Poly = {(a, b, 0): Fraction(1)}
    out: Poly = {}
    k = 0
    while g:
        power = 2 * k + c
        coef = Fraction((-1) ** k, math.factorial(power))
        for (i, j, _), v in g.items():
            key = (i, j, power)
            out[key] = out.get(key, 0) + coef * v
        g = _lap_h(g)
        k += 1
    return {k: v for k, v in out.items() if v != 0}


def _eval_poly(poly: Poly, x, y, z):
    x, y, z = np.broadcast_arrays(*(np.asarray(a, dtype=np.float64) for a in (x, y, z)))
    out = np.zeros(x.shape)
    for (i, j, k), c in poly.items():
        out = out + float(c) * x**i * y**j * z**k
    return out


def _interval_mean(poly: Poly, axis: int) -> Poly:
    """Average over ``[-1, 1]`` in ``axis`` (the variable disappears)."""
    out: Poly = {}
    for e, c in poly.items():
        if e[axis] % 2:
            continue
        key = list(e)
        key[axis] = 0
        key = tuple(key)
        out[key] = out.get(key, 0) + c / (e[axis] + 1)
    return {k: v for k, v in out.items() if v != 0}


class HarmonicSample:
    """A function harmonic on the cube ``[-1, 1]^3`` with its vertical and horizontal averages.

    ``P3 f(x_h) = 1/2 int_{-1}^{1} f dx3`` and
    ``Ph f(x3) = 1/4 int int_{[-1,1]^2} f dx_h``.
    """

    name: str

    def value(self, x, y, z):
        raise NotImplementedError

    def grad(self, x, y, z):
        raise NotImplementedError

    def p3(self, x, y):
        raise NotImplementedError

    def ph(self, z):
        raise NotImplementedError

    def harmonic_residual(self) -> float:
        raise NotImplementedError


class PolynomialSample(HarmonicSample):
    def __init__(self, poly: Poly, name: str):
        self.poly = {k: Fraction(v) for k, v in poly.items() if v != 0}
        self.name = name
        self.degree = max((sum(e) for e in self.poly), default=0)
        self._grad = [_derivative(self.poly, a) for a in range(3)]
        self._p3 = _interval_mean(self.poly, 2)
        self._ph = _interval_mean(_interval_mean(self.poly, 0), 1)

    def value(self, x, y, z):
        return _eval_poly(self.poly, x, y, z)

    def grad(self, x, y, z):
        return [_eval_poly(g, x, y, z) for g in self._grad]

    def p3(self, x, y):
        return _eval_poly(self._p3, x, y, 0.0)

    def ph(self, z):
        return _eval_poly(self._ph, 0.0, 0.0, z)

    def harmonic_residual(self) -> float:
        """Largest coefficient of ``Lap f`` (exactly zero for a harmonic polynomial)."""
        return float(max((abs(v) for v in laplacian(self.poly).values()), default=0))


class PointSourceSample(HarmonicSample):
    """``1 / |x - y0|`` with the pole outside the cube (``max |y0_i| > 1``)."""

    def __init__(self, pole, name: str | None = None):
        self.pole = np.asarray(pole, dtype=np.float64)
        if np.max(np.abs(self.pole)) <= 1.0:
            raise ValidationError("the pole must lie outside the cube [-1, 1]^3")
        self.name = name or "source({:g},{:g},{:g})".format(*self.pole)
        self._gl = np.polynomial.legendre.leggauss(64)

    def value(self, x, y, z):
        p = self.pole
        return 1.0 / np.sqrt((x - p[0]) ** 2 + (y - p[1]) ** 2 + (z - p[2]) ** 2)

    def grad(self, x, y, z):
        p = self.pole
        d = [x - p[0], y - p[1], z - p[2]]
        r3 = (d[0] ** 2 + d[1] ** 2 + d[2] ** 2) ** 1.5
        return [-a / r3 for a in d]

    def p3(self, x, y):
        nodes, weights = self._gl
        x = np.asarray(x, dtype=np.float64)[..., None]
        y = np.asarray(y, dtype=np.float64)[..., None]
        return 0.5 * (self.value(x, y, nodes) * weights).sum(axis=-1)

    def ph(self, z):
        nodes, weights = self._gl
        z = np.asarray(z, dtype=np.float64)
        levels, inverse = np.unique(z, return_inverse=True)
        out = np.empty(levels.size)
        for n, level in enumerate(levels):
            vals = self.value(nodes[:, None], nodes[None, :], level)
            out[n] = 0.25 * weights @ vals @ weights
        return out[inverse].reshape(z.shape)

    def harmonic_residual(self) -> float:
        """Fourth-order finite-difference Laplacian at cube sample points, relative to ``max|f|``."""
        h = 2e-3
        pts = np.linspace(-1.0, 1.0, 5)
        X, Y, Z = np.meshgrid(pts, pts, pts, indexing="ij")
        lap = np.zeros(X.shape)
        c = {0: -30.0, 1: 16.0, 2: -1.0}
        for axis in range(3):
            for s, w in c.items():
                for sign in ((1,) if s == 0 else (1, -1)):
                    off = [0.0, 0.0, 0.0]
                    off[axis] = sign * s * h
                    lap += w * self.value(X + off[0], Y + off[1], Z + off[2])
        lap /= 12.0 * h * h
        return float(np.abs(lap).max() / np.abs(self.value(X, Y, Z)).max())


def polynomial_library(max_degree: int = 6) -> list[PolynomialSample]:
    """Cauchy-Kovalevskaya basis of harmonic polynomials of degree ``<= max_degree``."""
    out = []
    for d in range(max_degree + 1):
        for c in (0, 1):
            for a in range(d - c, -1, -1):
                b = d - c - a
                if b < 0:
                    continue
                out.append(PolynomialSample(harmonic_extension(a, b, c), f"H[{a},{b},{c}]"))
    return out


def point_source_library() -> list[PointSourceSample]:
    """Point sources at distance about 2 outside each face direction and a corner."""
    poles = [(2.0, 0.0, 0.0), (0.0, 0.0, 2.0), (1.5, 1.5, 0.5), (1.3, -1.2, 1.4)]
    return [PointSourceSample(p) for p in poles]


def monomial(i: int, j: int, k: int) -> PolynomialSample:
    """``x^i y^j z^k`` (harmonic only for special exponents; validated downstream)."""
    return PolynomialSample({(i, j, k): Fraction(1)}, f"x^{i}y^{j}z^{k}")


# -- quadrature on balls --------------------------------------------------------------


@lru_cache(maxsize=16)
def ball_rule(resolution: int):
    """Product rule on the unit ball: Gauss-Legendre in ``r`` and in ``cos(theta)``
    (split at the equator) and the periodic trapezoid rule in ``phi``.
    Returns points ``(x, y, z)`` and weights (summing to ``4 pi / 3``).
    """
    n = int(resolution)
    rn, rw = np.polynomial.legendre.leggauss(n)
    r = 0.5 * (rn + 1.0)
    wr = 0.5 * rw * r**2
    mn, mw = np.polynomial.legendre.leggauss(n)
    mu = np.concatenate([0.5 * (mn - 1.0), 0.5 * (mn + 1.0)])
    wm = np.concatenate([0.5 * mw, 0.5 * mw])
    nphi = 4 * n
    phi = 2.0 * np.pi * np.arange(nphi) / nphi
    wphi = np.full(nphi, 2.0 * np.pi / nphi)
    R, MU, PHI = np.meshgrid(r, mu, phi, indexing="ij")
    W = wr[:, None, None] * wm[None, :, None] * wphi[None, None, :]
    s = np.sqrt(1.0 - MU**2)
    pts = (R * s * np.cos(PHI), R * s * np.sin(PHI), R * MU)
    out = tuple(a.ravel() for a in pts) + (W.ravel(),)
    for a in out:
        a.setflags(write=False)
    return out


@lru_cache(maxsize=16)
def sphere_lattice(resolution: int, radius: float = 0.5):
    """Points on ``|x| = radius`` containing the poles, the equator and ``phi = k pi/4``."""
    n = 8 * int(resolution)
    theta = np.pi * np.arange(n + 1) / n
    phi = 2.0 * np.pi * np.arange(2 * n) / (2 * n)
    T, P = np.meshgrid(theta, phi, indexing="ij")
    out = (
        radius * np.sin(T) * np.cos(P),
        radius * np.sin(T) * np.sin(P),
        radius * np.cos(T),
    )
    out = tuple(a.ravel() for a in out)
    for a in out:
        a.setflags(write=False)
    return out


@dataclass(frozen=True)
class HarmonicTerms:
    """``sup_{B_1/2} |d3 f|``, ``int_{B_1} |f - P3 f|``, ``sup_{B_1/2} |grad_h f|``, ``int_{B_1} |f - Ph f|``."""

    sup_d3: float
    int_vertical: float
    sup_grad_h: float
    int_horizontal: float


def harmonic_terms(f: HarmonicSample, resolution: int = 24) -> HarmonicTerms:
    """Both sides of the two harmonic estimates on ``B_1`` / ``B_{1/2}``.

    The suprema are taken on the sphere ``|x| = 1/2``: ``d3 f`` is harmonic
    and ``|grad_h f|`` subharmonic, so both attain their maxima over the
    closed ball on its boundary.
    """
    x, y, z, w = ball_rule(resolution)
    fx = f.value(x, y, z)
    int_v = float(np.dot(w, np.abs(fx - f.p3(x, y))))
    int_h = float(np.dot(w, np.abs(fx - f.ph(z))))
    sx, sy, sz = sphere_lattice(resolution)
    g = f.grad(sx, sy, sz)
    sup_d3 = float(np.max(np.abs(g[2])))
    sup_h = float(np.max(np.sqrt(g[0] ** 2 + g[1] ** 2)))
    return HarmonicTerms(sup_d3, int_v, sup_h, int_h)
