"""Numerical checks of the inequalities behind the regularity criteria.

Each check evaluates the left side and every right-hand term of one displayed
inequality (scale-ratio prefactors included) and reports the implied constant
``lhs / sum(rhs)``.  Constants are measured outputs: a check "holds" when its
constant is finite, stable under refinement and invariant under the scaling
``u -> lam u(lam x, lam^2 t)``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import ExponentError, NumericalError, ScaleError, ValidationError
from .exponents import INF, ExponentPair, fmt, parse_exponent, reciprocal
from .field import Snapshot, SpaceTimeField, from_snapshots
from .harmonic import HarmonicSample, harmonic_terms
from .pressure import Cutoff, _center_mesh, decompose_sec3, pressure_field
from .quantities import mixed_norm, param_hash, quantity
from .regions import CylinderSpec, time_plan
from .spectral import apply_op, differentiate

__all__ = [
    "InequalityCheck",
    "TestFunction",
    "build_test_function",
    "local_energy_terms",
    "local_energy_residual",
    "sobolev_exponent",
    "check_interpolation",
    "check_energy_bound",
    "check_pressure_decay",
    "check_global_bounds",
    "check_harmonic_lemma",
    "check_poincare_reduction",
    "checks_to_csv",
    "checks_to_json",
    "ENERGY_VARIANTS",
    "DECAY_VARIANTS",
]

ENERGY_VARIANTS = ("case1", "grad", "cylinder")
DECAY_VARIANTS = ("L33", "L37", "L44")
HARMONIC_TOL = 1e-8


# -- result type ---------------------------------------------------------------------


@dataclass
class InequalityCheck:
    """``lhs <= C * sum(rhs_terms)`` with the measured ``C``.

    ``implied_constant`` is 0 when ``lhs = 0`` (degenerate when the right side
    vanishes too) and ``inf`` when only the right side vanishes.
    """

    name: str
    lhs: float
    rhs_terms: dict
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.lhs = float(self.lhs)
        self.rhs_terms = {str(k): float(v) for k, v in self.rhs_terms.items()}
        for label, value in [("lhs", self.lhs)] + list(self.rhs_terms.items()):
            if not math.isfinite(value):
                raise NumericalError(f"{self.name}: term {label} is not finite ({value})")
            if value < 0:
                raise NumericalError(f"{self.name}: term {label} is negative ({value})")

    @property
    def rhs(self) -> float:
        return float(sum(self.rhs_terms.values()))

    @property
    def degenerate(self) -> bool:
        return self.lhs == 0.0 and self.rhs == 0.0

    @property
    def implied_constant(self) -> float:
        if self.lhs == 0.0:
            return 0.0
        rhs = self.rhs
        return INF if rhs == 0.0 else self.lhs / rhs

    def to_dict(self) -> dict:
        """Plain JSON-safe dict (``inf`` becomes the string ``"inf"``)."""
        return _jsonable({
            "name": self.name,
            "lhs": self.lhs,
            "rhs_terms": dict(self.rhs_terms),
            "rhs": self.rhs,
            "implied_constant": self.implied_constant,
            "degenerate": self.degenerate,
            "meta": self.meta,
        })


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return fmt(obj)
    if isinstance(obj, float) and math.isinf(obj):
        return "inf"
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, (str, int, float, bool)) or obj is None:
        return obj
    return str(obj)


CSV_COLUMNS = ("name", "lhs", "rhs", "rhs_terms", "implied_constant", "degenerate", "field_id", "n", "param_hash")


def checks_to_csv(checks: Sequence[InequalityCheck]) -> str:
    """One row per check; ``rhs_terms`` is ``name=value`` joined by ``;``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for c in checks:
        terms = ";".join(f"{k}={v!r}" for k, v in c.rhs_terms.items())
        meta = _jsonable(c.meta)
        w.writerow(
            [
                c.name,
                repr(c.lhs),
                repr(c.rhs),
                terms,
                repr(c.implied_constant),
                int(c.degenerate),
                meta.get("field_id", ""),
                meta.get("n", ""),
                param_hash(meta),
            ]
        )
    return buf.getvalue()


def checks_to_json(checks: Sequence[InequalityCheck]) -> str:
    return json.dumps([c.to_dict() for c in checks], indent=2, sort_keys=True)


# -- exponent bookkeeping -----------------------------------------------------------


def _pair(pq) -> ExponentPair:
    if isinstance(pq, ExponentPair):
        return pq
    return ExponentPair(*pq)


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ExponentError(message)


def _half_shift(pq: ExponentPair) -> ExponentPair:
    """``(2p/(p+2), 2q/(q+2))``: reciprocals shifted by 1/2."""
    out = pq.transform(lambda a: a + Fraction(1, 2), lambda b: b + Fraction(1, 2))
    _require(reciprocal(out.p) == reciprocal(pq.p) + Fraction(1, 2), "1/m' = 1/p + 1/2 failed")
    return out


def _mean_with_one(pq: ExponentPair) -> ExponentPair:
    """``(2p/(p+1), 2q/(q+1))``: reciprocals averaged with 1."""
    out = pq.transform(lambda a: (a + 1) / 2, lambda b: (b + 1) / 2)
    _require(2 * reciprocal(out.q) == reciprocal(pq.q) + 1, "2q/(q+1) bookkeeping failed")
    return out


def _doubled_conjugate(pq: ExponentPair) -> ExponentPair:
    """``(2p', 2q')``."""
    c = pq.conjugate
    _require(reciprocal(c.p) + reciprocal(pq.p) == 1, "1/p + 1/p' = 1 failed")
    return c.transform(lambda a: a / 2, lambda b: b / 2)


def _exponents_meta(**pairs) -> dict:
    return {k: str(v) for k, v in pairs.items()}


# -- shared source fields -----------------------------------------------------------


class _Sources:
    """Velocity, pressure and derived sources with memoized quantities."""

    def __init__(self, u: SpaceTimeField, pi: SpaceTimeField | None, center, t0, geometry: str):
        if not isinstance(u, SpaceTimeField) or u.kind != "velocity":
            raise ValidationError("the checks need a velocity SpaceTimeField")
        if pi is None:
            pi = pressure_field(u)
        if pi.grid != u.grid or pi.times.shape != u.times.shape or np.any(pi.times != u.times):
            raise ValidationError("velocity and pressure must share grid and sample times")
        if pi.ncomp != 1:
            raise ValidationError("pressure must be a scalar field")
        self.u = u
        self.pi = pi
        self.center = tuple(float(c) for c in center)
        self.t0 = float(u.times[-1]) if t0 is None else float(t0)
        self.geometry = geometry
        self._fields: dict = {}
        self._values: dict = {}

    def field(self, name: str) -> SpaceTimeField:
        hit = self._fields.get(name)
        if hit is not None:
            return hit
        u, pi = self.u, self.pi
        if name == "u":
            out = u
        elif name == "pi":
            out = pi
        elif name == "uh":
            out = u.horizontal()
        elif name == "grad_uh":
            out = differentiate(self.field("uh"), "grad")
        elif name == "grad_h_pi":
            out = differentiate(pi, "grad_h")
        elif name == "d3_pi":
            out = differentiate(pi, "d3")
        elif name in ("pi1", "pi3", "d3pi4"):
            dec = self._fields.get("_sec3") or decompose_sec3(u)
            self._fields["_sec3"] = dec
            out = getattr(dec, name)
        else:
            raise KeyError(name)
        self._fields[name] = out
        return out

    def cyl(self, r: float) -> CylinderSpec:
        return CylinderSpec(r, self.center, self.t0, self.geometry)

    @property
    def mean_mode(self) -> str:
        return "ball_mean" if self.geometry == "ball" else "horizontal_slice"

    def q(self, kind: str, source: str, pq: ExponentPair | None, r: float) -> float:
        mean = self.mean_mode if kind in ("Gtilde", "Htilde") else "none"
        key = (kind, source, None if pq is None else (pq.p, pq.q), float(r))
        hit = self._values.get(key)
        if hit is None:
            hit = quantity(kind, self.field(source), pq, self.cyl(r), mean)
            self._values[key] = hit
        return hit

    def meta(self, **extra) -> dict:
        out = {
            "field_id": self.u.field_id,
            "n": self.u.grid.n,
            "box_length": self.u.grid.box_length,
            "center": list(self.center),
            "t0": self.t0,
            "geometry": self.geometry,
        }
        out.update(extra)
        return out


def _check_ratio(r: float, rho: float, factor: int) -> None:
    # the closed endpoint factor * r = rho is admitted (the dyadic ladders land on it)
    if not (r > 0 and rho > 0 and factor * r <= rho * (1 + 1e-12)):
        raise ScaleError(f"scales must satisfy 0 < {factor}r <= rho, got r={r:g}, rho={rho:g}")


# -- Sobolev interpolation ------------------------------------------------------------


def sobolev_exponent(ell) -> Fraction:
    """``a = 3(ell - 2)/4`` for ``2 <= ell <= 6`` (exact)."""
    ell = parse_exponent(ell)
    if ell == INF or not (2 <= ell <= 6):
        raise ExponentError(f"interpolation needs 2 <= ell <= 6, got {fmt(ell)}")
    a = Fraction(3, 4) * (Fraction(ell) - 2)
    _require(4 * a == 3 * (ell - 2), "a = 3(ell-2)/4 failed")
    return a


def check_interpolation(
    f,
    ell=None,
    geometry: str = "whole_box",
    r: float | None = None,
    center=(0.0, 0.0, 0.0),
    pq=None,
) -> InequalityCheck:
    """Sobolev interpolation ``int |f|^ell <= C (int |grad f|^2)^a (int |f|^2)^(ell/2 - a)``.

    ``geometry`` is ``"whole_box"`` (grid sums over the periodic box),
    ``"ball"`` (integrals over ``B_r(center)`` of a single snapshot) or
    ``"cylinder"``, the localized form ``G(u, 2p', 2q'; r)^2 <= C (E(u, 2r) +
    A(u, 2r))`` on vertical cylinders with ``ell = 2p'``; there ``f`` is a
    velocity SpaceTimeField and ``pq`` is required.
    """
    if geometry == "cylinder":
        return _interpolation_cylinder(f, pq, r, center)
    if ell is None:
        raise ValidationError("ell is required")
    a = sobolev_exponent(ell)
    ell = parse_exponent(ell)
    ellf, af = float(ell), float(a)
    if isinstance(f, SpaceTimeField):
        if len(f) != 1:
            raise ValidationError("interpolation checks take a single snapshot")
        F = f
    elif isinstance(f, Snapshot):
        F = from_snapshots([f], dt=0.0, field_id="snapshot")
    else:
        raise ValidationError("f must be a Snapshot or a one-sample SpaceTimeField")
    grid = F.grid
    meta = {"ell": fmt(ell), "a": fmt(a), "geometry": geometry, "field_id": F.field_id, "n": grid.n}
    if geometry == "whole_box":
        values = F.values(0)
        mag2 = np.sum(values * values, axis=0)
        grad = apply_op(values, grid, "grad", spectrum=F.spectrum(0))
        dv = grid.cell_volume
        lhs = float(np.sum(mag2 ** (0.5 * ellf)) * dv)
        l2 = float(np.sum(mag2) * dv)
        g2 = float(np.sum(grad * grad) * dv)
    elif geometry == "ball":
        if r is None:
            raise ValidationError("the ball geometry needs a radius")
        cyl = CylinderSpec(r, center)
        single = ExponentPair(ell, INF)
        lhs = mixed_norm(F, single, cyl) ** ellf
        l2 = mixed_norm(F, ExponentPair(2, INF), cyl) ** 2
        g2 = mixed_norm(differentiate(F, "grad"), ExponentPair(2, INF), cyl) ** 2
        meta["r"] = float(r)
    else:
        raise ValidationError(f"unknown interpolation geometry {geometry!r}")
    rhs = g2**af * l2 ** (0.5 * ellf - af)
    if lhs == 0.0:
        rhs = 0.0 if l2 == 0.0 else rhs
    return InequalityCheck(f"interpolation[{geometry},ell={fmt(ell)}]", lhs, {"sobolev": rhs}, meta)


def _interpolation_cylinder(u, pq, r, center) -> InequalityCheck:
    if pq is None or r is None:
        raise ValidationError("the cylinder variant needs pq and r")
    pq = _pair(pq)
    doubled = _doubled_conjugate(pq)
    _require(pq.p != INF and Fraction(pq.p) >= Fraction(3, 2),
             f"the cylinder variant needs 2p' <= 6, i.e. p >= 3/2 (got p={fmt(pq.p)})")
    ell = doubled.p
    a = sobolev_exponent(ell)
    src = _Sources(u, None, center, None, "vertical")
    lhs = src.q("G", "u", doubled, r) ** 2
    rhs = {"E(2r)": src.q("E", "u", None, 2 * r), "A(2r)": src.q("A", "u", None, 2 * r)}
    meta = src.meta(r=float(r), ell=fmt(ell), a=fmt(a), **_exponents_meta(pq=pq, doubled=doubled))
    return InequalityCheck(f"interpolation[cylinder,{pq}]", lhs, rhs, meta)


# -- local energy inequality ----------------------------------------------------------


@dataclass(frozen=True)
class TestFunction:
    """``phi = Gamma * zeta``: a backward heat kernel times a cutoff.

    ``heat3``: ``Gamma = (4 pi tau)^(-3/2) exp(-|x - x0|^2 / (4 tau))``;
    ``heat2h``: ``Gamma = (4 pi tau)^(-1) exp(-|x_h - x0_h|^2 / (4 tau))``;
    both with ``tau = r^2 + t0 - t``, so ``d_t Gamma + Lap Gamma = 0``.
    ``zeta`` is the ball (``heat3``) or horizontal (``heat2h``) cutoff of
    radius ``rho``, vanishing for ``t <= t0 - rho^2``.
    """

    __test__ = False  # not a pytest class

    kind: str
    r: float
    rho: float
    center: tuple = (0.0, 0.0, 0.0)
    t0: float = 0.0

    @property
    def cutoff(self) -> Cutoff:
        return Cutoff(self.rho, tuple(self.center), self.t0, "ball" if self.kind == "heat3" else "horizontal")

    @property
    def dim(self) -> int:
        return 3 if self.kind == "heat3" else 2

    def kernel(self, d, t):
        """``Gamma`` and ``grad Gamma`` at offsets ``d = x - x0``."""
        tau = self.r**2 + self.t0 - t
        if tau <= 0:
            raise ValidationError(f"t={t:g} lies beyond the kernel pole")
        dims = d[: self.dim]
        s2 = sum(a * a for a in dims)
        g = (4.0 * math.pi * tau) ** (-0.5 * self.dim) * np.exp(-s2 / (4.0 * tau))
        grad = [-a / (2.0 * tau) * g for a in dims]
        if self.dim == 2:
            grad.append(np.zeros_like(g))
        return g, grad

    def evaluate(self, d, t):
        """``(phi, grad phi, (d_t + Lap) phi)`` at offsets ``d`` and time ``t``."""
        cut = self.cutoff
        c = self.center
        zs, gzs, lzs = cut.spatial_derivatives(d[0] + c[0], d[1] + c[1], d[2] + c[2])
        zt = float(cut.temporal(t))
        dzt = float(cut.temporal_dt(t))
        g, gg = self.kernel(d, t)
        phi = g * zs * zt
        grad = [zt * (zs * gg[a] + g * gzs[a]) for a in range(3)]
        caloric = g * (dzt * zs + zt * lzs) + 2.0 * zt * sum(gg[a] * gzs[a] for a in range(3))
        return phi, grad, caloric

    def caloric_residual(self, x, t, h: float = 1e-3) -> float:
        """Finite-difference ``|d_t Gamma + Lap Gamma| / Gamma`` at a point."""
        x = np.asarray(x, dtype=np.float64)

        def G(y, s):
            return float(self.kernel(list(y), s)[0])

        dt = (G(x, t + h) - G(x, t - h)) / (2 * h)
        lap = 0.0
        for a in range(3):
            e = np.zeros(3)
            e[a] = h
            lap += (G(x + e, t) - 2 * G(x, t) + G(x - e, t)) / h**2
        return abs(dt + lap) / G(x, t)

    def witness(self) -> tuple[float, float]:
        """``min`` and ``max`` of ``r^dim phi`` over ``Q_r`` (closed form).

        Requires ``4r <= rho`` so that ``zeta = 1`` on ``Q_r``.
        """
        if 4 * self.r > self.rho:
            raise ScaleError("the witness needs 4r <= rho")
        k = 0.5 * self.dim
        low = (8.0 * math.pi) ** (-k) * math.exp(-1.0 / 8.0)
        high = (4.0 * math.pi) ** (-k)
        return low, high


def build_test_function(r: float, rho: float, kind: str = "heat3", center=(0.0, 0.0, 0.0), t0: float = 0.0):
    """Test function ``phi = Gamma zeta`` with ``0 < r <= rho``."""
    if kind not in ("heat3", "heat2h"):
        raise ValidationError(f"unknown test function kind {kind!r}")
    if not (0 < r <= rho):
        raise ScaleError(f"need 0 < r <= rho, got r={r:g}, rho={rho:g}")
    return TestFunction(kind, float(r), float(rho), tuple(float(c) for c in center), float(t0))


def local_energy_terms(u: SpaceTimeField, pi: SpaceTimeField | None, phi: TestFunction, t: float | None = None) -> dict:
    """Both sides of the local energy inequality at time ``t`` (default ``phi.t0``).

    ``lhs = int |u|^2 phi (t) + 2 int int |grad u|^2 phi`` and
    ``rhs = int int |u|^2 (d_s phi + Lap phi) + u . grad phi (|u|^2 + 2 pi)``,
    time integrals by the trapezoid rule over samples up to ``t``.
    """
    if not isinstance(phi, TestFunction):
        raise ValidationError("phi must be a TestFunction")
    if u.kind != "velocity":
        raise ValidationError("u must be a velocity field")
    grid = u.grid
    if pi is None:
        pi = pressure_field(u)
    if pi.grid != grid or np.any(pi.times != u.times):
        raise ValidationError("velocity and pressure must share grid and sample times")
    if phi.rho >= 0.5 * grid.box_length:
        raise ValidationError(f"cutoff radius {phi.rho:g} does not fit in the periodic box")
    t = phi.t0 if t is None else float(t)
    if t > phi.t0 + 1e-12:
        raise ValidationError("t must not exceed the kernel time t0")
    start = phi.t0 - phi.rho**2
    tol = 1e-9 * max(u.dt, 1e-300)
    if u.times[0] > start + tol:
        raise ValidationError(
            f"the field starts at {u.times[0]:g}, after the cutoff switches on at {start:g}"
        )
    it = u.time_index(t)
    samples = [i for i in range(it + 1) if u.times[i] >= start - tol]
    if samples[0] > 0 and u.times[samples[0]] > start + tol:
        samples = [samples[0] - 1] + samples
    # restrict to the box enclosing the cutoff support
    offsets = _center_mesh(grid, phi.center)
    sel = []
    for a in range(3):
        o = offsets[a].ravel()
        sel.append(np.flatnonzero(np.abs(o) < phi.rho) if a < phi.dim else np.arange(grid.n))
    box = np.ix_(*sel)
    d = [offsets[a].ravel()[sel[a]].reshape(offsets[a].shape if a >= phi.dim else [-1 if b == a else 1 for b in range(3)])
         for a in range(3)]
    d = [np.broadcast_to(a, tuple(len(s) for s in sel)) for a in d]
    gu = differentiate(u, "grad")
    dv = grid.cell_volume

    def restrict(arr):
        return arr[(slice(None),) + box]

    diss, heat, flux = [], [], []
    for i in samples:
        ti = float(u.times[i])
        v = restrict(u.values(i))
        p = restrict(pi.values(i))[0]
        f, gf, cal = phi.evaluate(d, ti)
        u2 = np.sum(v * v, axis=0)
        g = restrict(gu.values(i))
        diss.append(float(np.sum(np.sum(g * g, axis=0) * f)) * dv)
        heat.append(float(np.sum(u2 * cal)) * dv)
        udg = v[0] * gf[0] + v[1] * gf[1] + v[2] * gf[2]
        flux.append(float(np.sum(udg * (u2 + 2.0 * p))) * dv)
    ts = np.asarray([u.times[i] for i in samples])
    ts = np.maximum(ts, start)

    def trap(vals):
        return float(np.trapezoid(vals, ts)) if len(vals) > 1 else 0.0

    v = restrict(u.values(it))
    f_end, _, _ = phi.evaluate(d, t)
    energy = float(np.sum(np.sum(v * v, axis=0) * f_end)) * dv
    dissipation = 2.0 * trap(diss)
    rhs_heat = trap(heat)
    rhs_flux = trap(flux)
    lhs = energy + dissipation
    rhs = rhs_heat + rhs_flux
    out = {
        "energy": energy,
        "dissipation": dissipation,
        "rhs_heat": rhs_heat,
        "rhs_flux": rhs_flux,
        "lhs": lhs,
        "rhs": rhs,
        "residual": rhs - lhs,
        "samples": len(samples),
    }
    if not all(math.isfinite(x) for x in (lhs, rhs)):
        raise NumericalError("local energy terms are not finite")
    return out


def local_energy_residual(u, pi, phi: TestFunction, t: float | None = None) -> float:
    """``RHS - LHS`` of the local energy inequality (negative means violated)."""
    return local_energy_terms(u, pi, phi, t)["residual"]


# -- local energy bounds --------------------------------------------------------------


def check_energy_bound(
    u: SpaceTimeField,
    pi: SpaceTimeField | None,
    r: float,
    rho: float,
    pq,
    variant: str = "case1",
    center=(0.0, 0.0, 0.0),
    t0: float | None = None,
) -> InequalityCheck:
    """``A(u; r) + E(u; r)`` against the right side of the chosen local energy bound.

    ``case1`` uses the ``pi1, pi3, d3pi4`` split, ``grad`` the ``d3 pi`` and
    ``grad u_h`` form, ``cylinder`` the vertical-cylinder form with disc means.
    """
    if variant not in ENERGY_VARIANTS:
        raise ValidationError(f"unknown variant {variant!r}; choose from {ENERGY_VARIANTS}")
    _check_ratio(r, rho, 4)
    pq = _pair(pq)
    pc = pq.conjugate
    src = _Sources(u, pi, center, t0, "vertical" if variant == "cylinder" else "ball")
    A, E = src.q("A", "u", None, rho), src.q("E", "u", None, rho)
    lhs = src.q("A", "u", None, r) + src.q("E", "u", None, r)
    up, down = rho / r, r / rho
    if variant == "case1":
        shifted = _half_shift(pq)
        _require(shifted.p != INF and shifted.p >= 1, "case1 needs 2p/(p+2) >= 1, i.e. p >= 2")
        G = src.q("G", "uh", pq, rho)
        terms = {
            "decay": down**2 * A,
            "uh_energy": up**2 * G * (A + E + src.q("G1", "grad_h_pi", pc, rho)),
            "pi1_pi3": up**2 * math.sqrt(A + E)
            * (src.q("Htilde", "pi1", ExponentPair(2, 2), rho) + src.q("Htilde", "pi3", ExponentPair(2, 2), rho)),
            "d3pi4": up * math.sqrt(A + E) * src.q("G1", "d3pi4", shifted, rho),
        }
        exps = _exponents_meta(pq=pq, conjugate=pc, d3pi4=shifted)
    elif variant == "grad":
        half = _mean_with_one(pq)
        terms = {
            "decay": down**2 * A,
            "d3pi": up * src.q("G1", "d3_pi", half, rho) * math.sqrt(A + E),
            "gradient": (up * src.q("H", "grad_uh", pq, rho) + up**2 * src.q("G", "uh", pq, rho))
            * (A + E + src.q("Htilde", "pi", pc, rho)),
        }
        exps = _exponents_meta(pq=pq, conjugate=pc, d3pi=half)
    else:
        doubled = _doubled_conjugate(pq)
        terms = {
            "decay": down * A,
            "uh_energy": up**2 * src.q("G", "uh", pq, rho)
            * (src.q("G", "u", doubled, rho) ** 2 + src.q("Htilde", "pi", pc, rho)),
        }
        exps = _exponents_meta(pq=pq, conjugate=pc, doubled=doubled)
    meta = src.meta(r=r, rho=rho, variant=variant, **exps)
    return InequalityCheck(f"energy[{variant}]", lhs, terms, meta)


# -- pressure decay ------------------------------------------------------------------


def check_pressure_decay(
    u: SpaceTimeField,
    pi: SpaceTimeField | None,
    r: float,
    rho: float,
    pq,
    variant: str = "L33",
    center=(0.0, 0.0, 0.0),
    t0: float | None = None,
) -> list[InequalityCheck]:
    """One check per displayed inequality of the chosen pressure decay estimate.

    ``L33``: the four estimates for ``pi1``, ``pi3``, ``grad_h pi`` and
    ``d3pi4``; ``L37``: ``pi`` with ball means and ``d3 pi``; ``L44``: ``pi``
    with horizontal slice means on vertical cylinders.
    """
    if variant not in DECAY_VARIANTS:
        raise ValidationError(f"unknown variant {variant!r}; choose from {DECAY_VARIANTS}")
    _check_ratio(r, rho, 8)
    pq = _pair(pq)
    pc = pq.conjugate
    src = _Sources(u, pi, center, t0, "vertical" if variant == "L44" else "ball")
    up, down = rho / r, r / rho
    p = Fraction(pq.p) if pq.p != INF else None
    out = []

    def emit(name, lhs, terms, **exps):
        meta = src.meta(r=r, rho=rho, variant=variant, **_exponents_meta(pq=pq, **exps))
        out.append(InequalityCheck(f"{variant}[{name}]", lhs, terms, meta))

    if variant == "L33":
        shifted = _half_shift(pq)
        _require(shifted.p >= 1, "the d3pi4 estimate needs p >= 2")
        two = ExponentPair(2, 2)
        one_two = ExponentPair(1, 2)
        A, E = src.q("A", "u", None, rho), src.q("E", "u", None, rho)
        G = src.q("G", "uh", pq, rho)
        for piece in ("pi1", "pi3"):
            emit(
                piece,
                src.q("Htilde", piece, two, r),
                {
                    "quadratic": up**0.5 * G * math.sqrt(A + E),
                    "harmonic": down**2 * src.q("Htilde", piece, one_two, rho),
                },
            )
        q_one = ExponentPair(1, pc.q)
        power = 3 * reciprocal(pc.p) - 1
        emit(
            "grad_h_pi",
            src.q("G1", "grad_h_pi", pc, r),
            {
                "energy": up * (A + E),
                "harmonic": down ** float(power) * src.q("G1", "grad_h_pi", q_one, rho),
            },
            conjugate=pc,
            power=power,
        )
        d_one = ExponentPair(1, shifted.q)
        # (p + 6) / (2p), written through 1/p so that p = inf gives 1/2
        power4 = Fraction(1, 2) + 3 * reciprocal(pq.p)
        if p is not None:
            _require(power4 == (p + 6) / (2 * p), "(p+6)/(2p) bookkeeping failed")
        emit(
            "d3pi4",
            src.q("G1", "d3pi4", shifted, r),
            {
                "quadratic": up * G * math.sqrt(E),
                "harmonic": down ** float(power4) * src.q("G1", "d3pi4", d_one, rho),
            },
            shifted=shifted,
            power=power4,
        )
    elif variant == "L37":
        doubled = _doubled_conjugate(pq)
        half = _mean_with_one(pq)
        Gt = src.q("Gtilde", "u", doubled, rho)
        power = 3 * reciprocal(pc.p)
        emit(
            "pi",
            src.q("Htilde", "pi", pc, r),
            {
                "quadratic": up * Gt**2,
                "harmonic": down ** float(power) * src.q("Htilde", "pi", ExponentPair(1, pc.q), rho),
            },
            conjugate=pc,
            doubled=doubled,
            power=power,
        )
        power3 = 1 + Fraction(3, 2) * reciprocal(pq.p)
        emit(
            "d3_pi",
            src.q("G1", "d3_pi", half, r),
            {
                "quadratic": up**0.5 * Gt * src.q("H", "grad_uh", pq, rho),
                "harmonic": down ** float(power3) * src.q("G1", "d3_pi", ExponentPair(1, half.q), rho),
            },
            half=half,
            doubled=doubled,
            power=power3,
        )
    else:
        doubled = _doubled_conjugate(pq)
        power = 2 * reciprocal(pc.p)
        emit(
            "pi",
            src.q("Htilde", "pi", pc, r),
            {
                "quadratic": up * src.q("Gtilde", "u", doubled, rho) ** 2,
                "harmonic": down ** float(power) * src.q("Htilde", "pi", pc, rho),
            },
            conjugate=pc,
            doubled=doubled,
            power=power,
        )
    return out


# -- global bounds ------------------------------------------------------------------


def energy_norm_squared(u: SpaceTimeField, r0: float, t0: float | None = None) -> float:
    """``r0^-1 (sup_t ||u||^2 + int ||grad u||^2 dt)`` over the box and ``[t0 - r0^2, t0]``."""
    grid = u.grid
    cyl = CylinderSpec(r0, t0=t0).resolve(u)
    plan = time_plan(u, cyl)
    gu = differentiate(u, "grad")
    dv = grid.cell_volume
    sup = max(float(np.sum(u.values(i) ** 2)) * dv for i in plan.samples)
    grads = [float(np.sum(gu.values(i) ** 2)) * dv for i in plan.samples]
    if plan.start is not None:
        a, b, theta = plan.start
        ga = float(np.sum(gu.values(a) ** 2)) * dv
        grads = [(1 - theta) * ga + theta * grads[0]] + grads
    total = float(np.dot(plan.weights, grads))
    return (sup + total) / r0


def check_global_bounds(
    u: SpaceTimeField,
    pi: SpaceTimeField | None = None,
    pq=(9, 3),
    r0: float = 0.5,
    center=(0.0, 0.0, 0.0),
    t0: float | None = None,
) -> list[InequalityCheck]:
    """The four pressure quantities at ``r0`` against the squared energy norm.

    Each quantity is quadratic in ``u``; the right side is
    ``N^2 = r0^-1 (sup_t ||u||^2_{L^2} + int ||grad u||^2_{L^2} dt)`` over the
    whole box, which carries the same scaling.
    """
    pq = _pair(pq)
    pc = pq.conjugate
    shifted = _half_shift(pq)
    src = _Sources(u, pi, center, t0, "ball")
    norm2 = energy_norm_squared(u, r0, src.t0)
    one_two = ExponentPair(1, 2)
    entries = [
        ("pi1", src.q("Htilde", "pi1", one_two, r0)),
        ("pi3", src.q("Htilde", "pi3", one_two, r0)),
        ("grad_h_pi", src.q("G1", "grad_h_pi", ExponentPair(1, pc.q), r0)),
        ("d3pi4", src.q("G1", "d3pi4", ExponentPair(1, shifted.q), r0)),
    ]
    meta = src.meta(r0=r0, energy_norm_squared=norm2, **_exponents_meta(pq=pq, conjugate=pc, shifted=shifted))
    return [InequalityCheck(f"global[{name}]", value, {"energy_norm_squared": norm2}, dict(meta)) for name, value in entries]


# -- harmonic functions -------------------------------------------------------------


def check_harmonic_lemma(f: HarmonicSample, resolution: int = 24, tol: float = HARMONIC_TOL) -> tuple:
    """``sup_{B_1/2} |d3 f| <= C int_{B_1} |f - P3 f|`` and its horizontal analogue."""
    res = f.harmonic_residual()
    if not res <= tol:
        raise ValidationError(f"{f.name} is not harmonic (Laplacian residual {res:.3e} > {tol:g})")
    t = harmonic_terms(f, resolution)
    meta = {"sample": f.name, "resolution": int(resolution), "harmonic_residual": res}
    return (
        InequalityCheck(f"harmonic[vertical,{f.name}]", t.sup_d3, {"int_f_minus_P3f": t.int_vertical}, dict(meta)),
        InequalityCheck(f"harmonic[horizontal,{f.name}]", t.sup_grad_h, {"int_f_minus_Phf": t.int_horizontal}, dict(meta)),
    )


# -- Poincare reduction ----------------------------------------------------------------


def check_poincare_reduction(
    u_h: SpaceTimeField,
    r: float,
    rho: float,
    pq,
    center=(0.0, 0.0, 0.0),
    t0: float | None = None,
) -> list[InequalityCheck]:
    """One-scale Poincaré ``G(u_h - (u_h)_{B_r}; r) <= C H(grad u_h; r)`` and the two-scale
    reduction ``G(u_h; r) <= C (rho/r) H(grad u_h; rho) + C (r/rho)^(3/p - 1) G(u_h; rho)``.

    ``u_h`` may be a velocity field (its horizontal part is used).
    """
    pq = _pair(pq)
    _require(pq.kappa == 2, f"need 3/p + 2/q = 2, got {fmt(pq.kappa)} for {pq}")
    _require(pq.p != INF and Fraction(3, 2) < pq.p < 3, f"need 3/2 < p < 3, got p={fmt(pq.p)}")
    if not (r > 0 and rho > 0 and r < rho):
        raise ScaleError(f"need 0 < r < rho, got r={r:g}, rho={rho:g}")
    if u_h.kind == "velocity":
        u_h = u_h.horizontal()
    grad = differentiate(u_h, "grad")
    t0 = float(u_h.times[-1]) if t0 is None else float(t0)

    def cyl(s):
        return CylinderSpec(s, center, t0, "ball")

    power = 3 * reciprocal(pq.p) - 1
    meta = {
        "field_id": u_h.field_id,
        "n": u_h.grid.n,
        "r": r,
        "rho": rho,
        "t0": t0,
        "center": list(center),
        "pq": str(pq),
        "power": fmt(power),
    }
    one = InequalityCheck(
        "poincare[one_scale]",
        quantity("Gtilde", u_h, pq, cyl(r), "ball_mean"),
        {"gradient": quantity("H", grad, pq, cyl(r))},
        dict(meta),
    )
    two = InequalityCheck(
        "poincare[two_scale]",
        quantity("G", u_h, pq, cyl(r)),
        {
            "gradient": (rho / r) * quantity("H", grad, pq, cyl(rho)),
            "decay": (r / rho) ** float(power) * quantity("G", u_h, pq, cyl(rho)),
        },
        dict(meta),
    )
    return [one, two]
