"""Regularity criteria, scale sweeps of their hypotheses and the decay iteration.

Verdicts are diagnostics on resolved scales: ``limsup_{r -> 0}`` is read as
the maximum over the finest three scales of a ladder, and a ladder that runs
below the resolution floor yields ``"inconclusive"``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import ExponentError, ScaleError, ValidationError
from .exponents import INF, ExponentPair, fmt
from .field import SpaceTimeField
from .inequalities import InequalityCheck, _jsonable, checks_to_csv
from .pressure import decompose_sec3, pressure_field
from .quantities import mixed_norm, param_hash, quantity
from .regions import NATIVE_MIN_CELLS, ZOOM_MIN_CELLS, CylinderSpec, geometric_ladder
from .spectral import band_limited, differentiate

__all__ = [
    "IterationParams",
    "CriterionVerdict",
    "DecayTrace",
    "CRITERIA",
    "VARIANTS",
    "DEFAULT_EXPONENTS",
    "validate_criterion_exponents",
    "eps_regularity",
    "evaluate_criterion",
    "decay_trace",
    "Report",
    "report",
]

CRITERIA = ("T11_case1", "T11_case2", "T11_case3", "T12")
VARIANTS = ("case1", "thm35", "cylinder")
DEFAULT_EXPONENTS = {"case1": (9, 3), "thm35": (3, 2), "cylinder": (2, 4)}
FINEST = 3


@dataclass(frozen=True)
class IterationParams:
    """Iteration constants: ``0 < theta < 1/8`` and positive ``delta``, ``eps``, ``eps1``.

    ``scales`` overrides the default geometric ladder ``r0 * theta^k``;
    ``count`` is that ladder's length.
    """

    theta: float = 1.0 / 16
    delta: float = 1e-2
    eps: float = 1e-3
    eps1: float = 0.05
    scales: tuple | None = None
    variant: str = "case1"
    count: int = 4

    def __post_init__(self):
        if not (0 < self.theta < 1.0 / 8):
            raise ValidationError(f"theta must lie in (0, 1/8), got {self.theta}")
        for name in ("delta", "eps", "eps1"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValidationError(f"{name} must be positive, got {v}")
        if self.variant not in VARIANTS:
            raise ValidationError(f"unknown variant {self.variant!r}; choose from {VARIANTS}")
        if self.scales is not None:
            s = tuple(float(r) for r in self.scales)
            if any(not (r > 0) for r in s):
                raise ScaleError("scales must be positive")
            object.__setattr__(self, "scales", tuple(sorted(s, reverse=True)))
        if self.count < 1:
            raise ScaleError("the ladder needs at least one scale")

    def ladder(self, r0: float) -> list[float]:
        if self.scales is not None:
            return list(self.scales)
        return geometric_ladder(r0, self.theta, self.count)

    def to_dict(self) -> dict:
        return {
            "theta": self.theta,
            "delta": self.delta,
            "eps": self.eps,
            "eps1": self.eps1,
            "scales": None if self.scales is None else list(self.scales),
            "variant": self.variant,
            "count": self.count,
        }


@dataclass
class CriterionVerdict:
    """Outcome of one criterion on one field.

    ``values[k]`` is the proxy at ``scales[k]`` (``None`` if unreachable);
    ``measured`` is the maximum over the examined scales; ``margin`` is
    ``threshold - measured``.
    """

    criterion: str
    exponents: str
    scales: list
    values: list
    examined: list
    measured: float
    threshold: float
    verdict: str
    margin: float
    floor: float
    norm: float | None = None
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return _jsonable(
            {
                "criterion": self.criterion,
                "exponents": self.exponents,
                "scales": self.scales,
                "values": self.values,
                "examined": self.examined,
                "measured": self.measured,
                "threshold": self.threshold,
                "verdict": self.verdict,
                "margin": self.margin,
                "floor": self.floor,
                "norm": self.norm,
                "meta": self.meta,
            }
        )


@dataclass
class DecayTrace:
    """``F(r_k)`` along a ladder with its weighted breakdown and halving verdicts.

    ``halved[k]`` is ``F(r_{k+1}) <= F(r_k) / 2``; for the cylinder variant
    ``halved_three_scale[k]`` is ``F(r_{k+2}) <= F(r_k) / 2``.  ``degenerate``
    marks pairs where both values vanish.
    """

    variant: str
    scales: list
    F: list
    breakdown: list
    raw: list
    halved: list
    degenerate: list
    halved_three_scale: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def ratios(self) -> list:
        out = []
        for a, b in zip(self.F, self.F[1:]):
            out.append(0.0 if a == 0.0 and b == 0.0 else (INF if a == 0.0 else b / a))
        return out

    def to_dict(self) -> dict:
        return _jsonable(
            {
                "variant": self.variant,
                "scales": self.scales,
                "F": self.F,
                "breakdown": self.breakdown,
                "raw": self.raw,
                "halved": self.halved,
                "degenerate": self.degenerate,
                "halved_three_scale": self.halved_three_scale,
                "meta": self.meta,
            }
        )


# -- exponent validation ----------------------------------------------------------------


def _pair(pq) -> ExponentPair:
    return pq if isinstance(pq, ExponentPair) else ExponentPair(*pq)


def validate_criterion_exponents(criterion: str, pq) -> ExponentPair:
    """Check the exponent relation and range of a criterion exactly."""
    pq = _pair(pq)
    k = pq.kappa
    q = pq.q
    if criterion == "T11_case1":
        if k != 1:
            raise ExponentError(f"T11_case1 needs 3/p + 2/q = 1, got {fmt(k)} for {pq}")
        if not (q != INF and q > 2):
            raise ExponentError(f"T11_case1 needs 2 < q < inf, got q={fmt(q)}")
    elif criterion == "T11_case2":
        if k != 2:
            raise ExponentError(f"T11_case2 needs 3/p + 2/q = 2, got {fmt(k)} for {pq}")
        if not (q != INF and q > 2):
            raise ExponentError(f"T11_case2 needs 2 < q < inf, got q={fmt(q)}")
    elif criterion == "T11_case3":
        if k != 2:
            raise ExponentError(f"T11_case3 needs 3/p + 2/q = 2, got {fmt(k)} for {pq}")
        if not (q != INF and 1 < q <= 2):
            raise ExponentError(f"T11_case3 needs 1 < q <= 2, got q={fmt(q)}")
    elif criterion == "T12":
        if not (1 <= k <= 2):
            raise ExponentError(f"T12 needs 1 <= 3/p + 2/q <= 2, got {fmt(k)} for {pq}")
        if not (pq.p == INF or pq.p >= Fraction(3, 2)):
            raise ExponentError(f"T12 needs 3/2 <= p <= inf, got p={fmt(pq.p)}")
        if pq.p == INF and q == 1:
            raise ExponentError("T12 excludes (p, q) = (inf, 1)")
    else:
        raise ValidationError(f"unknown criterion {criterion!r}; choose from {CRITERIA}")
    return pq


def _validate_mode(mode: str, pq: ExponentPair) -> None:
    k = pq.kappa
    if mode == "velocity":
        if not (1 <= k <= 2):
            raise ExponentError(f"velocity mode needs 1 <= 3/p + 2/q <= 2, got {fmt(k)} for {pq}")
    elif mode == "vorticity":
        if not (2 <= k <= 3):
            raise ExponentError(f"vorticity mode needs 2 <= 3/p + 2/q <= 3, got {fmt(k)} for {pq}")
        if pq.p == 1 and pq.q == INF:
            raise ExponentError("vorticity mode excludes (p, q) = (1, inf)")
    else:
        raise ValidationError(f"unknown mode {mode!r}; choose velocity or vorticity")


# -- sweeps -----------------------------------------------------------------------------


def resolution_floor(F: SpaceTimeField) -> float:
    """Smallest radius the quadrature accepts for ``F``."""
    h = F.grid.spacing
    return (ZOOM_MIN_CELLS if band_limited(F) else NATIVE_MIN_CELLS) * h


def _sweep(kind, source, pq, scales, z0, t0, geometry):
    values = []
    for r in scales:
        try:
            values.append(quantity(kind, source, pq, CylinderSpec(r, z0, t0, geometry)))
        except ScaleError:
            values.append(None)
    return values


def _verdict(name, pq, scales, values, examined_idx, threshold, floor, norm=None, meta=None):
    examined = [scales[k] for k in examined_idx]
    reached = [values[k] for k in examined_idx if values[k] is not None]
    measured = max(reached) if reached else 0.0
    if any(values[k] is None for k in range(len(scales))):
        verdict = "inconclusive"
    elif measured <= threshold:
        verdict = "satisfied"
    else:
        verdict = "violated"
    return CriterionVerdict(
        name,
        str(pq),
        list(scales),
        list(values),
        examined,
        float(measured),
        float(threshold),
        verdict,
        float(threshold - measured),
        float(floor),
        norm,
        meta or {},
    )


def _field_meta(F: SpaceTimeField, **extra) -> dict:
    out = {"field_id": F.field_id, "n": F.grid.n, "box_length": F.grid.box_length}
    out.update(extra)
    return out


def eps_regularity(
    field: SpaceTimeField,
    mode: str,
    pq,
    z0=(0.0, 0.0, 0.0),
    params: IterationParams | None = None,
    *,
    t0: float | None = None,
) -> CriterionVerdict:
    """Smallness of ``r^(1-kappa) ||u||`` (velocity) or ``r^(2-kappa) ||curl u||`` (vorticity).

    Every ladder scale below 1/2 is examined; the default ladder is
    ``(1/4) theta^k``.  Threshold ``eps1``.
    """
    params = params or IterationParams()
    pq = _pair(pq)
    _validate_mode(mode, pq)
    if mode == "velocity":
        if field.kind != "velocity":
            raise ValidationError("velocity mode needs a velocity field")
        source, kind = field, "G"
    else:
        source = field if field.kind == "vorticity" else differentiate(field, "curl")
        kind = "H"
    scales = [r for r in params.ladder(0.25) if r < 0.5]
    if not scales:
        raise ScaleError("no ladder scale lies below 1/2")
    values = _sweep(kind, source, pq, scales, tuple(z0), t0, "ball")
    meta = _field_meta(field, mode=mode, z0=list(z0), params=params.to_dict())
    return _verdict(f"eps_regularity[{mode}]", pq, scales, values, range(len(scales)), params.eps1,
                    resolution_floor(source), meta=meta)


def evaluate_criterion(
    field: SpaceTimeField,
    criterion: str,
    pq,
    r0: float = 0.5,
    params: IterationParams | None = None,
    z0=(0.0, 0.0, 0.0),
    *,
    t0: float | None = None,
) -> CriterionVerdict:
    """Hypothesis check of one regularity theorem on ``field`` near ``z0``.

    Cases 1 and 2 report the stated norm of ``u_h`` (or ``grad u_h``) on
    ``Q_{r0}`` together with the sweep of ``G(u_h)`` (case 1) or
    ``H(grad u_h)`` (case 2); case 3 and ``T12`` sweep ``G(u_h)``, the latter
    on vertical cylinders.  The proxy is the maximum over the finest three
    scales, compared with ``eps1``.
    """
    params = params or IterationParams()
    pq = validate_criterion_exponents(criterion, pq)
    if field.kind != "velocity":
        raise ValidationError("criteria need a velocity field")
    uh = field.horizontal()
    geometry = "vertical" if criterion == "T12" else "ball"
    if criterion == "T11_case2":
        source, kind = differentiate(uh, "grad"), "H"
    else:
        source, kind = uh, "G"
    z0 = tuple(float(c) for c in z0)
    base = CylinderSpec(r0, z0, t0, geometry)
    try:
        base.resolve(field)
        norm = mixed_norm(source, pq, base) if criterion in ("T11_case1", "T11_case2") else None
    except ScaleError as exc:
        raise ScaleError(f"r0={r0:g} exceeds the field extent: {exc}") from exc
    scales = params.ladder(r0)
    values = _sweep(kind, source, pq, scales, z0, t0, geometry)
    examined = range(max(0, len(scales) - FINEST), len(scales))
    meta = _field_meta(field, r0=r0, z0=list(z0), geometry=geometry, proxy=kind, params=params.to_dict())
    return _verdict(criterion, pq, scales, values, examined, params.eps1, resolution_floor(source), norm, meta)


# -- decay iteration ----------------------------------------------------------------------


def _decay_terms(variant, u, pi, sec3, pq, cyl, params) -> tuple[dict, dict]:
    """Weighted breakdown of ``F`` and the raw quantities behind it."""
    pc = pq.conjugate
    A = quantity("A", u, None, cyl)
    E = quantity("E", u, None, cyl)
    se = math.sqrt(params.eps)
    wd = params.delta ** -1.5
    mean = "ball_mean" if cyl.geometry == "ball" else "horizontal_slice"
    if variant == "case1":
        shifted = pq.transform(lambda a: a + Fraction(1, 2), lambda b: b + Fraction(1, 2))
        two = ExponentPair(2, 2)
        g1 = quantity("G1", differentiate(pi, "grad_h"), pc, cyl)
        h1 = quantity("Htilde", sec3.pi1, two, cyl, mean)
        h3 = quantity("Htilde", sec3.pi3, two, cyl, mean)
        g4 = quantity("G1", sec3.d3pi4, shifted, cyl)
        raw = {"A": A, "E": E, "G1_grad_h_pi": g1, "Htilde_pi1": h1, "Htilde_pi3": h3, "G1_d3pi4": g4}
        return {"A": A, "E": E, "eps_term": se * g1, "delta_term": wd * (h1**2 + h3**2 + g4**2)}, raw
    if variant == "thm35":
        half = pq.transform(lambda a: (a + 1) / 2, lambda b: (b + 1) / 2)
        ht = quantity("Htilde", pi, pc, cyl, mean)
        g1 = quantity("G1", differentiate(pi, "d3"), half, cyl)
        raw = {"A": A, "E": E, "Htilde_pi": ht, "G1_d3_pi": g1}
        return {"A": A, "E": E, "eps_term": se * ht, "delta_term": wd * g1**2}, raw
    ht = quantity("Htilde", pi, pc, cyl, mean)
    raw = {"A": A, "E": E, "Htilde_pi": ht}
    return {"A": A, "E": E, "eps_term": se * ht, "delta_term": 0.0}, raw


def decay_trace(
    u: SpaceTimeField,
    pi: SpaceTimeField | None = None,
    params: IterationParams | None = None,
    z0=(0.0, 0.0, 0.0),
    *,
    pq=None,
    r0: float = 0.5,
    t0: float | None = None,
) -> DecayTrace:
    """``F(r)`` of the chosen iteration on the ladder ``r0 theta^k`` (or ``params.scales``).

    ``case1``: ``A + E + eps^(1/2) G1(grad_h pi, p', q') + delta^(-3/2) (Htilde(pi1, 2, 2)^2
    + Htilde(pi3, 2, 2)^2 + G1(d3pi4, 2p/(p+2), 2q/(q+2))^2)``;
    ``thm35``: ``A + E + eps^(1/2) Htilde(pi, p', q') + delta^(-3/2) G1(d3 pi, 2p/(p+1), 2q/(q+1))^2``;
    ``cylinder``: ``A + E + eps^(1/2) Htilde(pi, p', q')`` on vertical cylinders with slice means.
    """
    params = params or IterationParams()
    variant = params.variant
    if u.kind != "velocity":
        raise ValidationError("decay traces need a velocity field")
    pq = _pair(pq if pq is not None else DEFAULT_EXPONENTS[variant])
    if pq.q == 1 or pq.p == 1:
        raise ExponentError("the conjugate exponents must be finite: need p, q > 1")
    if pi is None:
        pi = pressure_field(u)
    if pi.grid != u.grid or len(pi) != len(u):
        raise ValidationError("velocity and pressure must share grid and samples")
    scales = params.ladder(r0)
    if len(scales) < 3:
        raise ScaleError(f"a decay trace needs at least 3 scales, got {len(scales)}")
    sec3 = decompose_sec3(u) if variant == "case1" else None
    geometry = "vertical" if variant == "cylinder" else "ball"
    z0 = tuple(float(c) for c in z0)
    Fs, breakdown, raws = [], [], []
    for r in scales:
        terms, raw = _decay_terms(variant, u, pi, sec3, pq, CylinderSpec(r, z0, t0, geometry), params)
        breakdown.append(terms)
        raws.append(raw)
        Fs.append(float(sum(terms.values())))
    halved, degenerate = [], []
    for a, b in zip(Fs, Fs[1:]):
        degenerate.append(a == 0.0 and b == 0.0)
        halved.append(b <= 0.5 * a)
    three = []
    if variant == "cylinder":
        three = [c <= 0.5 * a for a, c in zip(Fs, Fs[2:])]
    meta = _field_meta(u, z0=list(z0), pq=str(pq), r0=r0, params=params.to_dict(), geometry=geometry)
    return DecayTrace(variant, list(scales), Fs, breakdown, raws, halved, degenerate, three, meta)


# -- reports -------------------------------------------------------------------------------


VERDICT_COLUMNS = ("criterion", "p", "q", "scale", "value", "threshold", "verdict", "margin",
                   "field_id", "n", "param_hash")
TRACE_COLUMNS = ("variant", "r", "F", "A", "E", "eps_term", "delta_term", "halved",
                 "field_id", "n", "param_hash")


def _num(x) -> str:
    return "" if x is None else repr(float(x))


@dataclass
class Report:
    """Deterministic bundle of verdicts, decay traces and inequality checks."""

    verdicts: list = field(default_factory=list)
    traces: list = field(default_factory=list)
    checks: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "verdicts": [v.to_dict() for v in self.verdicts],
            "traces": [t.to_dict() for t in self.traces],
            "checks": [c.to_dict() for c in self.checks],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def verdicts_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(VERDICT_COLUMNS)
        for v in self.verdicts:
            p, q = v.exponents.strip("()").split(",")
            h = param_hash(_jsonable(v.meta))
            for r, value in zip(v.scales, v.values):
                w.writerow([v.criterion, p, q, repr(r), _num(value), repr(v.threshold), v.verdict,
                            repr(v.margin), v.meta.get("field_id", ""), v.meta.get("n", ""), h])
        return buf.getvalue()

    def trace_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for t in self.traces:
            h = param_hash(_jsonable(t.meta))
            for k, (r, F, terms) in enumerate(zip(t.scales, t.F, t.breakdown)):
                halved = "" if k == 0 else int(t.halved[k - 1])
                w.writerow([t.variant, repr(r), repr(F), repr(terms["A"]), repr(terms["E"]),
                            repr(terms["eps_term"]), repr(terms["delta_term"]), halved,
                            t.meta.get("field_id", ""), t.meta.get("n", ""), h])
        return buf.getvalue()

    def checks_csv(self) -> str:
        return checks_to_csv(self.checks)


def report(
    verdicts: Sequence[CriterionVerdict] = (),
    traces: Sequence[DecayTrace] = (),
    checks: Sequence[InequalityCheck] = (),
) -> Report:
    """Collect results into a :class:`Report` (order preserved)."""
    for v in verdicts:
        if not isinstance(v, CriterionVerdict):
            raise ValidationError("verdicts must be CriterionVerdict instances")
    for t in traces:
        if not isinstance(t, DecayTrace):
            raise ValidationError("traces must be DecayTrace instances")
    for c in checks:
        if not isinstance(c, InequalityCheck):
            raise ValidationError("checks must be InequalityCheck instances")
    return Report(list(verdicts), list(traces), list(checks))
