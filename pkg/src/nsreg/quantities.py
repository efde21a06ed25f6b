"""Mixed space-time norms and the scale-invariant quantities built from them.

With ``kappa = 3/p + 2/q`` and ``||f||`` the ``L^q_t L^p_x`` norm over a
cylinder of radius ``r``::

    A(u; r)  = r^-1 sup_t int_{B_r} |u|^2
    E(u; r)  = r^-1 int int_{Q_r} |grad u|^2
    G(f; r)  = r^(1 - kappa) ||f||        H(f; r) = r^(2 - kappa) ||f||
    G1(f; r) = r^(3 - kappa) ||f||

``Gtilde`` and ``Htilde`` apply ``G`` and ``H`` to ``f`` minus a spatial mean.
Every quantity is invariant under ``u -> lam u(lam x, lam^2 t)``.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .errors import ValidationError
from .exponents import INF, ExponentPair, fmt
from .field import SpaceTimeField
from .regions import CylinderSpec, Region, geometric_ladder, region_for, time_plan
from .spectral import differentiate

QUANTITY_KINDS = ("A", "E", "G", "H", "Gtilde", "Htilde", "G1")
MEAN_MODES = ("none", "ball_mean", "disc_mean", "horizontal_slice")

_PREFACTOR_POWER = {"G": 1, "Gtilde": 1, "H": 2, "Htilde": 2, "G1": 3}

__all__ = [
    "QUANTITY_KINDS",
    "MEAN_MODES",
    "mixed_norm",
    "quantity",
    "quantity_sweep",
    "mean_subtract",
    "QuantityEntry",
    "QuantityReport",
    "geometric_ladder",
]


def _check_mean_mode(mode: str, cyl: CylinderSpec) -> str:
    if mode not in MEAN_MODES:
        raise ValidationError(f"unknown mean mode {mode!r}; choose from {MEAN_MODES}")
    if mode == "horizontal_slice":
        if cyl.geometry != "vertical":
            raise ValidationError("horizontal_slice means need the vertical geometry")
        return "disc_mean"
    if mode == "ball_mean" and cyl.geometry != "ball":
        raise ValidationError("ball_mean needs the ball geometry; use disc_mean for vertical cylinders")
    return mode


def _gathered_minus_mean(values: np.ndarray, region: Region, mode: str) -> np.ndarray:
    """Region values with the requested spatial mean removed, shape ``(c, m)``."""
    i, j, k = region.idx
    g = values[:, i, j, k]
    if mode == "ball_mean":
        w = region.weights
        g = g - (g @ w / w.sum())[:, None]
    elif region.cyl.geometry == "vertical":
        wd = region.disc[2]
        nk = region.slice_count
        g3 = g.reshape(g.shape[0], wd.size, nk)
        means = np.einsum("cdk,d->ck", g3, wd) / wd.sum()
        g = (g3 - means[:, None, :]).reshape(g.shape)
    else:
        pi, pj, pk, pw = region.mean_plane
        plane = values[:, pi, pj, pk]
        g = g - (plane @ pw / pw.sum())[:, None]
    return np.ascontiguousarray(g)


def _spatial_norm(values: np.ndarray, region: Region, p: float, mode: str) -> float:
    """``(int |f - mean|^p)^(1/p)`` over the region (max for ``p = inf``)."""
    if mode == "none":
        arr, idx, w = values, region.idx, region.weights
    else:
        g = _gathered_minus_mean(values, region, mode)
        arr = g.reshape(g.shape[0], g.shape[1], 1, 1)
        m = g.shape[1]
        zero = np.zeros(m, dtype=np.intp)
        idx, w = (np.arange(m, dtype=np.intp), zero, zero), region.weights
    if p == INF:
        return kernels.max_norm(arr, *idx)
    s = kernels.power_sum(arr, *idx, w, float(p))
    return s ** (1.0 / p)


def mixed_norm(
    f: SpaceTimeField,
    pq: ExponentPair,
    cyl: CylinderSpec,
    mean_mode: str = "none",
) -> float:
    """``||f - mean||_{L^q_t L^p_x}`` over the cylinder (Euclidean norm over components).

    Time integrals use the trapezoid rule over samples, with the integrand
    interpolated linearly at a window start that falls between samples;
    ``q = inf`` takes the maximum over samples in the window.
    """
    mode = _check_mean_mode(mean_mode, cyl)
    cyl = cyl.resolve(f)
    region = region_for(f.grid, cyl)
    plan = time_plan(f, cyl)
    p, q = pq.pf, pq.qf

    def g(i):
        return _spatial_norm(region.lattice(f, i), region, p, mode)

    if q == INF:
        return float(max(g(i) for i in plan.samples))
    vals = [g(i) ** q for i in plan.samples]
    if plan.start is not None:
        a, b, theta = plan.start
        va = g(a) ** q
        vb = vals[0] if b == plan.samples[0] else g(b) ** q
        vals = [(1.0 - theta) * va + theta * vb] + vals
    if len(vals) == 1:
        total = plan.weights[0] * vals[0]
    else:
        total = float(np.dot(plan.weights, vals))
    return total ** (1.0 / q)


def _gradient_source(source: SpaceTimeField) -> SpaceTimeField:
    if source.kind != "velocity":
        raise ValidationError(f"E needs a velocity field, got {source.kind!r}")
    return differentiate(source, "grad")


def quantity(
    kind: str,
    source: SpaceTimeField,
    pq: ExponentPair | None,
    cyl: CylinderSpec,
    mean_mode: str = "none",
) -> float:
    """One scale-invariant quantity over ``cyl`` (see module docstring).

    ``A`` and ``E`` ignore ``pq``.  Tilde kinds require a mean mode other than
    ``"none"``; plain kinds ignore ``mean_mode``.
    """
    if kind not in QUANTITY_KINDS:
        raise ValidationError(f"unknown quantity kind {kind!r}; choose from {QUANTITY_KINDS}")
    r = cyl.r
    if kind == "A":
        if source.kind != "velocity":
            raise ValidationError(f"A needs a velocity field, got {source.kind!r}")
        return mixed_norm(source, ExponentPair(2, INF), cyl) ** 2 / r
    if kind == "E":
        return mixed_norm(_gradient_source(source), ExponentPair(2, 2), cyl) ** 2 / r
    if pq is None:
        raise ValidationError(f"{kind} needs an exponent pair")
    if kind in ("Gtilde", "Htilde"):
        if mean_mode == "none":
            raise ValidationError(f"{kind} needs a mean mode (ball_mean or disc_mean)")
    else:
        mean_mode = "none"
    power = _PREFACTOR_POWER[kind] - float(pq.kappa)
    return r**power * mixed_norm(source, pq, cyl, mean_mode)


def mean_subtract(f: SpaceTimeField, cyl: CylinderSpec, mode: str) -> SpaceTimeField:
    """``f`` minus its per-sample spatial mean over the cylinder's cross-section.

    ``ball_mean`` subtracts the ball average, ``disc_mean`` the average over
    the horizontal disc through the centre, and ``horizontal_slice`` the disc
    average of every ``x3`` slice (``P_{h,r} f``; vertical geometry only).
    """
    if f.ncomp != 1:
        raise ValidationError("mean subtraction needs a scalar field")
    if mode == "none" or mode not in MEAN_MODES:
        raise ValidationError(f"unknown mean mode {mode!r}")
    if mode == "horizontal_slice" and cyl.geometry != "vertical":
        raise ValidationError("horizontal_slice means need the vertical geometry")
    _check_mean_mode(mode, cyl)
    region = region_for(f.grid, cyl)

    def fn(values, i):
        lattice = region.lattice(f, i)
        ii, jj, kk = region.idx
        if cyl.geometry == "vertical":
            di, dj, dw = region.disc
            slab = lattice[0][di, dj, :]
            means = dw @ slab / dw.sum()
            return values - means[None, None, None, :]
        if mode == "ball_mean":
            w = region.weights
            mean = float(lattice[0][ii, jj, kk] @ w / w.sum())
        else:
            pi, pj, pk, pw = region.mean_plane
            mean = float(lattice[0][pi, pj, pk] @ pw / pw.sum())
        return values - mean

    key = ("mean", mode, cyl.r, cyl.center, cyl.geometry)
    out = f.derived(key, fn, ncomp=1, kind=f.kind if f.kind != "velocity" else "scalar", names=f.names)
    return out


# -- reports ----------------------------------------------------------------------


@dataclass(frozen=True)
class QuantityEntry:
    kind: str
    p: str
    q: str
    r: float
    geometry: str
    value: float
    mean_mode: str = "none"


CSV_COLUMNS = ("kind", "p", "q", "r", "geometry", "value", "field_id", "n", "param_hash")


@dataclass
class QuantityReport:
    """Quantity values of one field, sorted by scale (largest first)."""

    entries: list
    field_id: str
    geometry: str
    n: int
    params: dict = field(default_factory=dict)
    truncated_x3: bool = False

    @property
    def param_hash(self) -> str:
        return param_hash(self.params)

    def values(self, kind: str) -> list[float]:
        return [e.value for e in self.entries if e.kind == kind]

    def scales(self, kind: str | None = None) -> list[float]:
        return [e.r for e in self.entries if kind is None or e.kind == kind]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        h = self.param_hash
        for e in self.entries:
            w.writerow([e.kind, e.p, e.q, repr(e.r), e.geometry, repr(e.value), self.field_id, self.n, h])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "field_id": self.field_id,
            "geometry": self.geometry,
            "n": self.n,
            "truncated_x3": self.truncated_x3,
            "params": self.params,
            "param_hash": self.param_hash,
            "entries": [asdict(e) for e in self.entries],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def param_hash(params: dict) -> str:
    text = json.dumps(params, sort_keys=True, default=str)
    return hashlib.sha256(text.encode()).hexdigest()[:12]


def check_resolvable(F: SpaceTimeField, cyl: CylinderSpec) -> None:
    """Raise :class:`ScaleError` if ``cyl`` cannot be integrated on ``F``."""
    cyl = cyl.resolve(F)
    region = region_for(F.grid, cyl)
    if region.zoom:
        region.lattice(F, F.time_index(cyl.t0))


def quantity_sweep(
    kinds: Sequence[str],
    source: SpaceTimeField,
    pq: ExponentPair | None,
    z0: tuple = (0.0, 0.0, 0.0),
    scales: Sequence[float] = (),
    geometry: str = "ball",
    *,
    t0: float | None = None,
    mean_mode: str | None = None,
) -> QuantityReport:
    """Evaluate every ``kind`` at every scale of a ladder.

    Tilde kinds default to ``ball_mean`` (ball) or ``disc_mean`` (vertical).
    All scales are checked for resolvability before anything is computed, so
    an unreachable scale fails fast with its value in the message.
    """
    scales = [float(r) for r in scales]
    if not scales:
        raise ValidationError("empty scale ladder")
    for k in kinds:
        if k not in QUANTITY_KINDS:
            raise ValidationError(f"unknown quantity kind {k!r}")
    base = CylinderSpec(scales[0], z0, t0, geometry)
    targets = [source]
    if "E" in kinds:
        targets.append(_gradient_source(source))
    for r in scales:
        for F in targets:
            check_resolvable(F, base.at(r))
    if mean_mode is None:
        mean_mode = "ball_mean" if geometry == "ball" else "disc_mean"
    entries = []
    for r in sorted(scales, reverse=True):
        cyl = base.at(r)
        for k in kinds:
            value = quantity(k, source, pq, cyl, mean_mode)
            is_pq = k not in ("A", "E")
            entries.append(
                QuantityEntry(
                    k,
                    fmt(pq.p) if (is_pq and pq) else "",
                    fmt(pq.q) if (is_pq and pq) else "",
                    r,
                    geometry,
                    float(value),
                    mean_mode if k in ("Gtilde", "Htilde") else "none",
                )
            )
    params = {
        "kinds": list(kinds),
        "p": fmt(pq.p) if pq else None,
        "q": fmt(pq.q) if pq else None,
        "z0": list(z0),
        "t0": t0,
        "scales": scales,
        "geometry": geometry,
        "mean_mode": mean_mode,
    }
    return QuantityReport(entries, source.field_id, geometry, source.grid.n, params, geometry == "vertical")


def loglog_slope(rs: Sequence[float], values: Sequence[float]) -> float:
    """Least-squares slope of ``log value`` against ``log r``."""
    x = np.log(np.asarray(rs, dtype=np.float64))
    y = np.log(np.asarray(values, dtype=np.float64))
    return float(np.polyfit(x, y, 1)[0])


