"""Space-time integration regions and their quadrature plans.

A ball (or disc) is integrated with cell-fraction weights: each node owns the
cube (square) of side ``spacing`` centred on it, and its weight is the volume
of that cell lying inside the region.  Boundary cells are resolved by
sub-sampling two axes and integrating the third exactly.

Radii of at least :data:`NATIVE_MIN_CELLS` spacings are integrated on the
field's own nodes.  Smaller radii are integrated on a local lattice of
``ZOOM_CELLS`` cells per radius whose values come from the exact
trigonometric interpolant; this is only allowed for band-limited fields, for
which the interpolant *is* the field.  All weights are computed in cell units,
so a region and its image under ``x -> x/lam`` on the relabelled grid get
identical weights.
"""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .errors import ScaleError, ValidationError
from .field import SpaceTimeField
from .grid import Grid3
from .spectral import band_limited, interpolate

GEOMETRIES = ("ball", "vertical")

NATIVE_MIN_CELLS = 8.0
ZOOM_CELLS = 16
ZOOM_MIN_CELLS = 1e-3
SUPERSAMPLE = 16

_TIME_TOL = 1e-9


@dataclass(frozen=True)
class CylinderSpec:
    """``Q_r(z0) = B_r(x0) x (t0 - r^2, t0)`` or the vertical ``B_r^2(x0_h) x R x (t0 - r^2, t0)``.

    ``t0=None`` means the last sample time of whichever field is integrated.
    Vertical cylinders run over exactly one ``x3`` period of the box.
    """

    r: float
    center: tuple = (0.0, 0.0, 0.0)
    t0: float | None = None
    geometry: str = "ball"

    def __post_init__(self):
        r = float(self.r)
        if not (r > 0 and math.isfinite(r)):
            raise ScaleError(f"radius must be positive and finite, got {self.r}")
        if self.geometry not in GEOMETRIES:
            raise ValidationError(f"unknown geometry {self.geometry!r}; choose from {GEOMETRIES}")
        center = tuple(float(c) for c in self.center)
        if len(center) != 3:
            raise ValidationError("the centre needs three coordinates")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "center", center)
        if self.t0 is not None:
            object.__setattr__(self, "t0", float(self.t0))

    @property
    def truncated_x3(self) -> bool:
        return self.geometry == "vertical"

    def at(self, r: float) -> CylinderSpec:
        return replace(self, r=r)

    def resolve(self, F: SpaceTimeField) -> CylinderSpec:
        """Fix ``t0`` to a sample time of ``F`` and check the time window."""
        t0 = float(F.times[-1]) if self.t0 is None else self.t0
        idx = F.time_index(t0)
        if len(F) > 1 and t0 - self.r**2 < F.times[0] - _TIME_TOL * max(F.dt, 1e-300):
            raise ScaleError(
                f"cylinder of radius {self.r:g} at t0={t0:g} leaves the time range "
                f"[{F.times[0]:g}, {F.times[-1]:g}]"
            )
        return replace(self, t0=float(F.times[idx]))

    def rescaled(self, lam: float) -> CylinderSpec:
        """Image under ``x -> x/lam, t -> t/lam^2``."""
        return CylinderSpec(
            self.r / lam,
            tuple(c / lam for c in self.center),
            None if self.t0 is None else self.t0 / lam**2,
            self.geometry,
        )


# -- cell-fraction weights ----------------------------------------------------


def _overlap(lo: np.ndarray, hi: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.clip(np.minimum(hi, b) - np.maximum(lo, a), 0.0, None)


def _subsamples(s: int) -> np.ndarray:
    return -0.5 + (np.arange(s) + 0.5) / s


@lru_cache(maxsize=128)
def ball_cells(c: tuple, R: float, s: int = SUPERSAMPLE):
    """Cells of unit spacing meeting the ball ``|x - c| < R`` (cell units).

    Returns integer node coordinates ``(m1, m2, m3)`` (unwrapped) and the
    inside fraction of each node's cell, for cells with positive overlap.
    """
    c = np.asarray(c, dtype=np.float64)
    axes = [np.arange(math.floor(ci - R - 1), math.ceil(ci + R + 1) + 1) for ci in c]
    m1, m2, m3 = np.meshgrid(*axes, indexing="ij")
    d = np.stack([m1 - c[0], m2 - c[1], m3 - c[2]]).reshape(3, -1)
    near = np.sqrt((np.clip(np.abs(d) - 0.5, 0.0, None) ** 2).sum(axis=0))
    far = np.sqrt(((np.abs(d) + 0.5) ** 2).sum(axis=0))
    frac = np.where(far <= R, 1.0, 0.0)
    edge = np.flatnonzero((far > R) & (near < R))
    sub = _subsamples(s)
    for start in range(0, edge.size, 256):
        e = edge[start : start + 256]
        x = d[0, e][:, None, None] + sub[None, :, None]
        y = d[1, e][:, None, None] + sub[None, None, :]
        half = np.sqrt(np.clip(R * R - x * x - y * y, 0.0, None))
        z = d[2, e][:, None, None]
        frac[e] = _overlap(z - 0.5, z + 0.5, -half, half).mean(axis=(1, 2))
    keep = frac > 0
    m = np.stack([m1.ravel(), m2.ravel(), m3.ravel()])[:, keep]
    out = (m[0], m[1], m[2], frac[keep])
    for a in out:
        a.setflags(write=False)
    return out


@lru_cache(maxsize=128)
def disc_cells(c: tuple, R: float, s: int = SUPERSAMPLE):
    """2-D analogue of :func:`ball_cells` for the disc ``|x_h - c| < R``."""
    c = np.asarray(c, dtype=np.float64)
    axes = [np.arange(math.floor(ci - R - 1), math.ceil(ci + R + 1) + 1) for ci in c]
    m1, m2 = np.meshgrid(*axes, indexing="ij")
    d = np.stack([m1 - c[0], m2 - c[1]]).reshape(2, -1)
    near = np.sqrt((np.clip(np.abs(d) - 0.5, 0.0, None) ** 2).sum(axis=0))
    far = np.sqrt(((np.abs(d) + 0.5) ** 2).sum(axis=0))
    frac = np.where(far <= R, 1.0, 0.0)
    edge = np.flatnonzero((far > R) & (near < R))
    if edge.size:
        x = d[0, edge][:, None] + _subsamples(s)[None, :]
        half = np.sqrt(np.clip(R * R - x * x, 0.0, None))
        y = d[1, edge][:, None]
        frac[edge] = _overlap(y - 0.5, y + 0.5, -half, half).mean(axis=1)
    keep = frac > 0
    out = (m1.ravel()[keep], m2.ravel()[keep], frac[keep])
    for a in out:
        a.setflags(write=False)
    return out


def _cell_center(x: float, h: float, n: int) -> float:
    """Centre coordinate in cell units, reduced to ``[0, n)``."""
    return math.fmod(x / h, n) % n


# -- quadrature plans -----------------------------------------------------------


class Region:
    """Quadrature plan for one cylinder cross-section on one grid.

    ``idx`` and ``weights`` address the lattice returned by :meth:`lattice`;
    weights are physical volumes.  For vertical cylinders ``disc`` holds the
    per-slice plan ``(i, j, w)``; ``slice_count`` is the number of ``x3``
    nodes.  ``mean_plane`` is the ``(i, j, k, w)`` plan of the central
    horizontal disc used by ``disc_mean`` in the ball geometry.
    """

    def __init__(self, grid: Grid3, cyl: CylinderSpec):
        self.grid = grid
        self.cyl = cyl
        h = grid.spacing
        R = cyl.r / h
        if 2.0 * cyl.r >= grid.box_length - 2.0 * h:
            raise ScaleError(
                f"radius {cyl.r:g} is too large for a box of length {grid.box_length:g}"
            )
        self.cells = R
        self.zoom = R < NATIVE_MIN_CELLS
        if self.zoom and R < ZOOM_MIN_CELLS:
            raise ScaleError(
                f"radius {cyl.r:g} is below the resolution floor ({ZOOM_MIN_CELLS:g} spacings, "
                f"spacing {h:g})"
            )
        n = grid.n
        if self.zoom:
            M = ZOOM_CELLS + 2
            hz = cyl.r / ZOOM_CELLS
            self.lattice_spacing = hz
            offsets = np.arange(-M, M + 1) * hz
            self.coords = [cyl.center[a] + offsets for a in range(3)]
            Rz = float(ZOOM_CELLS)
            if cyl.geometry == "ball":
                m1, m2, m3, f = ball_cells((0.0, 0.0, 0.0), Rz)
                self.idx = (m1 + M, m2 + M, m3 + M)
                self.weights = f * hz**3
                d1, d2, fd = disc_cells((0.0, 0.0), Rz)
                self.mean_plane = (d1 + M, d2 + M, np.full(d1.size, M), fd * hz**2)
            else:
                self.coords[2] = None
                d1, d2, fd = disc_cells((0.0, 0.0), Rz)
                self.disc = (d1 + M, d2 + M, fd * hz**2)
                self.slice_count = n
                self.dz = h
        else:
            self.lattice_spacing = h
            c = tuple(_cell_center(x, h, n) for x in cyl.center)
            if cyl.geometry == "ball":
                m1, m2, m3, f = ball_cells(c, R)
                self.idx = (m1 % n, m2 % n, m3 % n)
                self.weights = f * h**3
                d1, d2, fd = disc_cells(c[:2], R)
                k0 = int(math.floor(c[2] + 0.5)) % n
                self.mean_plane = (d1 % n, d2 % n, np.full(d1.size, k0), fd * h**2)
            else:
                d1, d2, fd = disc_cells(c[:2], R)
                self.disc = (d1 % n, d2 % n, fd * h**2)
                self.slice_count = n
                self.dz = h
        if cyl.geometry == "vertical":
            i, j, w = self.disc
            nk = self.slice_count
            self.idx = (np.repeat(i, nk), np.repeat(j, nk), np.tile(np.arange(nk), i.size))
            self.weights = np.repeat(w, nk) * self.dz
        self.idx = tuple(np.ascontiguousarray(a, dtype=np.intp) for a in self.idx)
        self.weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        self.volume = float(self.weights.sum())

    def lattice(self, F: SpaceTimeField, i: int) -> np.ndarray:
        """Values of snapshot ``i`` on the lattice addressed by ``idx``."""
        if not self.zoom:
            return F.values(i)
        if not band_limited(F):
            raise ScaleError(
                f"radius {self.cyl.r:g} is below the native resolution floor "
                f"({NATIVE_MIN_CELLS:g} spacings) and field {F.field_id!r} is not band-limited"
            )
        cache = F.__dict__.setdefault("_zoom_cache", OrderedDict())
        key = (i, self.cyl.r, self.cyl.center, self.cyl.geometry)
        hit = cache.get(key)
        if hit is None:
            x1, x2, x3 = self.coords
            hit = np.ascontiguousarray(interpolate(F.spectrum(i), self.grid, x1, x2, x3))
            hit.setflags(write=False)
            cache[key] = hit
            while len(cache) > 24:
                cache.popitem(last=False)
        else:
            cache.move_to_end(key)
        return hit


_REGION_CACHE: OrderedDict = OrderedDict()


def region_for(grid: Grid3, cyl: CylinderSpec) -> Region:
    key = (grid, cyl.r, cyl.center, cyl.geometry)
    hit = _REGION_CACHE.get(key)
    if hit is None:
        hit = Region(grid, cyl)
        _REGION_CACHE[key] = hit
        while len(_REGION_CACHE) > 64:
            _REGION_CACHE.popitem(last=False)
    return hit


# -- time windows ----------------------------------------------------------------


@dataclass(frozen=True)
class TimePlan:
    """Samples and trapezoid weights covering ``[t0 - r^2, t0]``.

    ``samples`` are indices inside the window (``t0`` last).  When the window
    start falls strictly between samples ``a`` and ``a + 1``, the integrand
    there is interpolated linearly; ``start`` holds ``(a, a + 1, theta)`` and
    ``weights[0]`` is the weight of that interpolated value.  A single-sample
    field is treated as steady: the integrand is constant on the window.
    """

    samples: tuple
    weights: tuple
    start: tuple | None
    length: float


def time_plan(F: SpaceTimeField, cyl: CylinderSpec) -> TimePlan:
    cyl = cyl.resolve(F)
    t0 = cyl.t0
    length = cyl.r**2
    i0 = F.time_index(t0)
    if len(F) == 1:
        return TimePlan((i0,), (length,), None, length)
    times = F.times
    ts = t0 - length
    tol = _TIME_TOL * F.dt
    inside = [k for k in range(i0 + 1) if times[k] >= ts - tol]
    first = inside[0]
    nodes = [float(times[k]) for k in inside]
    start = None
    if times[first] > ts + tol:
        a = first - 1
        theta = (ts - times[a]) / (times[first] - times[a])
        start = (a, first, float(theta))
        nodes = [ts] + nodes
    else:
        nodes[0] = max(nodes[0], ts)
    nodes = np.asarray(nodes)
    w = np.zeros(nodes.size)
    if nodes.size > 1:
        dt = np.diff(nodes)
        w[:-1] += 0.5 * dt
        w[1:] += 0.5 * dt
    return TimePlan(tuple(inside), tuple(float(x) for x in w), start, length)


def geometric_ladder(r0: float, theta: float, count: int) -> list[float]:
    """``[r0, r0*theta, ..., r0*theta**(count-1)]``."""
    if count < 1:
        raise ScaleError("a scale ladder needs at least one scale")
    if not (0 < theta < 1):
        raise ScaleError(f"ladder ratio must lie in (0, 1), got {theta}")
    return [r0 * theta**k for k in range(count)]
