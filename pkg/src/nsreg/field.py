"""Snapshots and space-time fields on a periodic grid."""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ValidationError
from .grid import Grid3

KINDS = ("velocity", "pressure", "vorticity", "scalar")

DEFAULT_NAMES = {
    "velocity": ("u1", "u2", "u3"),
    "vorticity": ("w1", "w2", "w3"),
    "pressure": ("pi",),
}

# value homogeneity under u -> lam*u(lam x, lam^2 t)
HOMOGENEITY = {"velocity": 1, "pressure": 2, "vorticity": 2}

_TIME_RTOL = 1e-12


@dataclass(frozen=True)
class FlowParams:
    """Run parameters for generated and evolved flows (unit viscosity by default)."""

    nu: float = 1.0
    end_time: float = 1.0
    dt: float = 1.0 / 16
    dealias: bool = True
    amplitude: float = 1.0

    def __post_init__(self):
        if not (self.nu > 0 and math.isfinite(self.nu)):
            raise ValidationError(f"viscosity must be positive, got {self.nu}")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValidationError(f"dt must be positive, got {self.dt}")
        if not self.end_time >= self.dt * (1 - 1e-12):
            raise ValidationError(f"end_time {self.end_time} is shorter than dt {self.dt}")
        if not math.isfinite(self.amplitude):
            raise ValidationError(f"amplitude must be finite, got {self.amplitude}")

    @property
    def steps(self) -> int:
        return max(1, int(round(self.end_time / self.dt)))

    def times(self, t_start: float = 0.0) -> np.ndarray:
        return t_start + self.dt * np.arange(self.steps + 1)


@dataclass(frozen=True)
class Snapshot:
    """One time slice: ``data`` has shape ``(ncomp, n, n, n)``."""

    grid: Grid3
    time: float
    data: np.ndarray
    kind: str = "velocity"
    names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim == 3:
            data = data[None]
        if data.shape[1:] != self.grid.shape:
            raise ValidationError(
                f"component lattices have shape {data.shape[1:]}, grid expects {self.grid.shape}"
            )
        if self.kind not in KINDS:
            raise ValidationError(f"unknown snapshot kind {self.kind!r}")
        if self.kind in ("velocity", "vorticity") and data.shape[0] != 3:
            raise ValidationError(f"{self.kind} snapshots need 3 components, got {data.shape[0]}")
        if self.kind == "pressure" and data.shape[0] != 1:
            raise ValidationError("pressure snapshots are scalar")
        object.__setattr__(self, "data", data)
        if not self.names:
            object.__setattr__(self, "names", _default_names(self.kind, data.shape[0]))

    @property
    def ncomp(self) -> int:
        return self.data.shape[0]

    @property
    def components(self) -> tuple[np.ndarray, ...]:
        return tuple(self.data)

    def scalar(self) -> np.ndarray:
        if self.ncomp != 1:
            raise ValidationError(f"expected a scalar snapshot, got {self.ncomp} components")
        return self.data[0]


def _default_names(kind: str, ncomp: int) -> tuple[str, ...]:
    names = DEFAULT_NAMES.get(kind)
    if names is not None and len(names) == ncomp:
        return names
    if ncomp == 1:
        return ("f",)
    return tuple(f"f{i + 1}" for i in range(ncomp))


class SpaceTimeField:
    """A time-ordered, uniformly spaced sequence of snapshots on one grid.

    Values are either held in one array of shape ``(nt, ncomp, n, n, n)`` or
    produced on demand by ``loader(i)``; in the latter case a small LRU cache
    keeps recently used slices.  Fields are treated as immutable.
    """

    cache_size = 8

    def __init__(
        self,
        grid: Grid3,
        times: Sequence[float],
        data: np.ndarray | None = None,
        *,
        kind: str = "velocity",
        names: Sequence[str] | None = None,
        dt: float | None = None,
        field_id: str = "field",
        meta: dict | None = None,
        loader: Callable[[int], np.ndarray] | None = None,
        ncomp: int | None = None,
        spectrum_fn: Callable[[int], np.ndarray] | None = None,
    ):
        if kind not in KINDS:
            raise ValidationError(f"unknown field kind {kind!r}")
        times = np.asarray(times, dtype=np.float64)
        if times.ndim != 1 or times.size == 0:
            raise ValidationError("a field needs at least one snapshot time")
        if (data is None) == (loader is None):
            raise ValidationError("give exactly one of data or loader")
        if data is not None:
            data = np.ascontiguousarray(data, dtype=np.float64)
            if data.ndim == 4:
                data = data[:, None]
            if data.shape[0] != times.size or data.shape[2:] != grid.shape:
                raise ValidationError(
                    f"data shape {data.shape} does not match {times.size} snapshots on {grid.shape}"
                )
            data.setflags(write=False)
            ncomp = data.shape[1]
        elif ncomp is None:
            raise ValidationError("lazy fields must declare ncomp")
        if kind in ("velocity", "vorticity") and ncomp != 3:
            raise ValidationError(f"{kind} fields need 3 components, got {ncomp}")
        if kind == "pressure" and ncomp != 1:
            raise ValidationError("pressure fields are scalar")

        if times.size > 1:
            steps = np.diff(times)
            step = steps.mean()
            if np.any(steps <= 0):
                raise ValidationError("snapshot times must be strictly increasing")
            if np.max(np.abs(steps - step)) > _TIME_RTOL * max(abs(step), np.abs(times).max()) * 10:
                raise ValidationError("snapshot times must be uniformly spaced")
            if dt is not None and abs(dt - step) > 1e-9 * step:
                raise ValidationError(f"dt={dt} disagrees with snapshot spacing {step}")
            dt = float(step) if dt is None else float(dt)
        elif dt is None:
            dt = 0.0

        self.grid = grid
        self.times = times
        self.times.setflags(write=False)
        self.dt = dt
        self.kind = kind
        self.ncomp = int(ncomp)
        self.names = tuple(names) if names else _default_names(kind, self.ncomp)
        if len(self.names) != self.ncomp:
            raise ValidationError("one name per component is required")
        self.field_id = field_id
        self.meta = dict(meta or {})
        self._data = data
        self._loader = loader
        self._spectrum_fn = spectrum_fn
        self._cache: OrderedDict = OrderedDict()
        self._derived: dict = {}

    # -- access -------------------------------------------------------------

    def __len__(self) -> int:
        return self.times.size

    @property
    def materialized(self) -> bool:
        return self._data is not None

    def values(self, i: int) -> np.ndarray:
        """Component lattices of snapshot ``i``, shape ``(ncomp, n, n, n)``."""
        if self._data is not None:
            return self._data[i]
        i = int(i) % len(self)
        hit = self._cache.get(("values", i))
        if hit is not None:
            self._cache.move_to_end(("values", i))
            return hit
        arr = np.ascontiguousarray(self._loader(i), dtype=np.float64)
        if arr.ndim == 3:
            arr = arr[None]
        arr.setflags(write=False)
        self._remember(("values", i), arr)
        return arr

    def spectrum(self, i: int) -> np.ndarray:
        """Real-FFT coefficients of snapshot ``i`` (cached)."""
        key = ("spectrum", int(i) % len(self))
        hit = self._cache.get(key)
        if hit is None:
            if self._spectrum_fn is not None:
                hit = self._spectrum_fn(int(i) % len(self))
            else:
                hit = self.grid.fft(self.values(i))
            self._remember(key, hit)
        return hit

    def _remember(self, key, value):
        self._cache[key] = value
        while len(self._cache) > self.cache_size:
            self._cache.popitem(last=False)

    def snapshot(self, i: int) -> Snapshot:
        return Snapshot(self.grid, float(self.times[i]), self.values(i), self.kind, self.names)

    @property
    def snapshots(self) -> list[Snapshot]:
        return [self.snapshot(i) for i in range(len(self))]

    def materialize(self) -> SpaceTimeField:
        if self.materialized:
            return self
        data = np.stack([self.values(i) for i in range(len(self))])
        return self.replace(data=data)

    def replace(self, **changes) -> SpaceTimeField:
        kw = dict(
            grid=self.grid,
            times=self.times,
            kind=self.kind,
            names=self.names,
            dt=self.dt if len(self) == 1 else None,
            field_id=self.field_id,
            meta=self.meta,
        )
        if "data" not in changes and "loader" not in changes:
            if self._data is not None:
                changes["data"] = self._data
            else:
                changes["loader"] = self._loader
                changes.setdefault("ncomp", self.ncomp)
        kw.update(changes)
        grid = kw.pop("grid")
        times = kw.pop("times")
        return SpaceTimeField(grid, times, **kw)

    # -- derived fields -----------------------------------------------------

    def derived(
        self,
        key: str,
        fn: Callable[[np.ndarray, int], np.ndarray],
        *,
        ncomp: int,
        kind: str = "scalar",
        names: Sequence[str] | None = None,
        spectrum_fn: Callable[[int], np.ndarray] | None = None,
    ) -> SpaceTimeField:
        """Lazy field whose snapshot ``i`` is ``fn(self.values(i), i)``; memoized by ``key``.

        ``spectrum_fn(i)``, if given, returns the Fourier coefficients of
        snapshot ``i`` directly (saving a transform round trip).
        """
        hit = self._derived.get(key)
        if hit is not None:
            return hit
        out = SpaceTimeField(
            self.grid,
            self.times,
            loader=lambda i: fn(self.values(i), i),
            ncomp=ncomp,
            kind=kind,
            names=names,
            dt=self.dt if len(self) == 1 else None,
            field_id=f"{self.field_id}:{key}",
            meta=self.meta,
            spectrum_fn=spectrum_fn,
        )
        self._derived[key] = out
        return out

    def components(self, idx: Sequence[int], key: str | None = None) -> SpaceTimeField:
        idx = tuple(int(i) for i in idx)
        key = key or "comp" + "".join(str(i + 1) for i in idx)
        names = tuple(self.names[i] for i in idx)
        if self.materialized:
            hit = self._derived.get(key)
            if hit is None:
                hit = SpaceTimeField(
                    self.grid,
                    self.times,
                    np.ascontiguousarray(self._data[:, list(idx)]),
                    kind="scalar" if len(idx) != 3 else self.kind,
                    names=names,
                    dt=self.dt if len(self) == 1 else None,
                    field_id=f"{self.field_id}:{key}",
                    meta=self.meta,
                )
                self._derived[key] = hit
            return hit
        return self.derived(
            key,
            lambda v, i: v[list(idx)],
            ncomp=len(idx),
            kind="scalar" if len(idx) != 3 else self.kind,
            names=names,
        )

    def horizontal(self) -> SpaceTimeField:
        """``u_h = (u1, u2)``."""
        return self.components((0, 1), key="uh")

    def time_index(self, t: float) -> int:
        """Index of the sample at time ``t`` (must coincide with a sample)."""
        idx = int(np.argmin(np.abs(self.times - t)))
        tol = 1e-9 * max(self.dt, abs(t), 1e-300)
        if abs(self.times[idx] - t) > tol:
            raise ValidationError(f"time {t} is not a sample time of the field")
        return idx

    def __repr__(self) -> str:
        return (
            f"SpaceTimeField(id={self.field_id!r}, kind={self.kind}, ncomp={self.ncomp}, "
            f"n={self.grid.n}, nt={len(self)}, t=[{self.times[0]:g}, {self.times[-1]:g}])"
        )


def from_snapshots(snapshots: Sequence[Snapshot], *, dt: float | None = None, **kw) -> SpaceTimeField:
    if not snapshots:
        raise ValidationError("no snapshots given")
    grid = snapshots[0].grid
    for s in snapshots:
        if s.grid != grid:
            raise ValidationError("all snapshots must share one grid")
    data = np.stack([s.data for s in snapshots])
    kw.setdefault("kind", snapshots[0].kind)
    kw.setdefault("names", snapshots[0].names)
    return SpaceTimeField(grid, [s.time for s in snapshots], data, dt=dt, **kw)


def constant_field(
    grid: Grid3, value, times: Sequence[float], *, kind: str | None = None, field_id: str = "constant"
) -> SpaceTimeField:
    """Field equal to a constant vector (or scalar) everywhere; bypasses mean removal."""
    value = np.atleast_1d(np.asarray(value, dtype=np.float64))
    if kind is None:
        kind = "velocity" if value.size == 3 else "scalar"
    times = np.asarray(times, dtype=np.float64)
    data = np.broadcast_to(value[None, :, None, None, None], (times.size, value.size) + grid.shape)
    dt = None if times.size > 1 else 0.0
    return SpaceTimeField(grid, times, np.ascontiguousarray(data), kind=kind, dt=dt, field_id=field_id)


def rescale_field(F: SpaceTimeField, lam: float, homogeneity: float | None = None) -> SpaceTimeField:
    """Apply ``f -> lam**m f(lam x, lam**2 t)`` with ``m`` = 1 (velocity) or 2 (pressure, vorticity).

    The rescaled field lives on a box shrunk by ``lam`` with the same node
    count, so node ``k`` of the result carries the value of node ``k`` of the
    input.  This resampling is exact for every ``lam > 0``; no interpolation
    is ever needed.
    """
    lam = float(lam)
    if not (lam > 0 and math.isfinite(lam)):
        raise ValidationError(f"scaling factor must be positive, got {lam}")
    if homogeneity is None:
        if F.kind not in HOMOGENEITY:
            raise ValidationError(f"give the homogeneity degree for a {F.kind!r} field")
        homogeneity = HOMOGENEITY[F.kind]
    factor = lam**homogeneity
    grid = F.grid.rescaled(lam)
    times = F.times / lam**2
    meta = dict(F.meta)
    meta["rescale"] = meta.get("rescale", 1.0) * lam
    meta["resampled"] = False
    field_id = F.field_id if lam == 1.0 else f"{F.field_id}@{lam:g}"
    dt = F.dt / lam**2 if len(F) == 1 else None
    if F.materialized:
        data = F._data if factor == 1.0 else F._data * factor
        return SpaceTimeField(
            grid, times, np.array(data), kind=F.kind, names=F.names, dt=dt, field_id=field_id, meta=meta
        )
    return SpaceTimeField(
        grid,
        times,
        loader=lambda i: F.values(i) * factor,
        ncomp=F.ncomp,
        kind=F.kind,
        names=F.names,
        dt=dt,
        field_id=field_id,
        meta=meta,
    )
