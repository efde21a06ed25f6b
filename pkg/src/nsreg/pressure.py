"""Pressure solves, pressure decompositions, slice projections, cutoffs and test functions.

The pressure is the zero-mean periodic solution of ``-Lap pi = d_i d_j (u_i u_j)``.
The near-field/far-field splits (``pi = tilde_pi1 + tilde_pi2`` with
``tilde_pi1`` generated by the cut-off quadratic term) are computed with
fourth-order finite-difference symbols: those operators only couple nodes two
cells apart, so ``tilde_pi2`` is discretely harmonic wherever the cutoff
equals one on the stencil footprint, to round-off.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ScaleError, ValidationError
from .field import Snapshot, SpaceTimeField
from .grid import Grid3
from .regions import disc_cells
from .spectral import divergence_residual, leray_project_values

ALL_PAIRS = tuple((i, j) for i in range(3) for j in range(3))
PI1_PAIRS = tuple(pair for pair in ALL_PAIRS if pair != (2, 2))
CUTOFF_SOURCES = ("pi1_terms", "full_pi", "gradh_pi", "d3pi4_terms")
CUTOFF_MODES = ("ball", "horizontal")
SEC3_NAMES = ("pi", "pi1", "pi2", "pi3", "d3pi4")


def _symbol_dd(grid: Grid3, i: int, j: int) -> np.ndarray:
    """Spectral symbol of ``d_i d_j`` (Nyquist dropped for mixed pairs)."""
    if i == j:
        k = grid.k_vectors(derivative=False)[i]
        return -(k**2)
    k = grid.k_vectors(derivative=True)
    return -k[i] * k[j]


def _product_spectra(values: np.ndarray, grid: Grid3, pairs) -> dict:
    """Alias-free spectra of ``u_i u_j``, so product rules hold to round-off."""
    need = sorted({tuple(sorted(p)) for p in pairs})
    fine = grid.padded(grid.fft(values))
    return {p: grid.truncated(fine[p[0]] * fine[p[1]]) for p in need}


def _pressure_hat(values: np.ndarray, grid: Grid3, pairs=ALL_PAIRS, products=None) -> np.ndarray:
    """``(-Lap)^-1 sum_{pairs} d_i d_j (u_i u_j)`` in Fourier space (zero mean)."""
    products = products or _product_spectra(values, grid, pairs)
    acc = np.zeros(grid.spectral_shape, dtype=np.complex128)
    for i, j in pairs:
        acc += _symbol_dd(grid, i, j) * products[tuple(sorted((i, j)))]
    return acc * grid.inverse_k_squared


def pressure_values(values: np.ndarray, grid: Grid3) -> np.ndarray:
    return grid.ifft(_pressure_hat(values, grid))[None]


def _checked_velocity(u: Snapshot, tol: float) -> np.ndarray:
    if u.ncomp != 3:
        raise ValidationError("the pressure solve needs a 3-component velocity")
    res = divergence_residual(u)
    if res > tol:
        warnings.warn(
            f"velocity divergence residual {res:.3e} exceeds {tol:g}; projecting before the solve",
            RuntimeWarning,
            stacklevel=3,
        )
        return leray_project_values(u.data, u.grid)
    return u.data


def solve_pressure(u: Snapshot, tol: float = 1e-9) -> Snapshot:
    """Zero-mean solution of ``-Lap pi = d_i d_j (u_i u_j)``.

    Velocities that are not divergence-free to ``tol`` are projected first,
    with a warning.
    """
    values = _checked_velocity(u, tol)
    return Snapshot(u.grid, u.time, pressure_values(values, u.grid), "pressure", ("pi",))


def pressure_residual(u: Snapshot, pi: Snapshot) -> float:
    """``max |Lap pi + d_i d_j (u_i u_j)|`` on dealiased modes, relative to ``max|k|^2 |pi_hat|`` scale."""
    grid = u.grid
    lhs = -grid.k_squared * grid.fft(pi.data[0])
    rhs = sum(_symbol_dd(grid, i, j) * p for (i, j), p in _full_products(u.data, grid).items())
    diff = np.where(grid.dealias_mask, lhs + rhs, 0.0)
    scale = max(np.abs(rhs).max(), np.abs(lhs).max(), 1e-300)
    return float(np.abs(diff).max() / scale)


def _full_products(values, grid):
    spectra = _product_spectra(values, grid, ALL_PAIRS)
    return {(i, j): spectra[tuple(sorted((i, j)))] for i, j in ALL_PAIRS}


def pressure_field(U: SpaceTimeField) -> SpaceTimeField:
    """Lazy pressure of every snapshot of a velocity field."""
    if U.kind != "velocity":
        raise ValidationError("pressure needs a velocity field")
    grid = U.grid
    out = U.derived(
        "pressure",
        lambda v, i: pressure_values(v, grid),
        ncomp=1,
        kind="pressure",
        names=("pi",),
        spectrum_fn=lambda i: _pressure_hat(U.values(i), grid)[None],
    )
    return out


# -- section 3 decomposition ---------------------------------------------------------


def sec3_hat(values: np.ndarray, grid: Grid3) -> np.ndarray:
    """Fourier coefficients of ``(pi, pi1, pi2, pi3, d3pi4)``, shape ``(5, ...)``.

    ``pi1`` keeps every pair but ``(3, 3)``; ``pi2`` is the ``(3, 3)`` term;
    ``pi3 = 2 (-Lap)^-1 d3 div_h(-u3 u_h)`` and
    ``d3pi4 = 2 (-Lap)^-1 d3 d3 (u_h . grad_h u3)``.  For divergence-free
    ``u``, ``d3 pi2 = d3 pi3 + d3pi4``.
    """
    products = _product_spectra(values, grid, ALL_PAIRS)
    pi1 = _pressure_hat(values, grid, PI1_PAIRS, products)
    pi2 = _pressure_hat(values, grid, ((2, 2),), products)
    k = grid.k_vectors(derivative=True)
    inv = grid.inverse_k_squared
    pi3 = 2.0 * k[2] * (k[0] * products[(0, 2)] + k[1] * products[(1, 2)]) * inv
    spec = grid.fft(values)
    fine = grid.padded(np.stack([spec[0], spec[1], 1j * k[0] * spec[2], 1j * k[1] * spec[2]]))
    adv = grid.truncated(fine[0] * fine[2] + fine[1] * fine[3])
    d3pi4 = -2.0 * k[2] ** 2 * adv * inv
    return np.stack([pi1 + pi2, pi1, pi2, pi3, d3pi4])


@dataclass
class PressureDecomposition:
    """Pressure pieces; entries are Snapshots or SpaceTimeFields (``None`` if absent)."""

    mode: str
    pi: object
    pi1: object = None
    pi2: object = None
    pi3: object = None
    d3pi4: object = None
    tilde_pi1: object = None
    tilde_pi2: object = None
    meta: dict = field(default_factory=dict)

    def components(self) -> dict:
        names = ("pi", "pi1", "pi2", "pi3", "d3pi4", "tilde_pi1", "tilde_pi2")
        return {n: getattr(self, n) for n in names if getattr(self, n) is not None}

    def identity_residuals(self) -> dict:
        """Relative L2 residuals of the decomposition identities (snapshot mode)."""
        out = {}
        if self.mode == "sec3":
            grid = self.pi.grid
            pi = self.pi.data
            out["completeness"] = _rel_l2(self.pi1.data + self.pi2.data - pi, pi)
            k3 = grid.k_vectors(derivative=True)[2]
            d3 = lambda a: grid.ifft(1j * k3 * grid.fft(a))  # noqa: E731
            lhs = d3(self.pi2.data)
            out["d3_rewrite"] = _rel_l2(lhs - d3(self.pi3.data) - self.d3pi4.data, lhs)
        else:
            out["completeness"] = _rel_l2(self.tilde_pi1.data + self.tilde_pi2.data - self.pi.data, self.pi.data)
        return out


def _rel_l2(diff: np.ndarray, ref: np.ndarray) -> float:
    den = math.sqrt(float(np.sum(ref * ref)))
    num = math.sqrt(float(np.sum(diff * diff)))
    if den == 0:
        return num
    return num / den


def decompose_sec3(u, tol: float = 1e-9) -> PressureDecomposition:
    """``pi = pi1 + pi2`` with ``d3 pi2 = d3 pi3 + d3pi4``; for a Snapshot or a whole field.

    For a SpaceTimeField the pieces are lazy fields computed on demand.
    """
    if isinstance(u, SpaceTimeField):
        if u.kind != "velocity":
            raise ValidationError("the decomposition needs a velocity field")
        grid = u.grid
        both = u.derived(
            "sec3",
            lambda v, i: grid.ifft(sec3_hat(v, grid)),
            ncomp=5,
            names=SEC3_NAMES,
        )
        parts = {}
        for c, name in enumerate(SEC3_NAMES):
            F = both.components((c,), key=name)
            # d3pi4 scales like a pressure gradient, the others like a pressure
            F.kind = "scalar" if name == "d3pi4" else "pressure"
            parts[name] = F
        return PressureDecomposition("sec3", **parts)
    values = _checked_velocity(u, tol)
    pieces = u.grid.ifft(sec3_hat(values, u.grid))
    snaps = {
        name: Snapshot(u.grid, u.time, pieces[c], "scalar" if name == "d3pi4" else "pressure", (name,))
        for c, name in enumerate(SEC3_NAMES)
    }
    return PressureDecomposition("sec3", **snaps)


# -- cutoffs ------------------------------------------------------------------------------


def smoothstep(y):
    """Quintic ``6y^5 - 15y^4 + 10y^3`` clamped to [0, 1]; C2 at both ends."""
    y = np.clip(y, 0.0, 1.0)
    return y**3 * (10.0 + y * (-15.0 + 6.0 * y))


def _smoothstep_d1(y):
    y = np.clip(y, 0.0, 1.0)
    return 30.0 * y**2 * (1.0 - y) ** 2


def _smoothstep_d2(y):
    inside = (y > 0) & (y < 1)
    y = np.clip(y, 0.0, 1.0)
    return np.where(inside, 60.0 * y * (1.0 - y) * (1.0 - 2.0 * y), 0.0)


@dataclass(frozen=True)
class Cutoff:
    """Radial-times-temporal cutoff ``zeta = S_r(|x - x0|) S_t(t)``.

    ``S_r`` is 1 for ``s <= rho/2`` and 0 for ``s >= rho``; ``S_t`` is 1 on
    ``[t0 - rho^2/4, t0]`` and 0 for ``t <= t0 - rho^2``.  In the horizontal
    geometry ``s = |x_h - x0_h|`` and the cutoff ignores ``x3``.
    """

    rho: float
    center: tuple = (0.0, 0.0, 0.0)
    t0: float = 0.0
    geometry: str = "ball"

    def _s(self, x1, x2, x3):
        d = [x1 - self.center[0], x2 - self.center[1]]
        if self.geometry == "ball":
            d.append(x3 - self.center[2])
        return np.sqrt(sum(a * a for a in d)), d

    def radial(self, s):
        half = 0.5 * self.rho
        return 1.0 - smoothstep((s - half) / half)

    def temporal(self, t):
        start = self.t0 - self.rho**2
        return smoothstep((np.asarray(t, dtype=np.float64) - start) / (0.75 * self.rho**2))

    def temporal_dt(self, t):
        start = self.t0 - self.rho**2
        width = 0.75 * self.rho**2
        return _smoothstep_d1((np.asarray(t, dtype=np.float64) - start) / width) / width

    def spatial(self, x1, x2, x3):
        s, _ = self._s(x1, x2, x3)
        return self.radial(s)

    def spatial_derivatives(self, x1, x2, x3):
        """``(zeta_s, grad zeta_s (3 arrays), Lap zeta_s)`` of the spatial factor."""
        s, d = self._s(x1, x2, x3)
        half = 0.5 * self.rho
        y = (s - half) / half
        val = 1.0 - smoothstep(y)
        dr = -_smoothstep_d1(y) / half
        d2r = -_smoothstep_d2(y) / half**2
        safe = np.where(s > 0, s, 1.0)
        grad = [np.where(s > 0, dr * a / safe, 0.0) for a in d]
        if len(grad) == 2:
            grad.append(np.zeros_like(s))
        dim = 3 if self.geometry == "ball" else 2
        lap = d2r + np.where(s > 0, (dim - 1) * dr / safe, 0.0)
        return val, grad, lap

    def __call__(self, x1, x2, x3, t):
        return self.spatial(x1, x2, x3) * self.temporal(t)


def _center_mesh(grid: Grid3, center) -> tuple:
    """Node coordinates as periodic offsets from ``center``, each in ``[-L/2, L/2)``."""
    L = grid.box_length
    out = []
    x = grid.axis()
    for a in range(3):
        d = np.mod(x - center[a] + 0.5 * L, L) - 0.5 * L
        shape = [1, 1, 1]
        shape[a] = grid.n
        out.append(d.reshape(shape))
    return tuple(out)


def build_cutoff(
    r: float,
    rho: float,
    geometry: str,
    grid: Grid3,
    times,
    center=(0.0, 0.0, 0.0),
    t0: float | None = None,
) -> SpaceTimeField:
    """Cutoff ``zeta`` sampled on ``grid`` at ``times`` (``t0`` defaults to the last time).

    Requires ``0 < 4r < rho``.  ``geometry`` is ``"ball"`` or ``"horizontal"``
    (``"vertical"`` is accepted as a synonym of the latter).
    """
    _check_order(r, rho)
    geometry = "horizontal" if geometry == "vertical" else geometry
    if geometry not in CUTOFF_MODES:
        raise ValidationError(f"unknown cutoff geometry {geometry!r}")
    times = np.atleast_1d(np.asarray(times, dtype=np.float64))
    t0 = float(times[-1]) if t0 is None else float(t0)
    cut = Cutoff(rho, tuple(center), t0, "ball" if geometry == "ball" else "horizontal")
    d1, d2, d3 = _center_mesh(grid, center)
    spatial = cut.spatial(d1 + center[0], d2 + center[1], d3 + center[2])
    spatial = np.broadcast_to(spatial, grid.shape)
    data = cut.temporal(times)[:, None, None, None, None] * spatial[None, None]
    F = SpaceTimeField(
        grid,
        times,
        data,
        kind="scalar",
        names=("zeta",),
        dt=None if times.size > 1 else 0.0,
        field_id=f"cutoff-{geometry}-rho{rho:g}",
        meta={"r": r, "rho": rho, "geometry": geometry, "center": list(center), "t0": t0},
    )
    F.cutoff = cut
    return F


def cutoff_derivative_bounds(cut: Cutoff, grid: Grid3) -> dict:
    """Measured ``rho max|grad zeta|`` and ``rho^2 max(|dt zeta| + |Lap zeta|)`` on ``grid`` nodes."""
    d1, d2, d3 = _center_mesh(grid, cut.center)
    c = cut.center
    val, grad, lap = cut.spatial_derivatives(d1 + c[0], d2 + c[1], d3 + c[2])
    gnorm = np.sqrt(sum(np.broadcast_to(g, grid.shape) ** 2 for g in grad))
    ts = np.linspace(cut.t0 - cut.rho**2, cut.t0, 401)
    dt_max = float(np.abs(cut.temporal_dt(ts)).max())
    return {
        "grad": float(gnorm.max() * cut.rho),
        "second": float((dt_max + np.abs(lap).max()) * cut.rho**2),
    }


def _check_order(r: float, rho: float) -> None:
    if not (r > 0 and rho > 0 and 4.0 * r < rho):
        raise ValidationError(f"scales must satisfy 0 < 4r < rho, got r={r:g}, rho={rho:g}")


# -- cutoff decompositions --------------------------------------------------------------


def _cutoff_sources(values: np.ndarray, grid: Grid3, source: str):
    """Terms ``(i, j, g_ij)`` with ``pressure = (-Lap)^-1 sum d_i d_j g_ij`` per output component."""
    u = values
    if source == "full_pi":
        return [[(i, j, u[i] * u[j]) for i, j in ALL_PAIRS]]
    if source == "pi1_terms":
        return [[(i, j, u[i] * u[j]) for i, j in PI1_PAIRS]]
    k = grid.k_vectors(derivative=True)
    if source == "gradh_pi":
        out = []
        for a in range(2):
            terms = []
            for i, j in ALL_PAIRS:
                g = grid.ifft(1j * k[a] * grid.fft(u[i] * u[j]))
                terms.append((i, j, g))
            out.append(terms)
        return out
    if source == "d3pi4_terms":
        u3h = grid.fft(u[2])
        adv = sum(u[a] * grid.ifft(1j * k[a] * u3h) for a in range(2))
        return [[(2, 2, 2.0 * adv)]]
    raise ValidationError(f"unknown cutoff source {source!r}; choose from {CUTOFF_SOURCES}")


def _local_pressure(terms, grid: Grid3, weight=None) -> np.ndarray:
    sym = grid.local_symbols
    acc = np.zeros(grid.spectral_shape, dtype=np.complex128)
    for i, j, g in terms:
        if weight is not None:
            g = g * weight
        acc += sym.mixed(i, j) * grid.fft(g)
    return grid.ifft(-acc * sym.inverse_laplacian)


def local_laplacian(values: np.ndarray, grid: Grid3) -> np.ndarray:
    """Fourth-order finite-difference Laplacian (periodic)."""
    return grid.ifft(grid.local_symbols.laplacian * grid.fft(values))


def decompose_cutoff(
    source: str,
    u: Snapshot,
    rho: float,
    mode: str = "ball",
    center=(0.0, 0.0, 0.0),
    tol: float = 1e-9,
) -> PressureDecomposition:
    """Split a pressure-type field into ``tilde_pi1 + tilde_pi2`` with a spatial cutoff.

    ``tilde_pi1`` is generated by the quadratic source multiplied by
    ``zeta^2`` (``zeta`` = 1 on the ball/disc of radius ``rho/2``, 0 beyond
    ``rho``); ``tilde_pi2`` is the remainder and is harmonic where
    ``zeta = 1``.  Sources: ``full_pi`` (``pi``), ``pi1_terms`` (``pi1``),
    ``gradh_pi`` (``grad_h pi``, two components) and ``d3pi4_terms``.  The
    returned ``pi`` is the source field evaluated with the same local
    operators; ``meta["spectral_deviation"]`` is its relative max distance from
    the spectral solve.
    """
    if mode not in CUTOFF_MODES:
        raise ValidationError(f"unknown cutoff mode {mode!r}; choose from {CUTOFF_MODES}")
    grid = u.grid
    if rho < 4.0 * grid.spacing or rho >= 0.5 * grid.box_length:
        raise ScaleError(f"cutoff radius {rho:g} is not resolvable on spacing {grid.spacing:g}")
    values = _checked_velocity(u, tol)
    cut = Cutoff(rho, tuple(center), u.time, mode)
    d1, d2, d3 = _center_mesh(grid, center)
    zeta = np.broadcast_to(cut.spatial(d1 + center[0], d2 + center[1], d3 + center[2]), grid.shape)
    weight = zeta**2
    comps = _cutoff_sources(values, grid, source)
    full = np.stack([_local_pressure(t, grid) for t in comps])
    near = np.stack([_local_pressure(t, grid, weight) for t in comps])
    spectral = np.stack([_spectral_pressure(t, grid) for t in comps])
    scale = max(float(np.abs(spectral).max()), 1e-300)
    names = ("d1pi", "d2pi") if source == "gradh_pi" else ("pi",)
    kind = "pressure" if len(names) == 1 else "scalar"
    mk = lambda a, nm: Snapshot(grid, u.time, a, kind, tuple(nm))  # noqa: E731
    meta = {
        "source": source,
        "rho": rho,
        "mode": mode,
        "center": list(center),
        "inner_radius": rho / 4.0,
        "spectral_deviation": float(np.abs(full - spectral).max() / scale),
        "cutoff": cut,
    }
    return PressureDecomposition(
        "cutoff",
        mk(full, names),
        tilde_pi1=mk(near, ["tilde_" + n for n in names]),
        tilde_pi2=mk(full - near, ["tilde2_" + n for n in names]),
        meta=meta,
    )


def _spectral_pressure(terms, grid: Grid3) -> np.ndarray:
    acc = np.zeros(grid.spectral_shape, dtype=np.complex128)
    for i, j, g in terms:
        acc += _symbol_dd(grid, i, j) * grid.fft(g)
    return grid.ifft(acc * grid.inverse_k_squared)


def inner_mask(dec: PressureDecomposition, radius: float | None = None) -> np.ndarray:
    """Nodes within ``radius`` (default ``rho/4``) of the cutoff centre."""
    grid = dec.pi.grid
    center = dec.meta["center"]
    radius = dec.meta["inner_radius"] if radius is None else radius
    d1, d2, d3 = _center_mesh(grid, center)
    if dec.meta["mode"] == "ball":
        s2 = d1**2 + d2**2 + d3**2
    else:
        s2 = np.broadcast_to(d1**2 + d2**2, grid.shape)
    return np.broadcast_to(s2 < radius**2, grid.shape)


def harmonic_residual(dec: PressureDecomposition, radius: float | None = None) -> float:
    """``max |Lap tilde_pi2|`` on the inner region divided by ``max |pi|``."""
    if dec.mode != "cutoff":
        raise ValidationError("harmonic residuals need a cutoff decomposition")
    grid = dec.pi.grid
    mask = inner_mask(dec, radius)
    lap = local_laplacian(dec.tilde_pi2.data, grid)
    scale = float(np.abs(dec.pi.data).max())
    if scale == 0:
        return 0.0
    return float(np.abs(lap[:, mask]).max() / scale)


def calderon_zygmund_ratio(dec: PressureDecomposition, u: Snapshot, p: float) -> float:
    """``||tilde_pi1||_{L^p} / || |u_h| |u| ||_{L^p}`` over the box."""
    h3 = u.grid.cell_volume
    num = (np.sum(np.abs(np.sqrt((dec.tilde_pi1.data**2).sum(axis=0))) ** p) * h3) ** (1 / p)
    uh = np.sqrt(u.data[0] ** 2 + u.data[1] ** 2)
    uu = np.sqrt((u.data**2).sum(axis=0))
    zeta = dec.meta["cutoff"]
    d1, d2, d3 = _center_mesh(u.grid, zeta.center)
    c = zeta.center
    weight = np.broadcast_to(zeta.spatial(d1 + c[0], d2 + c[1], d3 + c[2]), u.grid.shape) ** 2
    den = (np.sum((uh * uu * weight) ** p) * h3) ** (1 / p)
    return float(num / den) if den > 0 else 0.0


# -- slice projections ------------------------------------------------------------------


def _interval_weights(grid: Grid3, center: float, half: float) -> tuple[np.ndarray, np.ndarray]:
    """Node indices and cell-overlap lengths for ``[center - half, center + half]``."""
    h = grid.spacing
    c = center / h
    R = half / h
    m = np.arange(math.floor(c - R - 1), math.ceil(c + R + 1) + 1)
    d = m - c
    w = np.clip(np.minimum(d + 0.5, R) - np.maximum(d - 0.5, -R), 0.0, None)
    keep = w > 0
    return np.mod(m[keep], grid.n), w[keep] * h


@dataclass
class SliceProjections:
    """``P3 f`` (n x n lattice over ``x_h``), ``Ph f`` and ``P_{h,r} f`` (length-n over ``x3``)."""

    P3: np.ndarray
    Ph: np.ndarray
    Phr: np.ndarray
    scale: float


def slice_projections(f: Snapshot, scale: float, center=(0.0, 0.0, 0.0)) -> SliceProjections:
    """Vertical average over ``|x3 - c3| < scale``, square average over
    ``|x_i - c_i| < scale`` (i = 1, 2), and disc average over ``|x_h - c_h| < scale``.

    All three use cell-overlap weights normalised to sum to one, so each is
    an exact averaging operator on the grid (linear and idempotent).
    """
    grid = f.grid
    if f.ncomp != 1:
        raise ValidationError("slice projections need a scalar snapshot")
    if not (scale > 0) or scale > 0.5 * grid.box_length:
        raise ScaleError(f"projection scale {scale:g} exceeds the box half-length")
    a = f.data[0]
    k3, w3 = _interval_weights(grid, center[2], scale)
    P3 = a[:, :, k3] @ w3 / w3.sum()
    k1, w1 = _interval_weights(grid, center[0], scale)
    k2, w2 = _interval_weights(grid, center[1], scale)
    Ph = np.einsum("ijk,i,j->k", a[np.ix_(k1, k2)], w1, w2) / (w1.sum() * w2.sum())
    h = grid.spacing
    c = (math.fmod(center[0] / h, grid.n) % grid.n, math.fmod(center[1] / h, grid.n) % grid.n)
    d1, d2, fd = disc_cells(c, scale / h)
    Phr = fd @ a[d1 % grid.n, d2 % grid.n, :] / fd.sum()
    return SliceProjections(P3, Ph, Phr, scale)
