"""Synthetic test fields.

The exactly solvable families (shear, 2-D Taylor-Green, ABC, axis heat) are
returned as their closed-form viscous evolutions, so every time sample is an
exact solution of the unforced equations.  The remaining kinds are frozen in
time.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ValidationError
from .field import FlowParams, SpaceTimeField
from .grid import Grid3
from .spectral import apply_op, leray_project_values

FIELD_KINDS = (
    "zero",
    "constant",
    "shear",
    "taylor_green_2d",
    "abc",
    "axis_heat",
    "rigid_strain",
    "scaled_profile",
)


def _bump_profile(grid: Grid3) -> np.ndarray:
    """1-D ``g`` with ``g(s) = s`` for ``|s| < L/4``, smooth and periodic.

    ``g' = 1 - L*beta`` where ``beta`` is a unit-mass C-infinity bump centred
    on the antipode ``s = L/2``; ``g`` is its zero-mean antiderivative.
    """
    L = grid.box_length
    s = grid.axis()
    y = (s - 0.5 * L) / (0.25 * L)
    inside = np.abs(y) < 1
    beta = np.zeros_like(s)
    beta[inside] = np.exp(-1.0 / (1.0 - y[inside] ** 2))
    beta /= beta.sum() * grid.spacing
    dg = 1.0 - L * beta
    k = 2.0 * np.pi * np.fft.rfftfreq(grid.n, d=grid.spacing)
    gh = np.fft.rfft(dg)
    out = np.zeros_like(gh)
    out[1:] = gh[1:] / (1j * k[1:])
    out[-1] = 0.0
    return np.fft.irfft(out, n=grid.n)


def generate_field(kind: str, params: FlowParams, grid: Grid3, *, t_start: float = 0.0) -> SpaceTimeField:
    """Velocity test field sampled at ``t_start, t_start + dt, ..., t_start + end_time``.

    Spatial means are removed per component, so ``constant`` collapses to the
    zero field.  ``axis_heat`` is ``(0, 0, a sin x1 sin x2)`` decaying by the
    horizontal heat equation; ``rigid_strain`` is a frozen rigid rotation
    ``a (x2, -x1, 0)`` near the origin, periodically closed outside
    ``|x_h| < L/4``; ``scaled_profile`` is the curl of a Gaussian vector
    potential normalised to peak speed ``a``.
    """
    if kind not in FIELD_KINDS:
        raise ValidationError(f"unknown field kind {kind!r}; choose from {FIELD_KINDS}")
    a = params.amplitude
    if not math.isfinite(a):
        raise ValidationError("amplitude must be finite")
    times = params.times(t_start)
    nu = params.nu
    k0 = 2.0 * np.pi / grid.box_length
    x1, x2, x3 = grid.mesh()
    s1, s2, s3 = k0 * x1, k0 * x2, k0 * x3
    zeros = np.zeros(grid.shape)

    decay_rate = 0.0
    if kind in ("zero", "constant"):
        base = np.stack([zeros, zeros, zeros])
    elif kind == "shear":
        base = np.stack([a * np.sin(s2), zeros, zeros])
        decay_rate = nu * k0**2
    elif kind == "taylor_green_2d":
        base = np.stack([a * np.sin(s1) * np.cos(s2), -a * np.cos(s1) * np.sin(s2), zeros])
        decay_rate = 2.0 * nu * k0**2
    elif kind == "abc":
        base = a * np.stack(
            [
                np.sin(s3) + np.cos(s2),
                np.sin(s1) + np.cos(s3),
                np.sin(s2) + np.cos(s1),
            ]
        )
        decay_rate = nu * k0**2
    elif kind == "axis_heat":
        base = np.stack([zeros, zeros, a * np.sin(s1) * np.sin(s2)])
        decay_rate = 2.0 * nu * k0**2
    elif kind == "rigid_strain":
        g = _bump_profile(grid)
        base = a * np.stack([np.broadcast_to(g[None, :, None], grid.shape), -np.broadcast_to(g[:, None, None], grid.shape), zeros])
    else:  # scaled_profile
        c1, c2, c3 = grid.mesh(centered=True)
        sigma = grid.box_length / 12.0
        psi = np.exp(-(c1**2 + c2**2 + c3**2) / (2.0 * sigma**2))
        potential = np.stack([psi, 0.5 * psi, 0.25 * psi])
        base = apply_op(potential, grid, "curl")
        base = leray_project_values(base, grid)
        peak = np.sqrt((base**2).sum(axis=0)).max()
        base = a * base / peak if peak > 0 else base

    base = base - base.mean(axis=(1, 2, 3), keepdims=True)
    base = np.ascontiguousarray(base)
    decay = np.exp(-decay_rate * (times - t_start))
    data = decay[:, None, None, None, None] * base[None]
    if kind == "axis_heat":
        data[:, :2] = 0.0
    meta = {"generator": kind, "amplitude": a, "nu": nu}
    return SpaceTimeField(grid, times, data, kind="velocity", field_id=f"{kind}-n{grid.n}", meta=meta)


def random_solenoidal(
    grid: Grid3,
    seed: int = 0,
    *,
    kmax: int | None = None,
    amplitude: float = 1.0,
    time: float = 0.0,
) -> SpaceTimeField:
    """Random mean-zero divergence-free field with integer modes ``|m_i| <= kmax``.

    The default ``kmax = n/4 - 1`` keeps every quadratic product alias-free,
    so spectral product rules hold to round-off.
    """
    kmax = grid.n // 4 - 1 if kmax is None else int(kmax)
    rng = np.random.default_rng(seed)
    m = np.abs(np.fft.fftfreq(grid.n, d=1.0 / grid.n))
    mh = np.fft.rfftfreq(grid.n, d=1.0 / grid.n)
    keep = (m[:, None, None] <= kmax) & (m[None, :, None] <= kmax) & (mh[None, None, :] <= kmax)
    keep &= (mh[None, None, :] < grid.n // 2)
    shape = (3,) + grid.spectral_shape
    coeffs = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * keep
    mm = m[:, None, None] ** 2 + m[None, :, None] ** 2 + mh[None, None, :] ** 2
    coeffs *= np.exp(-mm / (0.5 * kmax**2 + 1.0))
    values = grid.ifft(coeffs)
    values = leray_project_values(values, grid)
    values -= values.mean(axis=(1, 2, 3), keepdims=True)
    peak = np.sqrt((values**2).sum(axis=0)).max()
    values *= amplitude / peak
    return SpaceTimeField(
        grid, [time], values[None], kind="velocity", dt=0.0, field_id=f"random-s{seed}-n{grid.n}",
        meta={"generator": "random_solenoidal", "seed": seed, "kmax": kmax},
    )
