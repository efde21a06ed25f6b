"""Pseudo-spectral Navier-Stokes integrator on the periodic box.

The projected equations ``u_t = nu Lap u - P[(u . grad) u]`` are advanced by
the integrating-factor fourth-order Runge-Kutta scheme: the viscous term is
integrated exactly through ``exp(-nu |k|^2 t)`` and the nonlinear term by
classical RK4.  Products are formed in physical space and dealiased with the
2/3 rule unless disabled.
"""

from __future__ import annotations

import numpy as np

from .errors import NumericalError, ValidationError
from .field import FlowParams, Snapshot, SpaceTimeField
from .grid import Grid3
from .pressure import pressure_values
from .spectral import divergence_residual

__all__ = ["ns_evolve", "kinetic_energy", "STABILITY_FACTOR"]

STABILITY_FACTOR = 0.5


def kinetic_energy(values: np.ndarray, grid: Grid3) -> float:
    """``int |u|^2`` over the box."""
    return float(np.sum(values * values) * grid.cell_volume)


_PAIRS = ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))
_PAIR_INDEX = {(i, j): n for n, (a, b) in enumerate(_PAIRS) for (i, j) in ((a, b), (b, a))}


class _Rhs:
    def __init__(self, grid: Grid3, dealias: bool):
        self.grid = grid
        self.k = grid.k_vectors(derivative=True)
        k2 = self.k[0] ** 2 + self.k[1] ** 2 + self.k[2] ** 2
        self.inv_k2 = np.zeros_like(k2)
        np.divide(1.0, k2, out=self.inv_k2, where=k2 > 0)
        self.mask = grid.dealias_mask if dealias else None

    def __call__(self, uh: np.ndarray) -> np.ndarray:
        grid, k = self.grid, self.k
        if self.mask is not None:
            uh = uh * self.mask
        u = grid.ifft(uh)
        # (u . grad) u = div(u u) for solenoidal u
        uu = grid.fft(np.stack([u[i] * u[j] for i, j in _PAIRS]))
        nh = np.empty_like(uh)
        for i in range(3):
            nh[i] = -1j * sum(k[j] * uu[_PAIR_INDEX[i, j]] for j in range(3))
        if self.mask is not None:
            nh *= self.mask
        kdot = (k[0] * nh[0] + k[1] * nh[1] + k[2] * nh[2]) * self.inv_k2
        for i in range(3):
            nh[i] -= k[i] * kdot
        return nh


def ns_evolve(
    u0,
    params: FlowParams,
    save_every: int = 1,
    *,
    field_id: str | None = None,
) -> tuple[SpaceTimeField, SpaceTimeField]:
    """Evolve ``u0`` to ``u0.time + params.end_time``; return velocity and pressure fields.

    ``u0`` is a velocity Snapshot (or the last snapshot of a field is used).
    Every ``save_every``-th step is emitted, together with the pressure solved
    from that velocity.  Kinetic energies of the emitted samples are stored in
    ``meta["energy"]``.

    Raises
    ------
    ValidationError
        If ``u0`` is not divergence-free or ``dt`` violates
        ``dt <= 0.5 * spacing / max|u0|``.
    NumericalError
        If a non-finite value appears; ``.step`` holds the step index.
    """
    if isinstance(u0, SpaceTimeField):
        field_id = field_id or f"{u0.field_id}-evolved"
        u0 = u0.snapshot(len(u0) - 1)
    if not isinstance(u0, Snapshot) or u0.ncomp != 3:
        raise ValidationError("ns_evolve needs a 3-component velocity snapshot")
    save_every = int(save_every)
    if save_every < 1:
        raise ValidationError("save_every must be a positive integer")
    grid = u0.grid
    res = divergence_residual(u0)
    if res > 1e-9:
        raise ValidationError(f"initial velocity is not divergence-free (residual {res:.3e})")
    dt, nu = params.dt, params.nu
    umax = float(np.sqrt((u0.data**2).sum(axis=0)).max())
    if umax > 0 and dt > STABILITY_FACTOR * grid.spacing / umax:
        raise ValidationError(
            f"dt={dt:g} violates the stability bound dt <= {STABILITY_FACTOR} * spacing / max|u0| "
            f"= {STABILITY_FACTOR * grid.spacing / umax:g}"
        )
    steps = params.steps
    if steps % save_every:
        raise ValidationError(f"{steps} steps are not a multiple of save_every={save_every}")

    rhs = _Rhs(grid, params.dealias)
    E = np.exp(-0.5 * nu * dt * grid.k_squared)
    E2 = E * E
    uh = grid.fft(u0.data)
    mean = uh[:, 0, 0, 0].copy()

    def emit(uh):
        u = grid.ifft(uh)
        return u, pressure_values(u, grid)[0]

    u, p = emit(uh)
    vel, pres, times, energy = [u], [p], [u0.time], [kinetic_energy(u, grid)]
    for step in range(1, steps + 1):
        a = rhs(uh)
        b = rhs(E * (uh + 0.5 * dt * a))
        c = rhs(E * uh + 0.5 * dt * b)
        d = rhs(E2 * uh + dt * E * c)
        uh = E2 * uh + (dt / 6.0) * (E2 * a + 2.0 * E * (b + c) + d)
        uh[:, 0, 0, 0] = mean
        if not np.all(np.isfinite(uh)):
            raise NumericalError(f"non-finite velocity at step {step}", step=step)
        if step % save_every == 0:
            u, p = emit(uh)
            vel.append(u)
            pres.append(p)
            times.append(u0.time + step * dt)
            energy.append(kinetic_energy(u, grid))

    times = np.asarray(times)
    fid = field_id or "evolved"
    meta = {
        "nu": nu,
        "dt": dt,
        "save_every": save_every,
        "dealias": params.dealias,
        "energy": energy,
        "energy_monotone": bool(all(e1 <= e0 * (1 + 1e-8) for e0, e1 in zip(energy, energy[1:]))),
    }
    U = SpaceTimeField(grid, times, np.stack(vel), kind="velocity", field_id=fid, meta=meta,
                       dt=None if len(times) > 1 else 0.0)
    P = SpaceTimeField(grid, times, np.stack(pres)[:, None], kind="pressure", field_id=f"{fid}:pi",
                       meta=meta, dt=None if len(times) > 1 else 0.0)
    return U, P
