"""Spectral calculus on the periodic grid.

All derivatives are exact for band-limited fields.  Odd derivatives drop the
Nyquist mode so that real inputs give real outputs.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .field import Snapshot, SpaceTimeField
from .grid import Grid3

OPS = ("grad", "grad_h", "d3", "curl", "div", "laplacian")


def _out_ncomp(op: str, ncomp: int) -> int:
    if op in ("curl", "div") and ncomp != 3:
        raise ValidationError(f"{op} needs a 3-component field, got {ncomp}")
    return {
        "grad": 3 * ncomp,
        "grad_h": 2 * ncomp,
        "d3": ncomp,
        "curl": 3,
        "div": 1,
        "laplacian": ncomp,
    }[op]


def apply_op(values: np.ndarray, grid: Grid3, op: str, spectrum: np.ndarray | None = None) -> np.ndarray:
    """Apply ``op`` to component lattices of shape ``(ncomp, n, n, n)``."""
    return grid.ifft(apply_op_spectral(values, grid, op, spectrum))


def apply_op_spectral(
    values: np.ndarray | None, grid: Grid3, op: str, spectrum: np.ndarray | None = None
) -> np.ndarray:
    """Fourier coefficients of ``op`` applied to ``values`` (or to ``spectrum``)."""
    if op not in OPS:
        raise ValidationError(f"unknown differential operator {op!r}; choose from {OPS}")
    if spectrum is None:
        values = np.asarray(values, dtype=np.float64)
        if values.ndim == 3:
            values = values[None]
        fh = grid.fft(values)
    else:
        fh = spectrum
    _out_ncomp(op, fh.shape[0])
    k = grid.k_vectors(derivative=True)
    if op == "grad":
        out = np.stack([1j * k[j] * fh[c] for c in range(fh.shape[0]) for j in range(3)])
    elif op == "grad_h":
        out = np.stack([1j * k[j] * fh[c] for c in range(fh.shape[0]) for j in range(2)])
    elif op == "d3":
        out = 1j * k[2] * fh
    elif op == "curl":
        out = 1j * np.stack(
            [
                k[1] * fh[2] - k[2] * fh[1],
                k[2] * fh[0] - k[0] * fh[2],
                k[0] * fh[1] - k[1] * fh[0],
            ]
        )
    elif op == "div":
        out = (1j * (k[0] * fh[0] + k[1] * fh[1] + k[2] * fh[2]))[None]
    else:
        out = -grid.k_squared * fh
    return out


def _op_names(op: str, names: tuple[str, ...]) -> tuple[str, ...] | None:
    if op == "grad":
        return tuple(f"d{j + 1}{n}" for n in names for j in range(3))
    if op == "grad_h":
        return tuple(f"d{j + 1}{n}" for n in names for j in range(2))
    if op == "d3":
        return tuple(f"d3{n}" for n in names)
    if op == "laplacian":
        return tuple(f"lap{n}" for n in names)
    return None


def differential_op(f: Snapshot, op: str) -> Snapshot:
    """Spectral ``grad``, ``grad_h``, ``d3``, ``curl``, ``div`` or ``laplacian`` of a snapshot.

    Gradients of a vector are ordered component-major: entry ``3*i + j`` is
    ``d_j f_i``.
    """
    out = apply_op(f.data, f.grid, op)
    kind = "vorticity" if (op == "curl" and f.kind == "velocity") else "scalar"
    return Snapshot(f.grid, f.time, out, kind, _op_names(op, f.names) or ())


def differentiate(F: SpaceTimeField, op: str) -> SpaceTimeField:
    """Lazy space-time version of :func:`differential_op` (memoized on ``F``)."""
    ncomp = _out_ncomp(op, F.ncomp)
    kind = "vorticity" if (op == "curl" and F.kind == "velocity") else "scalar"
    grid = F.grid
    out = F.derived(
        op,
        lambda v, i: grid.ifft(apply_op_spectral(None, grid, op, spectrum=F.spectrum(i))),
        ncomp=ncomp,
        kind=kind,
        names=_op_names(op, F.names),
        spectrum_fn=lambda i: apply_op_spectral(None, grid, op, spectrum=F.spectrum(i)),
    )
    out._band_parent = F
    return out


def _inverse_dk2(grid: Grid3) -> np.ndarray:
    """``1/|k|^2`` built from the derivative wavenumbers (0 where they vanish)."""
    k = grid.k_vectors(derivative=True)
    k2 = k[0] ** 2 + k[1] ** 2 + k[2] ** 2
    out = np.zeros(np.broadcast_shapes(k[0].shape, k[1].shape, k[2].shape))
    np.divide(1.0, k2, out=out, where=k2 > 0)
    return out


def leray_project_values(values: np.ndarray, grid: Grid3) -> np.ndarray:
    fh = grid.fft(values)
    k = grid.k_vectors(derivative=True)
    kdotu = (k[0] * fh[0] + k[1] * fh[1] + k[2] * fh[2]) * _inverse_dk2(grid)
    out = np.stack([fh[c] - k[c] * kdotu for c in range(3)])
    return grid.ifft(out)


def leray_project(v: Snapshot) -> Snapshot:
    """L2-orthogonal projection onto divergence-free fields (the mean is kept)."""
    if v.ncomp != 3 or v.kind not in ("velocity", "vorticity", "scalar"):
        raise ValidationError("Leray projection needs a 3-component vector snapshot")
    return Snapshot(v.grid, v.time, leray_project_values(v.data, v.grid), v.kind, v.names)


def divergence_residual(v: Snapshot) -> float:
    """``max|div v| / (max|v| / spacing)``; 0 for the zero field."""
    scale = np.abs(v.data).max() / v.grid.spacing
    if scale == 0:
        return 0.0
    return float(np.abs(apply_op(v.data, v.grid, "div")).max() / scale)


def is_divergence_free(v: Snapshot, tol: float = 1e-9) -> bool:
    return divergence_residual(v) <= tol


def band_limited(F: SpaceTimeField, rtol: float = 1e-24) -> bool:
    """True if every snapshot's spectral energy outside ``|m_i| < n/3`` is negligible.

    Fields passing this test are represented exactly by their trigonometric
    interpolant, which is what licenses evaluation between nodes.
    """
    key = ("band_limited", rtol)
    if key in F._derived:
        return F._derived[key]
    parent = getattr(F, "_band_parent", None)
    if parent is not None:
        # derivatives never add modes
        F._derived[key] = band_limited(parent, rtol)
        return F._derived[key]
    grid = F.grid
    mask = grid.dealias_mask
    ok = True
    for i in range(len(F)):
        fh = F.spectrum(i)
        power = np.abs(fh) ** 2
        total = power.sum()
        if total == 0:
            continue
        if power[:, ~mask].sum() > rtol * total:
            ok = False
            break
    F._derived[key] = ok
    return ok


def interpolate(
    spectrum: np.ndarray,
    grid: Grid3,
    x1: np.ndarray,
    x2: np.ndarray,
    x3: np.ndarray | None,
) -> np.ndarray:
    """Evaluate the trigonometric interpolant on the tensor lattice ``x1 x x2 x x3``.

    ``spectrum`` is an ``rfftn`` array of shape ``(ncomp, n, n, n//2+1)``.  If
    ``x3`` is None the native nodes are used along the third axis.  Returns
    shape ``(ncomp, len(x1), len(x2), len(x3) or n)``.  At grid nodes this
    reproduces the data to round-off.
    """
    n = grid.n
    k = grid.wavenumbers
    e1 = np.exp(1j * np.outer(k, np.asarray(x1, dtype=np.float64)))  # (n, A)
    e2 = np.exp(1j * np.outer(k, np.asarray(x2, dtype=np.float64)))  # (n, B)
    # contract axis 1 then axis 2
    g = np.matmul(np.moveaxis(spectrum, 1, -1), e1)  # (c, n2, m3, A)
    g = np.matmul(np.moveaxis(g, 1, -1), e2)  # (c, m3, A, B)
    g = np.moveaxis(g, 1, -1)  # (c, A, B, m3)
    if x3 is None:
        return np.fft.irfft(g, n=n, axis=-1) / (n * n)
    kh = grid.half_wavenumbers
    alpha = np.full(kh.size, 2.0)
    alpha[0] = 1.0
    alpha[-1] = 1.0
    e3 = alpha[:, None] * np.exp(1j * np.outer(kh, np.asarray(x3, dtype=np.float64)))
    return np.real(np.matmul(g, e3)) / n**3
