"""Uniform periodic grids and their Fourier symbols."""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from .errors import ValidationError

MIN_POINTS = 16
# FFT worker threads; the only environment knob the package reads
FFT_WORKERS = max(1, int(os.environ.get("NSREG_THREADS", "1") or 1))


@dataclass(frozen=True)
class Grid3:
    """Uniform periodic grid with ``n`` nodes per axis on ``[0, box_length)^3``.

    Node ``k`` along an axis sits at ``k * spacing``.  Coordinates returned by
    :meth:`centered_axis` are the periodic representatives in
    ``[-box_length/2, box_length/2)``.
    """

    n: int
    box_length: float = 2.0 * np.pi

    def __post_init__(self):
        n = int(self.n)
        if n != self.n or n < MIN_POINTS or n & (n - 1):
            raise ValidationError(
                f"n_per_axis must be a power of two >= {MIN_POINTS}, got {self.n}"
            )
        if not np.isfinite(self.box_length) or self.box_length <= 0:
            raise ValidationError(f"box_length must be positive, got {self.box_length}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "box_length", float(self.box_length))

    @property
    def spacing(self) -> float:
        return self.box_length / self.n

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n, self.n, self.n)

    @property
    def cell_volume(self) -> float:
        return self.spacing**3

    def axis(self) -> np.ndarray:
        return np.arange(self.n) * self.spacing

    def centered_axis(self) -> np.ndarray:
        x = self.axis()
        return np.where(x >= 0.5 * self.box_length, x - self.box_length, x)

    def mesh(self, centered: bool = False) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        x = self.centered_axis() if centered else self.axis()
        return np.meshgrid(x, x, x, indexing="ij")

    def rescaled(self, lam: float) -> Grid3:
        return Grid3(self.n, self.box_length / lam)

    # -- Fourier symbols (real-FFT layout: last axis holds n//2 + 1 modes) --

    @property
    def spectral_shape(self) -> tuple[int, int, int]:
        return (self.n, self.n, self.n // 2 + 1)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers ``2*pi*m/L`` in FFT order (Nyquist negative)."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.spacing)

    @cached_property
    def half_wavenumbers(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.rfftfreq(self.n, d=self.spacing)

    def k_vectors(self, derivative: bool = True) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Broadcastable ``(k1, k2, k3)`` for an ``rfftn`` array.

        With ``derivative=True`` the Nyquist entries are zeroed, which keeps odd
        derivatives of real fields real.
        """
        k = self.wavenumbers.copy()
        kh = self.half_wavenumbers.copy()
        if derivative:
            k[self.n // 2] = 0.0
            kh[-1] = 0.0
        return (k[:, None, None], k[None, :, None], kh[None, None, :])

    @cached_property
    def k_squared(self) -> np.ndarray:
        k1, k2, k3 = self.k_vectors(derivative=False)
        return k1**2 + k2**2 + k3**2

    @cached_property
    def inverse_k_squared(self) -> np.ndarray:
        k2 = self.k_squared
        out = np.zeros_like(k2)
        np.divide(1.0, k2, out=out, where=k2 > 0)
        return out

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """2/3-rule mask on the integer mode index."""
        m = np.abs(np.fft.fftfreq(self.n, d=1.0 / self.n))
        mh = np.fft.rfftfreq(self.n, d=1.0 / self.n)
        keep = m < self.n / 3.0
        keeph = mh < self.n / 3.0
        return keep[:, None, None] & keep[None, :, None] & keeph[None, None, :]

    @cached_property
    def local_symbols(self) -> LocalSymbols:
        return LocalSymbols(self)

    def fft(self, a: np.ndarray) -> np.ndarray:
        a = np.asarray(a)
        if a.ndim == 3:
            return sfft.rfftn(a, workers=FFT_WORKERS)
        # pocketfft is markedly slower on batched 3-D real transforms than on a loop
        flat = a.reshape((-1,) + a.shape[-3:])
        out = np.empty((flat.shape[0],) + a.shape[-3:-1] + (a.shape[-1] // 2 + 1,), dtype=np.complex128)
        for i, block in enumerate(flat):
            out[i] = sfft.rfftn(block, workers=FFT_WORKERS)
        return out.reshape(a.shape[:-3] + out.shape[1:])

    def ifft(self, a: np.ndarray) -> np.ndarray:
        return sfft.irfftn(a, s=self.shape, axes=(-3, -2, -1), workers=FFT_WORKERS)

    # -- alias-free products (3/2 zero padding, Nyquist planes dropped) --

    @cached_property
    def _pad_index(self) -> tuple[np.ndarray, np.ndarray, int]:
        n, h = self.n, self.n // 2
        m = 3 * n // 2
        src = np.concatenate([np.arange(h), np.arange(h + 1, n)])
        dst = np.concatenate([np.arange(h), np.arange(m - h + 1, m)])
        return src, dst, m

    def padded(self, spectrum: np.ndarray) -> np.ndarray:
        """Values of the trigonometric interpolant on the ``3n/2`` grid.

        ``spectrum`` has shape ``(ncomp, n, n, n//2+1)``; Nyquist planes are
        ignored.
        """
        src, dst, m = self._pad_index
        h = self.n // 2
        out = np.zeros(spectrum.shape[:-3] + (m, m, m // 2 + 1), dtype=np.complex128)
        out[..., dst[:, None, None], dst[None, :, None], np.arange(h)[None, None, :]] = spectrum[
            ..., src[:, None, None], src[None, :, None], np.arange(h)[None, None, :]
        ]
        out *= (m / self.n) ** 3
        return sfft.irfftn(out, s=(m, m, m), axes=(-3, -2, -1), workers=FFT_WORKERS)

    def truncated(self, values: np.ndarray) -> np.ndarray:
        """Grid spectrum (Nyquist planes zero) of values on the ``3n/2`` grid."""
        src, dst, m = self._pad_index
        h = self.n // 2
        full = sfft.rfftn(values, axes=(-3, -2, -1), workers=FFT_WORKERS)
        out = np.zeros(values.shape[:-3] + self.spectral_shape, dtype=np.complex128)
        out[..., src[:, None, None], src[None, :, None], np.arange(h)[None, None, :]] = full[
            ..., dst[:, None, None], dst[None, :, None], np.arange(h)[None, None, :]
        ]
        return out * (self.n / m) ** 3


class LocalSymbols:
    """Fourier symbols of fourth-order central difference stencils.

    Stencils reach two nodes along each axis, so an operator built from them
    only sees data within ``2 * spacing`` (per axis) of the evaluation node.
    """

    reach = 2

    def __init__(self, grid: Grid3):
        h = grid.spacing
        self.first = []
        self.second = []
        for axis, k in enumerate((grid.wavenumbers, grid.wavenumbers, grid.half_wavenumbers)):
            kh = k * h
            first = 1j * (8.0 * np.sin(kh) - np.sin(2.0 * kh)) / (6.0 * h)
            first[np.isclose(np.abs(kh), np.pi)] = 0.0
            second = (-2.0 * np.cos(2.0 * kh) + 32.0 * np.cos(kh) - 30.0) / (12.0 * h * h)
            self.first.append(_axis_view(first, axis))
            self.second.append(_axis_view(second, axis))
        lap = self.second[0] + self.second[1] + self.second[2]
        self.laplacian = lap
        inv = np.zeros(lap.shape)
        np.divide(1.0, lap, out=inv, where=lap != 0)
        self.inverse_laplacian = inv

    def mixed(self, i: int, j: int) -> np.ndarray:
        """Symbol of the discrete ``d_i d_j`` (compact second difference on the diagonal)."""
        if i == j:
            return self.second[i]
        return self.first[i] * self.first[j]


def _axis_view(vec: np.ndarray, axis: int) -> np.ndarray:
    shape = [1, 1, 1]
    shape[axis] = vec.shape[0]
    return vec.reshape(shape)
