"""Periodic real-space grid and its reciprocal lattice."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class Constants:
    """Physical constants in code units (natural units by default)."""

    hbar: float = 1.0
    c: float = 1.0
    m: float = 1.0
    e: float = 1.0


@dataclass(frozen=True)
class Grid:
    dim: int
    n: int
    spacing: float = 1.0

    def __post_init__(self):
        if self.dim not in (1, 3):
            raise ValueError("dim must be 1 or 3")
        if self.n < 2 or self.n & (self.n - 1):
            raise ValueError("n must be a power of two >= 2")
        if not self.spacing > 0:
            raise ValueError("spacing must be positive")

    @property
    def shape(self):
        return (self.n,) * self.dim

    @property
    def size(self) -> int:
        return self.n**self.dim

    @property
    def length(self) -> float:
        return self.n * self.spacing

    @cached_property
    def axes(self):
        return np.arange(self.n) * self.spacing

    @cached_property
    def coords(self) -> np.ndarray:
        """(N, 3) site positions; unused axes are zero."""
        mesh = np.meshgrid(*([self.axes] * self.dim), indexing="ij")
        out = np.zeros((self.size, 3))
        for i, m in enumerate(mesh):
            out[:, i] = m.ravel()
        return out

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """(N, 3) reciprocal-lattice vectors k (rad/length) in FFT order."""
        k1 = 2 * np.pi * np.fft.fftfreq(self.n, d=self.spacing)
        mesh = np.meshgrid(*([k1] * self.dim), indexing="ij")
        out = np.zeros((self.size, 3))
        for i, m in enumerate(mesh):
            out[:, i] = m.ravel()
        return out

    @cached_property
    def k_squared(self) -> np.ndarray:
        return np.sum(self.wavenumbers**2, axis=1)

    def displacement(self, a: int, b: int) -> np.ndarray:
        """Minimum-image separation vector between sites a and b."""
        d = self.coords[b] - self.coords[a]
        L = self.length
        d[: self.dim] -= L * np.round(d[: self.dim] / L)
        return d

    def min_image(self, dx: np.ndarray) -> np.ndarray:
        L = self.length
        out = np.array(dx, dtype=float)
        out[..., : self.dim] -= L * np.round(out[..., : self.dim] / L)
        return out

    # spectral helpers on arrays whose trailing axes are the N sites
    def fft(self, f: np.ndarray, site_axis: int = -1) -> np.ndarray:
        f = np.moveaxis(f, site_axis, -1)
        lead = f.shape[:-1]
        g = np.fft.fftn(f.reshape(lead + self.shape), axes=tuple(range(-self.dim, 0)))
        return np.moveaxis(g.reshape(lead + (self.size,)), -1, site_axis)

    def ifft(self, f: np.ndarray, site_axis: int = -1) -> np.ndarray:
        f = np.moveaxis(f, site_axis, -1)
        lead = f.shape[:-1]
        g = np.fft.ifftn(f.reshape(lead + self.shape), axes=tuple(range(-self.dim, 0)))
        return np.moveaxis(g.reshape(lead + (self.size,)), -1, site_axis)

    def gradient(self, f: np.ndarray, axis: int) -> np.ndarray:
        """Spectral derivative d/dx_axis (axis in 1..3) of a real periodic field."""
        if axis > self.dim:
            return np.zeros_like(f, dtype=float)
        return self.ifft(1j * self.wavenumbers[:, axis - 1] * self.fft(f)).real

    def dft_matrix(self) -> np.ndarray:
        """Unitary DFT matrix in the site ordering used by ``fft``."""
        phase = self.wavenumbers @ self.coords.T
        return np.exp(-1j * phase) / np.sqrt(self.size)
