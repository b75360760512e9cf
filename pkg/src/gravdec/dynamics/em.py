"""Static electromagnetic potentials sampled on the grid."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..grid import Grid


@dataclass
class EMFieldConfig:
    """A0(x), A_i(x) on the grid plus an optional uniform magnetic field.

    A uniform B has no periodic vector potential, so it is carried separately
    and the corresponding A is taken to vanish.
    """

    grid: Grid
    A0: np.ndarray
    A: np.ndarray                      # (3, N) vector-potential components
    B_uniform: np.ndarray = field(default_factory=lambda: np.zeros(3))

    @classmethod
    def off(cls, grid: Grid):
        return cls(grid, np.zeros(grid.size), np.zeros((3, grid.size)))

    @classmethod
    def uniform_B(cls, grid: Grid, B):
        em = cls.off(grid)
        em.B_uniform = np.asarray(B, dtype=float)
        return em

    @classmethod
    def coulomb_like(cls, grid: Grid, strength: float, softening: float, center=None):
        if center is None:
            center = np.full(3, grid.length / 2)
            center[grid.dim:] = 0.0
        d = grid.min_image(grid.coords - np.asarray(center))
        r = np.sqrt(np.sum(d**2, axis=1) + softening**2)
        em = cls.off(grid)
        em.A0 = strength / r
        return em

    @classmethod
    def vector_wave(cls, grid: Grid, amplitude: float, component: int = 2, mode: int = 1):
        """A_component = amplitude * sin(2 pi mode x / L); gives B varying along x."""
        em = cls.off(grid)
        em.A[component - 1] = amplitude * np.sin(2 * np.pi * mode * grid.coords[:, 0] / grid.length)
        return em

    @property
    def is_off(self) -> bool:
        return not (np.any(self.A0) or np.any(self.A) or np.any(self.B_uniform))

    @property
    def has_vector_potential(self) -> bool:
        return bool(np.any(self.A))

    @property
    def B(self) -> np.ndarray:
        """(3, N) magnetic field, curl A (spectral) plus the uniform part."""
        g = self.grid
        out = np.zeros((3, g.size))
        for k, (i, j) in enumerate(((2, 3), (3, 1), (1, 2))):
            out[k] = g.gradient(self.A[j - 1], i) - g.gradient(self.A[i - 1], j)
        return out + self.B_uniform[:, None]

    @property
    def E(self) -> np.ndarray:
        """(3, N) electric field of static potentials, -grad A0."""
        return -np.array([self.grid.gradient(self.A0, i) for i in (1, 2, 3)])

    def div_E(self) -> np.ndarray:
        E = self.E
        return sum(self.grid.gradient(E[i - 1], i) for i in (1, 2, 3))

    def curl_E(self) -> np.ndarray:
        g, E = self.grid, self.E
        out = np.zeros((3, g.size))
        for k, (i, j) in enumerate(((2, 3), (3, 1), (1, 2))):
            out[k] = g.gradient(E[j - 1], i) - g.gradient(E[i - 1], j)
        return out
