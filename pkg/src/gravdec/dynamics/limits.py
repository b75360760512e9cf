"""The two limiting forms of the averaged dynamics.

Position limit: only the rest-energy (and spin-field) part of the 00 coupling
is kept, so for B = 0 the jump operators are diagonal in position and
off-diagonal elements decay at

    Gamma(x, x') = (alpha^2 lambda / hbar^2) (mc^2/2)^2 (1 - C(x - x')).

Momentum limit: low momentum transfer, exp(i q.X) -> 1, so every coupling is
diagonal in momentum and the decay is closed form.
"""

from __future__ import annotations

import numpy as np

from ..grid import Constants, Grid
from ..noise import NoiseSpec, lambda_of
from .em import EMFieldConfig
from .master import MasterEquation, MasterResult
from .operators import DenseOperators, pair


def position_couplings(ops: DenseOperators, coupling: str = "hamiltonian") -> dict:
    c = ops.const
    spin = c.hbar * c.e / ((4 if coupling == "hamiltonian" else 2) * c.m * c.c)
    return {"00": (c.m * c.c**2 / 2) * ops.identity() - spin * ops.B_sigma()}


def evolve_position_limit(rho0, spec: NoiseSpec, em: EMFieldConfig, T: float, dt: float,
                          grid: Grid | None = None, const: Constants = Constants(),
                          coupling: str = "hamiltonian", coherent: bool = True,
                          n_samples: int = 10, sample_steps=None) -> MasterResult:
    grid = grid if grid is not None else em.grid
    ops = DenseOperators(grid, em, const)
    eq = MasterEquation(grid, spec, em, const, couplings=position_couplings(ops, coupling))
    if not coherent:
        eq.energies = np.zeros_like(eq.energies)
        eq.gap = np.zeros_like(eq.gap)
    return eq.evolve(rho0, T, dt, n_samples, sample_steps=sample_steps)


def position_limit_rates(grid: Grid, spec: NoiseSpec, t: float = 0.0, const: Constants = Constants()) -> np.ndarray:
    """Gamma(x, x') for B = 0, as an (N, N) matrix over sites."""
    C = spec.kernel("00").lattice_covariance(grid)
    N = grid.size
    # C depends on the periodic displacement only
    idx = np.array([[_site_difference(grid, a, b) for b in range(N)] for a in range(N)])
    pref = spec.alpha**2 * lambda_of(spec, t) / const.hbar**2 * (const.m * const.c**2 / 2) ** 2
    G = pref * (1.0 - C[idx])
    np.fill_diagonal(G, 0.0)
    return G


def _site_difference(grid: Grid, a: int, b: int) -> int:
    ia = np.unravel_index(a, grid.shape)
    ib = np.unravel_index(b, grid.shape)
    diff = tuple((x - y) % grid.n for x, y in zip(ia, ib))
    return int(np.ravel_multi_index(diff, grid.shape))


# ------------------------------------------------------------ momentum limit


def momentum_couplings(grid: Grid, const: Constants = Constants(), coupling: str = "hamiltonian",
                       components=None) -> dict:
    """Eigenvalue K_c(p) of each coupling on the plane wave p (A = B = 0), per site of k-space."""
    c = const
    p = c.hbar * grid.wavenumbers            # (N, 3)
    p2 = np.sum(p**2, axis=1)
    out = {}
    for comp in components or ("00", "01", "02", "03", "11", "12", "13", "22", "23", "33"):
        a, b = pair(comp)
        if comp == "00":
            K = c.m * c.c**2 / 2 + (-1 if coupling == "hamiltonian" else 1) * p2 / (4 * c.m)
        elif a == 0:
            K = c.c * p[:, b - 1]
        elif coupling == "hamiltonian":
            K = -p[:, a - 1] * p[:, b - 1] / (2 * c.m) * (1 if a == b else 2)
        else:
            K = p[:, a - 1] * p[:, b - 1] / (4 * c.m) * (1 if a == b else 2) + (c.m * c.c**2 / 2) * (a == b)
        out[comp] = K
    return out


def momentum_limit_exponent(grid: Grid, spec: NoiseSpec, t: float, const: Constants = Constants(),
                            coupling: str = "hamiltonian") -> np.ndarray:
    """Matrix D(p, p') with rho_pp'(t) = rho_pp'(0) exp(-i dE t/hbar) exp(-D(p, p'))."""
    lam_int = _lambda_integral(spec, t)
    K = momentum_couplings(grid, const, coupling, spec.active)
    D = np.zeros((grid.size, grid.size))
    for comp in spec.active:
        diff = K[comp][:, None] - K[comp][None, :]
        D += diff**2
    return spec.alpha**2 * lam_int / (2 * const.hbar**2) * D


def _lambda_integral(spec: NoiseSpec, t: float) -> float:
    """int_0^t lambda(s) ds."""
    if spec.lambda_rule == "fixed":
        return spec.lambda_value * t
    tc = spec.tau_c
    return t * t / 2 if t <= tc else tc * tc / 2 + tc * (t - tc)


def to_momentum(rho: np.ndarray, grid: Grid) -> np.ndarray:
    """Position x spin -> momentum x spin (unitary DFT on the site index)."""
    F = np.kron(grid.dft_matrix(), np.eye(2))
    return F @ rho @ F.conj().T


def from_momentum(rho_k: np.ndarray, grid: Grid) -> np.ndarray:
    F = np.kron(grid.dft_matrix(), np.eye(2))
    return F.conj().T @ rho_k @ F


def evolve_momentum_limit(rho0, spec: NoiseSpec, T: float, grid: Grid, const: Constants = Constants(),
                          coupling: str = "hamiltonian", times=None) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form evolution with A = 0 and B = 0; returns (times, states in the position basis)."""
    times = np.array([T]) if times is None else np.asarray(times, dtype=float)
    p = const.hbar * grid.wavenumbers
    E = np.repeat(np.sum(p**2, axis=1) / (2 * const.m), 2)
    rk = to_momentum(np.asarray(rho0, dtype=complex), grid)
    out = []
    for t in times:
        D = np.kron(momentum_limit_exponent(grid, spec, t, const, coupling), np.ones((2, 2)))
        phase = np.exp(-1j * (E[:, None] - E[None, :]) * t / const.hbar)
        out.append(from_momentum(rk * phase * np.exp(-D), grid))
    return times, np.array(out)
