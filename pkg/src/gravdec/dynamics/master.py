"""Markovian master equation for the noise-averaged density matrix.

    d rho/dt = -(i/hbar)[H, rho]
               - (alpha^2 lambda(t) / 2 hbar^2) sum_c sum_q u~_c(q) [L_cq, [L_cq^dag, rho]]

with L_cq = {exp(i q.X), K_c}/2.  For white noise with the statistics of
``noise.sample_step`` this is the exact average of the stochastic evolution
generated by H0 + sum_c {h_c, K_c}/2.

The q-sum is done in closed form: exp(i q.X) is diagonal in position, so
sum_q u~(q) exp(i q.X) A exp(-i q.X) = C o A, the Hadamard product with
C_ab = C(x_a - x_b).  ``jump_operators`` keeps the explicit q-resolved form
for cross-checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import GuardError, InvariantError
from ..grid import Constants, Grid
from ..noise import NoiseSpec, lambda_of
from .em import EMFieldConfig
from .operators import DenseOperators

MAX_DIM = 512


@dataclass
class MasterResult:
    times: np.ndarray
    states: np.ndarray          # (n_times, 2N, 2N) in the position x spin basis
    trace_drift: float
    hermiticity_drift: float
    min_eigenvalue: float

    @property
    def final(self):
        return self.states[-1]


def jump_operators(ops: DenseOperators, spec: NoiseSpec, couplings: dict, cutoff: float = 0.0):
    """Stack of L_cq and their lattice weights u~_c(q)."""
    grid = ops.grid
    Ls, w = [], []
    for comp, K in couplings.items():
        if not np.any(K):
            continue
        weights = spec.kernel(comp).lattice_weights(grid)
        for iq in np.nonzero(weights > cutoff)[0]:
            phase = np.exp(1j * grid.coords @ grid.wavenumbers[iq])
            E = np.repeat(phase, 2)
            L = 0.5 * (E[:, None] * K + K * E[None, :])
            Ls.append(L)
            w.append(weights[iq])
    d = 2 * grid.size
    if not Ls:
        return np.zeros((0, d, d), dtype=complex), np.zeros(0)
    return np.array(Ls), np.array(w)


def spatial_covariance(grid: Grid, C_site: np.ndarray) -> np.ndarray:
    """(2N, 2N) matrix C(x_a - x_b) on the site x spin index, from C(x_j - x_0)."""
    N = grid.size
    idx = np.array(np.unravel_index(np.arange(N), grid.shape))        # (dim, N)
    diff = (idx[:, :, None] - idx[:, None, :]) % grid.n
    flat = np.ravel_multi_index(tuple(diff), grid.shape)
    return np.kron(C_site[flat], np.ones((2, 2)))


class MasterEquation:
    def __init__(self, grid: Grid, spec: NoiseSpec, em: EMFieldConfig | None = None,
                 const: Constants = Constants(), coupling: str = "hamiltonian",
                 include_hr: bool = False, couplings: dict | None = None):
        if 2 * grid.size > MAX_DIM:
            raise GuardError(f"dense master equation needs 2N <= {MAX_DIM}, got {2 * grid.size}")
        self.grid, self.spec, self.const = grid, spec, const
        self.ops = DenseOperators(grid, em, const)
        H = self.ops.H0()
        if include_hr:
            H = H + self.ops.Hr()
        self.H = H
        if couplings is None:
            couplings = self.ops.couplings(coupling, spec.active)
        self.couplings = {c: K for c, K in couplings.items() if np.any(K)}
        self.energies, self.V = np.linalg.eigh(H)
        self.gap = (self.energies[:, None] - self.energies[None, :]) / const.hbar
        self.channels = []
        S = np.zeros_like(H)
        for comp, K in self.couplings.items():
            C = spatial_covariance(grid, spec.kernel(comp).lattice_covariance(grid))
            S = S + 0.25 * (C * (K @ K) + (C * K) @ K + K @ (C * K) + K @ K)
            self.channels.append((C, K))
        self.S = S          # sum_q u~ L L^dag, summed over channels

    def rate(self, t: float) -> float:
        return self.spec.alpha**2 * lambda_of(self.spec, max(t, 0.0)) / (2 * self.const.hbar**2)

    def dissipator(self, rho: np.ndarray, t: float) -> np.ndarray:
        """-(rate) sum_c sum_q u~ [L,[L^dag, rho]] in the position basis.

        Uses u~(q) = u~(-q) and Hermitian K_c, so that the two sandwich terms
        coincide: sum_q u~ L rho L^dag = sum_q u~ L^dag rho L.
        """
        r = self.rate(t)
        if r == 0 or not self.channels:
            return np.zeros_like(rho)
        sandwich = np.zeros_like(rho)
        for C, K in self.channels:
            Kr = K @ rho
            rK = rho @ K
            sandwich += C * (Kr @ K) + (C * Kr) @ K + K @ (C * rK) + K @ (C * rho) @ K
        return -r * (self.S @ rho + rho @ self.S - 0.5 * sandwich)

    def dissipator_eigen(self, rho: np.ndarray, t: float) -> np.ndarray:
        return self.to_eigen(self.dissipator(self.from_eigen(rho), t))

    def generator(self, rho: np.ndarray, t: float = 0.0) -> np.ndarray:
        """Full right-hand side in the position basis (for diagnostics and tests)."""
        coh = -1j * (self.H @ rho - rho @ self.H) / self.const.hbar
        return coh + self.dissipator(rho, t)

    def to_eigen(self, rho):
        return self.V.conj().T @ rho @ self.V

    def from_eigen(self, rho):
        return self.V @ rho @ self.V.conj().T

    def evolve(self, rho0: np.ndarray, T: float, dt: float, n_samples: int = 10,
               check: bool = True, sample_steps=None) -> MasterResult:
        """Fixed-step RK4 in the interaction picture of H (exact for alpha = 0)."""
        n_steps = int(round(T / dt))
        if n_steps < 1 or abs(n_steps * dt - T) > 1e-9 * max(T, 1.0):
            raise ValueError("T must be a positive integer multiple of dt")
        if sample_steps is None:
            sample_steps = np.unique(np.linspace(0, n_steps, n_samples + 1).round().astype(int))
        sample_steps = set(int(s) for s in sample_steps)
        rot = lambda t: np.exp(-1j * self.gap * t)          # interaction -> Schroedinger phases
        f = lambda t, x: rot(-t) * self.dissipator_eigen(rot(t) * x, t)
        x = self.to_eigen(np.asarray(rho0, dtype=complex))
        times, states = [], []
        trace_drift = herm_drift = 0.0
        min_eig = np.inf
        t = 0.0
        for step in range(n_steps + 1):
            t = step * dt
            if step in sample_steps:
                rho = self.from_eigen(rot(t) * x)
                times.append(t)
                states.append(rho)
                trace_drift = max(trace_drift, abs(np.trace(rho) - np.trace(rho0)))
                herm_drift = max(herm_drift, np.abs(rho - rho.conj().T).max())
                min_eig = min(min_eig, np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min())
                if check and herm_drift > 1e-10:
                    raise InvariantError(f"Hermiticity drift {herm_drift:.3e} at t={t}")
            if step == n_steps:
                break
            k1 = f(t, x)
            k2 = f(t + dt / 2, x + dt / 2 * k1)
            k3 = f(t + dt / 2, x + dt / 2 * k2)
            k4 = f(t + dt, x + dt * k3)
            x = x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        return MasterResult(np.array(times), np.array(states), float(trace_drift), float(herm_drift), float(min_eig))


def evolve_master(rho0, spec: NoiseSpec, em: EMFieldConfig, T: float, dt: float, grid: Grid | None = None,
                  const: Constants = Constants(), coupling: str = "hamiltonian", include_hr: bool = False,
                  n_samples: int = 10) -> MasterResult:
    grid = grid if grid is not None else em.grid
    eq = MasterEquation(grid, spec, em, const, coupling, include_hr)
    return eq.evolve(rho0, T, dt, n_samples)
