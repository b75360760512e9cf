"""Stochastic Schroedinger trajectories under H0 + sum_c {h_c, K_c}/2.

Each step draws one white-noise metric sample (held constant over the step)
and applies exp(-i H dt / hbar) with a truncated Taylor series evaluated
matrix-free.  The series is summed until the next term is below ``tol`` in
relative norm, so the step is unitary to that tolerance.
"""

from __future__ import annotations

import copy
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import StabilityError
from ..grid import Constants, Grid
from ..noise import BLOCK_SIZE, NoiseSpec, NoiseStream, sample_step
from .em import EMFieldConfig
from .operators import DenseOperators, MatrixFree

MAX_TAYLOR_TERMS = 60
DENSE_MAX_DIM = 128        # below this a shared dense K_c beats FFTs


@dataclass
class EnsembleResult:
    times: np.ndarray
    rho: np.ndarray            # (n_times, 2N, 2N) ensemble mean of |psi><psi|
    stderr_re: np.ndarray      # standard error of Re rho, elementwise
    stderr_im: np.ndarray
    n_traj: int
    norm_drift: float          # max |<psi|psi> - <psi0|psi0>| over trajectories and samples
    local_error: float         # largest truncated Taylor remainder seen
    segments: dict = field(default_factory=dict)

    @property
    def final(self):
        return self.rho[-1]


class Propagator:
    """Applies exp(-i H dt / hbar) to batches of states of shape (batch, N, 2).

    ``method`` selects matrix-free FFT application or, for small grids, dense
    matrices shared across the batch ("auto" picks by size).
    """

    def __init__(self, grid: Grid, em: EMFieldConfig | None = None, const: Constants = Constants(),
                 tol: float = 1e-15, method: str = "auto", coupling: str = "hamiltonian"):
        self.grid = grid
        self.em = em if em is not None else EMFieldConfig.off(grid)
        self.const = const
        self.ops = MatrixFree(grid, self.em, const)
        self.tol = tol
        self.local_error = 0.0
        if method == "auto":
            method = "dense" if 2 * grid.size <= DENSE_MAX_DIM else "matrix-free"
        if method not in ("dense", "matrix-free"):
            raise ValueError(f"unknown propagation method {method!r}")
        if coupling != "hamiltonian" and method != "dense":
            raise ValueError("only the dense propagator supports the alternative coupling source")
        self.method = method
        if method == "dense":
            dense = DenseOperators(grid, self.em, const)
            self._H0 = dense.H0()
            self._K = {c: K for c, K in dense.couplings(coupling).items() if np.any(K)}
            self._stacks = {}

    def hamiltonian(self, h: dict | None):
        if self.method == "dense":
            return self._dense_hamiltonian(h)
        live = {c: f for c, f in (h or {}).items() if np.any(f) and not self.ops.coupling_vanishes(c)}
        if not live:
            return self.ops.H0
        return lambda psi: self.ops.H0(psi) + self.ops.Hp(live, psi)

    def _dense_hamiltonian(self, h):
        comps = tuple(c for c in sorted(h or {}) if c in self._K and np.any(h[c]))
        if comps not in self._stacks:
            left = np.concatenate([self._H0.T] + [self._K[c].T for c in comps], axis=1)
            right = np.concatenate([self._K[c].T for c in comps], axis=0) if comps else None
            self._stacks[comps] = (left, right)
        left, right = self._stacks[comps]
        d = self._H0.shape[0]
        F = [np.repeat(h[c], 2, axis=1) for c in comps]        # site field on site x spin

        def apply(psi):
            x = psi.reshape(psi.shape[0], d)
            y = x @ left
            out = y[:, :d].copy()
            if comps:
                acc = np.concatenate([f * x for f in F], axis=1) @ right
                for i, f in enumerate(F):
                    acc += f * y[:, d * (i + 1):d * (i + 2)]
                out += 0.5 * acc
            return out.reshape(psi.shape)

        return apply

    def step(self, psi: np.ndarray, dt: float, h: dict | None = None) -> np.ndarray:
        """exp(-i (H0 + Hp[h]) dt / hbar) psi for a batch psi of shape (batch, N, 2)."""
        apply = self.hamiltonian(h)
        factor = -1j * dt / self.const.hbar
        scale = np.sqrt(np.sum(np.abs(psi) ** 2, axis=(1, 2))).max()
        out = psi.copy()
        term = psi
        peak = 0.0
        for k in range(1, MAX_TAYLOR_TERMS + 1):
            term = apply(term) * (factor / k)
            size = np.sqrt(np.sum(np.abs(term) ** 2, axis=(1, 2))).max()
            peak = max(peak, size)
            out += term
            if size <= self.tol * scale:
                self.local_error = max(self.local_error, size / scale if scale else 0.0)
                return out
            if peak > 1e3 * scale:
                break
        raise StabilityError(
            f"time step too large: Taylor series for exp(-iH dt) did not converge "
            f"(largest term {peak / scale:.3e}, last term {size / scale:.3e} relative to |psi|)",
            local_error=float(size / scale),
        )

    def evolve(self, psi0: np.ndarray, T: float, dt: float, h: dict | None = None) -> np.ndarray:
        """Deterministic evolution with a fixed (possibly zero) metric perturbation."""
        psi = _batch(psi0)
        for _ in range(_n_steps(T, dt)):
            psi = self.step(psi, dt, h)
        return psi if np.ndim(psi0) == 3 else psi[0]


def _batch(psi0) -> np.ndarray:
    psi = np.asarray(psi0, dtype=complex)
    return psi[None] if psi.ndim == 2 else psi.copy()


def _n_steps(T, dt) -> int:
    n = int(round(T / dt))
    if n < 1 or abs(n * dt - T) > 1e-9 * max(T, 1.0):
        raise ValueError("T must be a positive integer multiple of dt")
    return n


def run_block(prop: Propagator, psi0: np.ndarray, spec: NoiseSpec, dt: float, n_steps: int,
              sample_steps, seed: int, block: int, lo: int, hi: int):
    """Propagate trajectories lo..hi-1 of one noise block.

    Returns the trajectory count, per-sample means of rho, the centred sums of
    squares of Re rho and Im rho, and the norm drift.
    """
    stream = NoiseStream(seed, block)
    size = hi - lo
    psi = np.repeat(psi0[None], size, axis=0)
    norm0 = np.sum(np.abs(psi0) ** 2)
    d = psi0.size
    n_t = len(sample_steps)
    mean = np.zeros((n_t, d, d), dtype=complex)
    m2_re = np.zeros((n_t, d, d))
    m2_im = np.zeros((n_t, d, d))
    drift = 0.0
    k = 0
    for step in range(n_steps + 1):
        if step == sample_steps[k]:
            flat = psi.reshape(size, d)
            outer = flat[:, :, None] * flat[:, None, :].conj()
            mean[k] = outer.mean(axis=0)
            dev = outer - mean[k]
            m2_re[k] = (dev.real**2).sum(axis=0)
            m2_im[k] = (dev.imag**2).sum(axis=0)
            drift = max(drift, float(np.abs(np.sum(np.abs(flat) ** 2, axis=1) - norm0).max()))
            k += 1
        if step == n_steps:
            break
        h = None
        if spec.alpha > 0:
            sample = sample_step(spec, prop.grid, dt, stream, step=step, batch=BLOCK_SIZE, t=(step + 0.5) * dt)
            h = {c: f[lo:hi] for c, f in sample.fields.items()}
        psi = prop.step(psi, dt, h)
    return size, mean, m2_re, m2_im, drift


def evolve_stochastic(psi0, spec: NoiseSpec, em: EMFieldConfig, T: float, dt: float, seed: int,
                      n_traj: int = 1, grid: Grid | None = None, const: Constants = Constants(),
                      n_samples: int = 10, threads: int = 1, sample_steps=None, method: str = "auto",
                      coupling: str = "hamiltonian", segments=()) -> EnsembleResult:
    """Ensemble of n_traj trajectories from the pure state psi0 (shape (N, 2)).

    Trajectory j always uses column j % BLOCK_SIZE of noise block
    j // BLOCK_SIZE, so results do not depend on ``threads``; partial sums are
    reduced in a fixed order.  ``segments`` lists (start, stop) trajectory
    ranges whose separate ensemble results go to ``result.segments``.
    """
    grid = grid if grid is not None else em.grid
    psi0 = np.asarray(psi0, dtype=complex).reshape(grid.size, 2)
    n_steps = _n_steps(T, dt)
    if n_traj < 1:
        raise ValueError("n_traj must be >= 1")
    if sample_steps is None:
        sample_steps = np.unique(np.linspace(0, n_steps, n_samples + 1).round().astype(int))
    sample_steps = sorted(int(s) for s in sample_steps)
    segments = [(int(a), int(b)) for a, b in segments]
    for a, b in segments:
        if not 0 <= a < b <= n_traj:
            raise ValueError(f"segment {(a, b)} outside 0..{n_traj}")
    cuts = {0, n_traj} | set(range(0, n_traj, BLOCK_SIZE)) | {x for seg in segments for x in seg}
    cuts = sorted(cuts)
    chunks = list(zip(cuts[:-1], cuts[1:]))
    template = Propagator(grid, em, const, method=method, coupling=coupling)

    def work(chunk):
        start, stop = chunk
        b = start // BLOCK_SIZE
        prop = copy.copy(template)
        prop.local_error = 0.0
        out = run_block(prop, psi0, spec, dt, n_steps, sample_steps, seed, b,
                        start - b * BLOCK_SIZE, stop - b * BLOCK_SIZE)
        return out + (prop.local_error,)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, chunks))
    else:
        parts = [work(c) for c in chunks]

    times = np.array(sample_steps) * dt
    result = _reduce(parts, n_traj, times)
    for a, b in segments:
        sel = [p for (lo, hi), p in zip(chunks, parts) if a <= lo and hi <= b]
        result.segments[(a, b)] = _reduce(sel, b - a, times)
    return result


def _reduce(parts, n, times) -> EnsembleResult:
    """Merge per-chunk means and centred sums of squares in chunk order."""
    count, mean, m2_re, m2_im = 0, None, None, None
    for size, m, a, b, *_ in parts:
        if mean is None:
            count, mean, m2_re, m2_im = size, m.copy(), a.copy(), b.copy()
            continue
        total = count + size
        delta = m - mean
        mean = mean + delta * (size / total)
        w = count * size / total
        m2_re = m2_re + a + delta.real**2 * w
        m2_im = m2_im + b + delta.imag**2 * w
        count = total
    assert count == n
    denom = max(n - 1, 1)
    return EnsembleResult(
        times=times,
        rho=mean,
        stderr_re=np.sqrt(m2_re / denom / n),
        stderr_im=np.sqrt(m2_im / denom / n),
        n_traj=n,
        norm_drift=max(p[4] for p in parts),
        local_error=max(p[5] for p in parts),
    )
