"""Gaussian white-in-time metric noise with per-block spatial kernels.

Each active component h_c is an independent stationary Gaussian field.  One
time step of length dt carries covariance

    E[h_c(x) h_c(y)] = alpha^2 * lambda * C_c(x - y) / dt

where C_c is the lattice covariance obtained by sampling the kernel's analytic
Fourier transform on the reciprocal lattice and normalising so C_c(0) = 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import stats

from .grid import Grid

COMPONENTS = ("00", "01", "02", "03", "11", "12", "13", "22", "23", "33")
KERNEL_FAMILIES = ("gaussian", "exponential", "delta")


def block_of(component: str) -> str:
    if component == "00":
        return "00"
    if component[0] == "0":
        return "0i"
    return "ij"


@dataclass(frozen=True)
class Kernel:
    family: str = "delta"
    ell: float = 1.0

    def __post_init__(self):
        if self.family not in KERNEL_FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        if not self.ell > 0:
            raise ValueError("correlation length must be positive")

    def u(self, r) -> np.ndarray:
        """Continuum kernel with u(0) = 1."""
        r = np.abs(np.asarray(r, dtype=float))
        if self.family == "gaussian":
            return np.exp(-(r**2) / (2 * self.ell**2))
        if self.family == "exponential":
            return np.exp(-r / self.ell)
        return (r == 0).astype(float)

    def spectrum(self, k2: np.ndarray, dim: int) -> np.ndarray:
        """Unnormalised analytic transform as a function of |k|^2."""
        if self.family == "gaussian":
            return np.exp(-k2 * self.ell**2 / 2)
        if self.family == "exponential":
            # 1D: Lorentzian; 3D: squared Lorentzian
            return (1 + k2 * self.ell**2) ** (-1 if dim == 1 else -2)
        return np.ones_like(k2)

    def lattice_weights(self, grid: Grid) -> np.ndarray:
        """u~_q on the reciprocal lattice, summing to one."""
        return _lattice_weights(self, grid)

    def lattice_covariance(self, grid: Grid) -> np.ndarray:
        """C(x_j - x_0) implied by the lattice weights, per site j."""
        w = self.lattice_weights(grid)
        return (grid.ifft(w) * grid.size).real


@lru_cache(maxsize=64)
def _lattice_weights(kernel: Kernel, grid: Grid) -> np.ndarray:
    s = kernel.spectrum(grid.k_squared, grid.dim)
    if np.any(s < 0):
        raise ValueError("kernel spectral density is negative")
    w = s / s.sum()
    w.setflags(write=False)
    return w


@dataclass(frozen=True)
class NoiseSpec:
    alpha: float = 0.0
    tau_c: float = 1.0
    kernels: dict = field(default_factory=lambda: {"00": Kernel(), "0i": Kernel(), "ij": Kernel()})
    active: tuple = ("00",)
    lambda_rule: str = "fixed"
    lambda_value: float = 1.0

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if not self.tau_c > 0:
            raise ValueError("tau_c must be > 0")
        if self.lambda_rule not in ("min", "fixed"):
            raise ValueError("lambda_rule must be 'min' or 'fixed'")
        if self.lambda_rule == "fixed" and self.lambda_value < 0:
            raise ValueError("fixed lambda must be >= 0")
        for c in self.active:
            if c not in COMPONENTS:
                raise ValueError(f"unknown metric component {c!r}")
        for b in ("00", "0i", "ij"):
            if b not in self.kernels:
                raise ValueError(f"missing kernel for block {b}")

    def kernel(self, component: str) -> Kernel:
        return self.kernels[block_of(component)]

    def __hash__(self):
        return hash((self.alpha, self.tau_c, tuple(sorted(self.kernels.items())), self.active,
                     self.lambda_rule, self.lambda_value))


def lambda_of(spec: NoiseSpec, t: float) -> float:
    if t < 0:
        raise ValueError("t must be >= 0")
    if spec.lambda_rule == "fixed":
        return spec.lambda_value
    return min(spec.tau_c, t)


# ------------------------------------------------------------------ streams

BLOCK_SIZE = 256


class NoiseStream:
    """Counter-based normal variates keyed by (seed, block) and addressed by step.

    Trajectory ``j`` lives in block ``j // BLOCK_SIZE``; the same (seed, block,
    step) always yields the same numbers regardless of how blocks are scheduled.
    """

    def __init__(self, seed: int, block: int = 0):
        self.seed = int(seed)
        self.block = int(block)
        ss = np.random.SeedSequence([self.seed, self.block])
        self._key = ss.generate_state(2, dtype=np.uint64)

    def normals(self, step: int, shape) -> np.ndarray:
        bitgen = np.random.Philox(key=self._key, counter=[0, int(step), 0, 0])
        return np.random.Generator(bitgen).standard_normal(shape)


@dataclass
class MetricSample:
    """One time step of h_c(x); arrays have shape (batch, N)."""

    grid: Grid
    dt: float
    fields: dict
    step: int = 0

    def component(self, name: str) -> np.ndarray:
        name = "".join(sorted(name))
        if name in self.fields:
            return self.fields[name]
        first = next(iter(self.fields.values()), None)
        shape = first.shape if first is not None else (1, self.grid.size)
        return np.zeros(shape)


def synthesize(spec: NoiseSpec, grid: Grid, white: np.ndarray, component: str, scale: float) -> np.ndarray:
    """Filter white noise (..., N) into a field with the component's lattice covariance."""
    kernel = spec.kernel(component)
    if kernel.family == "delta":
        return scale * white
    w = kernel.lattice_weights(grid)
    return scale * grid.ifft(np.sqrt(grid.size * w) * grid.fft(white)).real


def sample_step(spec: NoiseSpec, grid: Grid, dt: float, stream: NoiseStream, step: int = 0,
                batch: int = 1, t: float | None = None) -> MetricSample:
    if not dt > 0:
        raise ValueError("dt must be positive")
    lam = lambda_of(spec, dt * step if t is None else t)
    scale = spec.alpha * np.sqrt(lam / dt)
    white = stream.normals(step, (len(spec.active), batch, grid.size))
    fields = {}
    for i, c in enumerate(spec.active):
        fields[c] = synthesize(spec, grid, white[i], c, scale) if scale else np.zeros((batch, grid.size))
    return MetricSample(grid=grid, dt=dt, fields=fields, step=step)


# --------------------------------------------------------------- statistics


@dataclass
class NoiseStatistics:
    n_samples: int
    mean: dict
    mean_stderr: dict
    covariance: dict      # component -> (lags, estimate, stderr, expected)
    cross: dict           # (c1, c2) -> (estimate, stderr)
    pvalues: dict

    def rows(self):
        """Flat rows (kind, component, lag, estimate, stderr, expected, z)."""
        out = []
        for c, m in self.mean.items():
            se = self.mean_stderr[c]
            out.append(("mean", c, 0, float(m), float(se), 0.0, float(m / se) if se else 0.0))
        for c, (lags, est, se, exp) in self.covariance.items():
            for lag, e_, s_, x_ in zip(lags, est, se, exp):
                z = float((e_ - x_) / s_) if s_ else 0.0
                out.append(("covariance", c, int(lag), float(e_), float(s_), float(x_), z))
        for (a, b), (est, se) in self.cross.items():
            out.append(("cross", f"{a}x{b}", 0, float(est), float(se), 0.0, float(est / se) if se else 0.0))
        return out

    def accepts(self, nsigma: float = 3.0) -> bool:
        return all(abs(r[6]) <= nsigma for r in self.rows())


def estimate_statistics(samples, spec: NoiseSpec | None = None, dt: float | None = None,
                        lags=None, t: float | None = None, grid: Grid | None = None) -> NoiseStatistics:
    """Moments of a stream of metric samples.

    ``samples`` is an iterable of MetricSample (any batch size) or a dict of
    arrays shaped (n_samples, N).  Each sample's spatial average is one
    observation, so standard errors only rely on independence across samples.
    """
    arrays = _collect(samples)
    n = next(iter(arrays.values())).shape[0] if arrays else 0
    if n < 1000:
        raise ValueError("at least 1000 samples are required")
    if grid is None and isinstance(samples, list) and samples and isinstance(samples[0], MetricSample):
        grid = samples[0].grid
    lags = list(range(4)) if lags is None else list(lags)
    mean, mean_se, cov = {}, {}, {}
    for c, a in arrays.items():
        per = a.mean(axis=1)
        mean[c] = float(per.mean())
        mean_se[c] = float(per.std(ddof=1) / np.sqrt(n))
        est, se = [], []
        shaped = a.reshape((n,) + grid.shape) if grid is not None else a
        for lag in lags:
            # displacement of `lag` sites along the first axis
            prod = (shaped * np.roll(shaped, -lag, axis=1)).reshape(n, -1).mean(axis=1)
            est.append(float(prod.mean()))
            se.append(float(prod.std(ddof=1) / np.sqrt(n)))
        expected = np.zeros(len(lags))
        if spec is not None and dt is not None and grid is not None:
            lam = lambda_of(spec, dt if t is None else t)
            C = spec.kernel(c).lattice_covariance(grid)
            stride = grid.n ** (grid.dim - 1)
            expected = spec.alpha**2 * lam / dt * C[(np.array(lags) % grid.n) * stride]
        cov[c] = (np.array(lags), np.array(est), np.array(se), expected)
    cross = {}
    keys = sorted(arrays)
    for i, a in enumerate(keys):
        for b in keys[i + 1:]:
            prod = (arrays[a] * arrays[b]).mean(axis=1)
            cross[(a, b)] = (float(prod.mean()), float(prod.std(ddof=1) / np.sqrt(n)))
    stat = NoiseStatistics(n, mean, mean_se, cov, cross, {})
    for c, (lags_, est, se, exp) in cov.items():
        ok = se > 0
        z2 = float(np.sum(((est[ok] - exp[ok]) / se[ok]) ** 2))
        stat.pvalues[c] = float(stats.chi2.sf(z2, ok.sum())) if ok.any() else 1.0
    return stat


def _collect(samples) -> dict:
    if isinstance(samples, dict):
        return {c: np.asarray(a, dtype=float) for c, a in samples.items()}
    parts: dict = {}
    for s in samples:
        for c, a in s.fields.items():
            parts.setdefault(c, []).append(np.atleast_2d(a))
    return {c: np.concatenate(v, axis=0) for c, v in parts.items()}


def noise_stream_samples(spec: NoiseSpec, grid: Grid, dt: float, n_samples: int, seed: int,
                         batch: int = 1000):
    """Draw n_samples independent steps (batched) from one stream."""
    stream = NoiseStream(seed, 0)
    out = []
    steps = -(-n_samples // batch)
    for s in range(steps):
        b = min(batch, n_samples - s * batch)
        out.append(sample_step(spec, grid, dt, stream, step=s, batch=b, t=dt))
    return out
