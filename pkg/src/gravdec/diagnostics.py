"""Coherence observables, decay-rate fits, regime classification, model comparison."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .grid import Constants, Grid
from .noise import NoiseSpec
from .dynamics.em import EMFieldConfig
from .dynamics.limits import to_momentum
from .dynamics.operators import DenseOperators

BASES = ("position", "momentum", "energy")


def change_basis(rho: np.ndarray, basis: str, grid: Grid | None = None, H: np.ndarray | None = None):
    if basis == "position":
        return rho
    if basis == "momentum":
        if grid is None:
            raise ValueError("momentum basis needs the grid")
        return to_momentum(rho, grid)
    if basis == "energy":
        if H is None:
            raise ValueError("energy basis needs the Hamiltonian")
        _, V = np.linalg.eigh(H)
        return V.conj().T @ rho @ V
    raise ValueError(f"unknown basis {basis!r}")


def coherence(rho: np.ndarray, basis: str, pair, grid: Grid | None = None, H: np.ndarray | None = None) -> float:
    """|<a|rho|b>| in the position, momentum or energy basis (index = 2*mode + spin)."""
    a, b = pair
    d = rho.shape[0]
    if not (0 <= a < d and 0 <= b < d):
        raise IndexError(f"pair {pair} out of range for dimension {d}")
    return float(abs(change_basis(rho, basis, grid, H)[a, b]))


@dataclass
class CoherenceSeries:
    times: np.ndarray
    values: np.ndarray
    basis: str = "position"
    pair: tuple = (0, 1)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.shape != self.values.shape:
            raise ValueError("times and values differ in length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        if np.any(self.values < 0):
            raise ValueError("coherence values are non-negative")

    @classmethod
    def from_states(cls, times, states, basis, pair, grid=None, H=None):
        if basis != "position":
            # one transform for all states
            if basis == "energy":
                _, V = np.linalg.eigh(H)
                states = [V.conj().T @ r @ V for r in states]
            else:
                states = [change_basis(r, basis, grid) for r in states]
        a, b = pair
        return cls(times, np.array([abs(r[a, b]) for r in states]), basis, tuple(pair))


@dataclass
class DecayFit:
    gamma: float
    ci95: float
    r2: float
    n_points: int
    truncated: bool = False
    warnings: list = field(default_factory=list)


def fit_decay_rate(series: CoherenceSeries, min_points: int = 10) -> DecayFit:
    """Least-squares fit of log|rho_ab(t)| = -gamma t + const."""
    t, y = series.times, series.values
    truncated = False
    notes = []
    if np.any(y <= 0):
        bad = np.nonzero(y <= 0)[0][0]
        t, y = t[:bad], y[:bad]
        truncated = True
        notes.append(f"non-positive value at index {bad}; fitted the first {bad} points")
    n = len(t)
    if n < min_points:
        raise ValueError(f"need at least {min_points} positive points, got {n}")
    ly = np.log(y)
    tm = t - t.mean()
    sxx = np.sum(tm**2)
    slope = np.sum(tm * (ly - ly.mean())) / sxx
    resid = ly - ly.mean() - slope * tm
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 or ss_res <= 1e-30 * max(ss_tot, 1.0) else 1.0 - ss_res / ss_tot
    se = np.sqrt(ss_res / (n - 2) / sxx)
    ci = float(stats.t.ppf(0.975, n - 2) * se)
    return DecayFit(gamma=float(-slope), ci95=ci, r2=float(r2), n_points=n, truncated=truncated, warnings=notes)


# ---------------------------------------------------------------- regimes


@dataclass
class StateSummary:
    """Scales of the state under study."""

    delta_E: float = 0.0      # energy spread of the superposed branches
    delta_x: float = 1.0      # branch separation
    p: float = 0.0            # typical momentum
    A: float = 0.0            # typical |A|
    B: float = 0.0            # typical |B|


def momentum_transfer_scale(spec: NoiseSpec, hbar: float = 1.0) -> float:
    """Largest momentum the active kernels transfer; infinite for the delta kernel."""
    q = 0.0
    for comp in spec.active:
        k = spec.kernel(comp)
        q = max(q, np.inf if k.family == "delta" else hbar / k.ell)
    return q


def classify_regime(spec: NoiseSpec, state: StateSummary, const: Constants = Constants(),
                    factor: float = 10.0) -> str:
    """'position', 'momentum' or 'mixed'; a << b means factor * a <= b."""
    c = const
    ll = lambda a, b: factor * abs(a) <= abs(b)
    only_00 = tuple(spec.active) == ("00",)
    u = float(spec.kernel("00").u(state.delta_x))
    if only_00 and ll(state.delta_E, c.m * c.c**2 * (1 - u)) and u < 1:
        return "position"
    q = momentum_transfer_scale(spec, c.hbar)
    low_transfer = np.isfinite(q) and ll(q * state.delta_x / c.hbar, 1.0)
    minimal = ll(c.e * state.A / c.c, state.p)
    spin = ll(c.hbar * c.e * state.B / (2 * c.m * c.c), state.p**2 / (2 * c.m))
    if low_transfer and minimal and spin:
        return "momentum"
    return "mixed"


# ------------------------------------------------------- model comparison


@dataclass
class ModelComparison:
    max_abs_diff: float
    term_table: list          # (term, max_abs_diff)


def compare_models(grid: Grid, em: EMFieldConfig | None, h: dict, const: Constants = Constants()) -> ModelComparison:
    """Spin-1/2 versus scalar gravitational correction with the vector potential off."""
    em = em if em is not None else EMFieldConfig.off(grid)
    if em.has_vector_potential or np.any(em.B_uniform):
        raise ValueError("model comparison requires A = 0")
    ops = DenseOperators(grid, em, const)
    table = []
    for comp in sorted(h):
        single = {comp: h[comp]}
        table.append((f"h{comp}", float(np.abs(ops.Hp_fermion(single) - ops.Hp_boson(single)).max())))
    total = float(np.abs(ops.Hp_fermion(h) - ops.Hp_boson(h)).max()) if h else 0.0
    return ModelComparison(total, table)


# --------------------------------------------------- ensemble vs reference


@dataclass
class EnsembleComparison:
    passed: bool
    max_z: float
    n_outside: int
    n_elements: int
    rms_error: float


def compare_ensemble(rho: np.ndarray, stderr_re: np.ndarray, stderr_im: np.ndarray, reference: np.ndarray,
                     nsigma: float = 3.0, atol: float = 1e-12) -> EnsembleComparison:
    """Elementwise |mean - reference| <= nsigma * stderr + atol for real and imaginary parts.

    ``atol`` covers elements that are rounding noise in both (e.g. Im of diagonals).
    """
    d = rho - reference
    out_re = np.abs(d.real) > nsigma * stderr_re + atol
    out_im = np.abs(d.imag) > nsigma * stderr_im + atol
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.concatenate([np.abs(d.real) / np.maximum(stderr_re, atol), np.abs(d.imag) / np.maximum(stderr_im, atol)])
    n_out = int(out_re.sum() + out_im.sum())
    return EnsembleComparison(n_out == 0, float(np.nanmax(z)), n_out, 2 * d.size,
                              float(np.sqrt(np.mean(np.abs(d) ** 2))))
