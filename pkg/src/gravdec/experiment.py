"""Bind an ExperimentConfig to the library: build objects, run one mode, validate."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import clifford, diagnostics
from .config import ExperimentConfig
from .dynamics import (DenseOperators, EMFieldConfig, MasterEquation, MatrixFree, evolve_momentum_limit,
                       evolve_position_limit, evolve_stochastic)
from .dynamics.master import MAX_DIM
from .errors import GuardError
from .grid import Constants, Grid
from .noise import Kernel, NoiseSpec, NoiseStream, estimate_statistics, noise_stream_samples, sample_step

TRACE_TOL = 1e-10
HERMITICITY_TOL = 1e-10
POSITIVITY_TOL = -1e-8
NORM_DRIFT_PER_1000 = 1e-8
MODEL_DIFF_TOL = 1e-12


@dataclass
class Outcome:
    tables: dict = field(default_factory=dict)      # file stem -> (header, rows)
    checks: list = field(default_factory=list)      # (name, value, limit, passed)
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c[3] for c in self.checks)


# ------------------------------------------------------------------ build


def build_grid(cfg: ExperimentConfig) -> Grid:
    return Grid(cfg.grid.dim, cfg.grid.n, cfg.grid.spacing)


def build_constants(cfg: ExperimentConfig) -> Constants:
    return Constants(hbar=1.0, c=1.0, m=1.0, e=cfg.em.charge)


def build_em(cfg: ExperimentConfig, grid: Grid) -> EMFieldConfig:
    e = cfg.em
    if e.preset == "uniform-B":
        return EMFieldConfig.uniform_B(grid, e.B)
    if e.preset == "coulomb-like":
        return EMFieldConfig.coulomb_like(grid, e.strength, e.softening)
    if e.preset == "vector-wave":
        return EMFieldConfig.vector_wave(grid, e.amplitude, e.component, e.mode)
    return EMFieldConfig.off(grid)


def build_spec(cfg: ExperimentConfig) -> NoiseSpec:
    n = cfg.noise
    kernels = {b: Kernel(getattr(n, f"kernel_{b}"), getattr(n, f"ell_{b}")) for b in ("00", "0i", "ij")}
    return NoiseSpec(alpha=n.alpha, tau_c=n.tau_c, kernels=kernels, active=tuple(n.active),
                     lambda_rule=n.lambda_rule, lambda_value=n.lambda_value)


def build_state(cfg: ExperimentConfig, grid: Grid) -> np.ndarray:
    """Normalised (N, 2) spinor."""
    st = cfg.state
    spin = {"up": np.array([1.0, 0.0]), "down": np.array([0.0, 1.0]),
            "x": np.array([1.0, 1.0]) / np.sqrt(2)}[st.spin]
    x = grid.coords
    if st.preset == "two-site":
        amp = np.zeros(grid.size, dtype=complex)
        amp[list(st.sites)] = 1.0
    elif st.preset == "plane-wave":
        amp = np.exp(1j * st.k0 * x[:, 0]).astype(complex)
    else:
        center = np.full(3, grid.length / 2)
        center[0] = st.center
        center[grid.dim:] = 0.0
        d = grid.min_image(x - center)
        amp = np.exp(-np.sum(d**2, axis=1) / (4 * st.width**2) + 1j * st.k0 * x[:, 0])
    psi = amp[:, None] * spin[None, :]
    return psi / np.linalg.norm(psi)


def state_summary(cfg: ExperimentConfig, grid: Grid, em: EMFieldConfig, const: Constants):
    st = cfg.state
    if st.preset == "two-site":
        dx = float(np.linalg.norm(grid.min_image(grid.coords[st.sites[0]] - grid.coords[st.sites[1]])))
    else:
        dx = st.width
    B = float(np.abs(em.B).max()) if not em.is_off else 0.0
    A = float(np.abs(em.A).max())
    return diagnostics.StateSummary(delta_E=0.0, delta_x=dx, p=const.hbar * abs(st.k0), A=A, B=B)


# ------------------------------------------------------------------- modes


def run_mode(cfg: ExperimentConfig, threads: int = 1) -> Outcome:
    mode = cfg.run.mode
    handler = {
        "identities": _identities,
        "fw-verify": _fw_verify,
        "noise-stats": _noise_stats,
        "compare-models": _compare_models,
        "master": _master,
        "position-limit": _position_limit,
        "momentum-limit": _momentum_limit,
        "trajectories": _trajectories,
    }[mode]
    if mode == "trajectories":
        return handler(cfg, threads)
    return handler(cfg)


def _identities(cfg):
    rep = clifford.verify_identity_suite()
    out = Outcome()
    failed = set(rep["failures"])
    out.tables["identities"] = (["identity", "pass"], [(name, name not in failed) for name in rep["checked"]])
    out.checks.append(("identity_failures", len(rep["failures"]), 0, rep["pass"]))
    return out


def _fw_verify(cfg):
    from .fwsym import fw_verify_report

    rep = fw_verify_report()
    out = Outcome()
    out.tables["fw_checks"] = (["check", "pass", "matched", "mismatched", "seconds"],
                               [(c["check"], c["pass"], c["matched"], len(c["mismatches"]), c["seconds"])
                                for c in rep["checks"]])
    out.tables["fw_mismatches"] = (["check", "term"],
                                   [(c["check"], m) for c in rep["checks"] for m in c["mismatches"]])
    out.tables["fw_grades"] = (["grade_v", "grade_h", "count"],
                               [(gv, gh, n) for (gv, gh), n in rep["grade_histogram"].items()])
    for c in rep["checks"]:
        out.checks.append((f"fw_{c['check']}_mismatches", len(c["mismatches"]), 0, c["pass"]))
    out.notes.append(f"reduced Hamiltonian has {rep['n_terms']} terms")
    return out


def _noise_stats(cfg):
    grid, spec = build_grid(cfg), build_spec(cfg)
    samples = noise_stream_samples(spec, grid, cfg.run.dt, cfg.run.noise_samples, cfg.run.seed)
    stat = estimate_statistics(samples, spec, cfg.run.dt, grid=grid, t=cfg.run.dt)
    out = Outcome()
    out.tables["noise_stats"] = (["kind", "component", "lag", "estimate", "stderr", "expected", "z"], stat.rows())
    zmax = max((abs(r[6]) for r in stat.rows()), default=0.0)
    out.checks.append(("noise_max_abs_z", zmax, 3.0, stat.accepts(3.0)))
    return out


def _compare_models(cfg):
    grid, const, spec = build_grid(cfg), build_constants(cfg), build_spec(cfg)
    em = build_em(cfg, grid)
    stream = NoiseStream(cfg.run.seed, 0)
    worst, per_term = 0.0, {}
    for s in range(cfg.run.n_samples):
        sample = sample_step(spec, grid, cfg.run.dt, stream, step=s, batch=1, t=cfg.run.dt)
        h = {c: f[0] for c, f in sample.fields.items()}
        cmp = diagnostics.compare_models(grid, em, h, const)
        worst = max(worst, cmp.max_abs_diff)
        for term, d in cmp.term_table:
            per_term[term] = max(per_term.get(term, 0.0), d)
    out = Outcome()
    out.tables["compare_models"] = (["term", "diff"], sorted(per_term.items()) + [("total", worst)])
    out.checks.append(("max_abs_diff", worst, MODEL_DIFF_TOL, worst < MODEL_DIFF_TOL))
    return out


def _density_outputs(out: Outcome, cfg, times, states, grid, H, stderr=None):
    if stderr is None:
        out.tables["rho"] = (["t", "row", "col", "re", "im"], list(_rows(times, states)))
    else:
        out.tables["rho"] = (["t", "row", "col", "re", "im", "stderr_re", "stderr_im"],
                             list(_rows(times, states, *stderr)))
    series = diagnostics.CoherenceSeries.from_states(times, states, cfg.run.basis, cfg.run.pair, grid, H)
    out.tables["coherence"] = (["t", "coherence"], list(zip(series.times, series.values)))
    try:
        fit = diagnostics.fit_decay_rate(series)
        out.tables["fit"] = (["gamma", "ci95", "r2", "n_points"], [(fit.gamma, fit.ci95, fit.r2, fit.n_points)])
        out.notes += fit.warnings
    except ValueError as exc:
        out.notes.append(f"no decay fit: {exc}")


def _rows(times, states, se_re=None, se_im=None):
    from .io import rho_rows

    return rho_rows(times, states, se_re, se_im)


def _density_checks(out: Outcome, trace_drift, herm_drift, min_eig):
    out.checks.append(("trace_drift", trace_drift, TRACE_TOL, trace_drift < TRACE_TOL))
    out.checks.append(("hermiticity_drift", herm_drift, HERMITICITY_TOL, herm_drift < HERMITICITY_TOL))
    out.checks.append(("min_eigenvalue", min_eig, POSITIVITY_TOL, min_eig >= POSITIVITY_TOL))


def _regime_note(out, cfg, spec, grid, em, const, expected):
    regime = diagnostics.classify_regime(spec, state_summary(cfg, grid, em, const), const)
    if regime != expected:
        out.notes.append(f"warning: regime classified as {regime}, not {expected}")
    else:
        out.notes.append(f"regime: {regime}")


def _master(cfg):
    grid, const, spec = build_grid(cfg), build_constants(cfg), build_spec(cfg)
    em = build_em(cfg, grid)
    psi = build_state(cfg, grid).ravel()
    rho0 = np.outer(psi, psi.conj())
    eq = MasterEquation(grid, spec, em, const, cfg.noise.coupling, cfg.run.include_hr)
    res = eq.evolve(rho0, cfg.run.T, cfg.run.dt, cfg.run.n_samples)
    out = Outcome()
    _density_outputs(out, cfg, res.times, res.states, grid, eq.H)
    _density_checks(out, res.trace_drift, res.hermiticity_drift, res.min_eigenvalue)
    return out


def _position_limit(cfg):
    grid, const, spec = build_grid(cfg), build_constants(cfg), build_spec(cfg)
    em = build_em(cfg, grid)
    psi = build_state(cfg, grid).ravel()
    rho0 = np.outer(psi, psi.conj())
    res = evolve_position_limit(rho0, spec, em, cfg.run.T, cfg.run.dt, grid, const, cfg.noise.coupling,
                                n_samples=cfg.run.n_samples)
    out = Outcome()
    _regime_note(out, cfg, spec, grid, em, const, "position")
    _density_outputs(out, cfg, res.times, res.states, grid, DenseOperators(grid, em, const).H0())
    _density_checks(out, res.trace_drift, res.hermiticity_drift, res.min_eigenvalue)
    return out


def _momentum_limit(cfg):
    grid, const, spec = build_grid(cfg), build_constants(cfg), build_spec(cfg)
    em = EMFieldConfig.off(grid)
    out = Outcome()
    if cfg.em.preset != "off":
        out.notes.append("electromagnetic field ignored: the momentum limit is taken with A = 0")
    if 2 * grid.size > MAX_DIM:
        raise GuardError(f"momentum limit is evaluated densely; needs 2N <= {MAX_DIM}")
    _regime_note(out, cfg, spec, grid, em, const, "momentum")
    psi = build_state(cfg, grid).ravel()
    rho0 = np.outer(psi, psi.conj())
    times = np.linspace(0.0, cfg.run.T, cfg.run.n_samples + 1)
    times, states = evolve_momentum_limit(rho0, spec, cfg.run.T, grid, const, cfg.noise.coupling, times)
    _density_outputs(out, cfg, times, states, grid, DenseOperators(grid, em, const).H0())
    tr = max(abs(np.trace(r) - np.trace(rho0)) for r in states)
    he = max(np.abs(r - r.conj().T).max() for r in states)
    me = min(np.linalg.eigvalsh(0.5 * (r + r.conj().T)).min() for r in states)
    _density_checks(out, float(tr), float(he), float(me))
    return out


def _trajectories(cfg, threads=1):
    grid, const, spec = build_grid(cfg), build_constants(cfg), build_spec(cfg)
    em = build_em(cfg, grid)
    if cfg.run.include_hr:
        raise GuardError("the relativistic correction is only available in master mode")
    psi = build_state(cfg, grid)
    res = evolve_stochastic(psi, spec, em, cfg.run.T, cfg.run.dt, cfg.run.seed, cfg.run.n_traj, grid, const,
                            cfg.run.n_samples, threads, coupling=cfg.noise.coupling)
    out = Outcome()
    H = DenseOperators(grid, em, const).H0() if cfg.run.basis == "energy" else None
    _density_outputs(out, cfg, res.times, res.rho, grid, H, (res.stderr_re, res.stderr_im))
    n_steps = round(cfg.run.T / cfg.run.dt)
    limit = NORM_DRIFT_PER_1000 * max(1.0, n_steps / 1000)
    out.checks.append(("norm_drift", res.norm_drift, limit, res.norm_drift < limit))
    out.notes.append(f"largest Taylor remainder per step {float(res.local_error)!r}")
    return out


# --------------------------------------------------------------- validate


def spectral_radius(grid: Grid, em: EMFieldConfig, const: Constants, iterations: int = 50, seed: int = 0) -> float:
    """Power-iteration estimate of ||H0||."""
    ops = MatrixFree(grid, em, const)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((1, grid.size, 2)) + 1j * rng.standard_normal((1, grid.size, 2))
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(iterations):
        w = ops.H0(v)
        est = float(np.linalg.norm(w))
        if est == 0:
            return 0.0
        v = w / est
    return est


def validate(cfg: ExperimentConfig) -> list:
    """(level, message) pairs; level is ok, warning or error."""
    report = [("ok", "schema valid")]
    grid, const = build_grid(cfg), build_constants(cfg)
    mode = cfg.run.mode
    dense_modes = ("master", "position-limit", "momentum-limit")
    if mode in dense_modes:
        if 2 * grid.size > MAX_DIM:
            report.append(("error", f"2N = {2 * grid.size} exceeds the dense limit {MAX_DIM} for mode {mode}"))
        else:
            report.append(("ok", f"2N = {2 * grid.size} within the dense limit"))
    if mode == "trajectories" and (grid.dim == 1 and grid.n > 256 or grid.dim == 3 and grid.n > 16):
        report.append(("warning", "grid larger than the desk-scale range for trajectories"))
    if mode in dense_modes + ("trajectories",) and 2 * grid.size <= 4 * MAX_DIM:
        em = build_em(cfg, grid)
        norm = spectral_radius(grid, em, const)
        step = norm * cfg.run.dt / const.hbar
        if mode != "momentum-limit" and step > 1.0:
            report.append(("warning", f"dt = {cfg.run.dt!r} is large for ||H0|| ~ {norm:.4g}; "
                                      f"suggested dt <= {0.5 * const.hbar / norm:.4g}"))
        else:
            report.append(("ok", f"||H0|| ~ {norm:.4g}, ||H0|| dt / hbar = {step:.3g}"))
        spec = build_spec(cfg)
        regime = diagnostics.classify_regime(spec, state_summary(cfg, grid, em, const), const)
        report.append(("ok", f"regime pre-classification: {regime}"))
        if mode == "position-limit" and regime != "position":
            report.append(("warning", "state/noise not in the position-basis regime"))
        if mode == "momentum-limit" and regime != "momentum":
            report.append(("warning", "state/noise not in the momentum-basis regime"))
    return report

