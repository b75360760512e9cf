import numpy as np
import pytest
from scipy.linalg import expm

import oracles
from gravdec.dynamics import (
    DenseOperators,
    EMFieldConfig,
    MasterEquation,
    MatrixFree,
    Propagator,
    evolve_momentum_limit,
    evolve_position_limit,
    evolve_stochastic,
    momentum_limit_exponent,
    position_limit_rates,
)
from gravdec.dynamics.master import jump_operators
from gravdec.errors import GuardError, InvariantError, StabilityError
from gravdec.grid import Constants, Grid
from gravdec.noise import COMPONENTS, Kernel, NoiseSpec


def spec_with(family="delta", ell=1.0, alpha=0.3, active=("00",), **kw):
    k = Kernel(family, ell)
    return NoiseSpec(alpha=alpha, kernels={"00": k, "0i": k, "ij": k}, active=active, **kw)


def plane_wave(grid, j, spin=(1.0, 0.0)):
    k = grid.wavenumbers[j]
    amp = np.exp(1j * grid.coords @ k) / np.sqrt(grid.size)
    return (amp[:, None] * np.asarray(spin)[None, :]).ravel()


def random_fields(grid, rng, comps=COMPONENTS):
    return {c: rng.standard_normal(grid.size) for c in comps}


def pure(psi):
    return np.outer(psi, psi.conj())


# ---------------------------------------------------------------- operators


def test_plane_wave_energy():
    grid = Grid(1, 16, 0.5)
    ops = DenseOperators(grid)
    psi = plane_wave(grid, 3)
    k = grid.wavenumbers[3, 0]
    assert np.allclose(ops.H0() @ psi, k**2 / 2 * psi)


def test_uniform_B_splits_spin():
    grid = Grid(1, 4)
    const = Constants(e=2.0, m=1.5)
    ops = DenseOperators(grid, EMFieldConfig.uniform_B(grid, (0, 0, 0.3)), const)
    up, down = plane_wave(grid, 0), plane_wave(grid, 0, (0.0, 1.0))
    shift = const.hbar * const.e / (2 * const.m * const.c) * 0.3
    assert np.allclose(ops.H0() @ up, -shift * up)
    assert np.allclose(ops.H0() @ down, shift * down)


def test_couplings_match_fourier_oracle():
    grid = Grid(1, 8, 0.7)
    B = (0.2, -0.1, 0.4)
    ops = DenseOperators(grid, EMFieldConfig.uniform_B(grid, B))
    H0, K = oracles.couplings_1d(8, 0.7, B)
    assert np.allclose(ops.H0(), H0, atol=1e-12)
    got = ops.couplings()
    for comp, ref in K.items():
        assert np.allclose(got[comp], ref, atol=1e-12), comp


def test_anticommutator_form_equals_term_by_term():
    grid = Grid(1, 8)
    rng = np.random.default_rng(0)
    ops = DenseOperators(grid, EMFieldConfig.uniform_B(grid, (0.1, 0.2, 0.3)))
    h = random_fields(grid, rng)
    assert np.allclose(ops.Hp_fermion(h), ops.Hp_from_couplings(h), atol=1e-12)


def test_fermion_matches_boson_without_fields():
    grid = Grid(1, 16)
    ops = DenseOperators(grid)
    h = random_fields(grid, np.random.default_rng(1))
    assert np.abs(ops.Hp_fermion(h) - ops.Hp_boson(h)).max() < 1e-12


def test_relativistic_correction_on_plane_wave():
    grid = Grid(1, 16)
    const = Constants(c=3.0, m=2.0)
    ops = DenseOperators(grid, const=const)
    psi = plane_wave(grid, 2)
    k = grid.wavenumbers[2, 0]
    want = -(const.hbar**2 * k**2) ** 2 / (8 * const.m**3 * const.c**2)
    assert np.allclose(ops.Hr() @ psi, want * psi)


def test_xi00_form():
    grid = Grid(1, 8)
    ops = DenseOperators(grid, EMFieldConfig.uniform_B(grid, (0, 0, 0.5)))
    xi00, _ = ops.Xi()
    want = ops.pi2() / 4 + 0.5 * ops.identity() - 0.5 * ops.B_sigma()
    assert np.allclose(xi00, want)


@pytest.mark.parametrize("dim,n,em", [
    (1, 16, "off"), (1, 16, "B"), (1, 16, "coulomb"), (1, 16, "wave"), (3, 4, "B"), (3, 4, "wave"),
])
def test_matrix_free_matches_dense(dim, n, em):
    grid = Grid(dim, n)
    field = {
        "off": EMFieldConfig.off(grid),
        "B": EMFieldConfig.uniform_B(grid, (0.3, -0.2, 0.5)),
        "coulomb": EMFieldConfig.coulomb_like(grid, 1.2, 1.0),
        "wave": EMFieldConfig.vector_wave(grid, 0.4, 2, 1),
    }[em]
    dense, mf = DenseOperators(grid, field), MatrixFree(grid, field)
    rng = np.random.default_rng(5)
    psi = rng.standard_normal((3, grid.size, 2)) + 1j * rng.standard_normal((3, grid.size, 2))
    flat = psi.reshape(3, -1)
    assert np.abs(mf.H0(psi).reshape(3, -1) - flat @ dense.H0().T).max() < 1e-12
    h = {c: rng.standard_normal((3, grid.size)) for c in COMPONENTS}
    got = mf.Hp(h, psi).reshape(3, -1)
    for b in range(3):
        ref = dense.Hp_from_couplings({c: f[b] for c, f in h.items()}) @ flat[b]
        assert np.abs(got[b] - ref).max() < 1e-12


# -------------------------------------------------------------- propagation


@pytest.mark.parametrize("method", ["dense", "matrix-free"])
def test_noise_free_step_is_exact(method):
    grid = Grid(1, 16)
    em = EMFieldConfig.coulomb_like(grid, 0.5, 1.0)
    prop = Propagator(grid, em, method=method)
    rng = np.random.default_rng(3)
    psi = rng.standard_normal((16, 2)) + 1j * rng.standard_normal((16, 2))
    psi /= np.linalg.norm(psi)
    out = prop.evolve(psi, 1.0, 0.05)
    ref = expm(-1j * DenseOperators(grid, em).H0()) @ psi.ravel()
    assert np.abs(out.ravel() - ref).max() < 1e-12


def test_frozen_h00_gives_rest_energy_phase():
    grid = Grid(1, 8)
    const = Constants(m=2.0, c=1.5)
    prop = Propagator(grid, const=const, method="matrix-free")
    psi = np.full((8, 2), 0.25)
    eps = 0.01
    out = prop.evolve(psi, 0.5, 0.05, {"00": np.full((1, 8), eps)})
    phase = np.exp(-1j * const.m * const.c**2 / 2 * eps * 0.5)
    assert np.allclose(out, phase * psi, atol=1e-13)


def test_large_step_is_rejected():
    prop = Propagator(Grid(1, 64), method="matrix-free")
    psi = np.zeros((64, 2), complex)
    psi[:, 0] = 1 / 8
    psi[::2, 0] *= -1
    with pytest.raises(StabilityError):
        prop.step(psi[None], dt=50.0)


def test_stochastic_alpha_zero_equals_pure_evolution():
    grid = Grid(1, 16)
    psi = plane_wave(grid, 1).reshape(16, 2) + plane_wave(grid, 4).reshape(16, 2)
    psi /= np.linalg.norm(psi)
    res = evolve_stochastic(psi, spec_with(alpha=0.0), EMFieldConfig.off(grid), 1.0, 0.05, seed=1, n_traj=5)
    ref = expm(-1j * DenseOperators(grid).H0()) @ psi.ravel()
    assert np.abs(res.final - pure(ref)).max() < 1e-12
    assert np.all(res.stderr_re[-1] < 1e-12)


def test_threads_do_not_change_results():
    grid = Grid(1, 8)
    psi = np.zeros((8, 2), complex)
    psi[2, 0] = psi[5, 0] = 2**-0.5
    spec = spec_with(alpha=0.3, active=("00", "01"))
    em = EMFieldConfig.off(grid)
    a = evolve_stochastic(psi, spec, em, 0.2, 0.02, seed=4, n_traj=600, threads=1)
    b = evolve_stochastic(psi, spec, em, 0.2, 0.02, seed=4, n_traj=600, threads=3)
    assert np.array_equal(a.rho, b.rho)
    assert np.array_equal(a.stderr_re, b.stderr_re)


def test_segments_reproduce_standalone_runs():
    grid = Grid(1, 8)
    psi = np.zeros((8, 2), complex)
    psi[1, 0] = psi[3, 1] = 2**-0.5
    spec = spec_with(alpha=0.3)
    em = EMFieldConfig.off(grid)
    whole = evolve_stochastic(psi, spec, em, 0.1, 0.02, seed=9, n_traj=300, segments=[(0, 100)])
    alone = evolve_stochastic(psi, spec, em, 0.1, 0.02, seed=9, n_traj=100)
    assert np.abs(whole.segments[(0, 100)].rho - alone.rho).max() < 1e-14


# ------------------------------------------------------------------ master


def test_master_without_noise_stays_pure():
    grid = Grid(1, 8)
    psi = plane_wave(grid, 1) + plane_wave(grid, 2, (0.0, 1.0))
    psi /= np.linalg.norm(psi)
    res = MasterEquation(grid, spec_with(alpha=0.0)).evolve(pure(psi), 1.0, 0.1)
    assert np.trace(res.final @ res.final).real == pytest.approx(1.0, abs=1e-12)


def test_master_guard():
    with pytest.raises(GuardError):
        MasterEquation(Grid(1, 512), spec_with())


def test_master_rejects_non_multiple_dt():
    with pytest.raises(ValueError):
        MasterEquation(Grid(1, 4), spec_with()).evolve(np.eye(8) / 8, 1.0, 0.3)


def test_hermiticity_guard_fires_on_corrupted_state():
    eq = MasterEquation(Grid(1, 4), spec_with())
    rho = np.eye(8, dtype=complex) / 8
    rho[0, 1] = 0.1
    with pytest.raises(InvariantError):
        eq.evolve(rho, 0.1, 0.01)


def test_closed_form_dissipator_matches_jump_sum():
    grid = Grid(1, 8)
    spec = spec_with("gaussian", 1.5, active=("00", "01", "11"))
    em = EMFieldConfig.uniform_B(grid, (0, 0.2, 0.1))
    eq = MasterEquation(grid, spec, em)
    Ls, w = jump_operators(eq.ops, spec, eq.couplings)
    rng = np.random.default_rng(2)
    X = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
    rho = X @ X.conj().T
    ref = np.zeros_like(rho)
    for L, ww in zip(Ls, w):
        inner = L.conj().T @ rho - rho @ L.conj().T
        ref -= eq.rate(0) * ww * (L @ inner - inner @ L)
    assert np.abs(eq.dissipator(rho, 0.0) - ref).max() < 1e-12


def test_master_matches_kronecker_oracle():
    n, a = 2, 1.0
    grid = Grid(1, n, a)
    spec = spec_with("delta", active=("00", "01", "11"), alpha=0.4)
    H0, K = oracles.couplings_1d(n, a)
    jumps = []
    for comp in ("00", "01", "11"):
        jumps += oracles.jumps_1d(n, a, K[comp], "delta", 1.0)
    Lsup = oracles.liouvillian(H0, jumps, 0.4**2 / 2)
    psi = np.array([1, 0.5j, 0.2, -0.3], complex)
    psi /= np.linalg.norm(psi)
    res = MasterEquation(grid, spec).evolve(pure(psi), 0.5, 0.001, n_samples=5)
    ref = oracles.evolve(Lsup, pure(psi), res.times)
    assert np.abs(res.states - ref).max() < 1e-10


# ------------------------------------------------------------------ limits


def test_position_rates_vanish_on_diagonal():
    grid = Grid(1, 8)
    G = position_limit_rates(grid, spec_with("gaussian", 2.0))
    assert np.all(np.diag(G) == 0.0)
    assert np.allclose(G, G.T)
    assert np.all(G[0, 1:] > 0)


def test_position_limit_decay_rate():
    grid = Grid(1, 4)
    spec = spec_with("exponential", 1.0, alpha=0.2)
    psi = np.zeros(8, complex)
    psi[0] = psi[4] = 2**-0.5
    res = evolve_position_limit(pure(psi), spec, EMFieldConfig.off(grid), 1.0, 0.01, coherent=False)
    G = position_limit_rates(grid, spec)[0, 2]
    assert abs(res.final[0, 4]) == pytest.approx(0.5 * np.exp(-G), rel=1e-9)


def test_momentum_limit_is_diagonal_preserving():
    grid = Grid(1, 8)
    spec = spec_with(active=("01",), alpha=0.5)
    rho0 = pure(plane_wave(grid, 1) + plane_wave(grid, 2)) / 2
    _, states = evolve_momentum_limit(rho0, spec, 1.0, grid, times=[0.0, 1.0])
    assert np.allclose(states[0], rho0)
    assert np.trace(states[1]).real == pytest.approx(1.0)


def test_momentum_exponent_scales_quadratically_in_0i():
    grid = Grid(1, 16)
    spec = spec_with(active=("01",), alpha=0.5)
    D = momentum_limit_exponent(grid, spec, 2.0)
    assert D[1, 0] * 4 == pytest.approx(D[2, 0], rel=1e-12)
    assert D[3, 1] == pytest.approx(D[2, 0], rel=1e-12)
