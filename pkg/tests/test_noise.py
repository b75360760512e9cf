import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gravdec.grid import Grid
from gravdec.noise import (
    BLOCK_SIZE,
    Kernel,
    NoiseSpec,
    NoiseStream,
    estimate_statistics,
    lambda_of,
    noise_stream_samples,
    sample_step,
    synthesize,
)


def spec_with(family="gaussian", ell=2.0, alpha=0.5, active=("00",), **kw):
    k = Kernel(family, ell)
    return NoiseSpec(alpha=alpha, kernels={"00": k, "0i": k, "ij": k}, active=active, **kw)


def test_kernel_shapes():
    r = np.array([0.0, 1.0, 2.0])
    assert np.allclose(Kernel("gaussian", 2.0).u(r), np.exp(-r**2 / 8))
    assert np.allclose(Kernel("exponential", 2.0).u(r), np.exp(-r / 2))
    assert np.array_equal(Kernel("delta").u(r), [1.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        Kernel("lorentz")


@pytest.mark.parametrize("family", ["gaussian", "exponential", "delta"])
@pytest.mark.parametrize("dim,n", [(1, 16), (3, 4)])
def test_lattice_covariance_is_normalised(family, dim, n):
    grid = Grid(dim, n)
    k = Kernel(family, 1.5)
    w = k.lattice_weights(grid)
    assert w.sum() == pytest.approx(1.0)
    assert np.all(w >= 0)
    C = k.lattice_covariance(grid)
    assert C[0] == pytest.approx(1.0)
    assert np.all(np.abs(C) <= 1 + 1e-12)


def test_lambda_rule():
    s = spec_with(lambda_rule="min", tau_c=0.5)
    assert lambda_of(s, 0.2) == 0.2
    assert lambda_of(s, 3.0) == 0.5
    assert lambda_of(spec_with(lambda_value=0.7), 9.0) == 0.7
    with pytest.raises(ValueError):
        lambda_of(s, -1.0)


def test_spec_rejects_bad_input():
    with pytest.raises(ValueError):
        spec_with(alpha=-1)
    with pytest.raises(ValueError):
        spec_with(active=("04",))


def test_zero_alpha_gives_zero_field():
    grid = Grid(1, 16)
    out = sample_step(spec_with(alpha=0.0), grid, 0.1, NoiseStream(1), batch=3)
    assert not np.any(out.fields["00"])


def test_stream_is_deterministic():
    a = NoiseStream(7, 2).normals(5, (3, 4))
    b = NoiseStream(7, 2).normals(5, (3, 4))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, NoiseStream(7, 3).normals(5, (3, 4)))
    assert not np.array_equal(a, NoiseStream(7, 2).normals(6, (3, 4)))


def test_stream_prefix_is_stable():
    # trajectory j reads column j of the block, whatever slice is requested
    full = NoiseStream(3, 0).normals(2, (1, BLOCK_SIZE, 8))
    again = NoiseStream(3, 0).normals(2, (1, BLOCK_SIZE, 8))
    assert np.array_equal(full[:, 10:20], again[:, 10:20])


@settings(max_examples=25, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 2**31))
def test_synthesis_is_linear(a, b, seed):
    grid = Grid(1, 16)
    spec = spec_with()
    rng = np.random.default_rng(seed)
    x, y = rng.standard_normal((2, 16))
    lhs = synthesize(spec, grid, a * x + b * y, "00", 1.0)
    rhs = a * synthesize(spec, grid, x, "00", 1.0) + b * synthesize(spec, grid, y, "00", 1.0)
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_step_variance_scales_with_dt():
    grid = Grid(1, 8)
    spec = spec_with(family="delta", alpha=0.3, lambda_value=2.0)
    for dt in (0.1, 0.01):
        f = sample_step(spec, grid, dt, NoiseStream(0), batch=20000).fields["00"]
        assert f.var() == pytest.approx(0.09 * 2.0 / dt, rel=0.03)


def test_statistics_accept_synthesized_stream():
    grid = Grid(1, 16)
    spec = spec_with(active=("00", "01", "11"), alpha=0.4)
    samples = noise_stream_samples(spec, grid, 0.05, 20000, seed=11)
    stat = estimate_statistics(samples, spec, 0.05, grid=grid, t=0.05)
    assert stat.n_samples == 20000
    assert stat.accepts(4.0)
    assert set(stat.cross) == {("00", "01"), ("00", "11"), ("01", "11")}


def test_statistics_reject_wrong_kernel():
    grid = Grid(1, 16)
    samples = noise_stream_samples(spec_with(ell=3.0), grid, 0.05, 20000, seed=2)
    wrong = spec_with(family="delta")
    assert not estimate_statistics(samples, wrong, 0.05, grid=grid, t=0.05).accepts(3.0)


def test_statistics_need_enough_samples():
    with pytest.raises(ValueError):
        estimate_statistics({"00": np.zeros((10, 4))})
