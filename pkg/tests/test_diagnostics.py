import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gravdec.diagnostics import (
    CoherenceSeries,
    StateSummary,
    classify_regime,
    coherence,
    compare_ensemble,
    compare_models,
    fit_decay_rate,
)
from gravdec.dynamics import DenseOperators, EMFieldConfig
from gravdec.grid import Grid
from gravdec.noise import Kernel, NoiseSpec


def spec_with(family="gaussian", ell=1.0, active=("00",)):
    k = Kernel(family, ell)
    return NoiseSpec(alpha=0.1, kernels={"00": k, "0i": k, "ij": k}, active=active)


def test_fit_recovers_rate():
    t = np.linspace(0, 2, 21)
    fit = fit_decay_rate(CoherenceSeries(t, 0.5 * np.exp(-3 * t)))
    assert fit.gamma == pytest.approx(3.0, rel=1e-12)
    assert fit.r2 == 1.0
    assert fit.ci95 < 1e-10


def test_fit_constant_series():
    t = np.linspace(0, 1, 12)
    fit = fit_decay_rate(CoherenceSeries(t, np.full(12, 0.3)))
    assert fit.gamma == 0.0
    assert fit.r2 == 1.0


def test_fit_truncates_at_zero():
    t = np.linspace(0, 1, 15)
    y = np.exp(-t)
    y[12:] = 0.0
    fit = fit_decay_rate(CoherenceSeries(t, y))
    assert fit.truncated and fit.n_points == 12
    assert fit.warnings


def test_fit_needs_points():
    with pytest.raises(ValueError):
        fit_decay_rate(CoherenceSeries([0.0, 1.0], [1.0, 0.5]))


def test_series_validation():
    with pytest.raises(ValueError):
        CoherenceSeries([0.0, 0.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        CoherenceSeries([0.0, 1.0], [1.0, -1.0])


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 5.0), st.floats(0.2, 4.0), st.floats(1e-3, 10.0))
def test_fit_rescales_with_time(gamma, s, amp):
    t = np.linspace(0, 1, 11)
    rng = np.random.default_rng(0)
    y = amp * np.exp(-gamma * t + 0.01 * rng.standard_normal(11))
    a = fit_decay_rate(CoherenceSeries(t, y))
    b = fit_decay_rate(CoherenceSeries(t * s, y))
    assert b.gamma == pytest.approx(a.gamma / s, rel=1e-9)
    c = fit_decay_rate(CoherenceSeries(t, y * 7.0))
    assert c.gamma == pytest.approx(a.gamma, rel=1e-9)


def test_coherence_bases():
    grid = Grid(1, 4)
    psi = np.zeros(8, complex)
    psi[0] = psi[2] = 2**-0.5
    rho = np.outer(psi, psi.conj())
    assert coherence(rho, "position", (0, 2)) == pytest.approx(0.5)
    # a superposition of neighbouring sites has a zero-momentum component
    assert coherence(rho, "momentum", (0, 0), grid=grid) == pytest.approx(0.5)
    H = DenseOperators(grid).H0()
    assert coherence(rho, "energy", (0, 0), H=H) >= 0
    with pytest.raises(IndexError):
        coherence(rho, "position", (0, 8))
    with pytest.raises(ValueError):
        coherence(rho, "spin", (0, 1))


def test_classify_position():
    spec = spec_with(ell=1.0)
    assert classify_regime(spec, StateSummary(delta_E=0.0, delta_x=3.0)) == "position"


def test_classify_momentum():
    spec = spec_with(ell=100.0, active=("00", "01"))
    assert classify_regime(spec, StateSummary(delta_x=1.0, p=1.0)) == "momentum"


def test_classify_mixed():
    spec = spec_with("delta", active=("00", "11"))
    assert classify_regime(spec, StateSummary(delta_x=1.0, p=1.0)) == "mixed"


def test_classify_position_monotone_in_separation():
    # once far enough apart to be in the position regime, further separation keeps it there
    spec = spec_with(ell=2.0)
    labels = [classify_regime(spec, StateSummary(delta_E=0.03, delta_x=dx)) for dx in np.linspace(0.1, 10, 40)]
    first = labels.index("position")
    assert all(lab == "position" for lab in labels[first:])


def test_compare_models_rejects_vector_potential():
    grid = Grid(1, 8)
    with pytest.raises(ValueError):
        compare_models(grid, EMFieldConfig.vector_wave(grid, 0.2), {"00": np.ones(8)})
    with pytest.raises(ValueError):
        compare_models(grid, EMFieldConfig.uniform_B(grid, (0, 0, 1)), {"00": np.ones(8)})


def test_compare_models_term_table():
    grid = Grid(1, 16)
    rng = np.random.default_rng(4)
    h = {c: rng.standard_normal(16) for c in ("00", "01", "11")}
    out = compare_models(grid, EMFieldConfig.coulomb_like(grid, 0.5, 1.0), h)
    assert out.max_abs_diff < 1e-12
    assert [t for t, _ in out.term_table] == ["h00", "h01", "h11"]


def test_compare_ensemble():
    ref = np.eye(2, dtype=complex)
    se = np.full((2, 2), 0.1)
    assert compare_ensemble(ref + 0.2, se, se, ref).passed
    bad = compare_ensemble(ref + 0.5, se, se, ref)
    assert not bad.passed and bad.n_outside == 4
    # rounding-level noise on both sides passes through the absolute tolerance
    assert compare_ensemble(ref + 1e-15j, 0 * se, 0 * se, ref).passed
