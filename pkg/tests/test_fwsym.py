from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from gravdec.fwsym import (
    ConfigurationError,
    SymbolicOperator,
    bch_transform,
    charge_transform_check,
    commutator,
    const,
    dirac_hamiltonian,
    even_odd_split,
    free_dirac,
    fw_reduce,
    fw_verify_report,
    h,
    key_grades,
    mat,
    partial,
    sym_mul,
    truncation,
)
from gravdec.fwsym import targets


def test_product_needs_a_cutoff():
    with pytest.raises(ConfigurationError):
        sym_mul(partial(1), h(0, 0))


def test_leibniz_rule():
    with truncation(4):
        got = partial(1) * h(0, 0)
        want = h(0, 0, d=(1, 0, 0)) + h(0, 0) * partial(1)
    assert got == want


def test_second_derivative_leibniz():
    with truncation(4):
        got = partial(1, 2) * h(0, 0)
        want = h(0, 0, d=(2, 0, 0)) + const(2) * h(0, 0, d=(1, 0, 0)) * partial(1) + h(0, 0) * partial(1, 2)
    assert got == want


def test_truncation_drops_high_grades():
    with truncation(2):
        assert not (partial(1) * partial(2) * partial(3))
        assert partial(1) * partial(2)
        # two metric factors exceed the default metric order
        assert not (h(0, 0) * h(1, 1))


def test_grades():
    with truncation(6):
        op = h(0, 0) * partial(1, 2)
    (key,) = op.terms
    assert key_grades(key) == (2, 1)


def test_gamma_products_reduce():
    with truncation(2):
        assert mat("g0") * mat("g0") == const(1)
        assert mat("a1") * mat("a2") == mat("S3").scale(0, 1)


def test_even_odd_split():
    with truncation(4):
        H = const(1, c=2, m=1) * mat("g0") + mat("a1") * partial(1) + h(0, 0) * mat("S2")
    even, odd = even_odd_split(H)
    assert len(even) == 2 and len(odd) == 1
    assert even + odd == H


def test_bch_zero_generator_is_identity():
    H = free_dirac()
    with truncation(4):
        assert bch_transform(H, SymbolicOperator(), depth=3) == H


def test_bch_depth_must_be_positive():
    with truncation(2), pytest.raises(ValueError):
        bch_transform(free_dirac(), SymbolicOperator(), depth=0)


def test_free_particle_reduction():
    report, even = targets.check_free_particle()
    assert report["pass"], targets.describe(report)
    _, odd = even_odd_split(even)
    assert not odd


def test_reduced_hamiltonian_is_even_below_cutoff():
    even = fw_reduce(dirac_hamiltonian(em=False), 4)
    assert all(key_grades(k)[0] <= 4 for k in even.terms)
    rep, _ = targets.check_dispersion(even)
    assert rep["pass"], targets.describe(rep)


def test_odd_square_block():
    rep, _ = targets.check_odd_square()
    assert rep["pass"], targets.describe(rep)


def test_charge_density_is_standard():
    out = charge_transform_check()
    assert out["pass"]
    assert not out["gram_residue"]


def test_report_structure():
    rep = fw_verify_report()
    names = [c["check"] for c in rep["checks"]]
    assert "free_particle" in names and "charge_transform" in names
    assert rep["n_terms"] > 0


atoms = st.sampled_from([
    partial(1), partial(2), h(0, 0), h(1, 2), mat("g0"), mat("a3"), mat("S1"),
    const(1, c=1), const(0, 1, hbar=1), h(0, 1, d=(0, 1, 0)),
])
coeffs = st.tuples(st.integers(-3, 3), st.integers(-3, 3))


@st.composite
def operators(draw):
    out = SymbolicOperator()
    for _ in range(draw(st.integers(1, 3))):
        re, im = draw(coeffs)
        out = out + draw(atoms).scale(Fraction(re), Fraction(im))
    return out


@settings(max_examples=40, deadline=None)
@given(operators(), operators(), operators())
def test_product_is_associative(a, b, c):
    with truncation(6):
        assert (a * b) * c == a * (b * c)


@settings(max_examples=40, deadline=None)
@given(operators(), operators())
def test_dagger_of_product(a, b):
    with truncation(6):
        assert (a * b).dagger() == b.dagger() * a.dagger()


@settings(max_examples=40, deadline=None)
@given(operators(), operators())
def test_commutator_jacobi_with_derivative(a, b):
    c = partial(3)
    with truncation(6):
        jac = commutator(a, commutator(b, c)) + commutator(b, commutator(c, a)) + commutator(c, commutator(a, b))
    assert not jac
