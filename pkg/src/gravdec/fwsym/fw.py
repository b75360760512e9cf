"""Even/odd split, BCH conjugation and the three-step Foldy-Wouthuysen reduction."""

from __future__ import annotations

from fractions import Fraction
from math import factorial

from .. import clifford
from .algebra import (
    SymbolicOperator,
    commutator,
    const,
    current_truncation,
    fld,
    h,
    key_grades,
    mat,
    partial,
    truncation,
)


class VerificationFailure(AssertionError):
    def __init__(self, message, terms=None):
        super().__init__(message)
        self.terms = terms


def even_odd_split(H: SymbolicOperator):
    even = H.filter(lambda k: bool(clifford.IS_EVEN[k[2]]))
    odd = H.filter(lambda k: not clifford.IS_EVEN[k[2]])
    return even, odd


def rest_energy() -> SymbolicOperator:
    return const(1, c=2, m=1) * mat("g0")


def fw_generator(odd: SymbolicOperator) -> SymbolicOperator:
    """S = -i g0 O / (2 m c^2); U = exp(iS)."""
    return (const(0, Fraction(-1, 2), c=-2, m=-1) * mat("g0")) * odd


def bch_transform(H: SymbolicOperator, S: SymbolicOperator, depth: int) -> SymbolicOperator:
    """exp(iS) (H - i hbar d_t) exp(-iS), nested commutators up to ``depth``."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    current_truncation()
    out = H.copy()
    term = H
    for n in range(1, depth + 1):
        term = commutator(S, term).scale(0, Fraction(1, n))
        if not term:
            break
        out = out + term
    sdot = S.time_derivative()
    term = sdot
    for n in range(depth):
        if not term:
            break
        # hbar * i^(n+2) / (n+1)! * ad_S^n(Sdot)
        w = SymbolicOperator.scalar(1, hbar=1) * term
        out = out + _ipow(w, n + 2).scale(Fraction(1, factorial(n + 1)))
        term = commutator(S, term)
    return out


def _ipow(op, p):
    p %= 4
    return {0: op, 1: op.scale(0, 1), 2: -op, 3: op.scale(0, -1)}[p]


def fw_step(H: SymbolicOperator, depth: int = 6) -> SymbolicOperator:
    _, odd = even_odd_split(H)
    return bch_transform(H, fw_generator(odd), depth)


def fw_reduce(H: SymbolicOperator, target_v_order: int = 4, steps: int = 3, depth: int = 6):
    """Three FW conjugations; returns the even Hamiltonian graded up to ``target_v_order``.

    Any odd term left at grade <= target_v_order raises VerificationFailure.
    """
    with truncation(target_v_order):
        cur = H
        for _ in range(steps):
            cur = fw_step(cur, depth)
        even, odd = even_odd_split(cur)
    low = odd.filter(lambda k: key_grades(k)[0] <= target_v_order)
    if low:
        raise VerificationFailure(f"{len(low)} odd terms survive below grade {target_v_order + 1}", low)
    return even


# ------------------------------------------------------------ input models


def covariant(j: int, with_em: bool = True) -> SymbolicOperator:
    """D_j = d_j - (ie/hbar c) A_j, A_j the vector-potential component."""
    out = partial(j)
    if with_em:
        out = out + const(0, -1, hbar=-1, c=-1, e=1) * fld(f"A{j}")
    return out


def trace_h() -> SymbolicOperator:
    return h(0, 0) - h(1, 1) - h(2, 2) - h(3, 3)


def _d(op_field_name, dt=0, d=(0, 0, 0)):
    return fld(op_field_name, dt, d)


def _dh(mu, nu, direction):
    """d_direction h_{mu nu}, direction 0 = time."""
    d = [0, 0, 0]
    dt = 0
    if direction == 0:
        dt = 1
    else:
        d[direction - 1] = 1
    return h(mu, nu, dt, tuple(d))


def _dtrace(direction):
    return _dh(0, 0, direction) - _dh(1, 1, direction) - _dh(2, 2, direction) - _dh(3, 3, direction)


def free_dirac() -> SymbolicOperator:
    """mc^2 g0 - i hbar c alpha^j d_j."""
    with truncation(8):
        out = rest_energy()
        for j in (1, 2, 3):
            out = out + const(0, -1, hbar=1, c=1) * mat(f"a{j}") * partial(j)
    return out


def even_part_input(gravity: bool = True, em: bool = True) -> SymbolicOperator:
    """Even operator E of the weak-field Dirac Hamiltonian (lower-index fields)."""
    with truncation(8):
        out = SymbolicOperator()
        if em:
            out = out + const(1, e=1) * fld("A0")
        if not gravity:
            return out
        out = out + const(Fraction(1, 2), c=2, m=1) * h(0, 0) * mat("g0")
        for i in (1, 2, 3):
            # i hbar c h_0i (d^i - ie/(hbar c) A^i) = -i hbar c h_0i D_i
            out = out + const(0, -1, hbar=1, c=1) * h(0, i) * covariant(i, em)
            # (i hbar c / 4) d_i h_0^i = -(i hbar c / 4) d_i h_0i
            out = out + const(0, Fraction(-1, 4), hbar=1, c=1) * _dh(0, i, i)
        for i in (1, 2, 3):
            for j in (1, 2, 3):
                for k in (1, 2, 3):
                    eps = clifford.levi_civita(i, j, k)
                    if eps:
                        out = out + const(Fraction(eps, 4), hbar=1, c=1) * _dh(0, j, i) * mat(f"S{k}")
        out = out + const(0, Fraction(-3, 8), hbar=1) * _dtrace(0)
        out = out + const(0, Fraction(1, 4), hbar=1) * _dh(0, 0, 0)
    return out


def odd_part_input(gravity: bool = True, em: bool = True) -> SymbolicOperator:
    """Odd operator O of the weak-field Dirac Hamiltonian (lower-index fields)."""
    with truncation(8):
        out = SymbolicOperator()
        prefactor = const(1)
        if gravity:
            prefactor = prefactor + const(Fraction(1, 2)) * h(0, 0)
        for j in (1, 2, 3):
            out = out + const(0, -1, hbar=1, c=1) * prefactor * covariant(j, em) * mat(f"a{j}")
        if not gravity:
            return out
        for i in (1, 2, 3):
            out = out + const(0, Fraction(1, 4), hbar=1) * _dh(0, i, 0) * mat(f"a{i}")
            for j in (1, 2, 3):
                # (i hbar c/2) h_ij (d^j - ...) alpha^i = -(i hbar c/2) h_ij D_j alpha^i
                out = out + const(0, Fraction(-1, 2), hbar=1, c=1) * h(i, j) * covariant(j, em) * mat(f"a{i}")
            # -(i hbar c/4) d_i (tr h / 2 - h00) alpha^i
            grad = _dtrace(i).scale(Fraction(1, 2)) - _dh(0, 0, i)
            out = out + const(0, Fraction(-1, 4), hbar=1, c=1) * grad * mat(f"a{i}")
    return out


def dirac_hamiltonian(gravity: bool = True, em: bool = True) -> SymbolicOperator:
    with truncation(8):
        return rest_energy() + even_part_input(gravity, em) + odd_part_input(gravity, em)


# ---------------------------------------------------------- charge check


def charge_operators():
    """T and the density kernel M of the conserved charge, both to O(h)."""
    with truncation(8):
        tr = trace_h()
        T = const(1) - tr.scale(Fraction(1, 2)) - h(0, 0).scale(Fraction(1, 4))
        M = const(1) - tr - h(0, 0).scale(Fraction(1, 2))
        for i in (1, 2, 3):
            g0gi = mat("g0") * mat(f"g{i}")
            T = T - h(0, i).scale(Fraction(1, 4)) * g0gi
            M = M - h(0, i).scale(Fraction(1, 2)) * g0gi
    return T, M


def inverse_first_order(T: SymbolicOperator) -> SymbolicOperator:
    """(1 + X)^-1 = 1 - X at O(h)."""
    with truncation(8):
        return const(2) - T


def charge_transform_check() -> dict:
    """Check that the transformed charge density is the standard one at O(h).

    For psi -> T psi the density psi^dag M psi becomes psi'^dag (T^-1)^dag M T^-1 psi',
    so the requirement is (T^-1)^dag M T^-1 = 1, i.e. T^dag T = M.  The literal
    product T^dag M T is reported alongside.
    """
    T, M = charge_operators()
    with truncation(8):
        Ti = inverse_first_order(T)
        transformed = Ti.dagger() * M * Ti
        residue = transformed - const(1)
        literal = T.dagger() * M * T - const(1)
        gram = T.dagger() * T - M
    return {
        "pass": not residue,
        "residue": residue,
        "gram_residue": gram,
        "literal_residue": literal,
    }
