"""Reference operators and term-by-term comparison of FW output."""

from __future__ import annotations

from fractions import Fraction

from .. import clifford
from .algebra import (
    SymbolicOperator,
    anticommutator,
    const,
    depends_on_em,
    fld,
    format_key,
    cfmt,
    h,
    has_metric_derivative,
    key_grades,
    mat,
    partial,
    truncation,
)
from .fw import covariant, fw_reduce, free_dirac, dirac_hamiltonian, odd_part_input

_UPPER = {"I": "I", "g0": "I"}
for _k in (1, 2, 3):
    _UPPER[f"S{_k}"] = f"S{_k}"
    _UPPER[f"g0S{_k}"] = f"S{_k}"


def upper_block(op: SymbolicOperator) -> SymbolicOperator:
    """Restrict an even operator to the large-component block (g0 -> 1)."""
    out = SymbolicOperator()
    for (consts, fields, tag, ders), c in op.terms.items():
        name = clifford.BASIS_NAMES[tag]
        if name not in _UPPER:
            raise ValueError(f"tag {name} is not even")
        k = (consts, fields, clifford.TAG[_UPPER[name]], ders)
        out = out + SymbolicOperator({k: c})
    return out


def sector(op, grade_h=None, max_grade=None, em=None, metric_derivatives=False):
    def keep(k):
        gv, gh = key_grades(k)
        if grade_h is not None and gh != grade_h:
            return False
        if max_grade is not None and gv > max_grade:
            return False
        if em is not None and depends_on_em(k) != em:
            return False
        if not metric_derivatives and has_metric_derivative(k):
            return False
        return True

    return op.filter(keep)


def compare(actual: SymbolicOperator, expected: SymbolicOperator) -> dict:
    matched, missing, unexpected = [], [], []
    for k, c in expected.terms.items():
        got = actual.terms.get(k)
        if got == c:
            matched.append(k)
        else:
            missing.append((k, c, got))
    for k, c in actual.terms.items():
        if k not in expected.terms:
            unexpected.append((k, c))
    return {
        "pass": not missing and not unexpected,
        "matched": matched,
        "missing": missing,
        "unexpected": unexpected,
    }


def describe(report: dict) -> list[str]:
    lines = []
    for k, want, got in report["missing"]:
        lines.append(f"expected {cfmt(want)}*{format_key(k)} got {cfmt(got) if got else 0}")
    for k, c in report["unexpected"]:
        lines.append(f"unexpected {cfmt(c)}*{format_key(k)}")
    return lines


# --------------------------------------------------------------- oracles

def _p(i):
    """p_i = -i hbar d_i."""
    return const(0, -1, hbar=1) * partial(i)


def _p2():
    return _p(1) * _p(1) + _p(2) * _p(2) + _p(3) * _p(3)


def free_particle_target() -> SymbolicOperator:
    with truncation(4):
        p2 = _p2()
        return const(1, c=2, m=1) * mat("g0") + const(Fraction(1, 2), m=-1) * p2 * mat("g0") \
            - const(Fraction(1, 8), m=-3, c=-2) * p2 * p2 * mat("g0")


def dispersion_oracle(max_grade: int = 4) -> SymbolicOperator:
    """Positive-energy branch for constant h, A = 0, expanded to O(h) in P/mc.

    sqrt(m^2c^4 + c^2 P^2 + ...) for g_{mu nu} = eta + h with h constant, so the
    result is a c-number symbol in P = -i hbar grad; fields carry no derivatives.
    """
    with truncation(max_grade):
        P2 = _p2()
        hP2 = SymbolicOperator()
        for i in (1, 2, 3):
            for j in (1, 2, 3):
                hP2 = hP2 + h(i, j) * _p(i) * _p(j)
        out = const(1, c=2, m=1) + const(Fraction(1, 2), m=-1) * P2 - const(Fraction(1, 8), m=-3, c=-2) * P2 * P2
        out = out + h(0, 0) * (const(Fraction(1, 2), c=2, m=1) + const(Fraction(1, 4), m=-1) * P2
                               - const(Fraction(1, 16), m=-3, c=-2) * P2 * P2)
        for i in (1, 2, 3):
            out = out + const(1, c=1) * h(0, i) * _p(i)
        out = out + const(Fraction(1, 2), m=-1) * hP2 - const(Fraction(1, 4), m=-3, c=-2) * hP2 * P2
    return out


def gravity_sector_target() -> SymbolicOperator:
    """EM-free O(h) Hamiltonian in anticommutator form, expanded to normal order.

    mc^2/2 h00 - (hbar^2/8m){h00, lap} + (c/2){h_0i, p_i} - (1/4m){h_ij, p_i p_j},
    with the upper-index components identified as h^00 = h00, h^ij = h_ij and
    c/2 {h^0i, p_i} = c/2 {h_0i, p^i}.
    """
    with truncation(2):
        lap = partial(1, 2) + partial(2, 2) + partial(3, 2)
        out = const(Fraction(1, 2), c=2, m=1) * h(0, 0)
        out = out - const(Fraction(1, 8), hbar=2, m=-1) * anticommutator(h(0, 0), lap)
        for i in (1, 2, 3):
            out = out + const(Fraction(1, 2), c=1) * anticommutator(h(0, i), _p(i))
            for j in (1, 2, 3):
                out = out - const(Fraction(1, 4), m=-1) * anticommutator(h(i, j), _p(i) * _p(j))
    return out


def weak_field_kinetic_target() -> SymbolicOperator:
    """O(h), v^2 sector of the bracketed even Hamiltonian with A = 0.

    g0 [ mc^2 h00/2 - (hbar^2/2m)(h00/2) lap - (hbar^2/2m) h_ij d^i d^j ] together
    with the c h_0i p_i term of the even input.
    """
    with truncation(2):
        lap = partial(1, 2) + partial(2, 2) + partial(3, 2)
        out = const(Fraction(1, 2), c=2, m=1) * h(0, 0) - const(Fraction(1, 4), hbar=2, m=-1) * h(0, 0) * lap
        for i in (1, 2, 3):
            out = out + const(1, c=1) * h(0, i) * _p(i)
            for j in (1, 2, 3):
                out = out - const(Fraction(1, 2), hbar=2, m=-1) * h(i, j) * partial(i) * partial(j)
    return out


def quartic_gravity_target() -> SymbolicOperator:
    """-(1/8m^3c^6)[hbar^4 c^4 (1+2h00) lap^2 + 2 hbar^4 c^4 h_ij lap d^i d^j], O(h), A = 0."""
    with truncation(4):
        lap = partial(1, 2) + partial(2, 2) + partial(3, 2)
        inner = const(2) * h(0, 0) * lap * lap
        for i in (1, 2, 3):
            for j in (1, 2, 3):
                inner = inner + const(2) * h(i, j) * lap * partial(i) * partial(j)
        return -(const(Fraction(1, 8), hbar=4, m=-3, c=-2) * inner)


def _B(k):
    """B_k = eps_kij d_i A_j."""
    out = SymbolicOperator()
    for i in (1, 2, 3):
        for j in (1, 2, 3):
            eps = clifford.levi_civita(k, i, j)
            if eps:
                d = [0, 0, 0]
                d[i - 1] = 1
                out = out + const(eps) * fld(f"A{j}", 0, tuple(d))
    return out


def _F_mixed(i, k):
    """F^i_k fixed by [D^i, D_k] = -(ie/hbar c) F^i_k, i.e. F^i_k = -eps_ikm B_m."""
    out = SymbolicOperator()
    for m_ in (1, 2, 3):
        eps = clifford.levi_civita(i, k, m_)
        if eps:
            out = out - const(eps) * _B(m_)
    return out


def odd_square_target() -> SymbolicOperator:
    """Closed form of g0 O^2 / 2mc^2 without metric-derivative terms, A on."""
    with truncation(4):
        one_h = const(1) + h(0, 0)
        D2 = sum((covariant(j) * covariant(j) for j in (1, 2, 3)), SymbolicOperator())
        out = -(const(Fraction(1, 2), hbar=2, m=-1) * one_h * D2)
        for k in (1, 2, 3):
            out = out - const(Fraction(1, 2), hbar=1, e=1, m=-1, c=-1) * one_h * _B(k) * mat(f"S{k}")
        for i in (1, 2, 3):
            for j in (1, 2, 3):
                out = out - const(Fraction(1, 2), hbar=2, m=-1) * h(i, j) * covariant(i) * covariant(j)
        for i in (1, 2, 3):
            for j in (1, 2, 3):
                for l in (1, 2, 3):
                    eps = clifford.levi_civita(i, j, l)
                    if not eps:
                        continue
                    for k in (1, 2, 3):
                        out = out + const(Fraction(eps, 4), hbar=1, e=1, m=-1, c=-1) * h(j, k) * _F_mixed(i, k) * mat(f"S{l}")
        return mat("g0") * out


# --------------------------------------------------------- check drivers

def check_free_particle():
    even = fw_reduce(free_dirac(), 4)
    return compare(even, free_particle_target()), even


def check_gravity_sector(even=None):
    """O(h), A = 0, no metric derivatives, through v^2: compare with the anticommutator display."""
    if even is None:
        even = fw_reduce(dirac_hamiltonian(em=False), 4)
    actual = sector(upper_block(even), grade_h=1, max_grade=2, em=False)
    return compare(actual, sector(gravity_sector_target())), even


def check_dispersion(even=None):
    if even is None:
        even = fw_reduce(dirac_hamiltonian(em=False), 4)
    actual = sector(upper_block(even), max_grade=4, em=False)
    actual = actual.filter(lambda k: not any(any(f[1:]) for f in k[1]))
    return compare(actual, dispersion_oracle(4)), even


def check_odd_square():
    with truncation(4):
        odd = odd_part_input()
        sq = const(0, 0) + (const(Fraction(1, 2), c=-2, m=-1) * mat("g0")) * odd * odd
    actual = sector(sq, em=None)
    actual = actual.filter(lambda k: key_grades(k)[1] <= 1)
    return compare(actual, sector(odd_square_target())), sq
