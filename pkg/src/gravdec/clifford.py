"""Exact Dirac/Pauli matrix algebra over the Gaussian integers.

Entries are stored as a pair of integer arrays (real part, imaginary part), so
products of generators never touch floating point.  Metric signature is
(+,-,-,-); every sign convention used downstream is taken from ``ETA`` and
``levi_civita`` below.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

# Minkowski metric, signature (+,-,-,-).  eta^{ij} = -delta^{ij}.
ETA = np.diag([1, -1, -1, -1])


def levi_civita(i: int, j: int, k: int) -> int:
    """Totally antisymmetric symbol on {1,2,3} with eps_123 = +1."""
    if len({i, j, k}) < 3:
        return 0
    perm = (i, j, k)
    inversions = sum(1 for a in range(3) for b in range(a + 1, 3) if perm[a] > perm[b])
    return -1 if inversions % 2 else 1


@dataclass(frozen=True, eq=False)
class CliffordElement:
    """Square matrix with entries in Z[i], plus an optional basis label."""

    re: np.ndarray
    im: np.ndarray
    label: str | None = field(default=None, compare=False)

    def __post_init__(self):
        re = np.asarray(self.re, dtype=np.int64)
        im = np.asarray(self.im, dtype=np.int64)
        if re.shape != im.shape or re.ndim != 2 or re.shape[0] != re.shape[1]:
            raise ValueError("CliffordElement needs two square integer arrays of equal shape")
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)

    @classmethod
    def from_complex(cls, m, label=None) -> "CliffordElement":
        m = np.asarray(m, dtype=complex)
        re, im = np.rint(m.real), np.rint(m.imag)
        if not (np.array_equal(re, m.real) and np.array_equal(im, m.imag)):
            raise ValueError("entries must be Gaussian integers")
        return cls(re.astype(np.int64), im.astype(np.int64), label)

    @classmethod
    def zeros(cls, n: int = 4) -> "CliffordElement":
        z = np.zeros((n, n), dtype=np.int64)
        return cls(z, z.copy(), "zero")

    @property
    def dim(self) -> int:
        return self.re.shape[0]

    def to_complex(self) -> np.ndarray:
        return self.re + 1j * self.im

    def __matmul__(self, other: "CliffordElement") -> "CliffordElement":
        return CliffordElement(self.re @ other.re - self.im @ other.im,
                               self.re @ other.im + self.im @ other.re, "composite")

    def __add__(self, other: "CliffordElement") -> "CliffordElement":
        return CliffordElement(self.re + other.re, self.im + other.im, "composite")

    def __sub__(self, other: "CliffordElement") -> "CliffordElement":
        return CliffordElement(self.re - other.re, self.im - other.im, "composite")

    def __neg__(self) -> "CliffordElement":
        return CliffordElement(-self.re, -self.im, self.label)

    def scale(self, a: int = 1, b: int = 0) -> "CliffordElement":
        """Multiply by the Gaussian integer a + ib."""
        return CliffordElement(a * self.re - b * self.im, a * self.im + b * self.re, "composite")

    def dagger(self) -> "CliffordElement":
        return CliffordElement(self.re.T.copy(), -self.im.T, self.label)

    def is_zero(self) -> bool:
        return not (self.re.any() or self.im.any())

    def __eq__(self, other) -> bool:
        if not isinstance(other, CliffordElement):
            return NotImplemented
        return np.array_equal(self.re, other.re) and np.array_equal(self.im, other.im)

    def __hash__(self):
        return hash((self.re.tobytes(), self.im.tobytes()))

    def __repr__(self):
        return f"CliffordElement({self.label or ''}\n{self.to_complex()})"


def mul(a: CliffordElement, b: CliffordElement) -> CliffordElement:
    return a @ b


def commutator(a: CliffordElement, b: CliffordElement) -> CliffordElement:
    return a @ b - b @ a


def anticommutator(a: CliffordElement, b: CliffordElement) -> CliffordElement:
    return a @ b + b @ a


def _identity(n):
    return CliffordElement(np.eye(n, dtype=np.int64), np.zeros((n, n), dtype=np.int64), "identity")


_PAULI = {
    1: np.array([[0, 1], [1, 0]], dtype=complex),
    2: np.array([[0, -1j], [1j, 0]], dtype=complex),
    3: np.array([[1, 0], [0, -1]], dtype=complex),
}


def _blocks(a, b, c, d):
    return np.block([[a, b], [c, d]])


def _check_index(i):
    if i not in (1, 2, 3):
        raise ValueError(f"spatial index must be 1, 2 or 3, got {i!r}")


def basis(name: str, index: int | None = None) -> CliffordElement:
    """Exact matrix of a named generator in the Pauli (Dirac) representation.

    ``name`` is one of ``gamma0``, ``gamma``, ``alpha``, ``sigma_big``,
    ``pauli`` (2x2), ``identity``; the indexed families need ``index`` in 1..3.
    """
    z2, one2 = np.zeros((2, 2)), np.eye(2)
    if name == "identity":
        return _identity(4)
    if name == "gamma0":
        return CliffordElement.from_complex(_blocks(one2, z2, z2, -one2), "gamma0")
    _check_index(index)
    s = _PAULI[index]
    if name == "gamma":
        m = _blocks(z2, s, -s, z2)
    elif name == "alpha":
        m = _blocks(z2, s, s, z2)
    elif name == "sigma_big":
        m = _blocks(s, z2, z2, s)
    elif name == "pauli":
        return CliffordElement.from_complex(s, f"pauli{index}")
    else:
        raise ValueError(f"unknown generator {name!r}")
    return CliffordElement.from_complex(m, f"{name}{index}")


def gamma5() -> CliffordElement:
    """gamma^5 = i gamma^0 gamma^1 gamma^2 gamma^3."""
    g = basis("gamma0")
    for i in (1, 2, 3):
        g = g @ basis("gamma", i)
    return CliffordElement(g.scale(0, 1).re, g.scale(0, 1).im, "gamma5")


# Sixteen-element basis used as matrix tags by the symbolic engine.  Every
# element either commutes (even) or anticommutes (odd) with gamma^0.
BASIS_NAMES = (
    "I", "g0",
    "a1", "a2", "a3",
    "S1", "S2", "S3",
    "g0S1", "g0S2", "g0S3",
    "g1", "g2", "g3",
    "g5", "g0g5",
)


def _build_basis16():
    g0 = basis("gamma0")
    mats = [basis("identity"), g0]
    mats += [basis("alpha", i) for i in (1, 2, 3)]
    mats += [basis("sigma_big", i) for i in (1, 2, 3)]
    mats += [g0 @ basis("sigma_big", i) for i in (1, 2, 3)]
    mats += [basis("gamma", i) for i in (1, 2, 3)]
    g5 = gamma5()
    mats += [g5, g0 @ g5]
    return tuple(CliffordElement(m.re, m.im, n) for m, n in zip(mats, BASIS_NAMES))


BASIS16 = _build_basis16()
TAG = {name: k for k, name in enumerate(BASIS_NAMES)}


def decompose(m: CliffordElement) -> tuple[int, int]:
    """Write ``m`` as i**power * BASIS16[tag]; raises if it is not a basis multiple."""
    c = m.to_complex()
    for k, b in enumerate(BASIS16):
        overlap = np.trace(b.to_complex().conj().T @ c) / 4
        if overlap == 0:
            continue
        for power, unit in enumerate((1, 1j, -1, -1j)):
            if overlap == unit and np.array_equal(c, unit * b.to_complex()):
                return power, k
        break
    raise ValueError("matrix is not a unit multiple of a basis element")


def _product_table():
    n = len(BASIS16)
    phase = np.zeros((n, n), dtype=np.int8)
    tag = np.zeros((n, n), dtype=np.int8)
    for a, b in product(range(n), repeat=2):
        phase[a, b], tag[a, b] = decompose(BASIS16[a] @ BASIS16[b])
    return phase, tag


# PRODUCT_PHASE[a, b] = p, PRODUCT_TAG[a, b] = c  <=>  B_a B_b = i**p B_c
PRODUCT_PHASE, PRODUCT_TAG = _product_table()
# adjoint: B_a^dagger = i**ADJOINT_PHASE[a] B_a
ADJOINT_PHASE = np.array([decompose(b.dagger())[0] for b in BASIS16], dtype=np.int8)
for _k, _b in enumerate(BASIS16):
    assert decompose(_b.dagger())[1] == _k
IS_EVEN = np.array([commutator(BASIS16[1], b).is_zero() for b in BASIS16])
assert all(IS_EVEN[k] or anticommutator(BASIS16[1], b).is_zero() for k, b in enumerate(BASIS16))


def default_representation() -> dict:
    return {
        "gamma0": basis("gamma0"),
        "gamma": {i: basis("gamma", i) for i in (1, 2, 3)},
        "sigma_big": {i: basis("sigma_big", i) for i in (1, 2, 3)},
    }


def verify_identity_suite(representation: dict | None = None) -> dict:
    """Check the Dirac-algebra identities used in the FW reduction, exactly.

    The representation can be overridden (e.g. a corrupted gamma^1) to make sure
    the suite actually detects a broken algebra.  Failures are collected, never
    raised.
    """
    rep = representation or default_representation()
    g0 = rep["gamma0"]
    gam = rep["gamma"]
    sig = rep["sigma_big"]
    alpha = {i: g0 @ gam[i] for i in (1, 2, 3)}
    ident = _identity(g0.dim)
    failures: list[str] = []
    checked: list[str] = []

    def expect(ok, what):
        checked.append(what)
        if not ok:
            failures.append(what)

    # conventions table
    expect(all(ETA[i, j] == (-1 if i == j else 0) for i in (1, 2, 3) for j in (1, 2, 3)),
           "eta^{ij} = -delta^{ij}")
    expect(g0 @ g0 == ident, "(gamma0)^2 = 1")
    expect(g0.dagger() == g0, "gamma0 Hermitian")
    for i in (1, 2, 3):
        expect(gam[i].dagger() == -gam[i], f"gamma{i} anti-Hermitian")
        expect(alpha[i].dagger() == alpha[i], f"alpha{i} Hermitian")
        expect(sig[i].dagger() == sig[i], f"Sigma{i} Hermitian")
        expect(alpha[i] @ alpha[i] == ident, f"(alpha{i})^2 = 1")
        expect(sig[i] @ sig[i] == ident, f"(Sigma{i})^2 = 1")
        expect(anticommutator(g0, alpha[i]).is_zero(), f"{{gamma0, alpha{i}}} = 0")
        expect(commutator(g0, sig[i]).is_zero(), f"[gamma0, Sigma{i}] = 0")
        for mu in range(4):
            gm = g0 if mu == 0 else gam[mu]
            expect(anticommutator(gm, gam[i]) == ident.scale(2 * int(ETA[mu, i])),
                   f"{{gamma{mu}, gamma{i}}} = 2 eta")
    for i, j in product((1, 2, 3), repeat=2):
        # {alpha^i, alpha^j} = -2 eta^{ij}
        expect(anticommutator(alpha[i], alpha[j]) == ident.scale(-2 * int(ETA[i, j])),
               f"{{alpha{i}, alpha{j}}} = -2 eta^{i}{j}")
        # alpha^i alpha^j = -eta^{ij} + i eps^{ijk} Sigma_k
        rhs = ident.scale(-int(ETA[i, j]))
        for k in (1, 2, 3):
            e = levi_civita(i, j, k)
            if e:
                rhs = rhs + sig[k].scale(0, e)
        expect(alpha[i] @ alpha[j] == rhs, f"alpha{i} alpha{j} = -eta + i eps Sigma")
    # odd operators: integer combinations of alpha^i (linearity makes the
    # basis sufficient; a few mixed combinations are checked explicitly)
    combos = [{1: 1}, {2: 1}, {3: 1}, {1: 1, 2: -2, 3: 3}, {1: 2, 3: -1}]
    for n, coeffs in enumerate(combos):
        odd = CliffordElement.zeros(g0.dim)
        for i, c in coeffs.items():
            odd = odd + alpha[i].scale(c)
        expect(anticommutator(g0, odd).is_zero(), f"{{gamma0, O}} = 0 (combo {n})")
        expect(commutator(g0 @ odd, g0) == odd.scale(-2), f"[gamma0 O, gamma0] = -2 O (combo {n})")
        expect(commutator(g0 @ odd, odd) == (g0 @ odd @ odd).scale(2),
               f"[gamma0 O, O] = 2 gamma0 O^2 (combo {n})")
    return {"pass": not failures, "failures": failures, "checked": checked}
