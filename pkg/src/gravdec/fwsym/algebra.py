"""Graded non-commutative operator algebra for the Foldy-Wouthuysen engine.

A term is::

    coeff * hbar^a c^b m^d e^f * (f_1 f_2 ...) * B_tag * d_1^n1 d_2^n2 d_3^n3

with ``coeff`` a Gaussian rational, ``f_k`` commuting field symbols (metric
perturbation or EM potential components, each carrying its own derivative
multi-index), ``B_tag`` one of the sixteen Dirac basis matrices and the
spatial derivatives acting to the right.  Products are brought back to this
normal form with the Leibniz rule ``d o f = f d + (d f)``.

Power counting (natural units, v/c grade):
    spatial derivative -> 1, time derivative -> 2,
    vector potential A_i -> 1, scalar potential A_0 -> 2, h -> 0.
Constants never carry grade.  Terms quadratic in h are discarded on
construction; terms above the active v/c cutoff are discarded in products.
"""

from __future__ import annotations

import contextlib
import contextvars
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import comb

from .. import clifford

# ---------------------------------------------------------------- fields

H_COMPONENTS = ("00", "01", "02", "03", "11", "12", "13", "22", "23", "33")
A_COMPONENTS = ("0", "1", "2", "3")

# a field symbol is (name, dt, d1, d2, d3)
Field = tuple


def h_name(mu: int, nu: int) -> str:
    mu, nu = sorted((mu, nu))
    return f"h{mu}{nu}"


def is_metric(f: Field) -> bool:
    return f[0][0] == "h"


def field_grade(f: Field) -> int:
    name, dt, d1, d2, d3 = f
    base = 0
    if name[0] == "A":
        base = 2 if name == "A0" else 1
    return base + 2 * dt + d1 + d2 + d3


def has_derivative(f: Field) -> bool:
    return any(f[1:])


def differentiate_field(f: Field, direction: int) -> Field:
    """direction 0 = time, 1..3 = space."""
    g = list(f)
    g[1 + direction] += 1
    return tuple(g)


# ----------------------------------------------------------- truncation


class ConfigurationError(RuntimeError):
    pass


@dataclass(frozen=True)
class Truncation:
    max_grade_v: int
    max_grade_h: int = 1


_CUTOFF: contextvars.ContextVar[Truncation | None] = contextvars.ContextVar("cutoff", default=None)


@contextlib.contextmanager
def truncation(max_grade_v: int, max_grade_h: int = 1):
    token = _CUTOFF.set(Truncation(max_grade_v, max_grade_h))
    try:
        yield _CUTOFF.get()
    finally:
        _CUTOFF.reset(token)


def current_truncation() -> Truncation:
    cut = _CUTOFF.get()
    if cut is None:
        raise ConfigurationError("no v/c cutoff set; wrap products in `with truncation(...)`")
    return cut


# ----------------------------------------------------- Gaussian rationals

ZERO = (Fraction(0), Fraction(0))
ONE = (Fraction(1), Fraction(0))
I_UNIT = (Fraction(0), Fraction(1))


def q(re=0, im=0):
    return (Fraction(re), Fraction(im))


def cmul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def cadd(a, b):
    return (a[0] + b[0], a[1] + b[1])


def cipow(a, p):
    """a * i**p."""
    p %= 4
    if p == 0:
        return a
    if p == 1:
        return (-a[1], a[0])
    if p == 2:
        return (-a[0], -a[1])
    return (a[1], -a[0])


def cconj(a):
    return (a[0], -a[1])


def czero(a):
    return a[0] == 0 and a[1] == 0


def cfmt(a) -> str:
    re, im = a
    if im == 0:
        return str(re)
    if re == 0:
        return f"{im}i"
    return f"({re}{'+' if im > 0 else '-'}{abs(im)}i)"


# ----------------------------------------------------------------- keys
# key = (consts, fields, tag, ders)
#   consts: (hbar, c, m, e) integer exponents
#   fields: sorted tuple of Field
#   tag:    index into clifford.BASIS16
#   ders:   (n1, n2, n3)

NO_CONSTS = (0, 0, 0, 0)
NO_DERS = (0, 0, 0)


@lru_cache(maxsize=None)
def key_grades(key) -> tuple[int, int]:
    _, fields, _, ders = key
    gv = sum(field_grade(f) for f in fields) + sum(ders)
    gh = sum(1 for f in fields if is_metric(f))
    return gv, gh


@lru_cache(maxsize=None)
def _d_fields(fields: tuple, direction: int) -> tuple:
    """Leibniz derivative of a field product: tuple of (count, fields)."""
    out: dict = {}
    for k, f in enumerate(fields):
        new = tuple(sorted(fields[:k] + (differentiate_field(f, direction),) + fields[k + 1:]))
        out[new] = out.get(new, 0) + 1
    return tuple((c, fs) for fs, c in out.items())


@lru_cache(maxsize=None)
def derive_fields(fields: tuple, gamma: tuple) -> tuple:
    """d^gamma (product of fields), gamma a (t, x, y, z) multi-index."""
    current = {fields: 1}
    for direction, count in enumerate(gamma):
        for _ in range(count):
            nxt: dict = {}
            for fs, c in current.items():
                for c2, fs2 in _d_fields(fs, direction):
                    nxt[fs2] = nxt.get(fs2, 0) + c * c2
            current = nxt
    return tuple((c, fs) for fs, c in current.items() if c)


@lru_cache(maxsize=None)
def _leibniz(ders: tuple, fields: tuple) -> tuple:
    """d^ders o (fields) = sum_k count_k * (fields_k) d^(rest_k)."""
    if not fields:
        return ((1, fields, ders),)
    out = []
    for gamma in product(*(range(n + 1) for n in ders)):
        weight = 1
        for n, g in zip(ders, gamma):
            weight *= comb(n, g)
        rest = tuple(n - g for n, g in zip(ders, gamma))
        for c, fs in derive_fields(fields, (0,) + gamma):
            out.append((weight * c, fs, rest))
    return tuple(out)


def _mul_keys(k1, k2):
    """Normal-ordered product of two unit terms: list of (int weight, i-power, key)."""
    c1, f1, t1, d1 = k1
    c2, f2, t2, d2 = k2
    phase = int(clifford.PRODUCT_PHASE[t1, t2])
    tag = int(clifford.PRODUCT_TAG[t1, t2])
    consts = (c1[0] + c2[0], c1[1] + c2[1], c1[2] + c2[2], c1[3] + c2[3])
    out = []
    for w, fs, rest in _leibniz(d1, f2):
        fields = tuple(sorted(f1 + fs)) if f1 else fs
        ders = (rest[0] + d2[0], rest[1] + d2[1], rest[2] + d2[2])
        out.append((w, phase, (consts, fields, tag, ders)))
    return out


# --------------------------------------------------------------- operator


class SymbolicOperator:
    """Sum of normal-ordered terms with merged like terms."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        self.terms = {}
        if terms:
            for k, c in terms.items():
                if not czero(c) and key_grades(k)[1] <= 1:
                    self.terms[k] = c

    # construction helpers -------------------------------------------------
    @classmethod
    def scalar(cls, re=1, im=0, hbar=0, c=0, m=0, e=0):
        return cls({((hbar, c, m, e), (), 0, NO_DERS): q(re, im)})

    @classmethod
    def field(cls, name: str, dt: int = 0, d: tuple = (0, 0, 0)):
        return cls({(NO_CONSTS, ((name, dt) + tuple(d),), 0, NO_DERS): ONE})

    @classmethod
    def matrix(cls, tag: str | int):
        t = clifford.TAG[tag] if isinstance(tag, str) else tag
        return cls({(NO_CONSTS, (), t, NO_DERS): ONE})

    @classmethod
    def partial(cls, i: int, power: int = 1):
        ders = [0, 0, 0]
        ders[i - 1] = power
        return cls({(NO_CONSTS, (), 0, tuple(ders)): ONE})

    # algebra --------------------------------------------------------------
    def copy(self):
        out = SymbolicOperator()
        out.terms = dict(self.terms)
        return out

    def __add__(self, other):
        other = _coerce(other)
        out = self.copy()
        for k, c in other.terms.items():
            v = cadd(out.terms.get(k, ZERO), c)
            if czero(v):
                out.terms.pop(k, None)
            else:
                out.terms[k] = v
        return out

    __radd__ = __add__

    def __neg__(self):
        out = SymbolicOperator()
        out.terms = {k: (-c[0], -c[1]) for k, c in self.terms.items()}
        return out

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def scale(self, re=1, im=0):
        s = q(re, im)
        out = SymbolicOperator()
        out.terms = {k: cmul(c, s) for k, c in self.terms.items() if not czero(cmul(c, s))}
        return out

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return sym_mul(self, _coerce(other))

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return sym_mul(_coerce(other), self)

    def __eq__(self, other):
        if not isinstance(other, SymbolicOperator):
            return NotImplemented
        return self.terms == other.terms

    def __len__(self):
        return len(self.terms)

    def __bool__(self):
        return bool(self.terms)

    def __iter__(self):
        return iter(sorted(self.terms.items(), key=lambda kv: _sort_key(kv[0])))

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"{cfmt(c)}*{format_key(k)}" for k, c in self)

    # structure ------------------------------------------------------------
    def filter(self, predicate):
        out = SymbolicOperator()
        out.terms = {k: c for k, c in self.terms.items() if predicate(k)}
        return out

    def grades(self):
        return {k: key_grades(k) for k in self.terms}

    def min_grade(self):
        return min((key_grades(k)[0] for k in self.terms), default=None)

    def time_derivative(self):
        """Operator whose field factors are differentiated once in time."""
        out = SymbolicOperator()
        for k, c in self.terms.items():
            consts, fields, tag, ders = k
            for cnt, fs in derive_fields(fields, (1, 0, 0, 0)):
                out = out + SymbolicOperator({(consts, fs, tag, ders): cmul(c, q(cnt))})
        return _truncate(out)

    def dagger(self):
        """Formal adjoint; real fields, d_i^dagger = -d_i."""
        out: dict = {}
        for (consts, fields, tag, ders), c in self.terms.items():
            sign = -1 if sum(ders) % 2 else 1
            cc = cipow(cconj(c), int(clifford.ADJOINT_PHASE[tag]))
            cc = (sign * cc[0], sign * cc[1])
            for w, fs, rest in _leibniz(ders, fields):
                k = (consts, fs, tag, rest)
                v = cadd(out.get(k, ZERO), cmul(cc, q(w)))
                out[k] = v
        return SymbolicOperator(out)


def _coerce(x):
    if isinstance(x, SymbolicOperator):
        return x
    if isinstance(x, (int, Fraction)):
        return SymbolicOperator.scalar(x)
    raise TypeError(f"cannot combine SymbolicOperator with {type(x).__name__}")


def _truncate(op: SymbolicOperator) -> SymbolicOperator:
    cut = _CUTOFF.get()
    if cut is None:
        return op
    return op.filter(lambda k: key_grades(k)[0] <= cut.max_grade_v and key_grades(k)[1] <= cut.max_grade_h)


def sym_mul(a: SymbolicOperator, b: SymbolicOperator) -> SymbolicOperator:
    """Product in normal form, truncated by the active cutoff."""
    cut = current_truncation()
    max_v, max_h = cut.max_grade_v, cut.max_grade_h
    bl = [(k, c, key_grades(k)) for k, c in b.terms.items()]
    out: dict = {}
    for k1, c1 in a.terms.items():
        g1v, g1h = key_grades(k1)
        for k2, c2, (g2v, g2h) in bl:
            if g1v + g2v > max_v or g1h + g2h > max_h:
                continue
            c12 = cmul(c1, c2)
            for w, phase, k in _mul_keys(k1, k2):
                v = cipow(c12, phase)
                if w != 1:
                    v = (v[0] * w, v[1] * w)
                prev = out.get(k)
                out[k] = v if prev is None else cadd(prev, v)
    res = SymbolicOperator()
    res.terms = {k: c for k, c in out.items() if not czero(c)}
    return res


def commutator(a, b):
    return a * b - b * a


def anticommutator(a, b):
    return a * b + b * a


# ------------------------------------------------------------- formatting

_CONST_NAMES = ("hbar", "c", "m", "e")


def format_field(f: Field) -> str:
    name, dt, *d = f
    parts = ["dt"] * dt
    for i, n in enumerate(d, start=1):
        parts += [f"d{i}"] * n
    return f"({''.join(parts)}{name})" if parts else name


def format_key(key) -> str:
    consts, fields, tag, ders = key
    bits = []
    for name, p in zip(_CONST_NAMES, consts):
        if p == 1:
            bits.append(name)
        elif p:
            bits.append(f"{name}^{p}")
    bits += [format_field(f) for f in fields]
    if tag:
        bits.append(clifford.BASIS_NAMES[tag])
    for i, n in enumerate(ders, start=1):
        if n == 1:
            bits.append(f"d{i}")
        elif n:
            bits.append(f"d{i}^{n}")
    return "*".join(bits) if bits else "1"


def _sort_key(key):
    gv, gh = key_grades(key)
    return (gh, gv, key[2], key[1], key[3], key[0])


# ------------------------------------------------------------- shorthands

def const(re=1, im=0, hbar=0, c=0, m=0, e=0) -> SymbolicOperator:
    return SymbolicOperator.scalar(re, im, hbar=hbar, c=c, m=m, e=e)


def fld(name: str, dt: int = 0, d: tuple = (0, 0, 0)) -> SymbolicOperator:
    return SymbolicOperator.field(name, dt, d)


def h(mu: int, nu: int, dt: int = 0, d: tuple = (0, 0, 0)) -> SymbolicOperator:
    return fld(h_name(mu, nu), dt, d)


def mat(tag) -> SymbolicOperator:
    return SymbolicOperator.matrix(tag)


def partial(i: int, power: int = 1) -> SymbolicOperator:
    return SymbolicOperator.partial(i, power)


def depends_on_em(key) -> bool:
    return any(f[0][0] == "A" for f in key[1])


def has_metric_derivative(key) -> bool:
    return any(is_metric(f) and has_derivative(f) for f in key[1])
