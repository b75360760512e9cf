"""Symbolic Foldy-Wouthuysen reduction of the weak-field Dirac Hamiltonian."""

from .algebra import (
    ConfigurationError,
    SymbolicOperator,
    Truncation,
    anticommutator,
    commutator,
    const,
    fld,
    h,
    key_grades,
    mat,
    partial,
    sym_mul,
    truncation,
)
from .fw import (
    VerificationFailure,
    bch_transform,
    charge_transform_check,
    dirac_hamiltonian,
    even_odd_split,
    free_dirac,
    fw_generator,
    fw_reduce,
    fw_step,
)
from .report import fw_verify_report

__all__ = [
    "ConfigurationError",
    "SymbolicOperator",
    "Truncation",
    "VerificationFailure",
    "anticommutator",
    "bch_transform",
    "charge_transform_check",
    "commutator",
    "const",
    "dirac_hamiltonian",
    "even_odd_split",
    "fld",
    "free_dirac",
    "fw_generator",
    "fw_reduce",
    "fw_step",
    "fw_verify_report",
    "h",
    "key_grades",
    "mat",
    "partial",
    "sym_mul",
    "truncation",
]
