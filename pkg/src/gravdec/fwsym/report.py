"""Structured summary of the symbolic checks, used by the CLI."""

from __future__ import annotations

import time
from collections import Counter

from .algebra import format_key, has_metric_derivative, key_grades
from .fw import charge_transform_check, dirac_hamiltonian, fw_reduce
from . import targets


def grade_histogram(op):
    return dict(sorted(Counter(key_grades(k) for k in op.terms).items()))


def _entry(name, report, seconds):
    return {
        "check": name,
        "pass": report["pass"],
        "matched": len(report["matched"]),
        "mismatches": targets.describe(report),
        "seconds": seconds,
    }


def fw_verify_report() -> dict:
    checks = []

    t = time.perf_counter()
    rep, _ = targets.check_free_particle()
    checks.append(_entry("free_particle", rep, time.perf_counter() - t))

    t = time.perf_counter()
    even = fw_reduce(dirac_hamiltonian(em=False), 4)
    reduce_time = time.perf_counter() - t
    rep, _ = targets.check_gravity_sector(even)
    checks.append(_entry("gravity_sector_anticommutator_form", rep, reduce_time))
    rep, _ = targets.check_dispersion(even)
    checks.append(_entry("constant_metric_dispersion", rep, 0.0))

    t = time.perf_counter()
    rep, _ = targets.check_odd_square()
    checks.append(_entry("odd_square_block", rep, time.perf_counter() - t))

    charge = charge_transform_check()
    checks.append({
        "check": "charge_transform",
        "pass": charge["pass"],
        "matched": 0,
        "mismatches": [format_key(k) for k in charge["residue"].terms],
        "seconds": 0.0,
    })

    defect = even - even.dagger()
    defect = defect.filter(lambda k: not has_metric_derivative(k))
    checks.append({
        "check": "hermiticity_without_metric_derivatives",
        "pass": not defect,
        "matched": 0,
        "mismatches": [format_key(k) for k in defect.terms],
        "seconds": 0.0,
    })
    return {
        "pass": all(c["pass"] for c in checks),
        "checks": checks,
        "grade_histogram": grade_histogram(even),
        "n_terms": len(even),
    }
