"""CSV and text artifacts.  Floats use the shortest round-trip repr."""

from __future__ import annotations

import csv
import platform
from pathlib import Path

import numpy as np

from . import __version__


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(x) for x in r])
    return path


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def rho_rows(times, states, stderr_re=None, stderr_im=None):
    """Long format: t, row, col, re, im [, stderr_re, stderr_im]."""
    for k, t in enumerate(times):
        rho = states[k]
        d = rho.shape[0]
        for a in range(d):
            for b in range(d):
                row = [float(t), a, b, float(rho[a, b].real), float(rho[a, b].imag)]
                if stderr_re is not None:
                    row += [float(stderr_re[k][a, b]), float(stderr_im[k][a, b])]
                yield row


def write_manifest(path, config_text: str, extra: dict) -> Path:
    """The resolved configuration plus a provenance section, as INI text."""
    lines = [config_text.rstrip(), "", "[provenance]"]
    info = {"code_version": __version__, "python": platform.python_version(), "numpy": np.__version__}
    info.update(extra)
    lines += [f"{k} = {fmt(v)}" for k, v in info.items()]
    Path(path).write_text("\n".join(lines) + "\n")
    return Path(path)


def write_summary(path, mode: str, checks: list, notes=()) -> Path:
    """checks: (name, value, limit, passed)."""
    lines = [f"mode: {mode}"]
    for name, value, limit, ok in checks:
        lim = "" if limit is None else f" (limit {fmt(limit)})"
        lines.append(f"{'PASS' if ok else 'FAIL'} {name} = {fmt(value)}{lim}")
    lines += [f"note: {n}" for n in notes]
    overall = all(c[3] for c in checks)
    lines.append(f"overall: {'PASS' if overall else 'FAIL'}")
    Path(path).write_text("\n".join(lines) + "\n")
    return Path(path)
