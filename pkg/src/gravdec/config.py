"""Experiment configuration: flat INI sections with a strict schema.

Every key has a type and a default; unknown sections or keys are rejected.
``serialize`` writes every key, so ``parse(serialize(c)) == c``.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field, fields

from .errors import SchemaError
from .noise import COMPONENTS, KERNEL_FAMILIES

MODES = ("trajectories", "master", "position-limit", "momentum-limit", "fw-verify", "identities",
         "noise-stats", "compare-models")
EM_PRESETS = ("off", "uniform-B", "coulomb-like", "vector-wave")
STATE_PRESETS = ("gaussian", "two-site", "plane-wave")
SPINS = ("up", "down", "x")


@dataclass
class GridBlock:
    dim: int = 1
    n: int = 16
    spacing: float = 1.0


@dataclass
class ScalesBlock:
    """SI value of one code unit of mass, length and time (recorded, not used in the algebra)."""

    mass: float = 1.0
    length: float = 1.0
    time: float = 1.0


@dataclass
class EMBlock:
    preset: str = "off"
    charge: float = 1.0
    B: tuple = (0.0, 0.0, 0.0)
    strength: float = 0.0
    softening: float = 1.0
    amplitude: float = 0.0
    component: int = 2
    mode: int = 1


@dataclass
class NoiseBlock:
    alpha: float = 0.0
    tau_c: float = 1.0
    lambda_rule: str = "fixed"
    lambda_value: float = 1.0
    active: tuple = ("00",)
    kernel_00: str = "delta"
    ell_00: float = 1.0
    kernel_0i: str = "delta"
    ell_0i: float = 1.0
    kernel_ij: str = "delta"
    ell_ij: float = 1.0
    coupling: str = "hamiltonian"


@dataclass
class StateBlock:
    preset: str = "gaussian"
    center: float = 0.0
    width: float = 2.0
    k0: float = 0.0
    sites: tuple = (0, 1)
    spin: str = "up"


@dataclass
class RunBlock:
    mode: str = "master"
    T: float = 1.0
    dt: float = 0.01
    n_traj: int = 1000
    seed: int = 0
    n_samples: int = 10
    noise_samples: int = 100000
    include_hr: bool = False
    basis: str = "position"
    pair: tuple = (0, 2)


@dataclass
class OutputBlock:
    directory: str = ""
    formats: tuple = ("csv",)


@dataclass
class ExperimentConfig:
    grid: GridBlock = field(default_factory=GridBlock)
    scales: ScalesBlock = field(default_factory=ScalesBlock)
    em: EMBlock = field(default_factory=EMBlock)
    noise: NoiseBlock = field(default_factory=NoiseBlock)
    state: StateBlock = field(default_factory=StateBlock)
    run: RunBlock = field(default_factory=RunBlock)
    output: OutputBlock = field(default_factory=OutputBlock)


SECTIONS = {f.name: f.default_factory for f in fields(ExperimentConfig)}


# ------------------------------------------------------------------ values


def _parse_value(text: str, default, where: str):
    text = text.strip()
    try:
        if isinstance(default, bool):
            low = text.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(text)
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
        if isinstance(default, tuple):
            items = [s.strip() for s in text.split(",") if s.strip()]
            kind = type(default[0]) if default else str
            return tuple(kind(s) for s in items)
        return text
    except ValueError:
        raise SchemaError(f"{where}: cannot parse {text!r} as {type(default).__name__}") from None


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ", ".join(_format_value(x) for x in v)
    return str(v)


# --------------------------------------------------------------- parse/dump


def parse_text(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None, strict=True)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise SchemaError(f"malformed config: {exc}") from None
    if cp.defaults():
        raise SchemaError("keys outside a section are not allowed")
    blocks = {}
    for name in cp.sections():
        if name not in SECTIONS:
            raise SchemaError(f"unknown section [{name}]")
    for name, factory in SECTIONS.items():
        block = factory()
        known = {f.name: f for f in fields(block)}
        if cp.has_section(name):
            for key, raw in cp.items(name):
                if key not in known:
                    raise SchemaError(f"unknown key {key!r} in [{name}]")
                setattr(block, key, _parse_value(raw, getattr(block, key), f"[{name}] {key}"))
        blocks[name] = block
    cfg = ExperimentConfig(**blocks)
    check(cfg)
    return cfg


def parse(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise SchemaError(f"cannot read config: {exc}") from None
    return parse_text(text)


def serialize(cfg: ExperimentConfig) -> str:
    lines = []
    for name in SECTIONS:
        block = getattr(cfg, name)
        lines.append(f"[{name}]")
        for f in fields(block):
            lines.append(f"{f.name} = {_format_value(getattr(block, f.name))}")
        lines.append("")
    return "\n".join(lines)


def replace(cfg: ExperimentConfig, section: str, **changes) -> ExperimentConfig:
    new = dataclasses.replace(cfg, **{section: dataclasses.replace(getattr(cfg, section), **changes)})
    check(new)
    return new


# ------------------------------------------------------------------ checks


def _need(cond, msg):
    if not cond:
        raise SchemaError(msg)


def check(cfg: ExperimentConfig) -> None:
    g = cfg.grid
    _need(g.dim in (1, 3), "[grid] dim must be 1 or 3")
    _need(g.n >= 2 and g.n & (g.n - 1) == 0, "[grid] n must be a power of two")
    _need(g.spacing > 0, "[grid] spacing must be positive")
    s = cfg.scales
    _need(s.mass > 0 and s.length > 0 and s.time > 0, "[scales] entries must be positive")
    e = cfg.em
    _need(e.preset in EM_PRESETS, f"[em] preset must be one of {EM_PRESETS}")
    _need(len(e.B) == 3, "[em] B needs three components")
    _need(e.softening > 0, "[em] softening must be positive")
    _need(e.component in (1, 2, 3), "[em] component must be 1, 2 or 3")
    n = cfg.noise
    _need(n.alpha >= 0, "[noise] alpha must be >= 0")
    _need(n.tau_c > 0, "[noise] tau_c must be > 0")
    _need(n.lambda_rule in ("min", "fixed"), "[noise] lambda_rule must be min or fixed")
    _need(n.lambda_value >= 0, "[noise] lambda_value must be >= 0")
    _need(all(c in COMPONENTS for c in n.active), f"[noise] active entries must be among {COMPONENTS}")
    _need(len(set(n.active)) == len(n.active), "[noise] duplicate active component")
    for b in ("00", "0i", "ij"):
        _need(getattr(n, f"kernel_{b}") in KERNEL_FAMILIES, f"[noise] kernel_{b} must be one of {KERNEL_FAMILIES}")
        _need(getattr(n, f"ell_{b}") > 0, f"[noise] ell_{b} must be positive")
    _need(n.coupling in ("hamiltonian", "paper"), "[noise] coupling must be hamiltonian or paper")
    st = cfg.state
    _need(st.preset in STATE_PRESETS, f"[state] preset must be one of {STATE_PRESETS}")
    _need(st.width > 0, "[state] width must be positive")
    _need(len(st.sites) == 2, "[state] sites needs two site indices")
    _need(all(0 <= x < g.n**g.dim for x in st.sites) and st.sites[0] != st.sites[1],
          "[state] sites must be two distinct grid sites")
    _need(st.spin in SPINS, f"[state] spin must be one of {SPINS}")
    r = cfg.run
    _need(r.mode in MODES, f"[run] mode must be one of {MODES}")
    _need(r.T > 0 and r.dt > 0, "[run] T and dt must be positive")
    steps = round(r.T / r.dt)
    _need(steps >= 1 and abs(steps * r.dt - r.T) <= 1e-9 * max(r.T, 1.0), "[run] T must be a multiple of dt")
    _need(r.n_traj >= 1, "[run] n_traj must be >= 1")
    _need(r.n_samples >= 1, "[run] n_samples must be >= 1")
    _need(r.noise_samples >= 1000, "[run] noise_samples must be >= 1000")
    _need(r.basis in ("position", "momentum", "energy"), "[run] basis must be position, momentum or energy")
    _need(len(r.pair) == 2 and all(0 <= x < 2 * g.n**g.dim for x in r.pair), "[run] pair out of range")
    o = cfg.output
    _need(all(f == "csv" for f in o.formats), "[output] only the csv format is supported")
