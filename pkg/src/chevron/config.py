"""Run configuration: a line-based ``key = value`` format with dotted sections.

Example::

    # single backward run from the default three-term oscillatory profile
    kind = backward
    backward.eps = 0.1
    ic.kind = paper_oscillatory

Blank lines and ``#`` comments are ignored. Unknown keys and duplicate keys
are errors. ``serialize_config`` writes every key explicitly, so parsing its
output gives back an equal :class:`RunConfig`.
"""

from __future__ import annotations

import csv
import enum
import math
import warnings
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .backward import BackwardParams
from .errors import ChevronError, ConfigError
from .forward import ChevronParams, FeedbackParams
from .spectral import Grid, Grid1D, Grid2D

DEFAULT_SWEEP_EPS = (0.5, 0.1, 0.05, 0.01, 0.005, 0.001, 0.0005)
OSCILLATORY_TERMS = ((5.0, 20), (2.0, 12), (-1.0, 4))


class Kind(str, enum.Enum):
    BACKWARD = "backward"
    SWEEP = "sweep"
    FORWARD = "forward"
    STABILIZE = "stabilize"
    DETERMINING = "determining"
    ANALYZE = "analyze"


class ICKind(str, enum.Enum):
    OSCILLATORY = "paper_oscillatory"
    SINE_MODE = "sine_mode"
    SINE_CUBED_SUM = "sine_cubed_sum"
    CONSTANT_MODULUS = "constant_modulus"
    FROM_FILE = "from_file"


@dataclass(frozen=True)
class InitialConditionSpec:
    kind: ICKind = ICKind.OSCILLATORY
    k: int = 1
    amplitude: float = 1.0
    # (amplitude, k) pairs for sine_cubed_sum
    terms: tuple[tuple[float, int], ...] = ()
    value: float = 0.0
    path: str = ""
    # y-mode for 2D grids: profiles are multiplied by sin(ky pi y / Ly)
    ky: int = 1

    def resolved_terms(self) -> tuple[tuple[float, int], ...]:
        if self.kind is ICKind.OSCILLATORY:
            return OSCILLATORY_TERMS
        return self.terms

    def evaluate(self, grid: Grid, column: str = "A") -> np.ndarray:
        """Sample the initial field at the grid's interior nodes.

        `column` selects ``A`` (complex) or ``phi`` (real) when reading a
        snapshot file.
        """
        if self.kind is ICKind.FROM_FILE:
            return _read_snapshot(self.path, grid, column)
        L = grid.L if grid.ndim == 1 else grid.Lx
        x = grid.x
        if self.kind is ICKind.SINE_MODE:
            profile = self.amplitude * np.sin(self.k * math.pi * x / L)
        elif self.kind is ICKind.CONSTANT_MODULUS:
            profile = np.full(x.shape, self.value)
        else:
            profile = sum(a * np.sin(k * math.pi * x / L) ** 3 for a, k in self.resolved_terms())
            profile = np.asarray(profile, dtype=float) + np.zeros_like(x)
        if grid.ndim == 2:
            if self.kind is ICKind.CONSTANT_MODULUS:
                return np.full(grid.shape, self.value)
            return profile[:, None] * np.sin(self.ky * math.pi * grid.y / grid.Ly)[None, :]
        return profile


def _read_snapshot(path: str, grid: Grid, column: str) -> np.ndarray:
    if grid.ndim != 1:
        raise ConfigError("from_file initial conditions are supported on 1D grids only")
    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError:
        raise
    if len(rows) != grid.n:
        raise ConfigError(f"{path}: {len(rows)} rows, grid has {grid.n} nodes")
    try:
        if column == "phi":
            return np.array([float(r["phi"]) for r in rows])
        return np.array([complex(float(r["re_A"]), float(r["im_A"])) for r in rows])
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"{path}: malformed snapshot ({exc})") from None


@dataclass(frozen=True)
class ForwardSettings:
    dt: float = 1e-3
    t_end: float = 20.0
    record_every: int = 100


@dataclass(frozen=True)
class AnalyzeSettings:
    psi0: float | None = None
    gamma: float = 0.0
    M_R: float = 1.0
    R: float = 1.0


@dataclass(frozen=True)
class DeterminingSettings:
    N: int = 4
    window: float = 1.0


@dataclass(frozen=True)
class RunConfig:
    kind: Kind
    grid: Grid = field(default_factory=lambda: Grid1D(10.0, 1000))
    chevron: ChevronParams = field(default_factory=ChevronParams)
    backward: BackwardParams = field(default_factory=lambda: BackwardParams(eps=0.1))
    # None means "use stabilization_mode_count"
    feedback_mu: float = 0.0
    feedback_N: int | None = 0
    forward: ForwardSettings = field(default_factory=ForwardSettings)
    ic: InitialConditionSpec = field(default_factory=InitialConditionSpec)
    phi_ic: InitialConditionSpec = field(default_factory=lambda: InitialConditionSpec(ICKind.CONSTANT_MODULUS))
    ic2: InitialConditionSpec = field(default_factory=lambda: InitialConditionSpec(ICKind.CONSTANT_MODULUS))
    phi_ic2: InitialConditionSpec = field(default_factory=lambda: InitialConditionSpec(ICKind.CONSTANT_MODULUS))
    sweep_eps: tuple[float, ...] = DEFAULT_SWEEP_EPS
    # fit over this many smallest eps values (0 = all)
    sweep_fit_count: int = 4
    analyze: AnalyzeSettings = field(default_factory=AnalyzeSettings)
    determining: DeterminingSettings = field(default_factory=DeterminingSettings)
    out_dir: str = "out"

    def feedback(self, N: int | None = None) -> FeedbackParams:
        return FeedbackParams(self.feedback_mu, self.feedback_N if N is None else N)


# ---------------------------------------------------------------- parsing


def _float(text: str) -> float:
    v = float(text)
    if math.isnan(v):
        raise ValueError("nan is not allowed")
    return v


def _opt_float(text: str) -> float | None:
    return None if text.lower() == "none" else _float(text)


def _int(text: str) -> int:
    return int(text)


def _opt_int(text: str) -> int | None:
    return None if text.lower() == "none" else int(text)


def _feedback_N(text: str) -> int | None:
    return None if text.lower() == "auto" else int(text)


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(_float(p) for p in text.split(",") if p.strip())


def _terms(text: str) -> tuple[tuple[float, int], ...]:
    out = []
    for part in text.split(","):
        if not part.strip():
            continue
        amp, k = part.split(":")
        out.append((_float(amp), int(k)))
    return tuple(out)


_SCALARS = {
    "kind": Kind,
    "out_dir": str,
    "grid.L": _float,
    "grid.n": _int,
    "grid.Lx": _float,
    "grid.Ly": _float,
    "grid.nx": _int,
    "grid.ny": _int,
    "chevron.tau_relax": _float,
    "chevron.c1": _float,
    "chevron.c2": _float,
    "chevron.h": _float,
    "chevron.beta": _float,
    "chevron.D1": _float,
    "chevron.D2": _float,
    "backward.eps": _float,
    "backward.tau_max": _float,
    "backward.safety_blow": _float,
    "backward.safety_eps": _float,
    "backward.blow_tol": _float,
    "backward.t_end": _opt_float,
    "backward.record_every": _int,
    "backward.snapshot_every": _opt_int,
    "backward.max_steps": _opt_int,
    "feedback.mu": _float,
    "feedback.N": _feedback_N,
    "forward.dt": _float,
    "forward.t_end": _float,
    "forward.record_every": _int,
    "sweep.eps": _float_list,
    "sweep.fit_count": _int,
    "analyze.psi0": _opt_float,
    "analyze.gamma": _float,
    "analyze.M_R": _float,
    "analyze.R": _float,
    "determining.N": _int,
    "determining.window": _float,
}
_IC_SECTIONS = ("ic", "phi_ic", "ic2", "phi_ic2")
_IC_KEYS = {
    "kind": ICKind,
    "k": _int,
    "amplitude": _float,
    "terms": _terms,
    "value": _float,
    "path": str,
    "ky": _int,
}
for _sec in _IC_SECTIONS:
    for _k, _conv in _IC_KEYS.items():
        _SCALARS[f"{_sec}.{_k}"] = _conv


def _tokenize(text: str) -> dict[str, tuple[str, int]]:
    entries: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key not in _SCALARS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in entries:
            raise ConfigError(f"line {lineno}: duplicate key {key!r} (first set on line {entries[key][1]})")
        entries[key] = (value, lineno)
    return entries


def parse_config(text: str) -> RunConfig:
    """Parse and validate a configuration, filling in defaults."""
    entries = _tokenize(text)
    values = {}
    for key, (raw, lineno) in entries.items():
        try:
            values[key] = _SCALARS[key](raw)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {raw!r} ({exc})") from None
    if "kind" not in values:
        raise ConfigError("missing required key 'kind'")
    try:
        return _build(values)
    except ConfigError:
        raise
    except ChevronError as exc:
        raise ConfigError(str(exc)) from None


def _section(values: dict, prefix: str) -> dict:
    n = len(prefix) + 1
    return {k[n:]: v for k, v in values.items() if k.startswith(prefix + ".")}


def _build(values: dict) -> RunConfig:
    kind = values["kind"]

    g = _section(values, "grid")
    if {"Lx", "Ly", "nx", "ny"} & g.keys():
        if {"L", "n"} & g.keys():
            raise ConfigError("grid: mix of 1D (L, n) and 2D (Lx, Ly, nx, ny) keys")
        grid = Grid2D(g.get("Lx", 10.0), g.get("Ly", 10.0), g.get("nx", 64), g.get("ny", 64))
    else:
        grid = Grid1D(g.get("L", 10.0), g.get("n", 1000))

    with warnings.catch_warnings():
        # admissibility is re-checked (and warned about) when a run starts
        warnings.simplefilter("ignore")
        chevron = ChevronParams(**_section(values, "chevron"))

    b = _section(values, "backward")
    if kind is Kind.BACKWARD and "eps" not in b:
        raise ConfigError("backward runs require 'backward.eps'")
    b.setdefault("eps", 0.1)
    try:
        backward = BackwardParams(**b)
    except ChevronError as exc:
        key = str(exc).split()[0]
        raise ConfigError(f"backward.{key}: {exc}") from None

    fb = _section(values, "feedback")
    forward = ForwardSettings(**_section(values, "forward"))
    if not forward.dt > 0 or not forward.t_end >= 0 or forward.record_every < 1:
        raise ConfigError("forward: need dt > 0, t_end >= 0, record_every >= 1")

    ics = {}
    for sec in _IC_SECTIONS:
        spec = _section(values, sec)
        default = InitialConditionSpec() if sec == "ic" else InitialConditionSpec(ICKind.CONSTANT_MODULUS)
        ic = replace(default, **spec)
        if ic.kind is ICKind.SINE_CUBED_SUM and not ic.terms:
            raise ConfigError(f"{sec}.terms is required for sine_cubed_sum")
        if ic.kind is ICKind.FROM_FILE and not ic.path:
            raise ConfigError(f"{sec}.path is required for from_file")
        if ic.kind is ICKind.SINE_MODE and ic.k < 1:
            raise ConfigError(f"{sec}.k must be >= 1")
        ics[sec] = ic

    sweep = _section(values, "sweep")
    sweep_eps = sweep.get("eps", DEFAULT_SWEEP_EPS)
    if any(not e > 0 for e in sweep_eps):
        raise ConfigError("sweep.eps values must be > 0")
    if len(set(sweep_eps)) != len(sweep_eps):
        raise ConfigError("sweep.eps values must be distinct")

    cfg = RunConfig(
        kind=kind,
        grid=grid,
        chevron=chevron,
        backward=backward,
        feedback_mu=fb.get("mu", 0.0),
        feedback_N=fb.get("N", 0),
        forward=forward,
        sweep_eps=tuple(sweep_eps),
        sweep_fit_count=sweep.get("fit_count", 4),
        analyze=AnalyzeSettings(**_section(values, "analyze")),
        determining=DeterminingSettings(**_section(values, "determining")),
        out_dir=values.get("out_dir", "out"),
        **ics,
    )
    if cfg.feedback_mu < 0:
        raise ConfigError("feedback.mu must be >= 0")
    if cfg.feedback_N is not None and not 0 <= cfg.feedback_N <= grid.size:
        raise ConfigError(f"feedback.N must lie in 0..{grid.size}")
    if kind in (Kind.BACKWARD, Kind.SWEEP) and grid.ndim != 1:
        raise ConfigError("backward and sweep runs need a 1D grid")
    if kind is Kind.DETERMINING and grid.ndim != 1:
        raise ConfigError("determining runs need a 1D grid")
    return cfg


# ---------------------------------------------------------------- serialising


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, enum.Enum):
        return v.value
    if isinstance(v, bool):
        raise TypeError("booleans are not part of the format")
    if isinstance(v, float):
        return repr(v)
    return str(v)


def serialize_config(cfg: RunConfig) -> str:
    lines = [f"kind = {cfg.kind.value}", f"out_dir = {cfg.out_dir}"]
    g = cfg.grid
    if g.ndim == 1:
        lines += [f"grid.L = {_fmt(float(g.L))}", f"grid.n = {g.n}"]
    else:
        lines += [
            f"grid.Lx = {_fmt(float(g.Lx))}",
            f"grid.Ly = {_fmt(float(g.Ly))}",
            f"grid.nx = {g.nx}",
            f"grid.ny = {g.ny}",
        ]
    for section, obj in (("chevron", cfg.chevron), ("backward", cfg.backward), ("forward", cfg.forward),
                         ("analyze", cfg.analyze), ("determining", cfg.determining)):
        for f in fields(obj):
            lines.append(f"{section}.{f.name} = {_fmt(getattr(obj, f.name))}")
    lines.append(f"feedback.mu = {_fmt(cfg.feedback_mu)}")
    lines.append(f"feedback.N = {'auto' if cfg.feedback_N is None else cfg.feedback_N}")
    lines.append("sweep.eps = " + ", ".join(repr(float(e)) for e in cfg.sweep_eps))
    lines.append(f"sweep.fit_count = {cfg.sweep_fit_count}")
    for sec in _IC_SECTIONS:
        ic = getattr(cfg, sec)
        for f in fields(ic):
            v = getattr(ic, f.name)
            if f.name == "terms":
                if not v:
                    continue
                v = ", ".join(f"{float(a)!r}:{k}" for a, k in v)
            elif f.name == "path" and not v:
                continue
            lines.append(f"{sec}.{f.name} = {_fmt(v)}")
    return "\n".join(lines) + "\n"
