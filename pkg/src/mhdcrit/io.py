"""Checkpoints, reports and run configuration.

Checkpoint layout (little-endian): magic ``MHDC``, u32 version, u32 nx, ny,
nz, f64 L, t, nu, eta, then u1, u2, u3, b1, b2, b3 as nx*ny*nz doubles in C
order (z fastest). Every file is written to a temporary sibling and renamed
into place, so readers never observe a partial file.
"""
from __future__ import annotations

import csv
import json
import math
import os
import struct
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dynamics import FORMS, INIT_KINDS, SolverConfig, State
from .errors import (BadMagic, ConfigError, GridMismatch, TruncatedFile,
                     UnsupportedVersion)
from .grid import Grid
from .monitors import DEFAULT_SPECS, CriterionSpec, MonitorSeries

MAGIC = b"MHDC"
VERSION = 1
_HEADER = struct.Struct("<4sIIII4d")
HEADER_SIZE = _HEADER.size

CSV_COLUMNS = (
    "t", "E_u", "E_b", "grad_u_sq", "grad_b_sq", "norm_uz_alpha", "M_t", "norm_pz_alpha", "Mp_t",
    "D_t", "energy_residual", "zderiv_residual", "h1_residual", "l4_residual", "div_u_max", "div_b_max",
)


def _atomic_write(path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# checkpoints -----------------------------------------------------------------

@dataclass(frozen=True)
class CheckpointHeader:
    version: int
    n: tuple
    length: float
    t: float
    nu: float
    eta: float

    @property
    def grid(self) -> Grid:
        return Grid(self.n, self.length)


def write_checkpoint(state: State, path, nu: float = 1.0, eta: float = 1.0) -> None:
    nx, ny, nz = state.grid.n
    head = _HEADER.pack(MAGIC, VERSION, nx, ny, nz, state.grid.length, state.t, nu, eta)
    body = np.concatenate([state.u, state.b]).astype("<f8", copy=False).tobytes(order="C")
    _atomic_write(path, head + body)


def read_checkpoint_header(path) -> CheckpointHeader:
    with open(path, "rb") as fh:
        raw = fh.read(HEADER_SIZE)
    return _parse_header(raw, path)


def _parse_header(raw: bytes, path) -> CheckpointHeader:
    if len(raw) < 4 or raw[:4] != MAGIC:
        raise BadMagic(f"{path}: not a checkpoint (magic {raw[:4]!r})")
    if len(raw) < HEADER_SIZE:
        raise TruncatedFile(f"{path}: header truncated at {len(raw)} bytes")
    magic, version, nx, ny, nz, L, t, nu, eta = _HEADER.unpack(raw[:HEADER_SIZE])
    if version != VERSION:
        raise UnsupportedVersion(f"{path}: checkpoint version {version}, expected {VERSION}")
    return CheckpointHeader(version, (nx, ny, nz), L, t, nu, eta)


def read_checkpoint(path, grid: Grid | None = None) -> State:
    """Load a State; with ``grid`` given, its size and box length must match the file."""
    with open(path, "rb") as fh:
        raw = fh.read()
    h = _parse_header(raw, path)
    npts = h.n[0] * h.n[1] * h.n[2]
    need = HEADER_SIZE + 6 * npts * 8
    if len(raw) < need:
        raise TruncatedFile(f"{path}: expected {need} bytes, found {len(raw)}")
    if len(raw) > need:
        raise TruncatedFile(f"{path}: {len(raw) - need} unexpected trailing bytes")
    g = h.grid
    if grid is not None and (grid.n != g.n or grid.length != g.length):
        raise GridMismatch(f"{path}: checkpoint grid {g.n} L={g.length} differs from {grid.n} L={grid.length}")
    data = np.frombuffer(raw, dtype="<f8", count=6 * npts, offset=HEADER_SIZE)
    data = data.astype(np.float64).reshape((6,) + g.n)
    return State(data[:3].copy(), data[3:].copy(), h.t, g)


# reports ------------------------------------------------------------------------

def fmt(x: float) -> str:
    """17 significant digits: enough for a lossless double round trip."""
    return "%.17g" % x


def _first(series: MonitorSeries, kind: str):
    for c in series.specs:
        if c.kind == kind:
            return c.label
    return None


def monitor_rows(series: MonitorSeries) -> list[list[float]]:
    n = len(series)
    if n == 0:
        return []
    nan = np.full(n, math.nan)
    lu, lp = _first(series, "velocity_z"), _first(series, "pressure_z")
    cols = {
        "t": series.times,
        "E_u": series.column("E_u"),
        "E_b": series.column("E_b"),
        "grad_u_sq": series.column("grad_u_sq"),
        "grad_b_sq": series.column("grad_b_sq"),
        "norm_uz_alpha": series.norm_column(lu) if lu else nan,
        "M_t": np.array(series.integrals[lu]) if lu else nan,
        "norm_pz_alpha": series.norm_column(lp) if lp else nan,
        "Mp_t": np.array(series.integrals[lp]) if lp else nan,
        "D_t": np.array(series.D),
        "energy_residual": series.energy_residuals(),
        "zderiv_residual": series.zderiv_residuals(),
        "h1_residual": series.h1_residuals(),
        "l4_residual": series.l4_residuals(),
        "div_u_max": series.column("div_u_max"),
        "div_b_max": series.column("div_b_max"),
    }
    return [[float(cols[c][i]) for c in CSV_COLUMNS] for i in range(n)]


def emit_monitor_csv(series: MonitorSeries, path) -> None:
    lines = [",".join(CSV_COLUMNS)]
    lines += [",".join(fmt(v) for v in row) for row in monitor_rows(series)]
    try:
        _atomic_write(path, ("\n".join(lines) + "\n").encode())
    except OSError as exc:
        raise OSError(f"cannot write monitor CSV to {path}: {exc}") from exc


def read_monitor_csv(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    head, body = rows[0], rows[1:]
    return {h: np.array([float(r[i]) for r in body]) for i, h in enumerate(head)}


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def emit_report_json(results: dict, path) -> None:
    """Write ``results`` as indented JSON. Non-finite numbers become null."""
    text = json.dumps(_jsonable(results), indent=2, allow_nan=False) + "\n"
    try:
        _atomic_write(path, text.encode())
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc


# configuration -------------------------------------------------------------------

@dataclass
class RunConfig:
    grid_n: tuple = (32, 32, 32)
    box_length: float = 2 * math.pi
    dt: float = 1e-3
    t_end: float = 1.0
    nu: float = 1.0
    eta: float = 1.0
    dealias: bool = True
    form: str = "primitive"
    init: str = "orszag_tang_3d"
    init_params: dict = field(default_factory=dict)
    seed: int = 0
    monitors: tuple = DEFAULT_SPECS
    monitor_level: str = "full"
    sample_every: int = 1
    checkpoint_every: int = 0
    out_dir: Path = Path("out")

    @property
    def grid(self) -> Grid:
        return Grid(self.grid_n, self.box_length)

    def solver(self) -> SolverConfig:
        return SolverConfig(self.dt, self.t_end, self.nu, self.eta, self.dealias, self.form)


_BOOL = {"true": True, "yes": True, "1": True, "on": True,
         "false": False, "no": False, "0": False, "off": False}


def parse_spec(text: str) -> CriterionSpec:
    """``kind:alpha:beta`` with ``beta`` a number or ``inf``."""
    parts = [p.strip() for p in text.split(":")]
    if len(parts) != 3:
        raise ValueError(f"expected kind:alpha:beta, got {text!r}")
    kind = KIND_ALIASES.get(parts[0], parts[0])
    return CriterionSpec(kind, float(parts[1]), float(parts[2]))


KIND_ALIASES = {"velocity": "velocity_z", "pressure": "pressure_z", "gradient": "gradient_velocity"}


def _positive(conv):
    def f(v):
        x = conv(v)
        if not x > 0:
            raise ValueError("must be positive")
        return x
    return f


def _grid_n(v: str) -> tuple:
    parts = [int(p) for p in v.replace("x", ",").split(",") if p.strip()]
    if len(parts) == 1:
        parts *= 3
    g = Grid(tuple(parts))
    return g.n


def _bool(v: str) -> bool:
    try:
        return _BOOL[v.lower()]
    except KeyError:
        raise ValueError(f"expected a boolean, got {v!r}") from None


def _choice(options):
    def f(v):
        if v not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return v
    return f


def _nonneg_int(v: str) -> int:
    x = int(v)
    if x < 0:
        raise ValueError("must be >= 0")
    return x


def _float(v: str) -> float:
    x = float(v)
    if not math.isfinite(x):
        raise ValueError("must be finite")
    return x


_FIELDS = {
    "grid_n": _grid_n,
    "box_length": _positive(_float),
    "dt": _positive(_float),
    "t_end": _float,
    "nu": _float,
    "eta": _float,
    "dealias": _bool,
    "form": _choice(FORMS),
    "init": _choice(INIT_KINDS),
    "seed": _nonneg_int,
    "monitors": lambda v: tuple(parse_spec(s) for s in v.split(",") if s.strip()),
    "monitor_level": _choice(("full", "budget")),
    "sample_every": _positive(int),
    "checkpoint_every": _nonneg_int,
    "out_dir": Path,
}


def parse_config_text(text: str, base: Path | None = None) -> RunConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment.

    Initial-data parameters use the ``init.`` prefix (``init.eps = 0.2``).
    A relative ``out_dir`` is taken relative to ``base``. Every problem
    raises ConfigError naming the key (or ``line N`` for syntax errors).
    """
    cfg = RunConfig()
    seen = set()
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}", "missing key")
        if key in seen:
            raise ConfigError(key, "given more than once")
        seen.add(key)
        if key.startswith("init."):
            name = key[5:]
            if not name:
                raise ConfigError(key, "missing parameter name")
            if name == "path":
                cfg.init_params[name] = str(Path(base or ".") / value) if not Path(value).is_absolute() else value
            else:
                try:
                    cfg.init_params[name] = _float(value)
                except ValueError as exc:
                    raise ConfigError(key, str(exc)) from None
            continue
        if key not in _FIELDS:
            raise ConfigError(key, "unknown key")
        try:
            setattr(cfg, key, _FIELDS[key](value))
        except (ValueError, TypeError) as exc:
            raise ConfigError(key, f"invalid value {value!r}: {exc}") from None
    if base is not None and not cfg.out_dir.is_absolute():
        cfg.out_dir = Path(base) / cfg.out_dir
    try:
        cfg.solver()
    except ValueError as exc:
        raise ConfigError(_blame(str(exc)), str(exc)) from None
    if cfg.t_end <= 0:
        raise ConfigError("t_end", "must be positive")
    if cfg.init == "checkpoint" and "path" not in cfg.init_params:
        raise ConfigError("init.path", "required for checkpoint initial data")
    return cfg


def _blame(message: str) -> str:
    for key in ("dt", "t_end", "nu", "eta", "form"):
        if message.startswith(key) or f" {key} " in f" {message} ":
            return key
    return "config"


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from None
    except UnicodeDecodeError:
        raise ConfigError("config", f"{path} is not a text file") from None
    return parse_config_text(text, path.parent)
