"""Flat key-value run configuration: file parsing and flag merging.

Config files are plain ``key = value`` lines (``#`` comments, blank lines
allowed) with keys named after RunConfig fields.  Command-line flags
override file values.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

__all__ = ["ConfigError", "RunConfig", "parse_config_file", "merge_config", "require"]


class ConfigError(ValueError):
    """Invalid or missing configuration; CLI maps this to exit code 2."""


@dataclass
class RunConfig:
    """Every tunable of the CLI, flat so files and flags map one-to-one."""

    # scenario
    nbar: float | None = None
    kappa: float | None = None
    nbar_b: float | None = None
    eta: float = 1.0
    nbar_d: float = 0.0
    eta_i: float = 1.0
    nbar_d_i: float = 0.0
    intercept_eta: float | None = None
    probe: str = "tmsv"
    # sweep grid
    nbar_min: float | None = None
    nbar_max: float | None = None
    points: int | None = None
    scale: str = "linear"
    bounds: bool = False
    # trajectories
    shots: int | None = None
    trials: int = 1
    seed: int = 0
    threshold: float = 0.8
    ground_truth: str = "present"
    heralded_only: bool = False
    workers: int = 1
    # wigner grid
    x_min: float = -4.0
    x_max: float = 4.0
    x_points: int = 161
    eta_i_list: str | None = None
    # oracle
    dim: int | None = None
    # output
    output: str | None = None
    format: str = "csv"
    plot: bool = False
    per_trial: str | None = None


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
_BOOL_FIELDS = {"bounds", "heralded_only", "plot"}
_INT_FIELDS = {"points", "shots", "trials", "seed", "x_points", "dim", "workers"}
_STR_FIELDS = {"probe", "scale", "ground_truth", "eta_i_list", "output", "format",
               "per_trial"}


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    if key in _BOOL_FIELDS:
        low = raw.lower()
        if low in ("true", "1", "yes", "on"):
            return True
        if low in ("false", "0", "no", "off"):
            return False
        raise ConfigError(f"config field {key!r}: expected a boolean, got {raw!r}")
    if key in _INT_FIELDS:
        try:
            return int(raw)
        except ValueError as exc:
            raise ConfigError(f"config field {key!r}: expected an integer, got {raw!r}") from exc
    if key in _STR_FIELDS:
        return raw
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"config field {key!r}: expected a number, got {raw!r}") from exc


def parse_config_file(path: str) -> dict:
    """Parse a flat key = value file into a dict of typed values."""
    values = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {stripped!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"{path}:{lineno}: unknown config field {key!r}")
        values[key] = _parse_value(key, raw)
    return values


def merge_config(file_values: dict, flag_values: dict) -> RunConfig:
    """RunConfig from defaults, then file values, then flags (flags win)."""
    cfg = RunConfig()
    for key, value in file_values.items():
        setattr(cfg, key, value)
    for key, value in flag_values.items():
        if value is not None:
            setattr(cfg, key, value)
    return cfg


def require(cfg: RunConfig, *names: str):
    """Fetch required fields, raising ConfigError naming any missing one."""
    out = []
    for name in names:
        value = getattr(cfg, name)
        if value is None:
            raise ConfigError(f"missing required config field {name!r}")
        out.append(value)
    return out
