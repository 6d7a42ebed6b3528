"""JSON run configuration: schema, loading, and round-trip dumping.

A config file carries four optional blocks (params, grid, integrator,
output) plus an experiment selector; anything omitted falls back to the
calibrated device defaults, and unknown keys are rejected outright so
typos fail loudly instead of silently running the default.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np
import jsonschema

from .errors import ConfigError
from .integrator import IntegratorConfig
from .params import (TWO_PI, FieldState, PhysicalParams, default_params,
                     freq_to_ghz)

EXPERIMENTS = ("simulate", "transmission", "phase-diagram", "sync",
               "analytics")

_NUMBER = {"type": "number"}
_POSITIVE = {"type": "number", "exclusiveMinimum": 0}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "params": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "omega_c_ghz": _POSITIVE,
                "kappa_int_1_mhz": _POSITIVE,
                "kappa_int_2_mhz": _POSITIVE,
                "kappa_in_mhz": _POSITIVE,
                "kappa_out_mhz": _POSITIVE,
                "kappa_c_mhz": _POSITIVE,
                "j_c_mhz": {"type": "number", "minimum": 0},
                "g0_db": _NUMBER,
                "b_g_mw": _POSITIVE,
                "p_sat_mw": _POSITIVE,
            },
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "phi_min_rad": _NUMBER,
                "phi_max_rad": _NUMBER,
                "phi_points": {"type": "integer", "minimum": 2},
                "delta_g_min_db": _NUMBER,
                "delta_g_max_db": _NUMBER,
                "delta_g_points": {"type": "integer", "minimum": 2},
                "drive_span_mhz": _POSITIVE,
                "drive_points": {"type": "integer", "minimum": 2},
                "p_d_dbm": {
                    "type": "array",
                    "items": _NUMBER,
                    "minItems": 1,
                },
            },
        },
        "integrator": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "rel_tol": _POSITIVE,
                "abs_tol": _POSITIVE,
                "n_samples": {"type": "integer", "minimum": 16},
                "t_span_s": _POSITIVE,
                "max_step_s": _POSITIVE,
                "initial_amp": _POSITIVE,
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "directory": {"type": "string", "minLength": 1},
                "formats": {
                    "type": "array",
                    "items": {"enum": ["csv", "json", "svg"]},
                    "minItems": 1,
                    "uniqueItems": True,
                },
            },
        },
        "experiment": {"enum": list(EXPERIMENTS)},
    },
}


@dataclass(frozen=True)
class GridConfig:
    """Operating-point grids swept by the batch experiments."""

    phi_min_rad: float = 0.0
    phi_max_rad: float = TWO_PI
    phi_points: int = 60
    delta_g_min_db: float = -4.6
    delta_g_max_db: float = 8.4
    delta_g_points: int = 23
    drive_span_mhz: float = 30.0   # half-span around the cavity resonance
    drive_points: int = 121
    p_d_dbm: tuple = (-30.0,)

    def __post_init__(self):
        if self.phi_points < 2 or self.delta_g_points < 2:
            raise ValueError("grids need at least 2 points per axis")
        if self.drive_points < 2:
            raise ValueError("drive grid needs at least 2 points")
        if self.drive_span_mhz <= 0:
            raise ValueError("drive_span_mhz must be positive")
        object.__setattr__(self, "p_d_dbm",
                           tuple(float(p) for p in self.p_d_dbm))

    def phi_grid(self) -> np.ndarray:
        return np.linspace(self.phi_min_rad, self.phi_max_rad,
                           self.phi_points)

    def delta_g_grid(self) -> np.ndarray:
        return np.linspace(self.delta_g_min_db, self.delta_g_max_db,
                           self.delta_g_points)

    def drive_grid_hz(self, params: PhysicalParams) -> np.ndarray:
        center = params.omega_c / TWO_PI
        half = self.drive_span_mhz * 1e6
        return np.linspace(center - half, center + half, self.drive_points)


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    formats: tuple = ("csv", "svg")

    def __post_init__(self):
        bad = set(self.formats) - {"csv", "json", "svg"}
        if bad:
            raise ValueError(f"unknown output formats: {sorted(bad)}")
        object.__setattr__(self, "formats", tuple(self.formats))


@dataclass(frozen=True)
class RunConfig:
    """Validated top-level configuration of one CLI run."""

    params: PhysicalParams = field(default_factory=default_params)
    grid: GridConfig = field(default_factory=GridConfig)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    experiment: str = "phase-diagram"

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")

    def to_dict(self) -> dict:
        cfg = self.integrator
        integ = {"rel_tol": cfg.rel_tol, "abs_tol": cfg.abs_tol,
                 "n_samples": cfg.n_samples,
                 "initial_amp": float(cfg.initial_state.alpha_1.real)}
        if cfg.t_span is not None:
            integ["t_span_s"] = cfg.t_span
        if math.isfinite(cfg.max_step):
            integ["max_step_s"] = cfg.max_step
        return {
            "params": self.params.to_config(),
            "grid": {
                "phi_min_rad": self.grid.phi_min_rad,
                "phi_max_rad": self.grid.phi_max_rad,
                "phi_points": self.grid.phi_points,
                "delta_g_min_db": self.grid.delta_g_min_db,
                "delta_g_max_db": self.grid.delta_g_max_db,
                "delta_g_points": self.grid.delta_g_points,
                "drive_span_mhz": self.grid.drive_span_mhz,
                "drive_points": self.grid.drive_points,
                "p_d_dbm": list(self.grid.p_d_dbm),
            },
            "integrator": integ,
            "output": {"directory": self.output.directory,
                       "formats": list(self.output.formats)},
            "experiment": self.experiment,
        }


def validate_config_dict(raw: dict) -> None:
    """Schema-check a raw config mapping, raising ConfigError on failure."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.path))
    if errors:
        err = errors[0]
        where = ".".join(str(p) for p in err.path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {err.message}")


def config_from_dict(raw: dict) -> RunConfig:
    """Build a RunConfig from a raw mapping, applying defaults."""
    validate_config_dict(raw)
    params_block = {**default_params().to_config(), **raw.get("params", {})}
    try:
        params = PhysicalParams.from_config(**params_block)
        grid = GridConfig(**raw.get("grid", {}))
        output = OutputConfig(**raw.get("output", {}))
        integ_block = dict(raw.get("integrator", {}))
        amp = integ_block.pop("initial_amp", 1e7)
        t_span = integ_block.pop("t_span_s", None)
        max_step = integ_block.pop("max_step_s", math.inf)
        integrator = IntegratorConfig(
            initial_state=FieldState(complex(amp, 0.0), complex(amp, 0.0)),
            t_span=t_span, max_step=max_step, **integ_block)
        return RunConfig(params=params, grid=grid, integrator=integrator,
                         output=output,
                         experiment=raw.get("experiment", "phase-diagram"))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"config rejected: {exc}") from exc


def load_config(path) -> RunConfig:
    """Read and validate a JSON config file."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    return config_from_dict(raw)


def dump_config(cfg: RunConfig) -> str:
    """Serialize a RunConfig to canonical JSON (sorted keys, 2-space)."""
    return json.dumps(cfg.to_dict(), sort_keys=True, indent=2) + "\n"


def write_config(cfg: RunConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_config(cfg))


def summary_line(cfg: RunConfig) -> str:
    """One-line human summary used by CLI banners."""
    p = cfg.params
    return (f"experiment={cfg.experiment} omega_c={freq_to_ghz(p.omega_c):g} "
            f"GHz grid={cfg.grid.delta_g_points}x{cfg.grid.phi_points} "
            f"out={cfg.output.directory}")
