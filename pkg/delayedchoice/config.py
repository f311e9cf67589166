"""
Run configuration management

Config files are JSON objects. Values from the file are merged over the
per-experiment defaults, and command-line flags are merged over both.
Parsing is strict: unknown keys, wrong types and values that would break a
module invariant are rejected before anything runs.
"""

import json
import logging
import math
import os
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from types import MappingProxyType
from typing import Any, Dict, Mapping, Optional

from .eraser import CircuitMode, EraserConfig
from .orderprop import MAX_EVENTS, MAX_SPACE_DIM
from .wheeler import GeometryError, WheelerConfig, symmetric_grid

logger = logging.getLogger(__name__)

FORMAT_ENV_VAR = "DELAYEDCHOICE_FORMAT"


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending key path"""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class Experiment(str, Enum):
    EPR = "epr"
    ERASER = "eraser"
    WHEELER = "wheeler"
    ORDERPROP = "orderprop"
    EVERETT = "everett"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


COMMON_DEFAULTS: Dict[str, Any] = {
    "seed": 0,
    "output_path": None,
    "format": None,
}

DEFAULT_CONFIG: Dict[Experiment, Dict[str, Any]] = {
    Experiment.EPR: {
        "angle_a": 0.0,
        "angle_b": 0.0,
    },
    Experiment.ERASER: {
        "mode": CircuitMode.UNITARY.value,
        "k": 1.0,
        "d": 2 * math.pi,
        "theta_bins": 181,
        "theta_max": math.pi / 3,
    },
    Experiment.WHEELER: {
        "k": 2 * math.pi,
        "d": 10.0,
        "screen_distance": 1.0e5,
        "theta_bins": 2001,
        "theta_max": 1.0,
        "telescope_angle": 0.0,
        "acceptance_halfwidth": None,
        "screen_in": True,
    },
    Experiment.ORDERPROP: {
        "trials": 1000,
        "max_dims": [4, 4],
        "max_len": 3,
        "workers": 1,
    },
    Experiment.EVERETT: {
        "trials": 100,
    },
}

# expected kind of every experiment-specific key
SCHEMA: Dict[str, str] = {
    "angle_a": "float",
    "angle_b": "float",
    "mode": "mode",
    "k": "float",
    "d": "float",
    "theta_bins": "int",
    "theta_max": "float",
    "screen_distance": "float",
    "telescope_angle": "float",
    "acceptance_halfwidth": "optional_float",
    "screen_in": "bool",
    "trials": "int",
    "max_dims": "dims",
    "max_len": "int",
    "workers": "int",
}


def _check_kind(path: str, value: Any, kind: str) -> Any:
    if kind == "optional_float" and value is None:
        return None
    if kind in ("float", "optional_float"):
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ConfigError(path, f"expected a finite number, got {value!r}")
        return float(value)
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(path, f"expected an integer, got {value!r}")
        return value
    if kind == "bool":
        if not isinstance(value, bool):
            raise ConfigError(path, f"expected true or false, got {value!r}")
        return value
    if kind == "mode":
        try:
            return CircuitMode(value).value
        except ValueError:
            choices = ", ".join(m.value for m in CircuitMode)
            raise ConfigError(path, f"invalid value {value!r} (expected one of {choices})")
    if kind == "dims":
        if (
            not isinstance(value, list)
            or len(value) != 2
            or any(isinstance(v, bool) or not isinstance(v, int) for v in value)
        ):
            raise ConfigError(path, f"expected a list of two integers, got {value!r}")
        return list(value)
    raise AssertionError(f"unknown schema kind {kind}")


@dataclass(frozen=True)
class RunConfig:
    """A fully validated run: experiment, its parameters and output settings"""

    experiment: Experiment
    parameters: Mapping[str, Any] = field(default_factory=dict)
    seed: int = 0
    output_path: Optional[Path] = None
    format: OutputFormat = OutputFormat.CSV

    def get(self, key: str, default=None):
        return self.parameters.get(key, default)

    def eraser_config(self) -> EraserConfig:
        p = self.parameters
        return EraserConfig.from_bins(p["k"], p["d"], p["theta_bins"], p["mode"], p["theta_max"])

    def wheeler_config(self) -> WheelerConfig:
        p = self.parameters
        return WheelerConfig.from_geometry(
            p["k"],
            p["d"],
            p["screen_distance"],
            symmetric_grid(p["theta_bins"], p["theta_max"]),
            p["telescope_angle"],
            p["acceptance_halfwidth"],
        )


def _validate_parameters(experiment: Experiment, params: Dict[str, Any]):
    """Reject values that would violate a module invariant"""
    for key in ("k", "d", "screen_distance", "acceptance_halfwidth"):
        if params.get(key) is not None and params[key] <= 0:
            raise ConfigError(f"config.{key}", f"must be positive, got {params[key]}")
    if "k" in params and not math.isfinite(params["k"] * params["d"]):
        raise ConfigError("config.k", f"k * d overflows: k={params['k']}, d={params['d']}")
    if "theta_bins" in params:
        try:
            symmetric_grid(params["theta_bins"], params["theta_max"])
        except ValueError as e:
            path = "config.theta_bins" if params["theta_bins"] < 2 else "config.theta_max"
            raise ConfigError(path, str(e))
    for key in ("trials", "workers", "max_len"):
        if key in params and params[key] < (0 if key == "max_len" else 1):
            raise ConfigError(f"config.{key}", f"out of range: {params[key]}")
    if "max_dims" in params and min(params["max_dims"]) < 2:
        raise ConfigError("config.max_dims", "each dimension must be at least 2")
    if "max_dims" in params and params["max_dims"][0] * params["max_dims"][1] > MAX_SPACE_DIM:
        raise ConfigError(
            "config.max_dims",
            f"state space too large: {params['max_dims']} exceeds dimension {MAX_SPACE_DIM}",
        )
    if "max_len" in params and 2 * params["max_len"] > MAX_EVENTS:
        raise ConfigError(
            "config.max_len",
            f"state space too large: two sequences of {params['max_len']} exceed {MAX_EVENTS} events",
        )

    # build the module configs once so their own invariants are checked up front
    try:
        if experiment is Experiment.ERASER:
            RunConfig(experiment, params).eraser_config()
        elif experiment is Experiment.WHEELER:
            RunConfig(experiment, params).wheeler_config()
    except (GeometryError, ValueError) as e:
        raise ConfigError("config", str(e))


def config_from_dict(data: Mapping[str, Any], overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
    """Validate a key/value tree, with ``overrides`` (flag values) taking precedence"""
    if not isinstance(data, Mapping):
        raise ConfigError("config", "expected a JSON object at the top level")
    merged = dict(data)
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value

    if "experiment" not in merged:
        raise ConfigError("config.experiment", "missing required key")
    try:
        experiment = Experiment(merged.pop("experiment"))
    except ValueError as e:
        choices = ", ".join(x.value for x in Experiment)
        raise ConfigError("config.experiment", f"{e} (expected one of {choices})")

    defaults = DEFAULT_CONFIG[experiment]
    allowed = set(COMMON_DEFAULTS) | set(defaults)
    unknown = sorted(set(merged) - allowed)
    if unknown:
        raise ConfigError(f"config.{unknown[0]}", f"unknown key for experiment {experiment.value!r}")

    params = {}
    for key, default in defaults.items():
        value = merged.get(key, default)
        params[key] = _check_kind(f"config.{key}", value, SCHEMA[key])
    _validate_parameters(experiment, params)

    seed = merged.get("seed", COMMON_DEFAULTS["seed"])
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError("config.seed", f"expected a nonnegative integer, got {seed!r}")

    output_path = merged.get("output_path")
    if output_path is not None and not isinstance(output_path, (str, Path)):
        raise ConfigError("config.output_path", f"expected a path string, got {output_path!r}")

    fmt = merged.get("format") or os.getenv(FORMAT_ENV_VAR) or OutputFormat.CSV.value
    try:
        fmt = OutputFormat(fmt)
    except ValueError:
        raise ConfigError("config.format", f"invalid value {fmt!r} (expected csv or json)")

    config = RunConfig(
        experiment=experiment,
        parameters=MappingProxyType(params),
        seed=seed,
        output_path=Path(output_path) if output_path is not None else None,
        format=fmt,
    )
    logger.debug("Parsed %s config: %s", experiment.value, dict(params))
    return config


def parse_config(text: str, overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
    """Parse JSON config text into a validated RunConfig"""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError("config", f"not valid JSON: {e}")
    return config_from_dict(data, overrides)


def load_config(path, overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
    """Read and parse a config file"""
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ConfigError("config", f"cannot read {path}: {e}")
    return parse_config(text, overrides)
