"""Run configuration (TOML).

Example::

    [model]
    n_levels = 101
    bandwidth = 1.0
    gamma = 1.0
    grid_offset = 0.0     # default
    seed = 0              # default

    [model.coupling]
    kind = "constant"     # or "random"
    u = 0.1               # constant value (kind = "constant")
    # std = 0.1           # standard deviation (kind = "random")
    # distribution = "uniform"   # or "gaussian"

    [rc]                  # optional: explicit real continuum for method "full"
    m_levels = 4001
    bandwidth = 40.0

    [time]
    t_max = 100.0
    n_points = 2000       # default
    spacing = "linear"    # or "log"
    # t_min = 0.01        # first non-zero point of a log grid

    [solver]
    method = "spectral"   # spectral | ode | full | all
    rtol = 1e-9
    atol = 1e-12

    [ensemble]            # optional
    n_realizations = 100
    # window = [5.0, 80.0]
    # method = "spectral"

    [fit]                 # optional
    model = "exponential" # exponential | damped_cosine | sinc
    # window = [1.0, 100.0]

    [output]
    directory = "out"
    formats = ["csv", "json"]

Unknown sections or keys raise :class:`ConfigError` naming the offending key.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError, ParameterError
from .model import CouplingSpec, ModelParams

__all__ = ["RunConfig", "load_config", "parse_config", "DEFAULTS"]

_REQUIRED = object()

DEFAULTS: dict = {
    "model": {
        "n_levels": _REQUIRED,
        "bandwidth": _REQUIRED,
        "gamma": _REQUIRED,
        "grid_offset": 0.0,
        "seed": 0,
    },
    "coupling": {"kind": "constant", "u": None, "std": None, "distribution": "uniform"},
    "rc": {"m_levels": _REQUIRED, "bandwidth": _REQUIRED},
    "time": {"t_max": 100.0, "n_points": 2000, "spacing": "linear", "t_min": None},
    "solver": {"method": "spectral", "rtol": 1e-9, "atol": 1e-12},
    "ensemble": {"n_realizations": 100, "window": None, "method": "spectral"},
    "fit": {"model": "exponential", "window": None},
    "output": {"directory": "out", "formats": ["csv", "json"]},
}

_CHOICES = {
    ("coupling", "kind"): ("constant", "random"),
    ("coupling", "distribution"): ("uniform", "gaussian"),
    ("time", "spacing"): ("linear", "log"),
    ("solver", "method"): ("spectral", "ode", "full", "all"),
    ("ensemble", "method"): ("spectral", "ode"),
    ("fit", "model"): ("exponential", "damped_cosine", "sinc"),
}


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams
    rc: Optional[dict]
    time: dict
    solver: dict
    ensemble: Optional[dict]
    fit: Optional[dict]
    output: dict
    echo: dict

    def with_overrides(self, seed: Optional[int] = None, out: Optional[str] = None, method: Optional[str] = None) -> "RunConfig":
        raw = _deep_copy(self.echo)
        if seed is not None:
            raw["model"]["seed"] = seed
        if out is not None:
            raw["output"]["directory"] = str(out)
        if method is not None:
            raw["solver"]["method"] = method
        return parse_config(raw)


def _deep_copy(d):
    if isinstance(d, dict):
        return {k: _deep_copy(v) for k, v in d.items()}
    if isinstance(d, list):
        return [_deep_copy(v) for v in d]
    return d


def _section(raw: dict, name: str, where: str) -> dict:
    given = raw.get(name, {})
    if not isinstance(given, dict):
        raise ConfigError(f"{where} must be a table")
    defaults = DEFAULTS[name]
    out = {}
    for key in given:
        if key not in defaults and not (name == "model" and key == "coupling"):
            raise ConfigError(f"unknown key '{where}.{key}'")
    for key, default in defaults.items():
        if key in given:
            value = given[key]
        elif default is _REQUIRED:
            raise ConfigError(f"missing required key '{where}.{key}'")
        else:
            value = _deep_copy(default)
        choices = _CHOICES.get((name, key))
        if choices and value not in choices:
            raise ConfigError(f"'{where}.{key}' must be one of {choices}, got {value!r}")
        out[key] = value
    return out


def _number(section: dict, key: str, where: str, kind=float):
    value = section[key]
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"'{where}.{key}' must be a number, got {value!r}")
    if kind is int and int(value) != value:
        raise ConfigError(f"'{where}.{key}' must be an integer, got {value!r}")
    return kind(value)


def _window(value, where: str):
    if value is None:
        return None
    if not (isinstance(value, list) and len(value) == 2 and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)):
        raise ConfigError(f"'{where}' must be a two-element list of numbers")
    return [float(value[0]), float(value[1])]


def parse_config(raw: dict) -> RunConfig:
    """Validate a configuration mapping and fill in defaults."""
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a table")
    for key in raw:
        if key not in DEFAULTS or key == "coupling":
            raise ConfigError(f"unknown section '{key}'")
    if "model" not in raw:
        raise ConfigError("missing required section 'model'")

    model = _section(raw, "model", "model")
    coupling = _section({"coupling": raw["model"].get("coupling", {})}, "coupling", "model.coupling")
    for key in ("n_levels", "seed"):
        model[key] = _number(model, key, "model", int)
    for key in ("bandwidth", "gamma", "grid_offset"):
        model[key] = _number(model, key, "model")
    value_key = "u" if coupling["kind"] == "constant" else "std"
    other_key = "std" if value_key == "u" else "u"
    if coupling[value_key] is None:
        raise ConfigError(f"missing required key 'model.coupling.{value_key}' for kind {coupling['kind']!r}")
    if coupling[other_key] is not None:
        raise ConfigError(f"unknown key 'model.coupling.{other_key}' for kind {coupling['kind']!r}")
    coupling[value_key] = _number(coupling, value_key, "model.coupling")
    try:
        spec = CouplingSpec(coupling["kind"], coupling[value_key], coupling["distribution"])
        params = ModelParams(
            n_levels=model["n_levels"],
            bandwidth=model["bandwidth"],
            gamma=model["gamma"],
            coupling=spec,
            grid_offset=model["grid_offset"],
            seed=model["seed"],
        )
    except ParameterError as exc:
        raise ConfigError(f"model: {exc}") from exc

    rc = None
    if "rc" in raw:
        rc = _section(raw, "rc", "rc")
        rc["m_levels"] = _number(rc, "m_levels", "rc", int)
        rc["bandwidth"] = _number(rc, "bandwidth", "rc")

    time = _section(raw, "time", "time")
    time["t_max"] = _number(time, "t_max", "time")
    time["n_points"] = _number(time, "n_points", "time", int)
    time["t_min"] = _number(time, "t_min", "time")
    if time["t_max"] <= 0 or time["n_points"] < 2:
        raise ConfigError("'time.t_max' must be positive and 'time.n_points' >= 2")

    solver = _section(raw, "solver", "solver")
    solver["rtol"] = _number(solver, "rtol", "solver")
    solver["atol"] = _number(solver, "atol", "solver")

    ensemble = None
    if "ensemble" in raw:
        ensemble = _section(raw, "ensemble", "ensemble")
        ensemble["n_realizations"] = _number(ensemble, "n_realizations", "ensemble", int)
        ensemble["window"] = _window(ensemble["window"], "ensemble.window")

    fit = None
    if "fit" in raw:
        fit = _section(raw, "fit", "fit")
        fit["window"] = _window(fit["window"], "fit.window")

    output = _section(raw, "output", "output")
    formats = output["formats"]
    if not isinstance(formats, list) or not set(formats) <= {"csv", "json"}:
        raise ConfigError("'output.formats' must be a list drawn from ['csv', 'json']")
    if not isinstance(output["directory"], str):
        raise ConfigError("'output.directory' must be a string")

    echo = {
        "model": dict(model, coupling={k: v for k, v in coupling.items() if v is not None}),
        "time": time,
        "solver": solver,
        "output": output,
    }
    if rc is not None:
        echo["rc"] = rc
    if ensemble is not None:
        echo["ensemble"] = ensemble
    if fit is not None:
        echo["fit"] = fit
    return RunConfig(params, rc, time, solver, ensemble, fit, output, _deep_copy(echo))


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parse_config(raw)
