"""Layered job configuration.

Precedence, lowest first: built-in defaults, the user defaults file
(``defaults.json`` in the app config dir), ``--config <path>``, then
command-line flags. Both JSON files share one schema::

    {"propagation": {...}, "simulate": {...}, "sweep": {...}, ...}

A file written by ``JobConfig.save`` (``{"command", "params",
"propagation"}``) is accepted by ``--config`` as well.
"""

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from superlz.app_dirs import get_user_defaults_path
from superlz.diagnostics import logger
from superlz.errors import InvalidArgumentError
from superlz.propagator import PropagationConfig

WORKERS_ENV = "SUPERLZ_WORKERS"

COMMAND_DEFAULTS = {
    "simulate": {
        "model": "generalized-lz",
        "delta0": None,
        "alpha": None,
        "beta": None,
        "a": None,
        "b": None,
        "reverse": False,
        "trajectory": None,
        "json": None,
    },
    "sweep": {
        "alpha_range": "0.5:10:20",
        "beta_range": "-10:20:31",
        "delta0": 2.0,
        "compare": "lz,dk,sl",
        "workers": None,
        "timings": False,
        "boundary_alpha": None,
        "out": ".",
    },
    "landscape-gen": {
        "seed": 0,
        "n_modes": 64,
        "corr_length": 20.0,
        "mean_coupling": 4.0,
        "extent": 200.0,
        "n_samples": 2001,
        "out": "landscape.csv",
    },
    "shuttle-sim": {
        "landscape": None,
        "interpolation": "monotone-cubic",
        "schedule": "constant",
        "schedule_file": None,
        "avg_velocity": 10.0,
        "v_min": None,
        "v_max": None,
        "gap_exponent": 2.0,
        "prominence": 0.05,
        "frame": "rotated",
        "json": None,
    },
    "shuttle-schedule": {
        "landscape": None,
        "interpolation": "monotone-cubic",
        "schedule": "constant",
        "avg_velocity": 10.0,
        "v_min": None,
        "v_max": None,
        "gap_exponent": 2.0,
        "out": "schedule.csv",
    },
}


def default_workers():
    """Worker count from ``SUPERLZ_WORKERS``, else min(cpu count, 8)."""
    raw = os.environ.get(WORKERS_ENV)
    if raw:
        try:
            value = int(raw)
        except ValueError:
            raise InvalidArgumentError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
        if value < 1:
            raise InvalidArgumentError(f"{WORKERS_ENV} must be >= 1, got {value}")
        return value
    return min(os.cpu_count() or 1, 8)


def read_json(path):
    path = Path(path)
    with open(path, encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise InvalidArgumentError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from None
    if not isinstance(data, dict):
        raise InvalidArgumentError(f"{path}: expected a JSON object")
    return data


def _layer(data, command):
    """(params, propagation) contributed by one config document."""
    if "command" in data and "params" in data:
        if data["command"] != command:
            raise InvalidArgumentError(
                f"config is for command {data['command']!r}, not {command!r}"
            )
        return dict(data["params"]), dict(data.get("propagation", {}))
    return dict(data.get(command, {})), dict(data.get("propagation", {}))


@dataclass(frozen=True)
class JobConfig:
    command: str
    params: dict = field(default_factory=dict)
    propagation: PropagationConfig = field(default_factory=PropagationConfig)

    def __post_init__(self):
        if self.command not in COMMAND_DEFAULTS:
            raise InvalidArgumentError(f"unknown command {self.command!r}")
        unknown = set(self.params) - set(COMMAND_DEFAULTS[self.command])
        if unknown:
            raise InvalidArgumentError(
                f"unknown {self.command} settings: {', '.join(sorted(unknown))}"
            )

    def get(self, key):
        return self.params.get(key)

    def to_dict(self):
        return {
            "command": self.command,
            "params": dict(self.params),
            "propagation": self.propagation.to_dict(),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            command=data["command"],
            params=dict(data.get("params", {})),
            propagation=PropagationConfig.from_dict(data.get("propagation", {})),
        )

    def save(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")


def resolve(command, config_path=None, overrides=None, propagation_overrides=None, use_user_defaults=True):
    """Merge defaults, user defaults, ``config_path`` and overrides.

    ``None`` values in the override dicts mean "not given on the command line".
    """
    params = dict(COMMAND_DEFAULTS[command])
    propagation = {}

    layers = []
    if use_user_defaults:
        try:
            user_path = get_user_defaults_path()
        except OSError:
            user_path = None
        if user_path is not None and user_path.exists():
            logger.debug(f"Reading user defaults from {user_path}")
            layers.append(read_json(user_path))
    if config_path is not None:
        logger.debug(f"Reading config from {config_path}")
        layers.append(read_json(config_path))

    for data in layers:
        layer_params, layer_propagation = _layer(data, command)
        params.update(layer_params)
        propagation.update(layer_propagation)

    params.update({k: v for k, v in (overrides or {}).items() if v is not None})
    propagation.update({k: v for k, v in (propagation_overrides or {}).items() if v is not None})

    return JobConfig(command, params, PropagationConfig.from_dict(propagation))
