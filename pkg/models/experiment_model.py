#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Experiment Model module
Defines experiment configurations, their default parameter tables and the
parsing of flat key=value overrides
"""

import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from errors import ConfigError

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "NCSQ_OUTPUT_DIR"

EXPERIMENT_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "dopo-spectrum": {
        "sigma": float(np.sqrt(2.0)),
        "d": 1e-6,
        "gamma_p": 1.0,
        "gamma_s": 1.0,
        "n_traj": 2000,
        "dt": 0.01,
        "t_end": 110.0,
        "t_transient": 10.0,
        "record_stride": 5,
        "segment_time": 25.0,
        "omega": [0.0, 0.5, 1.0, 2.0, 4.0],
        "batch_size": 256,
        "workers": 1,
    },
    "dopo-orientation": {
        "sigma": 2.0,
        "d": 1e-6,
        "gamma_p": 1.0,
        "gamma_s": 1.0,
        "n_traj": 500,
        "dt": 0.01,
        "t_end": 100.0,
        "record_stride": 50,
        "t_fit_min": 5.0,
        "batch_size": 256,
        "workers": 1,
    },
    "dopo-fixed-lo": {
        "sigma": float(np.sqrt(2.0)),
        "d": 1e-6,
        "phi_deg": [60.0, 70.0, 80.0, 85.0, 88.0, 90.0],
        "omega_max": 10.0,
        "mc": 0,
        "mc_d": 1e-3,
        "n_traj": 800,
        "dt": 0.01,
        "record_stride": 10,
        "t_transient": 10.0,
        "mc_windows": 6,
        "batch_size": 256,
        "workers": 1,
    },
    "dopo-seeded": {
        "sigma": [1.5, 2.0, 4.0],
        "I_s": [1e-4, 1e-3, 1e-2, 0.1, 1.0],
        "d": 1e-6,
        "gamma_p": 1.0,
        "gamma_s": 1.0,
        "ode_check": 1,
    },
    "fwm-region": {
        "delta_min": 0.0,
        "delta_max": 5.0,
        "n_delta": 20,
        "rho2_min": 0.05,
        "rho2_max": 2.5,
        "n_rho2": 20,
        "gamma_s": 1.0,
        "g": 1.0,
    },
    "spatial-diffusion": {
        "gamma_p": 0.0,
        "gamma_s": 1.0,
        "delta_p": 10.0,
        "delta_s": -1.0,
        "l_p": 1.0,
        "l_s": 1.0,
        "chi": 0.05,
        "Ep": 250.0,
        "L_domain": float(2.0 * np.pi),
        "n_grid": 64,
        "ansatz": "stripe",
        "n_traj": 500,
        "dt": 0.01,
        "t_end": 40.0,
        "record_stride": 10,
        "t_fit_min": 2.0,
        "t_transient": 2.0,
        "segment_time": 10.0,
        "match_tol": 0.25,
        "omega": [0.0, 0.5, 1.0, 2.0],
        "batch_size": 250,
        "workers": 1,
    },
    "jcm-variance": {
        "N": list(range(21)),
        "n_times": 32,
        "chi": 1.0,
        "phi0": 0.0,
        "numeric": 1,
        "N_large": 100,
    },
    "modes-check": {
        "w_s": 1.0,
        "psi": 0.3,
        "half_width": 6.0,
        "n_points": 301,
        "eps": 1e-4,
        "export": 1,
    },
}


def parse_value(text: str, default: Any, key: str = "") -> Any:
    """
    Convert an override string by the type of its default

    Lists accept "a,b,c" and inclusive ranges "lo..hi" or "lo..hi:step".

    Raises:
        ConfigError: if the text does not parse
    """
    text = str(text).strip()
    try:
        if isinstance(default, list):
            element = default[0] if default else 0.0
            if ".." in text:
                bounds, _, step = text.partition(":")
                lo, hi = (parse_value(b, element, key) for b in bounds.split(".."))
                step = parse_value(step, element, key) if step else type(element)(1)
                if step <= 0:
                    raise ConfigError(f"Range step for '{key}' must be positive")
                count = int(np.floor((hi - lo) / step + 1e-9)) + 1
                return [type(element)(lo + i * step) for i in range(max(count, 0))]
            return [parse_value(v, element, key) for v in text.split(",") if v.strip()]
        if isinstance(default, bool):
            return text.lower() in ("1", "true", "yes", "on")
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
        return text
    except ValueError as e:
        raise ConfigError(f"Cannot parse {key}={text!r} as {type(default).__name__}") from e


def format_value(value: Any) -> str:
    """Canonical text of a resolved value, used in CSV headers"""
    if isinstance(value, list):
        return ",".join(format_value(v) for v in value)
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


@dataclass
class ExperimentConfig:
    """
    Class describing one experiment run

    Attributes:
        experiment (str): Experiment id
        overrides (Dict[str, str]): Flat key=value overrides
        seed (int): Master seed of all random streams
        output (Optional[str]): CSV path; derived from the output directory when None
    """

    experiment: str
    overrides: Dict[str, str] = field(default_factory=dict)
    seed: int = 0
    output: Optional[str] = None

    def __post_init__(self):
        """Validate the experiment id and override keys"""
        if self.experiment not in EXPERIMENT_DEFAULTS:
            raise ConfigError(
                f"Unknown experiment '{self.experiment}', choose from {sorted(EXPERIMENT_DEFAULTS)}"
            )
        unknown = sorted(set(self.overrides) - set(EXPERIMENT_DEFAULTS[self.experiment]))
        if unknown:
            raise ConfigError(f"Unknown keys for {self.experiment}: {', '.join(unknown)}")
        if self.seed < 0:
            raise ConfigError(f"Seed must be non-negative, got {self.seed}")

    @classmethod
    def from_pairs(cls, experiment: str, pairs: List[str], **kwargs) -> "ExperimentConfig":
        """Build a config from 'key=value' tokens"""
        overrides = {}
        for pair in pairs:
            key, sep, value = pair.partition("=")
            if not sep or not key.strip():
                raise ConfigError(f"Expected key=value, got '{pair}'")
            overrides[key.strip()] = value.strip()
        return cls(experiment=experiment, overrides=overrides, **kwargs)

    def resolve(self) -> Dict[str, Any]:
        """Defaults merged with the converted overrides, plus the seed"""
        resolved = dict(EXPERIMENT_DEFAULTS[self.experiment])
        for key, text in self.overrides.items():
            resolved[key] = parse_value(text, resolved[key], key)
        resolved["seed"] = self.seed
        return resolved

    def output_path(self) -> str:
        if self.output:
            return self.output
        directory = os.environ.get(OUTPUT_DIR_ENV, ".")
        return os.path.join(directory, f"{self.experiment}_seed{self.seed}.csv")

    def __str__(self):
        return f"ExperimentConfig({self.experiment}, overrides={self.overrides}, seed={self.seed})"
