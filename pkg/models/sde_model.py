#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
SDE Model module
Defines data models for stochastic models, trajectory settings and ensemble results
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from errors import ConfigError

logger = logging.getLogger(__name__)

ArrayFn = Callable[[np.ndarray, float], np.ndarray]


@dataclass(frozen=True)
class SdeModel:
    """
    Class describing a complex Ito SDE dX = a(X, t) dt + B(X, t) dW

    Every callable works on a leading batch axis: states have shape (..., dim),
    the coupling matrix has shape (..., dim, n_noises).

    Attributes:
        name (str): Model name used in log and error messages
        dim (int): Number of complex state variables
        n_noises (int): Number of independent real Wiener channels
        drift (ArrayFn): Ito drift a(x, t)
        noise_coupling (ArrayFn): Coupling matrix B(x, t)
        correction (Optional[ArrayFn]): Analytic value of 1/2 sum_k (dB_k/dx) B_k,
            finite differences are used when missing
        noise_product (Optional[Callable]): B(x, t) @ dW without building B
        linear_propagator (Optional[Callable]): Exact flow x -> exp(L h) x of a linear
            part that drift leaves out, used in a Strang split
        time_unit (float): Model time per engine time unit (engine time is 1/gamma_s)
    """

    name: str
    dim: int
    n_noises: int
    drift: ArrayFn
    noise_coupling: ArrayFn
    correction: Optional[ArrayFn] = None
    noise_product: Optional[Callable[[np.ndarray, float, np.ndarray], np.ndarray]] = None
    linear_propagator: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    time_unit: float = 1.0

    def __post_init__(self):
        """Validate dimensions after initialization"""
        if self.dim < 1:
            raise ConfigError(f"Model '{self.name}' needs dim >= 1, got {self.dim}")
        if self.n_noises < 0:
            raise ConfigError(f"Model '{self.name}' needs n_noises >= 0, got {self.n_noises}")
        if self.time_unit <= 0:
            raise ConfigError(f"Model '{self.name}' needs a positive time unit")

    def __str__(self):
        """String representation for logging and debugging"""
        return f"SdeModel(name={self.name}, dim={self.dim}, n_noises={self.n_noises})"


@dataclass
class TrajectoryConfig:
    """
    Class holding the time stepping of one ensemble run

    Attributes:
        dt (float): Step in units of 1/gamma_s
        t_end (float): Horizon in units of 1/gamma_s
        record_stride (int): Record every record_stride steps
        seed (int): Root seed of the per-trajectory streams
        midpoint_iterations (int): Fixed-point passes of the midpoint solve
    """

    dt: float = 1e-2
    t_end: float = 10.0
    record_stride: int = 1
    seed: int = 0
    midpoint_iterations: int = 3

    def __post_init__(self):
        """Validate parameters after initialization"""
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if self.t_end < self.dt:
            raise ConfigError(f"t_end={self.t_end} is shorter than one step dt={self.dt}")
        if self.record_stride < 1:
            raise ConfigError(f"record_stride must be >= 1, got {self.record_stride}")
        if self.midpoint_iterations < 1:
            logger.warning(f"midpoint_iterations {self.midpoint_iterations} too low, setting to 1")
            self.midpoint_iterations = 1
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")

    @property
    def n_steps(self) -> int:
        return int(np.floor(self.t_end / self.dt + 1e-9))

    @property
    def n_records(self) -> int:
        return self.n_steps // self.record_stride + 1

    @property
    def record_interval(self) -> float:
        return self.dt * self.record_stride

    def time_grid(self) -> np.ndarray:
        """Recorded times in units of 1/gamma_s"""
        return np.arange(self.n_records) * self.record_interval

    def __str__(self):
        """String representation for logging and debugging"""
        return (
            f"TrajectoryConfig(dt={self.dt}, t_end={self.t_end}, "
            f"stride={self.record_stride}, seed={self.seed})"
        )


@dataclass
class EnsembleResult:
    """
    Class holding the recorded observables of an ensemble run

    Attributes:
        records (np.ndarray): Complex array (n_traj, n_obs, n_records); NaN rows
            mark diverged trajectories
        time_grid (np.ndarray): Shared record times in units of 1/gamma_s
        names (List[str]): Observable names, in record order
        diverged (np.ndarray): Boolean mask over trajectories
        model_name (str): Name of the integrated model
        dt (float): Step used for the run
    """

    records: np.ndarray
    time_grid: np.ndarray
    names: List[str]
    diverged: np.ndarray = None
    model_name: str = ""
    dt: float = 0.0

    def __post_init__(self):
        if self.diverged is None:
            self.diverged = np.zeros(self.records.shape[0], dtype=bool)

    @property
    def n_traj(self) -> int:
        return self.records.shape[0]

    @property
    def n_diverged(self) -> int:
        return int(np.count_nonzero(self.diverged))

    @property
    def record_interval(self) -> float:
        return float(self.time_grid[1] - self.time_grid[0]) if len(self.time_grid) > 1 else 0.0

    def index_of(self, quad) -> int:
        """Resolve an observable given by name or position"""
        if isinstance(quad, str):
            if quad not in self.names:
                raise ConfigError(f"Unknown observable '{quad}', recorded: {self.names}")
            return self.names.index(quad)
        if not 0 <= int(quad) < len(self.names):
            raise ConfigError(f"Observable index {quad} out of range")
        return int(quad)

    def series(self, quad) -> np.ndarray:
        """Recorded series (n_valid, n_records) of the surviving trajectories"""
        return self.records[~self.diverged, self.index_of(quad), :]

    def mean(self, quad) -> np.ndarray:
        return np.mean(self.series(quad), axis=0)

    def __str__(self):
        return (
            f"EnsembleResult(model={self.model_name}, n_traj={self.n_traj}, "
            f"observables={self.names}, diverged={self.n_diverged})"
        )


@dataclass
class SpectrumEstimate:
    """
    Class holding a noise spectrum in shot-noise units (V = 1 is vacuum)

    Attributes:
        omega_grid (np.ndarray): Noise frequencies in units of gamma_s
        values (np.ndarray): V(omega)
        stderr (np.ndarray): Standard error over trajectories
        n_traj (int): Trajectories entering the average
    """

    omega_grid: np.ndarray
    values: np.ndarray
    stderr: np.ndarray = field(default=None)
    n_traj: int = 0

    def __post_init__(self):
        self.omega_grid = np.asarray(self.omega_grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.stderr is None:
            self.stderr = np.zeros_like(self.values)
        if not np.all(np.isfinite(self.values)):
            logger.warning("Spectrum estimate contains non-finite values")

    def in_db(self) -> np.ndarray:
        """V[dB] = 10 log10 V"""
        with np.errstate(divide="ignore"):
            return 10.0 * np.log10(self.values)

    def __str__(self):
        return f"SpectrumEstimate(points={len(self.omega_grid)}, n_traj={self.n_traj})"
