#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Mode Model module
Defines the transverse sampling grid and sampled mode fields
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from errors import ConfigError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ModeGrid:
    """
    Square Cartesian grid centred on the beam axis

    Attributes:
        half_width (float): Half side of the square, in units of w_s
        n_points (int): Points per axis; odd so the origin is a node
    """

    half_width: float = 6.0
    n_points: int = 301

    def __post_init__(self):
        if self.half_width <= 0:
            raise ConfigError(f"Grid half-width must be positive, got {self.half_width}")
        if self.n_points < 3 or self.n_points % 2 == 0:
            raise ConfigError(f"Grid needs an odd number of points >= 3, got {self.n_points}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / (self.n_points - 1)

    @cached_property
    def axis(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.n_points)

    @cached_property
    def x(self) -> np.ndarray:
        return np.meshgrid(self.axis, self.axis, indexing="ij")[0]

    @cached_property
    def y(self) -> np.ndarray:
        return np.meshgrid(self.axis, self.axis, indexing="ij")[1]

    @property
    def r(self) -> np.ndarray:
        return np.hypot(self.x, self.y)

    @property
    def phi(self) -> np.ndarray:
        return np.arctan2(self.y, self.x)

    def __str__(self):
        return f"ModeGrid(half_width={self.half_width}, n_points={self.n_points})"


@dataclass
class ModeField:
    """
    Complex transverse field sampled on a ModeGrid

    Attributes:
        samples (np.ndarray): Complex samples indexed [i_x, i_y]
        grid (ModeGrid): Sampling grid
        waist (float): Beam radius the mode was built with
        label (str): Mode name, e.g. "G", "L+1", "HG10(0.3)"
    """

    samples: np.ndarray
    grid: ModeGrid
    waist: float = 1.0
    label: str = ""

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=complex)
        expected = (self.grid.n_points, self.grid.n_points)
        if self.samples.shape != expected:
            raise ConfigError(f"Mode samples have shape {self.samples.shape}, grid needs {expected}")

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2) * self.grid.spacing ** 2)

    def normalized(self) -> "ModeField":
        return ModeField(self.samples / np.sqrt(self.norm), self.grid, self.waist, self.label)

    def __str__(self):
        return f"ModeField(label={self.label}, waist={self.waist}, grid={self.grid})"
