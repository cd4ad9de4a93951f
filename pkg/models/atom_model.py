#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Atom Model module
Defines the truncated Fock basis, atom-field states and phase-difference
operators of the single-photon-pair cavity model
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Tuple

import numpy as np
from scipy import sparse

from errors import ConfigError

logger = logging.getLogger(__name__)

LEVELS = ("e", "f")


@dataclass(frozen=True)
class FockBasis:
    """
    Two-mode photon basis times the two atomic levels

    Field states |n_R, n_L> with n_R + n_L <= 2 n_max are ordered by total
    photon number n and then by n_R, so each total-number block is contiguous.
    Full index = level * field_size + field index.

    Attributes:
        n_max (int): Truncation, photons per mode kept for complete blocks
    """

    n_max: int

    def __post_init__(self):
        if self.n_max < 1:
            raise ConfigError(f"n_max must be >= 1, got {self.n_max}")

    @property
    def max_total(self) -> int:
        return 2 * self.n_max

    @property
    def field_size(self) -> int:
        return (self.max_total + 1) * (self.max_total + 2) // 2

    @property
    def size(self) -> int:
        return 2 * self.field_size

    @staticmethod
    def block_offset(n: int) -> int:
        return n * (n + 1) // 2

    def field_index(self, n_R: int, n_L: int) -> int:
        if n_R < 0 or n_L < 0 or n_R + n_L > self.max_total:
            raise ConfigError(f"|{n_R}, {n_L}> lies outside the truncated basis (n_max={self.n_max})")
        return self.block_offset(n_R + n_L) + n_R

    def index(self, level: str, n_R: int, n_L: int) -> int:
        if level not in LEVELS:
            raise ConfigError(f"Atomic level must be one of {LEVELS}, got '{level}'")
        return LEVELS.index(level) * self.field_size + self.field_index(n_R, n_L)

    @cached_property
    def field_numbers(self) -> Tuple[np.ndarray, np.ndarray]:
        """(n_R, n_L) per field index"""
        n_R, n_L = [], []
        for n in range(self.max_total + 1):
            for m in range(n + 1):
                n_R.append(m)
                n_L.append(n - m)
        return np.array(n_R), np.array(n_L)

    @cached_property
    def totals(self) -> np.ndarray:
        """Total photon number per full index"""
        n_R, n_L = self.field_numbers
        return np.tile(n_R + n_L, 2)

    def __str__(self):
        return f"FockBasis(n_max={self.n_max}, size={self.size})"


@dataclass
class TwoModeAtomState:
    """
    Pure state of the atom and the two circularly polarized modes

    Attributes:
        amplitudes (np.ndarray): Complex amplitudes over the basis
        basis (FockBasis): Truncated basis
    """

    amplitudes: np.ndarray
    basis: FockBasis

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (self.basis.size,):
            raise ConfigError(
                f"State has {self.amplitudes.shape} amplitudes, basis needs {self.basis.size}"
            )

    @classmethod
    def basis_state(cls, basis: FockBasis, level: str, n_R: int, n_L: int) -> "TwoModeAtomState":
        amps = np.zeros(basis.size, dtype=complex)
        amps[basis.index(level, n_R, n_L)] = 1.0
        return cls(amps, basis)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def weight_above(self, total: int) -> float:
        """Probability carried by states with more than `total` photons"""
        return float(np.sum(np.abs(self.amplitudes[self.basis.totals > total]) ** 2))

    def amplitude(self, level: str, n_R: int, n_L: int) -> complex:
        return complex(self.amplitudes[self.basis.index(level, n_R, n_L)])

    def __str__(self):
        return f"TwoModeAtomState({self.basis}, norm={self.norm:.12f})"


@dataclass
class PhaseDiffOperator:
    """
    Function of the half phase-difference operator, one block per total photon number

    Attributes:
        blocks (Dict[int, np.ndarray]): (n+1)x(n+1) matrix of each total n
        phi0 (float): Reference phase of the vacuum modes
        n_max (int): Truncation of the basis the blocks span
    """

    blocks: Dict[int, np.ndarray]
    phi0: float = 0.0
    n_max: int = 1
    _matrix: sparse.csr_matrix = field(default=None, init=False, repr=False)

    def __post_init__(self):
        for n, block in self.blocks.items():
            if block.shape != (n + 1, n + 1):
                raise ConfigError(f"Block of total {n} has shape {block.shape}")

    def block(self, n: int) -> np.ndarray:
        return self.blocks[n]

    def field_matrix(self) -> sparse.csr_matrix:
        """Block-diagonal sparse matrix on the field basis"""
        if self._matrix is None:
            self._matrix = sparse.block_diag(
                [self.blocks[n] for n in range(2 * self.n_max + 1)], format="csr"
            )
        return self._matrix

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return all(np.max(np.abs(b - b.conj().T)) <= tol for b in self.blocks.values())

    def __str__(self):
        return f"PhaseDiffOperator(n_max={self.n_max}, phi0={self.phi0:.6g}, blocks={len(self.blocks)})"
