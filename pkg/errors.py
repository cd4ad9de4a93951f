#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Errors module
Exception hierarchy shared by the simulation modules and the command line
"""

from typing import List, Optional


class SqueezingError(Exception):
    """Base class for every error raised by this package"""
    exit_code = 1


class ConfigError(SqueezingError, ValueError):
    """Invalid parameters, unknown configuration keys or unparsable values"""
    exit_code = 2


class NumericalError(SqueezingError):
    """A computation failed to produce a trustworthy number"""
    exit_code = 3


class DivergenceError(NumericalError):
    """Too many (or all) stochastic trajectories escaped to non-finite values"""


class ConvergenceError(NumericalError):
    """
    An iterative solver did not converge

    Attributes:
        residuals (List[float]): Residual norm after each iteration, when available
    """

    def __init__(self, message: str, residuals: Optional[List[float]] = None):
        super().__init__(message)
        self.residuals = list(residuals or [])


class SeriesTooShortError(NumericalError):
    """A recorded time series is shorter than the requested statistic needs"""


class TruncationError(NumericalError):
    """Probability leaked onto the boundary of a truncated Fock space"""


class DefectiveSpectrumError(NumericalError):
    """Left and right eigenvectors could not be paired into a biorthonormal set"""


class GridError(NumericalError):
    """Fields live on different grids, or the grid does not resolve a length"""


class UndefinedOrientationError(NumericalError):
    """The orientation of a pattern is undefined because an amplitude vanishes"""
