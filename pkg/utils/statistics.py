#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Statistics module
Handles regression fits and path post-processing shared by the simulations
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from sklearn.linear_model import LinearRegression

from errors import SeriesTooShortError

logger = logging.getLogger(__name__)


@dataclass
class LinearFit:
    """
    Least-squares line through a variance curve

    Attributes:
        slope (float): Fitted slope
        intercept (float): Fitted intercept
        r2 (float): Coefficient of determination
        n_points (int): Points entering the fit
    """

    slope: float
    intercept: float
    r2: float
    n_points: int

    def __str__(self):
        return f"LinearFit(slope={self.slope:.6g}, intercept={self.intercept:.6g}, r2={self.r2:.4f})"


def fit_linear(t: np.ndarray, values: np.ndarray, t_min: float = 0.0) -> LinearFit:
    """
    Fit values = slope * t + intercept for t >= t_min

    Args:
        t: Sample times
        values: Samples, same length as t
        t_min: Earliest time kept in the fit

    Returns:
        LinearFit with slope, intercept and R^2
    """
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    keep = (t >= t_min) & np.isfinite(values)
    if np.count_nonzero(keep) < 3:
        raise SeriesTooShortError(f"Need at least 3 points after t={t_min} for a linear fit")

    X = t[keep].reshape(-1, 1)
    y = values[keep]
    model = LinearRegression()
    model.fit(X, y)
    fit = LinearFit(
        slope=float(model.coef_[0]),
        intercept=float(model.intercept_),
        r2=float(model.score(X, y)),
        n_points=int(len(y)),
    )
    logger.debug(f"Linear fit over {fit.n_points} points: {fit}")
    return fit


def unwrap_paths(paths: np.ndarray, period: float) -> np.ndarray:
    """Lift periodic paths (n_traj, n_t) to continuous real paths, nearest branch per step"""
    return np.unwrap(np.asarray(paths, dtype=float), period=period, axis=-1)


def ensemble_variance(paths: np.ndarray) -> np.ndarray:
    """Variance across trajectories at each time of paths shifted to start at zero"""
    paths = np.asarray(paths, dtype=float)
    shifted = paths - paths[:, :1]
    return np.var(shifted, axis=0, ddof=1) if paths.shape[0] > 1 else np.zeros(paths.shape[1])


def quadratic_peak(values: np.ndarray, index: int) -> Tuple[float, float]:
    """
    Sub-grid maximum of a periodic sequence by a parabola through three points

    Returns:
        Fractional offset in (-0.5, 0.5) from index, and the interpolated peak value
    """
    n = len(values)
    left = values[(index - 1) % n]
    mid = values[index]
    right = values[(index + 1) % n]
    curvature = left - 2.0 * mid + right
    if curvature >= 0:
        return 0.0, float(mid)
    offset = 0.5 * (left - right) / curvature
    peak = mid - 0.25 * (left - right) * offset
    return float(np.clip(offset, -0.5, 0.5)), float(peak)
