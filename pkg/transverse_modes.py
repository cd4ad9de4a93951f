#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Transverse Modes module
Handles Gauss, Laguerre-Gauss and rotated Hermite-Gauss mode functions at the
waist plane, their overlaps and grid rotations
"""

import logging
from typing import List, Tuple

import numpy as np
from scipy import fft, ndimage

from errors import ConfigError, GridError
from models.mode_model import ModeField, ModeGrid

logger = logging.getLogger(__name__)

# Points required inside one beam radius
MIN_POINTS_PER_WAIST = 16


def _check_resolution(waist: float, grid: ModeGrid) -> None:
    if waist <= 0:
        raise ConfigError(f"Beam radius must be positive, got {waist}")
    points = waist / grid.spacing
    if points < MIN_POINTS_PER_WAIST:
        raise GridError(
            f"Grid spacing {grid.spacing:.4g} leaves {points:.1f} points across the waist {waist}, "
            f"need at least {MIN_POINTS_PER_WAIST}"
        )
    if grid.half_width < 3.0 * waist:
        logger.warning(f"Grid half-width {grid.half_width} clips a mode of waist {waist}")


def gauss_mode(w_p: float, grid: ModeGrid) -> ModeField:
    """
    Gaussian pump mode G(r) ~ exp(-r^2 / w_p^2), unit norm on the grid

    Args:
        w_p: Pump beam radius
        grid: Sampling grid

    Returns:
        Normalized ModeField
    """
    _check_resolution(w_p, grid)
    samples = np.exp(-grid.r ** 2 / w_p ** 2)
    return ModeField(samples, grid, w_p, "G").normalized()


def lg_mode(charge: int, w_s: float, grid: ModeGrid) -> ModeField:
    """
    Laguerre-Gauss mode L_{+-1} ~ r exp(-r^2 / w_s^2) exp(+-i phi), unit norm on the grid

    The closed-form prefactor 2 sqrt(pi) r / w_s^2 integrates to pi^2 rather
    than 1, so the samples are renormalized numerically.
    """
    if charge not in (1, -1):
        raise ConfigError(f"Only charges +1 and -1 are supported, got {charge}")
    _check_resolution(w_s, grid)
    # r exp(+-i phi) = x +- i y keeps the origin exact
    samples = (grid.x + 1j * charge * grid.y) * np.exp(-grid.r ** 2 / w_s ** 2)
    return ModeField(samples, grid, w_s, f"L{charge:+d}").normalized()


def hg10_mode(psi: float, w_s: float, grid: ModeGrid) -> ModeField:
    """
    First-order Hermite-Gauss mode rotated by psi from the horizontal

    H10^psi = [exp(-i psi) L_{+1} + exp(i psi) L_{-1}] / sqrt(2)
    """
    l_plus = lg_mode(1, w_s, grid)
    l_minus = lg_mode(-1, w_s, grid)
    samples = (np.exp(-1j * psi) * l_plus.samples + np.exp(1j * psi) * l_minus.samples) / np.sqrt(2.0)
    return ModeField(samples, grid, w_s, f"HG10({psi:.6g})").normalized()


def dark_mode_of(psi: float, w_s: float, grid: ModeGrid) -> ModeField:
    """
    Normalized -i d/dpsi H10^psi, the mode orthogonal to the bright pattern

    Equal to H10^(psi + pi/2) up to a global phase.
    """
    l_plus = lg_mode(1, w_s, grid)
    l_minus = lg_mode(-1, w_s, grid)
    samples = (-np.exp(-1j * psi) * l_plus.samples + np.exp(1j * psi) * l_minus.samples) / np.sqrt(2.0)
    return ModeField(samples, grid, w_s, f"dark({psi:.6g})").normalized()


def overlap(f: ModeField, g: ModeField) -> complex:
    """
    Inner product sum f* g dx dy

    Raises:
        GridError: if the fields live on different grids
    """
    if f.grid != g.grid:
        raise GridError(f"Cannot overlap {f.label} on {f.grid} with {g.label} on {g.grid}")
    return complex(np.sum(np.conj(f.samples) * g.samples) * f.grid.spacing ** 2)


def _shear(samples: np.ndarray, axis: int, amount: float, grid: ModeGrid) -> np.ndarray:
    """Shift each line along `axis` by amount * (coordinate on the other axis)"""
    k = 2.0 * np.pi * fft.fftfreq(grid.n_points, d=grid.spacing)
    shifts = amount * grid.axis
    if axis == 0:
        phase = np.exp(-1j * np.outer(k, shifts))
    else:
        phase = np.exp(-1j * np.outer(shifts, k))
    return fft.ifft(fft.fft(samples, axis=axis) * phase, axis=axis)


def rotate_field(field: ModeField, angle: float, method: str = "fourier") -> ModeField:
    """
    Rotate a sampled field counterclockwise: g(x) = f(R(-angle) x)

    Args:
        field: Field to rotate
        angle: Rotation angle in radians
        method: "fourier" (quarter turns plus three Fourier shears, spectrally
            accurate for fields well inside the grid) or "bilinear"

    Returns:
        Rotated ModeField on the same grid
    """
    grid = field.grid
    if method == "bilinear":
        c, s = np.cos(angle), np.sin(angle)
        x_src = c * grid.x + s * grid.y
        y_src = -s * grid.x + c * grid.y
        coords = np.array([(x_src + grid.half_width) / grid.spacing, (y_src + grid.half_width) / grid.spacing])
        re = ndimage.map_coordinates(field.samples.real, coords, order=1, mode="constant")
        im = ndimage.map_coordinates(field.samples.imag, coords, order=1, mode="constant")
        samples = re + 1j * im
    elif method == "fourier":
        quarter = int(np.round(angle / (np.pi / 2)))
        rest = angle - quarter * np.pi / 2
        samples = np.rot90(field.samples, k=quarter % 4)
        t = np.tan(rest / 2.0)
        samples = _shear(samples, 0, -t, grid)
        samples = _shear(samples, 1, np.sin(rest), grid)
        samples = _shear(samples, 0, -t, grid)
    else:
        raise ConfigError(f"Unknown rotation method '{method}'")
    return ModeField(samples, grid, field.waist, f"{field.label}@{angle:.6g}")


def mode_to_rows(field: ModeField) -> List[Tuple[float, float, float, float]]:
    """Rows (x, y, Re, Im) for CSV export"""
    grid = field.grid
    return list(zip(
        grid.x.ravel().tolist(),
        grid.y.ravel().tolist(),
        field.samples.real.ravel().tolist(),
        field.samples.imag.ravel().tolist(),
    ))


def check_mode_identities(w_s: float = 1.0, psi: float = 0.3, grid: ModeGrid = None, eps: float = 1e-4) -> dict:
    """
    Evaluate the orthonormality, superposition and rotation identities

    Returns:
        Dictionary of named deviations (all should be small)
    """
    grid = grid or ModeGrid()
    w_p = w_s / np.sqrt(2.0)
    g = gauss_mode(w_p, grid)
    lp = lg_mode(1, w_s, grid)
    lm = lg_mode(-1, w_s, grid)
    h0 = hg10_mode(0.0, w_s, grid)
    hpsi = hg10_mode(psi, w_s, grid)
    h_perp = hg10_mode(psi + np.pi / 2, w_s, grid)
    derivative = (hg10_mode(psi + eps, w_s, grid).samples - hpsi.samples) / eps

    checks = {
        "norm_gauss": abs(g.norm - 1.0),
        "norm_lg": abs(lp.norm - 1.0),
        "overlap_lg_pair": abs(overlap(lp, lm)),
        "overlap_gauss_lg": abs(overlap(g, lp)),
        "overlap_hg_lg": abs(overlap(h0, lp) - 1.0 / np.sqrt(2.0)),
        "overlap_bright_dark": abs(overlap(hpsi, h_perp)),
        "rotation_fourier": float(np.max(np.abs(rotate_field(h0, psi).samples - hpsi.samples))),
        "rotation_bilinear": float(np.max(np.abs(rotate_field(h0, psi, "bilinear").samples - hpsi.samples))),
        "psi_derivative": float(np.sqrt(np.sum(np.abs(derivative - h_perp.samples) ** 2) * grid.spacing ** 2)),
    }
    logger.info(f"Mode identity check at psi={psi}: max deviation {max(checks.values()):.3g}")
    return checks
