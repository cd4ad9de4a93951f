#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
FWM Rotational module
Handles the mean-field four-wave-mixing cavity with two opposite orbital
angular momentum modes: classical flow, existence region of the rotating
pattern and its subcritical pitchfork
"""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from errors import ConvergenceError
from models.optics_model import FwmParams, FwmSteadyState

logger = logging.getLogger(__name__)

SQRT3 = np.sqrt(3.0)
# Re(lambda) above -STABILITY_TOL * gamma_s counts as unstable
STABILITY_TOL = 1e-9


def fwm_mean_field_rhs(a_plus, a_minus, params: FwmParams) -> Tuple[complex, complex]:
    """
    Damped classical flow a' = -gamma_s a - i dH/da*

    With shift = -delta + 4 g rho^2 the flow reads
    a+' = -gamma_s a+ - i[shift a+ + g(|a+|^2 + 2|a-|^2) a+ + 2 g rho^2 conj(a-)]
    and the same with the modes swapped.

    Args:
        a_plus: Amplitude of the +1 mode (scalar or array)
        a_minus: Amplitude of the -1 mode
        params: Cavity parameters

    Returns:
        (da_plus/dt, da_minus/dt)
    """
    g, gs, r2 = params.g, params.gamma_s, params.rho2
    shift = -params.delta + 4.0 * g * r2
    n_plus = np.abs(a_plus) ** 2
    n_minus = np.abs(a_minus) ** 2
    d_plus = -gs * a_plus - 1j * (shift * a_plus + g * (n_plus + 2.0 * n_minus) * a_plus + 2.0 * g * r2 * np.conj(a_minus))
    d_minus = -gs * a_minus - 1j * (shift * a_minus + g * (n_minus + 2.0 * n_plus) * a_minus + 2.0 * g * r2 * np.conj(a_plus))
    return d_plus, d_minus


def fwm_jacobian(a_plus: complex, a_minus: complex, params: FwmParams) -> np.ndarray:
    """
    Analytic Jacobian of the flow on col(a+, a-, a+*, a-*)

    Its eigenvalues coincide with those of the real four-dimensional flow.
    """
    g, gs, r2 = params.g, params.gamma_s, params.rho2
    shift = -params.delta + 4.0 * g * r2
    zp, zm = complex(a_plus), complex(a_minus)
    n_total = abs(zp) ** 2 + abs(zm) ** 2

    A = np.array([
        [-gs - 1j * (shift + 2.0 * g * n_total), -2j * g * np.conj(zm) * zp],
        [-2j * g * np.conj(zp) * zm, -gs - 1j * (shift + 2.0 * g * n_total)],
    ])
    B = np.array([
        [-1j * g * zp ** 2, -1j * (2.0 * g * zm * zp + 2.0 * g * r2)],
        [-1j * (2.0 * g * zp * zm + 2.0 * g * r2), -1j * g * zm ** 2],
    ])
    return np.block([[A, B], [np.conj(B), np.conj(A)]])


def existence_region(params: FwmParams) -> bool:
    """
    Closed-form region of the rotating pattern:
    delta > sqrt(3) gamma_s and gamma_s / 2g < rho^2 < [2 delta + sqrt(delta^2 - 3 gamma_s^2)] / 6g
    """
    gs, g, delta = params.gamma_s, params.g, params.delta
    if not delta > SQRT3 * gs:
        return False
    upper = (2.0 * delta + np.sqrt(delta ** 2 - 3.0 * gs ** 2)) / (6.0 * g)
    return bool(gs / (2.0 * g) < params.rho2 < upper)


def trivial_stability(params: FwmParams) -> Optional[Tuple[float, float]]:
    """
    Pump interval (rho^2 bounds) where the empty cavity is unstable

    The pitchfork roots are g rho^2 = [2 delta +- sqrt(delta^2 - 3 gamma_s^2)] / 6.

    Returns:
        (lower, upper) in rho^2, or None when the empty cavity is always stable
    """
    gs, g, delta = params.gamma_s, params.g, params.delta
    disc = delta ** 2 - 3.0 * gs ** 2
    if disc <= 0 or delta <= 0:
        return None
    root = np.sqrt(disc)
    return (2.0 * delta - root) / (6.0 * g), (2.0 * delta + root) / (6.0 * g)


def _classify(a_plus: complex, a_minus: complex, params: FwmParams, trivial: bool) -> FwmSteadyState:
    eigenvalues = np.linalg.eigvals(fwm_jacobian(a_plus, a_minus, params))
    order = np.argsort(np.abs(eigenvalues))
    # Nontrivial states carry a zero eigenvalue along the orientation family
    relevant = eigenvalues if trivial else eigenvalues[order[1:]]
    stable = bool(np.all(relevant.real < -STABILITY_TOL * max(params.gamma_s, 1e-300)))
    intensity = 0.0 if trivial else float(abs(a_plus) ** 2)
    return FwmSteadyState(a_plus, a_minus, intensity, stable, eigenvalues)


def symmetric_sector_residual(intensity: float, params: FwmParams) -> float:
    """h(I) = Delta^2 + gamma_s^2 - 4 g^2 rho^4 with Delta = -delta + 4 g rho^2 + 3 g I"""
    delta_eff = -params.delta + 4.0 * params.g * params.rho2 + 3.0 * params.g * intensity
    return delta_eff ** 2 + params.gamma_s ** 2 - 4.0 * params.g ** 2 * params.rho2 ** 2


def steady_state_solve(params: FwmParams, n_scan: int = 400) -> List[FwmSteadyState]:
    """
    Steady states on the symmetric sector |a+| = |a-|, orientation fixed to zero

    Roots in intensity are bracketed on a scan and refined with brentq; the
    phase follows from exp(-2 i mu) = (i gamma_s - Delta) / (2 g rho^2).

    Returns:
        Trivial state first, then the nontrivial roots by increasing intensity
    """
    states = [_classify(0j, 0j, params, trivial=True)]
    g, r2 = params.g, params.rho2
    if r2 == 0:
        return states

    i_max = max(0.0, (params.delta - 2.0 * g * r2) / (3.0 * g)) * 1.01 + 1e-9
    grid = np.linspace(0.0, i_max, n_scan + 1)[1:]
    values = np.array([symmetric_sector_residual(I, params) for I in grid])

    roots = []
    for lo, hi, f_lo, f_hi in zip(grid[:-1], grid[1:], values[:-1], values[1:]):
        if f_lo == 0.0:
            roots.append(lo)
        elif f_lo * f_hi < 0:
            try:
                roots.append(brentq(symmetric_sector_residual, lo, hi, args=(params,), xtol=1e-15, rtol=1e-14))
            except (RuntimeError, ValueError) as e:
                raise ConvergenceError(f"Root bracket [{lo:.6g}, {hi:.6g}] failed: {e}") from e

    for intensity in roots:
        delta_eff = -params.delta + 4.0 * g * r2 + 3.0 * g * intensity
        mu = -0.5 * np.angle((1j * params.gamma_s - delta_eff) / (2.0 * g * r2))
        z = np.sqrt(intensity) * np.exp(1j * mu)
        state = _classify(z, z, params, trivial=False)
        logger.debug(f"FWM root at {params}: {state}, |goldstone|={abs(state.goldstone):.3g}")
        states.append(state)
    return states


def integrate_flow(
    a_plus: complex, a_minus: complex, params: FwmParams, t_end: float, n_eval: int = 200
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Integrate the classical flow with solve_ivp

    Returns:
        Times and complex array (n_eval, 2) of (a+, a-)
    """
    def rhs(t, y):
        dp, dm = fwm_mean_field_rhs(y[0] + 1j * y[2], y[1] + 1j * y[3], params)
        return [dp.real, dm.real, dp.imag, dm.imag]

    y0 = [np.real(a_plus), np.real(a_minus), np.imag(a_plus), np.imag(a_minus)]
    sol = solve_ivp(rhs, (0.0, t_end), y0, method="DOP853", rtol=1e-11, atol=1e-13,
                    t_eval=np.linspace(0.0, t_end, n_eval))
    if not sol.success:
        raise ConvergenceError(f"Flow integration failed: {sol.message}")
    return sol.t, np.stack([sol.y[0] + 1j * sol.y[2], sol.y[1] + 1j * sol.y[3]], axis=1)


def region_scan(
    deltas: Sequence[float], rho2s: Sequence[float], gamma_s: float = 1.0, g: float = 1.0
) -> List[Dict[str, float]]:
    """
    Compare the closed-form region with the numeric steady states on a grid

    Returns:
        One row per (delta, rho2) with exists_closed, exists_numeric, n_stable,
        bistable and near_boundary
    """
    deltas = np.asarray(deltas, dtype=float)
    rho2s = np.asarray(rho2s, dtype=float)
    d_delta = np.max(np.diff(deltas)) if len(deltas) > 1 else 0.0
    d_rho2 = np.max(np.diff(rho2s)) if len(rho2s) > 1 else 0.0

    rows = []
    for delta in deltas:
        for rho2 in rho2s:
            params = FwmParams(delta=float(delta), g=g, rho2=float(rho2), gamma_s=gamma_s)
            states = steady_state_solve(params)
            nontrivial_stable = [s for s in states[1:] if s.stable]
            edges = [gamma_s / (2.0 * g)]
            pitchfork = trivial_stability(params)
            if pitchfork is not None:
                edges.extend(pitchfork)
            near = abs(delta - SQRT3 * gamma_s) <= d_delta or any(abs(rho2 - e) <= d_rho2 for e in edges)
            rows.append({
                "delta": float(delta),
                "rho2": float(rho2),
                "exists_closed": int(existence_region(params)),
                "exists_numeric": int(bool(nontrivial_stable)),
                "n_stable": int(sum(s.stable for s in states)),
                "bistable": int(states[0].stable and bool(nontrivial_stable)),
                "near_boundary": int(near),
            })
    agree = sum(r["exists_closed"] == r["exists_numeric"] for r in rows if not r["near_boundary"])
    checked = sum(1 for r in rows if not r["near_boundary"])
    logger.info(f"Region scan: {agree}/{checked} interior cells agree, {sum(r['bistable'] for r in rows)} bistable")
    return rows
