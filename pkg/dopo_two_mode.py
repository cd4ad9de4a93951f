#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
DOPO Two-Mode module
Handles the two-transverse-mode degenerate optical parametric oscillator:
positive-P Langevin model, classical steady states, orientation diffusion,
dark-mode and fixed local oscillator spectra, and the seeded system
"""

import logging
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import minimize_scalar, root

from errors import ConfigError, ConvergenceError, NumericalError, UndefinedOrientationError
from models.optics_model import DopoParams, DopoState, DopoSteadyState, SeedParams
from models.sde_model import EnsembleResult, SdeModel
from utils.statistics import LinearFit, ensemble_variance, fit_linear, unwrap_paths

logger = logging.getLogger(__name__)

SQRT2 = np.sqrt(2.0)

# State vector order
A0, A0P, AP, APP, AM, AMP = range(6)


def _split(x: np.ndarray):
    return (x[..., i] for i in range(6))


def _drift_fn(params: DopoParams, seed: Optional[SeedParams] = None):
    gp, gs, chi, Ep = params.gamma_p, params.gamma_s, params.chi, params.Ep
    es = 0.0 if seed is None else seed.Es / SQRT2

    def drift(x, t):
        a0, a0p, ap, app, am, amp = _split(x)
        return np.stack([
            Ep - gp * a0 - chi * ap * am,
            Ep - gp * a0p - chi * app * amp,
            -gs * ap + chi * a0 * amp + es,
            -gs * app + chi * a0p * am + es,
            -gs * am + chi * a0 * app + es,
            -gs * amp + chi * a0p * ap + es,
        ], axis=-1)

    return drift


def _noise_fns(params: DopoParams):
    chi = params.chi

    def coupling(x, t):
        s = np.sqrt(chi * x[..., A0]) / SQRT2
        sp = np.sqrt(chi * x[..., A0P]) / SQRT2
        B = np.zeros(x.shape + (4,), dtype=complex)
        B[..., AP, 0] = s
        B[..., AP, 1] = 1j * s
        B[..., AM, 0] = s
        B[..., AM, 1] = -1j * s
        B[..., APP, 2] = sp
        B[..., APP, 3] = 1j * sp
        B[..., AMP, 2] = sp
        B[..., AMP, 3] = -1j * sp
        return B

    def product(x, t, dW):
        s = np.sqrt(chi * x[..., A0]) / SQRT2
        sp = np.sqrt(chi * x[..., A0P]) / SQRT2
        xi = dW[..., 0] + 1j * dW[..., 1]
        xip = dW[..., 2] + 1j * dW[..., 3]
        out = np.zeros_like(x)
        out[..., AP] = s * xi
        out[..., AM] = s * np.conj(xi)
        out[..., APP] = sp * xip
        out[..., AMP] = sp * np.conj(xip)
        return out

    # The pump carries no noise, so sum_k (dB_k/dx) B_k vanishes identically
    def correction(x, t):
        return np.zeros_like(x)

    return coupling, product, correction


def dopo_model(params: DopoParams) -> SdeModel:
    """
    Positive-P Langevin model of the two-mode DOPO

    The complex noises xi = (eta_a + i eta_b) / sqrt(2) and xi+ are expressed
    over four real channels; mode -1 receives the conjugate noise.

    Args:
        params: Cavity parameters

    Returns:
        SdeModel over (alpha0, alpha0+, alpha+1, alpha+1+, alpha-1, alpha-1+)
    """
    coupling, product, correction = _noise_fns(params)
    return SdeModel(
        name="dopo-two-mode",
        dim=6,
        n_noises=4,
        drift=_drift_fn(params),
        noise_coupling=coupling,
        correction=correction,
        noise_product=product,
        time_unit=1.0 / params.gamma_s,
    )


def seeded_model(params: DopoParams, seed: SeedParams) -> SdeModel:
    """DOPO model with a coherent seed Es / sqrt(2) driving both signal modes"""
    coupling, product, correction = _noise_fns(params)
    return SdeModel(
        name="dopo-seeded",
        dim=6,
        n_noises=4,
        drift=_drift_fn(params, seed),
        noise_coupling=coupling,
        correction=correction,
        noise_product=product,
        time_unit=1.0 / params.gamma_s,
    )


def rotate_state(x: np.ndarray, theta: float) -> np.ndarray:
    """Apply the orientation symmetry (a+1, a-1) -> (e^{i theta} a+1, e^{-i theta} a-1)"""
    y = np.array(x, dtype=complex, copy=True)
    y[..., AP] *= np.exp(1j * theta)
    y[..., APP] *= np.exp(-1j * theta)
    y[..., AM] *= np.exp(-1j * theta)
    y[..., AMP] *= np.exp(1j * theta)
    return y


def classical_steady_state(params: DopoParams) -> DopoSteadyState:
    """
    Classical steady state: trivial below threshold, broken with free orientation above

    Returns:
        DopoSteadyState with rho^2 = (Ep - E_th) / chi above threshold
    """
    if params.sigma <= 1.0:
        return DopoSteadyState(kind="trivial", rho=0.0, alpha0=params.Ep / params.gamma_p)
    return DopoSteadyState(kind="broken", rho=params.rho, alpha0=params.gamma_s / params.chi)


def broken_state(params: DopoParams, theta: float = 0.0) -> DopoState:
    """Broken steady state alpha_{+-1} = rho exp(-+i theta), alpha0 = gamma_s / chi"""
    steady = classical_steady_state(params)
    if not steady.broken:
        raise ConfigError(f"No broken solution at sigma={params.sigma:.4g} <= 1")
    rho = steady.rho
    return DopoState.classical(steady.alpha0, rho * np.exp(-1j * theta), rho * np.exp(1j * theta))


def mean_field_rhs(
    t: float, y: np.ndarray, params: DopoParams, seed: Optional[SeedParams] = None
) -> np.ndarray:
    """
    Classical flow (noise off, partners conjugate) on the real vector
    (Re a0, Re a+1, Re a-1, Im a0, Im a+1, Im a-1)
    """
    a0, ap, am = y[:3] + 1j * y[3:]
    es = 0.0 if seed is None else seed.Es / SQRT2
    da0 = params.Ep - params.gamma_p * a0 - params.chi * ap * am
    dap = -params.gamma_s * ap + params.chi * a0 * np.conj(am) + es
    dam = -params.gamma_s * am + params.chi * a0 * np.conj(ap) + es
    z = np.array([da0, dap, dam])
    return np.concatenate([z.real, z.imag])


def integrate_mean_field(
    params: DopoParams,
    start: Tuple[complex, complex, complex],
    t_end: float,
    seed: Optional[SeedParams] = None,
    n_eval: int = 0,
    rtol: float = 1e-10,
    atol: float = 1e-12,
):
    """
    Integrate the classical flow with solve_ivp

    Args:
        params: Cavity parameters
        start: (alpha0, alpha+1, alpha-1)
        t_end: Final time
        seed: Optional seed
        n_eval: Number of output times; only the final state when 0

    Returns:
        Tuple of times and complex array (n_times, 3)
    """
    y0 = np.asarray(start, dtype=complex)
    t_eval = np.linspace(0.0, t_end, n_eval) if n_eval else None
    sol = solve_ivp(
        mean_field_rhs, (0.0, t_end), np.concatenate([y0.real, y0.imag]),
        args=(params, seed), method="LSODA", rtol=rtol, atol=atol, t_eval=t_eval,
    )
    if not sol.success:
        raise ConvergenceError(f"Mean-field integration failed: {sol.message}")
    z = sol.y[:3] + 1j * sol.y[3:]
    return sol.t, z.T


def orientation_of(state: Union[DopoState, np.ndarray]) -> Union[float, np.ndarray]:
    """
    Orientation theta = (arg a-1 - arg a+1) / 2 reduced to [0, pi)

    Raises:
        UndefinedOrientationError: if a signal amplitude vanishes
    """
    x = state.to_vector() if isinstance(state, DopoState) else np.asarray(state)
    ap, am = x[..., AP], x[..., AM]
    if np.any(np.abs(ap) == 0) or np.any(np.abs(am) == 0):
        raise UndefinedOrientationError("Orientation is undefined for a vanishing signal amplitude")
    theta = np.mod(0.5 * (np.angle(am) - np.angle(ap)), np.pi)
    return float(theta) if np.ndim(theta) == 0 else theta


def dark_quadrature_observables(state, theta_ref: Union[float, np.ndarray], phi: float = None):
    """
    Dark-mode quadratures built from the signal amplitudes and a reference orientation

    a_d = i (e^{i theta_ref} a+1 - e^{-i theta_ref} a-1) / sqrt(2) with its plus
    partner; X^phi = e^{-i phi} a_d + e^{i phi} a_d+. Values are real for
    classical states and complex positive-P samples otherwise.

    Returns:
        (X_d, Y_d), or X_d^phi alone when phi is given
    """
    x = state.to_vector() if isinstance(state, DopoState) else np.asarray(state)
    e = np.exp(1j * np.asarray(theta_ref))
    ad = 1j * (e * x[..., AP] - np.conj(e) * x[..., AM]) / SQRT2
    adp = -1j * (np.conj(e) * x[..., APP] - e * x[..., AMP]) / SQRT2
    if phi is not None:
        return np.exp(-1j * phi) * ad + np.exp(1j * phi) * adp
    return ad + adp, -1j * ad + 1j * adp


def orientation_observable() -> Callable[[np.ndarray], np.ndarray]:
    def theta(x):
        return 0.5 * (np.angle(x[..., AM]) - np.angle(x[..., AP]))
    return theta


def dark_quadrature_observable(phi: float = np.pi / 2, theta_ref: Optional[float] = None):
    """Dark-mode quadrature X_d^phi, co-rotating with the trajectory when theta_ref is None"""
    def quadrature(x):
        ref = 0.5 * (np.angle(x[..., AM]) - np.angle(x[..., AP])) if theta_ref is None else theta_ref
        return dark_quadrature_observables(x, ref, phi)
    return quadrature


def intensity_difference_observable(params: DopoParams):
    """Twin-beam photocurrent (n+1 - n-1) / sqrt(2 rho^2) in shot-noise units"""
    scale = 1.0 / np.sqrt(2.0 * params.rho2) if params.rho2 > 0 else 1.0

    def difference(x):
        return (x[..., APP] * x[..., AP] - x[..., AMP] * x[..., AM]) * scale
    return difference


def mode_intensity_observable(mode: int = 1):
    """Normally ordered intensity alpha+ alpha of mode +1 or -1"""
    i, ip = (AP, APP) if mode == 1 else (AM, AMP)

    def intensity(x):
        return x[..., ip] * x[..., i]
    return intensity


def orientation_variance(result: EnsembleResult, quad="theta") -> np.ndarray:
    """Ensemble variance of the unwrapped orientation path, <delta theta^2>(t)"""
    paths = unwrap_paths(np.real(result.series(quad)), period=np.pi)
    return ensemble_variance(paths)


def fit_diffusion(t: np.ndarray, variance: np.ndarray, t_min: float = 0.0) -> LinearFit:
    """Slope, intercept and R^2 of a variance curve"""
    return fit_linear(t, variance, t_min)


def theta_variance_analytic(params: DopoParams, t) -> Union[float, np.ndarray]:
    """
    V_theta = d gamma_s t / (sigma - 1)

    Raises:
        ConfigError: at or below threshold
    """
    sigma = params.sigma
    if sigma <= 1.0:
        raise ConfigError(f"Orientation diffusion needs sigma > 1, got {sigma:.4g}")
    return params.d * params.gamma_s * np.asarray(t, dtype=float) / (sigma - 1.0)


def dark_spectrum_analytic(omega, gamma_s: float = 1.0):
    """V(Y_d; omega) = (omega / 2 gamma_s)^2 / [1 + (omega / 2 gamma_s)^2]"""
    u = (np.asarray(omega, dtype=float) / (2.0 * gamma_s)) ** 2
    return u / (1.0 + u)


def _one_minus_sinc(x: np.ndarray) -> np.ndarray:
    small = np.abs(x) < 1e-4
    safe = np.where(small, 1.0, x)
    return np.where(small, x ** 2 / 6.0, 1.0 - np.sin(safe) / safe)


def fixed_lo_spectrum_analytic(
    omega, phi: float, T: float, d: float, sigma: float, gamma_s: float = 1.0
):
    """
    Squeezing spectrum of the dark mode measured with a local oscillator frozen
    at the initial orientation for a detection time T

    V = 1 + S0 cos^2(phi) + S90 sin^2(phi) in Omega = omega / gamma_s and
    T = gamma_s t_det. The diffusion term of S90 is
    4 d T (2(sigma^2+1) + Omega^2) / [(sigma-1)(4+Omega^2)(4 sigma^2+Omega^2)],
    whose minimum over T sits at the optimal detection time.

    Raises:
        ConfigError: for T <= 0 or sigma <= 1
        NumericalError: at Omega = 0 with cos(phi) != 0, where S0 diverges
    """
    if T <= 0:
        raise ConfigError(f"Detection time must be positive, got {T}")
    if sigma <= 1:
        raise ConfigError(f"Fixed-LO spectrum needs sigma > 1, got {sigma}")
    W = np.asarray(omega, dtype=float) / gamma_s
    c2 = np.cos(phi) ** 2
    s2 = np.sin(phi) ** 2
    W2 = W ** 2
    s90 = (
        (8.0 - 2.0 * W2) / (T * (4.0 + W2) ** 2)
        - 4.0 / (4.0 + W2)
        + 4.0 * d * T * (2.0 * (sigma ** 2 + 1.0) + W2)
        / ((sigma - 1.0) * (4.0 + W2) * (4.0 * sigma ** 2 + W2))
    )
    if c2 < 1e-24:
        return 1.0 + s2 * s90
    if np.any(W == 0):
        raise NumericalError(f"S0 diverges at Omega=0 for phi={phi:.6g} (cos phi != 0)")
    sm1 = sigma - 1.0
    s0 = (
        8.0 * _one_minus_sinc(W * T) / W2
        - 4.0 * d * T / (W2 * sm1) * (6.0 * sm1 ** 2 + W2) / (4.0 * sm1 ** 2 + W2)
    )
    return 1.0 + c2 * s0 + s2 * s90


def optimal_detection_time(sigma: float, d: float) -> float:
    """T_opt = sqrt(sigma^2 (sigma - 1) / (d (sigma^2 + 1)))"""
    if sigma <= 1 or d <= 0:
        raise ConfigError(f"Optimal detection time needs sigma > 1 and d > 0, got sigma={sigma}, d={d}")
    return float(np.sqrt(sigma ** 2 * (sigma - 1.0) / (d * (sigma ** 2 + 1.0))))


def minimize_detection_time(sigma: float, d: float, omega: float = 0.0, phi: float = np.pi / 2) -> Tuple[float, float]:
    """
    Numerically minimize the fixed-LO spectrum over the detection time

    Returns:
        (T_min, V_min)
    """
    t_guess = optimal_detection_time(sigma, d)

    def objective(log_t):
        return float(fixed_lo_spectrum_analytic(omega, phi, np.exp(log_t), d, sigma))

    res = minimize_scalar(
        objective, bracket=(np.log(t_guess) - 3.0, np.log(t_guess) + 3.0),
        method="brent", options={"xtol": 1e-12},
    )
    if not res.success:
        raise ConvergenceError(f"Detection-time minimization failed: {res.message}")
    return float(np.exp(res.x)), float(res.fun)


def fixed_lo_optimum(
    sigma: float, d: float, phi: float, T: Optional[float] = None, omega_max: float = 10.0, n_scan: int = 2000
) -> Tuple[float, float]:
    """
    Best noise frequency for a given local-oscillator phase

    Args:
        sigma: Pump level
        d: Nonlinearity
        phi: Local-oscillator phase
        T: Detection time, T_opt when None
        omega_max: Largest scanned Omega
        n_scan: Scan points before the bounded polish

    Returns:
        (omega_opt, V_min) in units of gamma_s
    """
    T = optimal_detection_time(sigma, d) if T is None else T
    lower = 0.0 if np.cos(phi) ** 2 < 1e-24 else omega_max * 1e-9
    grid = np.geomspace(max(lower, omega_max * 1e-9), omega_max, n_scan)
    if lower == 0.0:
        grid = np.concatenate([[0.0], grid])
    values = fixed_lo_spectrum_analytic(grid, phi, T, d, sigma)
    i = int(np.argmin(values))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    if hi > lo:
        res = minimize_scalar(
            lambda w: float(fixed_lo_spectrum_analytic(w, phi, T, d, sigma)),
            bounds=(lo, hi), method="bounded", options={"xatol": 1e-10},
        )
        if res.fun <= values[i]:
            return float(res.x), float(res.fun)
    return float(grid[i]), float(values[i])


def seeded_roots(sigma: float, I_s: float) -> List[Tuple[float, bool]]:
    """
    All real non-negative roots of [sigma - (1 + I10/2)]^2 I10 = I_s

    Only the largest root is stable.

    Returns:
        List of (I10, stable) sorted by I10
    """
    if I_s < 0:
        raise ConfigError(f"Seed intensity must be non-negative, got {I_s}")
    c = sigma - 1.0
    roots = np.roots([0.25, -c, c ** 2, -I_s])
    scale = max(1.0, abs(c))
    real = sorted(float(r.real) for r in roots if abs(r.imag) < 1e-6 * scale and r.real > -1e-12 * scale)
    real = [max(r, 0.0) for r in real]
    return [(r, i == len(real) - 1) for i, r in enumerate(real)]


def seeded_steady_state(sigma: float, I_s: float) -> float:
    """Stable (largest) root I10 of the seeded cubic"""
    if sigma <= 1:
        raise ConfigError(f"Seeded steady state needs sigma > 1, got {sigma}")
    roots = seeded_roots(sigma, I_s)
    return roots[-1][0]


def seeded_q(sigma: float, I10: float) -> float:
    """q = sigma - I10 / 2 = chi alpha0 / gamma_s"""
    return sigma - 0.5 * I10


def intensity_normalization(params: DopoParams) -> float:
    """Constant relating the cubic's I10 to the TEM10 intensity: I10 = chi^2 |a10|^2 / (gamma_p gamma_s)"""
    return params.chi ** 2 / (params.gamma_p * params.gamma_s)


def seeded_dark_spectrum(omega, q: float, gamma_s: float = 1.0, quadratic_gain: bool = False):
    """
    Phase-quadrature spectrum of the TEM01 mode in the seeded DOPO

    V = 1 - 4 q / [(1 + q)^2 + (omega / gamma_s)^2], which equals
    ((1 - q) / (1 + q))^2 at zero frequency. quadratic_gain uses 4 q^2 instead.
    """
    W2 = (np.asarray(omega, dtype=float) / gamma_s) ** 2
    numerator = 4.0 * q ** 2 if quadratic_gain else 4.0 * q
    return 1.0 - numerator / ((1.0 + q) ** 2 + W2)


def seeded_mean_field_intensity(params: DopoParams, seed: SeedParams, t_end: float = 200.0) -> float:
    """
    TEM10 intensity from integrating the seeded classical flow to rest

    Starts from the broken state at theta = 0, integrates with solve_ivp,
    then polishes the fixed point with scipy.optimize.root.

    Returns:
        I10 = chi^2 |a10|^2 / (gamma_p gamma_s) with a10 = (a+1 + a-1) / sqrt(2)
    """
    steady = classical_steady_state(params)
    rho = max(steady.rho, 1e-3 / params.chi)
    start = (params.gamma_s / params.chi, rho, rho)
    _, z = integrate_mean_field(params, start, t_end / params.gamma_s, seed)
    y = np.concatenate([z[-1].real, z[-1].imag])
    polished = root(lambda v: mean_field_rhs(0.0, v, params, seed), y, method="hybr", tol=1e-14)
    if polished.success:
        y = polished.x
    else:
        logger.warning(f"Fixed-point polish failed: {polished.message}")
    a0, ap, am = y[:3] + 1j * y[3:]
    a10 = (ap + am) / SQRT2
    intensity = intensity_normalization(params) * abs(a10) ** 2
    logger.debug(f"Seeded mean field: |a10|^2={abs(a10) ** 2:.6g}, I10={intensity:.6g}")
    return float(intensity)


def dopo_observables(params: DopoParams, theta_ref: Optional[float] = None) -> Dict[str, Callable]:
    """Standard observable set recorded by the DOPO experiments"""
    return {
        "theta": orientation_observable(),
        "Y_d": dark_quadrature_observable(np.pi / 2, theta_ref),
        "X_d": dark_quadrature_observable(0.0, theta_ref),
        "n_diff": intensity_difference_observable(params),
        "n_plus": mode_intensity_observable(1),
    }
