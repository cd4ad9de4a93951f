#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Spatial DOPO module
Handles the one-dimensional pattern-forming DOPO: positive-P field equations
on a periodic grid, stationary patterns, the linearized biorthonormal
eigensystem, Goldstone diffusion of the pattern position and tracking
"""

import logging
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy import fft, linalg

from errors import ConfigError, ConvergenceError, DefectiveSpectrumError, GridError
from models.optics_model import FieldState1D, PatternSolution, SpatialParams
from models.sde_model import EnsembleResult, SdeModel
from utils.statistics import ensemble_variance, quadratic_peak, unwrap_paths

logger = logging.getLogger(__name__)

# Normalized correlation peak below which the pattern counts as lost
TRACKING_MIN_QUALITY = 0.5
NEWTON_TOL = 1e-11


class SpectralOperators:
    """
    Fourier symbols of the linear cavity operators on the periodic grid

    L_s(k) = gamma_s + i delta_s + i gamma_s l_s^2 k^2 acts on the signal,
    L_p(k) = gamma_p + i delta_p + i gamma_p l_p^2 k^2 on the pump; the
    plus-partners use the conjugate symbols.
    """

    def __init__(self, params: SpatialParams):
        self.params = params
        self.k = params.k()
        k2 = self.k ** 2
        self.Ls = params.gamma_s + 1j * params.delta_s + 1j * params.gamma_s * params.l_s ** 2 * k2
        self.Lp = params.gamma_p + 1j * params.delta_p + 1j * params.gamma_p * params.l_p ** 2 * k2
        self.Lp_inv = 1.0 / self.Lp
        logger.debug(f"Spectral operators initialized on {params.n_grid} points")

    @staticmethod
    def apply(symbol: np.ndarray, f: np.ndarray) -> np.ndarray:
        return fft.ifft(symbol * fft.fft(f, axis=-1), axis=-1)

    def slaved_pump(self, A: np.ndarray) -> np.ndarray:
        """A0[A] = L_p^-1 (Ep - chi A^2 / 2)"""
        return self.apply(self.Lp_inv, self.params.Ep - 0.5 * self.params.chi * A ** 2)

    def slaved_pump_partner(self, Ap: np.ndarray) -> np.ndarray:
        return self.apply(np.conj(self.Lp_inv), self.params.Ep - 0.5 * self.params.chi * Ap ** 2)

    def derivative(self, f: np.ndarray) -> np.ndarray:
        return self.apply(1j * self.k, f)

    def circulant(self, symbol: np.ndarray) -> np.ndarray:
        """Dense matrix of the Fourier multiplier"""
        return linalg.circulant(fft.ifft(symbol))


def shift_field(f: np.ndarray, s, L: float) -> np.ndarray:
    """Spectral translation f(x - s) on a periodic domain of length L (s may be per row)"""
    f = np.asarray(f, dtype=complex)
    n = f.shape[-1]
    k = 2.0 * np.pi * fft.fftfreq(n, d=L / n)
    s = np.asarray(s, dtype=float)
    phase = np.exp(-1j * np.multiply.outer(s, k))
    return fft.ifft(fft.fft(f, axis=-1) * phase, axis=-1)


def _split_signal(x: np.ndarray, n: int):
    return x[..., :n], x[..., n:]


def spatial_model(params: SpatialParams, split: bool = False) -> SdeModel:
    """
    Positive-P field equations on the periodic grid

    State order (A0, A0+, A, A+), each n_grid samples. Noise per cell is
    sqrt(chi A0 / dx) dW on the signal and sqrt(chi A0+ / dx) dW+ on its
    partner, white in space and time.

    Args:
        params: Cavity parameters
        split: Move the linear cavity operators into an exact integrating-factor
            propagator instead of the drift

    Returns:
        SdeModel with dim 4 n_grid and 2 n_grid noise channels
    """
    ops = SpectralOperators(params)
    n = params.n_grid
    chi, Ep, dx = params.chi, params.Ep, params.dx

    def drift(x, t):
        a0, a0p, a, ap = x[..., :n], x[..., n:2 * n], x[..., 2 * n:3 * n], x[..., 3 * n:]
        d_a0 = Ep - 0.5 * chi * a ** 2
        d_a0p = Ep - 0.5 * chi * ap ** 2
        d_a = chi * a0 * ap
        d_ap = chi * a0p * a
        if not split:
            d_a0 = d_a0 - ops.apply(ops.Lp, a0)
            d_a0p = d_a0p - ops.apply(np.conj(ops.Lp), a0p)
            d_a = d_a - ops.apply(ops.Ls, a)
            d_ap = d_ap - ops.apply(np.conj(ops.Ls), ap)
        return np.concatenate([d_a0, d_a0p, d_a, d_ap], axis=-1)

    def product(x, t, dW):
        out = np.zeros_like(x)
        out[..., 2 * n:3 * n] = np.sqrt(chi * x[..., :n] / dx) * dW[..., :n]
        out[..., 3 * n:] = np.sqrt(chi * x[..., n:2 * n] / dx) * dW[..., n:]
        return out

    def coupling(x, t):
        B = np.zeros(x.shape + (2 * n,), dtype=complex)
        idx = np.arange(n)
        B[..., 2 * n + idx, idx] = np.sqrt(chi * x[..., :n] / dx)
        B[..., 3 * n + idx, n + idx] = np.sqrt(chi * x[..., n:2 * n] / dx)
        return B

    def propagator(x, h):
        out = np.empty_like(x)
        out[..., :n] = ops.apply(np.exp(-ops.Lp * h), x[..., :n] - Ep / ops.Lp[0]) + Ep / ops.Lp[0]
        out[..., n:2 * n] = ops.apply(np.exp(-np.conj(ops.Lp) * h), x[..., n:2 * n] - Ep / np.conj(ops.Lp[0])) + Ep / np.conj(ops.Lp[0])
        out[..., 2 * n:3 * n] = ops.apply(np.exp(-ops.Ls * h), x[..., 2 * n:3 * n])
        out[..., 3 * n:] = ops.apply(np.exp(-np.conj(ops.Ls) * h), x[..., 3 * n:])
        return out

    if split:
        # the propagator carries the pump drive with its linear part
        base_drift = drift

        def drift(x, t):
            d = base_drift(x, t)
            d[..., :2 * n] += -Ep
            return d

    return SdeModel(
        name="spatial-dopo",
        dim=4 * n,
        n_noises=2 * n,
        drift=drift,
        noise_coupling=coupling,
        correction=lambda x, t: np.zeros_like(x),
        noise_product=product,
        linear_propagator=propagator if split else None,
        time_unit=1.0 / params.gamma_s,
    )


def eliminated_model(params: SpatialParams, split: bool = True) -> SdeModel:
    """
    Signal-only field equations with the pump adiabatically slaved

    A0[A] = L_p^-1 (Ep - chi A^2 / 2) makes the noise amplitude depend on the
    signal, so the Stratonovich correction is -(chi^2 / 4 dx) (L_p^-1)_ii A.

    Args:
        params: Cavity parameters
        split: Propagate diffraction and decay exactly in Fourier space

    Returns:
        SdeModel over (A, A+) with dim 2 n_grid
    """
    ops = SpectralOperators(params)
    n = params.n_grid
    chi, dx = params.chi, params.dx
    diag_inv = np.mean(ops.Lp_inv)

    def drift(x, t):
        a, ap = _split_signal(x, n)
        d_a = chi * ops.slaved_pump(a) * ap
        d_ap = chi * ops.slaved_pump_partner(ap) * a
        if not split:
            d_a = d_a - ops.apply(ops.Ls, a)
            d_ap = d_ap - ops.apply(np.conj(ops.Ls), ap)
        return np.concatenate([d_a, d_ap], axis=-1)

    def product(x, t, dW):
        a, ap = _split_signal(x, n)
        return np.concatenate([
            np.sqrt(chi * ops.slaved_pump(a) / dx) * dW[..., :n],
            np.sqrt(chi * ops.slaved_pump_partner(ap) / dx) * dW[..., n:],
        ], axis=-1)

    def coupling(x, t):
        a, ap = _split_signal(x, n)
        B = np.zeros(x.shape + (2 * n,), dtype=complex)
        idx = np.arange(n)
        B[..., idx, idx] = np.sqrt(chi * ops.slaved_pump(a) / dx)
        B[..., n + idx, n + idx] = np.sqrt(chi * ops.slaved_pump_partner(ap) / dx)
        return B

    def correction(x, t):
        a, ap = _split_signal(x, n)
        scale = -chi ** 2 / (4.0 * dx)
        return np.concatenate([scale * diag_inv * a, scale * np.conj(diag_inv) * ap], axis=-1)

    def propagator(x, h):
        a, ap = _split_signal(x, n)
        return np.concatenate([
            ops.apply(np.exp(-ops.Ls * h), a),
            ops.apply(np.exp(-np.conj(ops.Ls) * h), ap),
        ], axis=-1)

    return SdeModel(
        name="spatial-dopo-slaved",
        dim=2 * n,
        n_noises=2 * n,
        drift=drift,
        noise_coupling=coupling,
        correction=correction,
        noise_product=product,
        linear_propagator=propagator if split else None,
        time_unit=1.0 / params.gamma_s,
    )


def stationary_residual(params: SpatialParams, A: np.ndarray, ops: Optional[SpectralOperators] = None) -> np.ndarray:
    """-L_s A + chi A0[A] A* for the slaved-pump equations"""
    ops = ops or SpectralOperators(params)
    return -ops.apply(ops.Ls, A) + params.chi * ops.slaved_pump(A) * np.conj(A)


def _jacobian(params: SpatialParams, A: np.ndarray, ops: SpectralOperators) -> np.ndarray:
    chi = params.chi
    A0 = ops.slaved_pump(A)
    Ls = ops.circulant(ops.Ls)
    Lp_inv = ops.circulant(ops.Lp_inv)
    upper_left = -Ls - chi ** 2 * (np.conj(A)[:, None] * Lp_inv * A[None, :])
    lower_right = -np.conj(Ls) - chi ** 2 * (A[:, None] * np.conj(Lp_inv) * np.conj(A)[None, :])
    return np.block([
        [upper_left, np.diag(chi * A0)],
        [np.diag(chi * np.conj(A0)), lower_right],
    ])


def stripe_ansatz(params: SpatialParams, shift: float = 0.0) -> np.ndarray:
    """
    Single-harmonic stripe exp(i phi) a cos(k_c (x - shift)) of the far-detuned equations

    sin 2phi = -gamma_s / mu0, cos 2phi = +sqrt(1 - (gamma_s / mu0)^2) and
    a^2 = 4 (delta_s + gamma_s l_s^2 k_c^2 + mu0 cos 2phi) / (3 g) with g = chi^2 / (2 delta_p).
    """
    mu0 = params.chi * params.Ep / params.delta_p
    ratio = params.gamma_s / abs(mu0)
    if ratio >= 1.0:
        raise ConfigError(f"Parametric gain mu0={mu0:.4g} is below the decay rate, no pattern")
    phi = 0.5 * np.arcsin(-ratio)
    c = np.sqrt(1.0 - ratio ** 2)
    k_unit = 2.0 * np.pi / params.L_domain
    k_c = np.sqrt(max(-params.delta_s, 0.0) / (params.gamma_s * params.l_s ** 2))
    k_c = max(1, int(round(k_c / k_unit))) * k_unit
    g = params.chi ** 2 / (2.0 * params.delta_p)
    a2 = 4.0 * (params.delta_s + params.gamma_s * params.l_s ** 2 * k_c ** 2 + abs(mu0) * c) / (3.0 * g)
    if a2 <= 0:
        raise ConfigError(f"No stripe amplitude for {params}")
    return np.exp(1j * phi) * np.sqrt(a2) * np.cos(k_c * (params.x() - shift))


def localized_ansatz(params: SpatialParams, shift: float = 0.0) -> np.ndarray:
    """Bright sech-shaped structure exp(i phi) a sech(q (x - L/2 - shift)) of the far-detuned equations"""
    mu0 = params.chi * params.Ep / params.delta_p
    ratio = params.gamma_s / abs(mu0)
    if ratio >= 1.0:
        raise ConfigError(f"Parametric gain mu0={mu0:.4g} is below the decay rate, no pattern")
    phi = 0.5 * np.arcsin(-ratio)
    c = np.sqrt(1.0 - ratio ** 2)
    q2 = (params.delta_s + abs(mu0) * c) / (params.gamma_s * params.l_s ** 2)
    if q2 <= 0:
        raise ConfigError(f"No localized structure for {params}")
    g_eff = params.chi ** 2 / (2.0 * params.delta_p * params.gamma_s * params.l_s ** 2)
    a = np.sqrt(2.0 * q2 / g_eff)
    x = params.x() - 0.5 * params.L_domain - shift
    x = (x + 0.5 * params.L_domain) % params.L_domain - 0.5 * params.L_domain
    return np.exp(1j * phi) * a / np.cosh(np.sqrt(q2) * x)


def _trig_position(reference: np.ndarray, fields: np.ndarray, L: float, iterations: int = 6):
    """Per-row shift s in [0, L) maximizing Re sum conj(reference(x - s)) field(x), with the normalized peak"""
    fields = np.atleast_2d(fields)
    n = reference.shape[-1]
    dx = L / n
    k = 2.0 * np.pi * fft.fftfreq(n, d=dx)
    P = np.conj(fft.fft(reference)) * fft.fft(fields, axis=-1) / n
    if n % 2 == 0:
        P[..., n // 2] = 0.0
    corr = np.real(fft.ifft(P * n, axis=-1))
    idx = np.argmax(corr, axis=-1)

    s = np.empty(fields.shape[0])
    for row, i in enumerate(idx):
        offset, _ = quadratic_peak(corr[row], int(i))
        s[row] = (i + offset) * dx
    # Newton on the exact trigonometric interpolant
    for _ in range(iterations):
        e = np.exp(1j * np.outer(s, k))
        d1 = np.real(np.sum(1j * k * P * e, axis=-1))
        d2 = np.real(np.sum(-(k ** 2) * P * e, axis=-1))
        step = np.where(d2 < 0, -d1 / np.where(d2 < 0, d2, -1.0), 0.0)
        s = s + np.clip(step, -dx, dx)
    peak = np.real(np.sum(P * np.exp(1j * np.outer(s, k)), axis=-1))
    norm = np.sum(np.abs(reference) ** 2)
    return np.mod(s, L), peak / norm


def track_position(state, pattern: PatternSolution, params: SpatialParams) -> float:
    """
    Pattern position from the peak of the complex cross-correlation with the reference

    Args:
        state: FieldState1D or signal array A
        pattern: Reference pattern centred at x0
        params: Grid parameters

    Returns:
        Position in [0, L), NaN when the correlation peak is too weak (pattern lost)
    """
    A = state.A if isinstance(state, FieldState1D) else np.asarray(state)
    if A.shape[-1] != params.n_grid or pattern.Abar.shape[-1] != params.n_grid:
        raise GridError("State and pattern live on different grids")
    s, quality = _trig_position(pattern.Abar, A, params.L_domain)
    if quality[0] < TRACKING_MIN_QUALITY:
        logger.warning(f"Pattern lost: correlation quality {quality[0]:.3g}")
        return float("nan")
    return float(np.mod(s[0] + pattern.x0, params.L_domain))


def position_observable(
    pattern: PatternSolution, params: SpatialParams, full: bool = False
) -> Callable[[np.ndarray], np.ndarray]:
    """Batch observable returning the tracked position of each trajectory (NaN when lost)"""
    n = params.n_grid
    lo = 2 * n if full else 0

    def position(x):
        s, quality = _trig_position(pattern.Abar, x[..., lo:lo + n], params.L_domain)
        return np.where(quality >= TRACKING_MIN_QUALITY, np.mod(s + pattern.x0, params.L_domain), np.nan)
    return position


def dark_mode_observable(pattern: PatternSolution, params: SpatialParams, phi: float = np.pi / 2, full: bool = False):
    """
    Quadrature of the co-moving dark mode d/dx0 Abar(x - x0)

    The mode is normalized and re-centred on the tracked position of each
    state; X^phi = e^{-i phi} a_d + e^{i phi} a_d+. Its Y quadrature is the one
    selected by a local oscillator i d/dx0 A. States follow the slaved layout (A, A+)
    unless full is set.
    """
    n = params.n_grid
    lo = 2 * n if full else 0
    ops = SpectralOperators(params)
    mode = -ops.derivative(pattern.Abar)
    mode = mode / np.sqrt(np.sum(np.abs(mode) ** 2) * params.dx)

    def quadrature(x):
        a, ap = x[..., lo:lo + n], x[..., lo + n:lo + 2 * n]
        s, _ = _trig_position(pattern.Abar, a, params.L_domain)
        u = shift_field(mode, s, params.L_domain)
        ad = np.sum(np.conj(u) * a, axis=-1) * params.dx
        adp = np.sum(u * ap, axis=-1) * params.dx
        return np.exp(-1j * phi) * ad + np.exp(1j * phi) * adp
    return quadrature


def _center(params: SpatialParams, A: np.ndarray, phase: float) -> Tuple[np.ndarray, float]:
    """Shift A so that the maximum of its real profile sits at x = 0"""
    profile = np.real(A * np.exp(-1j * phase)).astype(complex)
    delta = np.zeros(params.n_grid, dtype=complex)
    delta[0] = 1.0
    # position of the maximum of the profile relative to a spike at the origin
    s, _ = _trig_position(delta, profile, params.L_domain)
    x_max = float(np.mod(s[0], params.L_domain))
    return shift_field(A, -x_max, params.L_domain), x_max


def pattern_solve(
    params: SpatialParams,
    ansatz: str = "stripe",
    shift: float = 0.0,
    center: bool = True,
    max_iter: int = 100,
    tol: float = NEWTON_TOL,
) -> PatternSolution:
    """
    Newton solve of the slaved-pump stationary equation on the grid

    Each step solves the doubled Jacobian on col(dA, dA*) by least squares,
    which handles the translation null direction.

    Args:
        params: Cavity parameters
        ansatz: "stripe" or "localized"
        shift: Translation applied to the ansatz
        center: Centre the maximum of the real profile at x0 = 0
        max_iter: Newton iteration limit
        tol: Residual tolerance relative to gamma_s max|A|

    Returns:
        PatternSolution with its residual history

    Raises:
        ConvergenceError: when the residual does not reach tol
    """
    ops = SpectralOperators(params)
    if ansatz == "stripe":
        A = stripe_ansatz(params, shift)
    elif ansatz == "localized":
        A = localized_ansatz(params, shift)
    else:
        raise ConfigError(f"Unknown ansatz '{ansatz}', use stripe or localized")

    residuals: List[float] = []
    for iteration in range(max_iter):
        F = stationary_residual(params, A, ops)
        scale = params.gamma_s * max(np.max(np.abs(A)), 1.0)
        residuals.append(float(np.max(np.abs(F)) / scale))
        logger.debug(f"Newton iteration {iteration}: residual {residuals[-1]:.3e}")
        if residuals[-1] < tol:
            break
        J = _jacobian(params, A, ops)
        step, *_ = linalg.lstsq(J, -np.concatenate([F, np.conj(F)]))
        A = A + 0.5 * (step[:params.n_grid] + np.conj(step[params.n_grid:]))
    else:
        raise ConvergenceError(
            f"Pattern Newton solve did not converge in {max_iter} iterations "
            f"(last residual {residuals[-1]:.3e})", residuals
        )

    if np.max(np.abs(A)) < 1e-6 * np.sqrt(params.Ep / params.chi):
        raise ConvergenceError("Newton solve collapsed onto the empty signal state", residuals)

    solution = PatternSolution(Abar=A, A0bar=ops.slaved_pump(A), beta=0.0, residual=residuals[-1], residuals=residuals)
    phase = solution.phase
    if center:
        A, _ = _center(params, A, phase)
        x0 = 0.0
    else:
        _, x0 = _center(params, A, phase)
    beta = abs(phase)
    solution = PatternSolution(
        Abar=A,
        A0bar=ops.slaved_pump(A),
        beta=beta,
        x0=x0,
        residual=float(np.max(np.abs(stationary_residual(params, A, ops))) / (params.gamma_s * np.max(np.abs(A)))),
        residuals=residuals,
    )
    logger.info(f"Pattern solved in {len(residuals)} iterations: {solution}")
    return solution


def full_residual(params: SpatialParams, pattern: PatternSolution) -> float:
    """Relative residual of the pattern with its slaved pump under the full four-field drift"""
    state = FieldState1D(pattern.A0bar, np.conj(pattern.A0bar), pattern.Abar, np.conj(pattern.Abar))
    drift = spatial_model(params).drift(state.to_vector(), 0.0)
    scale = params.gamma_s * max(np.max(np.abs(pattern.Abar)), np.max(np.abs(pattern.A0bar)))
    return float(np.max(np.abs(drift)) / scale)


def linear_operator(params: SpatialParams, pattern: PatternSolution) -> np.ndarray:
    """Discretized linearization acting on col(b, b+), shape (2 n_grid, 2 n_grid)"""
    return _jacobian(params, pattern.Abar, SpectralOperators(params))


def goldstone_mode(params: SpatialParams, pattern: PatternSolution) -> np.ndarray:
    """v0 = d/dx col(Abar, Abar*)"""
    ops = SpectralOperators(params)
    return np.concatenate([ops.derivative(pattern.Abar), ops.derivative(np.conj(pattern.Abar))])


def eigensystem(op: np.ndarray, dx: float = 1.0, cluster_tol: float = 1e-4, pairing_tol: float = 1e-7):
    """
    Biorthonormal eigensystem of a linear operator

    L v_i = lambda_i v_i, L^H w_i = conj(lambda_i) w_i and <w_i, v_j> = delta_ij
    with <w, v> = dx sum conj(w) v. Degenerate clusters are re-paired block-wise.

    Returns:
        (eigenvalues, right, left) sorted by decreasing real part, vectors in columns

    Raises:
        DefectiveSpectrumError: when the left and right sets cannot be paired
    """
    values, left, right = linalg.eig(op, left=True, right=True)
    order = np.argsort(-values.real, kind="stable")
    values, left, right = values[order], left[:, order], right[:, order]

    right = right / np.sqrt(np.sum(np.abs(right) ** 2, axis=0) * dx)
    n = len(values)
    done = np.zeros(n, dtype=bool)
    for i in range(n):
        if done[i]:
            continue
        cluster = np.where(np.abs(values - values[i]) < cluster_tol * max(1.0, abs(values[i])))[0]
        cluster = cluster[~done[cluster]]
        M = left[:, cluster].conj().T @ right[:, cluster] * dx
        try:
            left[:, cluster] = left[:, cluster] @ np.linalg.inv(M).conj().T
        except np.linalg.LinAlgError as e:
            raise DefectiveSpectrumError(f"Eigenvalue cluster at {values[i]:.6g} is defective") from e
        done[cluster] = True

    pairing = left.conj().T @ right * dx - np.eye(n)
    residual = float(np.max(np.abs(pairing)))
    if residual > pairing_tol:
        raise DefectiveSpectrumError(f"Biorthonormal pairing residual {residual:.3e} exceeds {pairing_tol}")
    logger.debug(f"Eigensystem of size {n} paired with residual {residual:.3e}")
    return values, right, left


def solve_eigensystem(params: SpatialParams, pattern: PatternSolution) -> PatternSolution:
    """Attach the biorthonormal eigensystem to the pattern"""
    values, right, left = eigensystem(linear_operator(params, pattern), dx=params.dx)
    pattern.eigenvalues, pattern.right, pattern.left = values, right, left
    return pattern


def adjoint_goldstone(params: SpatialParams, pattern: PatternSolution) -> np.ndarray:
    """Adjoint null vector w0 normalized by <w0, v0> = 1"""
    if pattern.eigenvalues is None:
        solve_eigensystem(params, pattern)
    i0 = int(np.argmin(np.abs(pattern.eigenvalues)))
    w0 = pattern.left[:, i0]
    v0 = goldstone_mode(params, pattern)
    return w0 / np.conj(np.sum(np.conj(w0) * v0) * params.dx)


def projection_diffusion(params: SpatialParams, pattern: PatternSolution) -> float:
    """
    Position diffusion rate of the Goldstone projection,
    D = chi Re int [conj(w0_1)^2 A0 + conj(w0_2)^2 A0*] dx = 2 chi Re int w0_1^2 A0* dx
    """
    w0 = adjoint_goldstone(params, pattern)
    n = params.n_grid
    a0 = pattern.A0bar
    integrand = np.conj(w0[:n]) ** 2 * a0 + np.conj(w0[n:]) ** 2 * np.conj(a0)
    return float(params.chi * np.real(np.sum(integrand) * params.dx))


def diffusion_coefficient(params: SpatialParams, pattern: PatternSolution) -> float:
    """D = 2 chi kappa^-2 Re int w0^2 A0* dx, the scaled-variable form"""
    return projection_diffusion(params, pattern) / params.kappa ** 2


def uniform_stability_scan(params: SpatialParams, k: np.ndarray) -> np.ndarray:
    """Largest growth rate of perturbations of the empty signal state at each wavenumber k"""
    k = np.asarray(k, dtype=float)
    a0 = params.Ep / (params.gamma_p + 1j * params.delta_p)
    Ls = params.gamma_s + 1j * params.delta_s + 1j * params.gamma_s * params.l_s ** 2 * k ** 2
    rates = np.empty(len(k))
    for i, ls in enumerate(Ls):
        M = np.array([[-ls, params.chi * a0], [params.chi * np.conj(a0), -np.conj(ls)]])
        rates[i] = np.max(np.linalg.eigvals(M).real)
    return rates


def pattern_regime(params: SpatialParams) -> Dict[str, float]:
    """Most unstable allowed wavenumber and whether stripes form there"""
    k_unit = 2.0 * np.pi / params.L_domain
    k = k_unit * np.arange(params.n_grid // 2 + 1)
    rates = uniform_stability_scan(params, k)
    i = int(np.argmax(rates))
    return {"k_max": float(k[i]), "growth": float(rates[i]), "pattern_forming": int(rates[i] > 0 and k[i] > 0)}


def position_variance(result: EnsembleResult, params: SpatialParams, quad="x0") -> np.ndarray:
    """Ensemble variance of unwrapped position paths; lost trajectories are excluded"""
    paths = np.real(result.series(quad))
    lost = np.any(~np.isfinite(paths), axis=-1)
    if np.any(lost):
        logger.warning(f"{np.count_nonzero(lost)} trajectories lost the pattern and are excluded")
    paths = unwrap_paths(paths[~lost], period=params.L_domain)
    return ensemble_variance(paths)


def pattern_initial_state(pattern: PatternSolution) -> np.ndarray:
    """Slaved-model state (A, A+) sitting on the pattern"""
    return np.concatenate([pattern.Abar, np.conj(pattern.Abar)])
