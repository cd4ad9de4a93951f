#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Stochastic Engine module
Handles semi-implicit integration of complex Ito SDE ensembles and the
noise-spectrum statistics computed from their records
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, Mapping, Optional, Sequence, Union

import numpy as np
from numpy.random import Generator, Philox, SeedSequence
from scipy import signal

from errors import ConfigError, DivergenceError, SeriesTooShortError
from models.sde_model import EnsembleResult, SdeModel, SpectrumEstimate, TrajectoryConfig

logger = logging.getLogger(__name__)

# Ensembles with more diverged trajectories than this fraction are rejected
DIVERGENCE_TOLERANCE = 0.01
# Noise increments are drawn this many steps at a time per trajectory
NOISE_CHUNK = 256
FD_RELATIVE_STEP = 1e-6

Observable = Callable[[np.ndarray], np.ndarray]


def noise_increment(model: SdeModel, x: np.ndarray, t: float, dW: np.ndarray) -> np.ndarray:
    """B(x, t) dW for a batch of states"""
    if model.n_noises == 0:
        return np.zeros_like(x)
    if model.noise_product is not None:
        return model.noise_product(x, t, dW)
    B = model.noise_coupling(x, t)
    return np.sum(B * dW[..., None, :], axis=-1)


def stratonovich_correction(model: SdeModel, x: np.ndarray, t: float) -> np.ndarray:
    """
    Compute 1/2 sum_k (dB_k/dx) B_k

    Falls back to central differences when the model has no analytic correction.
    """
    if model.n_noises == 0:
        return np.zeros_like(x)
    if model.correction is not None:
        return model.correction(x, t)

    B = model.noise_coupling(x, t)
    corr = np.zeros_like(x)
    for j in range(model.dim):
        h = FD_RELATIVE_STEP * np.maximum(np.abs(x[..., j]), 1.0)
        xp = x.copy()
        xm = x.copy()
        xp[..., j] += h
        xm[..., j] -= h
        dB = (model.noise_coupling(xp, t) - model.noise_coupling(xm, t)) / (2.0 * h[..., None, None])
        corr += np.sum(dB * B[..., j, None, :], axis=-1)
    return 0.5 * corr


def stratonovich_drift(model: SdeModel, x: np.ndarray, t: float) -> np.ndarray:
    """a_S = a - 1/2 sum_k (dB_k/dx) B_k"""
    return model.drift(x, t) - stratonovich_correction(model, x, t)


def step_semi_implicit(
    state: np.ndarray,
    model: SdeModel,
    dt: float,
    dW: np.ndarray,
    t: float = 0.0,
    iterations: int = 3,
) -> np.ndarray:
    """
    Advance states by one semi-implicit midpoint step

    Solves x_mid = x + 1/2 [a_S(x_mid) dt + B(x_mid) dW] by fixed-point
    iteration and returns 2 x_mid - x.

    Args:
        state: Complex states, shape (dim,) or (batch, dim)
        model: The SDE model
        dt: Step in model time
        dW: Real Wiener increments with variance dt, shape (n_noises,) or (batch, n_noises)
        t: Model time at the start of the step
        iterations: Number of fixed-point passes

    Returns:
        Updated states with the shape of state
    """
    x = np.asarray(state, dtype=complex)
    dW = np.asarray(dW, dtype=float)
    if dW.shape[-1] != model.n_noises:
        raise ConfigError(
            f"Model '{model.name}' expects {model.n_noises} noise channels, got {dW.shape[-1]}"
        )

    t_mid = t + 0.5 * dt
    x_mid = x
    for _ in range(iterations):
        increment = stratonovich_drift(model, x_mid, t_mid) * dt + noise_increment(model, x_mid, t_mid, dW)
        x_mid = x + 0.5 * increment
    return 2.0 * x_mid - x


def trajectory_generator(seed: int, index: int) -> Generator:
    """Counter-based stream of trajectory `index`, independent of any schedule"""
    return Generator(Philox(SeedSequence(seed, spawn_key=(index,))))


def _as_observable_map(observables: Union[Mapping[str, Observable], Sequence[Observable]]) -> Dict[str, Observable]:
    if isinstance(observables, Mapping):
        return dict(observables)
    return {f"obs{i}": fn for i, fn in enumerate(observables)}


def _initial_batch(initial_state, indices: np.ndarray, dim: int) -> np.ndarray:
    if callable(initial_state):
        x0 = np.stack([np.asarray(initial_state(int(i)), dtype=complex) for i in indices])
    else:
        x0 = np.broadcast_to(np.asarray(initial_state, dtype=complex), (len(indices), dim)).copy()
    if x0.shape != (len(indices), dim):
        raise ConfigError(f"Initial state has shape {x0.shape[1:]}, model needs ({dim},)")
    return x0


class EnsembleRunner:
    """
    Class that integrates batches of independent trajectories

    Trajectory i always draws from its own Philox stream seeded by (seed, i),
    so the records do not depend on batch size or worker count.
    """

    def __init__(self, model: SdeModel, cfg: TrajectoryConfig, observables: Dict[str, Observable]):
        self.model = model
        self.cfg = cfg
        self.observables = observables
        self.names = list(observables)
        self.dt_model = cfg.dt * model.time_unit
        logger.info(f"Ensemble runner initialized for {model} with {cfg}")

    def _record(self, x: np.ndarray) -> np.ndarray:
        return np.stack([np.asarray(fn(x), dtype=complex) for fn in self.observables.values()], axis=1)

    def _step(self, x: np.ndarray, t: float, dW: np.ndarray) -> np.ndarray:
        model = self.model
        h = self.dt_model
        if model.linear_propagator is None:
            return step_semi_implicit(x, model, h, dW, t, self.cfg.midpoint_iterations)
        x = model.linear_propagator(x, 0.5 * h)
        x = step_semi_implicit(x, model, h, dW, t, self.cfg.midpoint_iterations)
        return model.linear_propagator(x, 0.5 * h)

    def run_batch(self, indices: np.ndarray, initial_state):
        """
        Integrate one batch of trajectories

        Returns:
            Tuple of records (batch, n_obs, n_records) and the diverged mask
        """
        cfg = self.cfg
        model = self.model
        generators = [trajectory_generator(cfg.seed, int(i)) for i in indices]
        x = _initial_batch(initial_state, indices, model.dim)
        batch = len(indices)

        records = np.empty((batch, len(self.names), cfg.n_records), dtype=complex)
        records[:, :, 0] = self._record(x)
        diverged = np.zeros(batch, dtype=bool)
        sqrt_dt = np.sqrt(self.dt_model)

        step = 0
        while step < cfg.n_steps:
            chunk = min(NOISE_CHUNK, cfg.n_steps - step)
            dW = np.stack([g.standard_normal((chunk, model.n_noises)) for g in generators], axis=1) * sqrt_dt
            for c in range(chunk):
                t = step * self.dt_model
                with np.errstate(all="ignore"):
                    x = self._step(x, t, dW[c])
                    bad = ~np.all(np.isfinite(x), axis=-1)
                if np.any(bad):
                    diverged |= bad
                    x[bad] = 0.0
                step += 1
                if step % cfg.record_stride == 0:
                    records[:, :, step // cfg.record_stride] = self._record(x)

        records[diverged] = np.nan
        return records, diverged


def run_ensemble(
    model: SdeModel,
    cfg: TrajectoryConfig,
    n_traj: int,
    observables: Union[Mapping[str, Observable], Sequence[Observable]],
    initial_state=None,
    batch_size: int = 256,
    workers: int = 1,
) -> EnsembleResult:
    """
    Integrate an ensemble of independent trajectories and record observables

    Args:
        model: The SDE model
        cfg: Time stepping and seed
        n_traj: Number of trajectories
        observables: Name -> function mapping a (batch, dim) state to (batch,)
        initial_state: Shared initial vector, or callable of the trajectory index
        batch_size: Trajectories integrated together
        workers: Threads integrating batches concurrently

    Returns:
        EnsembleResult with diverged trajectories masked out
    """
    if n_traj < 1:
        raise ConfigError(f"n_traj must be >= 1, got {n_traj}")
    if batch_size < 1:
        raise ConfigError(f"batch_size must be >= 1, got {batch_size}")
    if initial_state is None:
        initial_state = np.zeros(model.dim, dtype=complex)

    obs = _as_observable_map(observables)
    runner = EnsembleRunner(model, cfg, obs)
    records = np.empty((n_traj, len(obs), cfg.n_records), dtype=complex)
    diverged = np.zeros(n_traj, dtype=bool)
    batches = [np.arange(lo, min(lo + batch_size, n_traj)) for lo in range(0, n_traj, batch_size)]

    def work(indices: np.ndarray) -> None:
        rec, div = runner.run_batch(indices, initial_state)
        records[indices] = rec
        diverged[indices] = div
        logger.debug(f"Batch {indices[0]}..{indices[-1]} done, {np.count_nonzero(div)} diverged")

    if workers > 1 and len(batches) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, batches))
    else:
        for indices in batches:
            work(indices)

    n_div = int(np.count_nonzero(diverged))
    if n_div == n_traj:
        raise DivergenceError(f"All {n_traj} trajectories of model '{model.name}' diverged at dt={cfg.dt}")
    if n_div > DIVERGENCE_TOLERANCE * n_traj:
        raise DivergenceError(
            f"{n_div} of {n_traj} trajectories of model '{model.name}' diverged at dt={cfg.dt}, "
            f"more than {DIVERGENCE_TOLERANCE:.0%}"
        )
    if n_div:
        logger.warning(f"{n_div} of {n_traj} trajectories diverged and are excluded from averages")

    logger.info(f"Ensemble finished: {n_traj} trajectories, {cfg.n_records} records each")
    return EnsembleResult(
        records=records,
        time_grid=cfg.time_grid(),
        names=list(obs),
        diverged=diverged,
        model_name=model.name,
        dt=cfg.dt,
    )


def _post_transient(result: EnsembleResult, quad, t_transient: float) -> np.ndarray:
    """Fluctuation of the series about its ensemble mean, after the transient"""
    q = result.series(quad)
    keep = result.time_grid >= t_transient - 1e-12
    q = q[:, keep]
    return q - np.mean(q, axis=0, keepdims=True)


def noise_spectrum(
    result: EnsembleResult,
    quad,
    gamma_m: float,
    omega_grid,
    t_transient: float = 10.0,
    segment_time: Optional[float] = None,
) -> SpectrumEstimate:
    """
    Estimate V(omega) = 1 + 2 gamma_m int dtau C(tau) exp(-i omega tau)

    The normally ordered correlation is the stochastic one. Each trajectory's
    Hann-windowed cross-spectrum Q(omega) Q(-omega) is taken with
    scipy.signal.csd (Welch segments with 50% overlap) and averaged.

    Args:
        result: Ensemble records
        quad: Observable name or index
        gamma_m: Decay rate of the measured mode, in units of gamma_s
        omega_grid: Frequencies in units of gamma_s
        t_transient: Discarded initial time
        segment_time: Welch segment length; the full record when None

    Returns:
        SpectrumEstimate with per-point standard errors
    """
    omega_grid = np.atleast_1d(np.asarray(omega_grid, dtype=float))
    dt_rec = result.record_interval
    if dt_rec <= 0:
        raise SeriesTooShortError("Spectrum needs at least two records")

    dq = _post_transient(result, quad, t_transient)
    n_samples = dq.shape[1]
    nperseg = n_samples if segment_time is None else int(round(segment_time / dt_rec))
    min_samples = max(nperseg, 16)
    if n_samples < min_samples:
        required = t_transient + min_samples * dt_rec
        raise SeriesTooShortError(
            f"Record spans {result.time_grid[-1]:.4g}/gamma_s, spectrum needs at least {required:.4g}"
        )

    nyquist = np.pi / dt_rec
    if np.any(np.abs(omega_grid) > nyquist):
        raise SeriesTooShortError(
            f"Frequencies above the Nyquist limit {nyquist:.4g} need a smaller record stride"
        )

    freqs, cross = signal.csd(
        np.conj(dq), dq,
        fs=1.0 / dt_rec,
        window="hann",
        nperseg=nperseg,
        noverlap=nperseg // 2,
        detrend=False,
        return_onesided=False,
        scaling="density",
        axis=-1,
    )
    freqs = np.fft.fftshift(freqs)
    per_traj = 1.0 + 2.0 * gamma_m * np.real(np.fft.fftshift(cross, axes=-1))
    omegas = 2.0 * np.pi * freqs

    sampled = np.stack([np.interp(omega_grid, omegas, row) for row in per_traj])
    n = sampled.shape[0]
    values = np.mean(sampled, axis=0)
    stderr = np.std(sampled, axis=0, ddof=1) / np.sqrt(n) if n > 1 else np.zeros_like(values)
    logger.debug(f"Spectrum of '{quad}' from {n} trajectories, {n_samples} samples each")
    return SpectrumEstimate(omega_grid=omega_grid, values=values, stderr=stderr, n_traj=n)


def _windows(result: EnsembleResult, quad, T: float, t_transient: float) -> np.ndarray:
    dt_rec = result.record_interval
    if dt_rec <= 0:
        raise SeriesTooShortError("Windowed statistics need at least two records")
    dq = _post_transient(result, quad, t_transient)
    m = int(round(T / dt_rec))
    if m < 1:
        raise ConfigError(f"Window T={T} is shorter than the record interval {dt_rec}")
    if m > dq.shape[1]:
        raise SeriesTooShortError(
            f"Window T={T} exceeds the recorded span {dq.shape[1] * dt_rec:.4g} after the transient"
        )
    n_win = dq.shape[1] // m
    return dq[:, : n_win * m].reshape(dq.shape[0], n_win, m)


def windowed_variance(result: EnsembleResult, quad, T: float, t_transient: float = 0.0) -> float:
    """
    Normally ordered variance of the quadrature inside detection windows of length T

    Each window is demodulated by its own mean and the stochastic second
    moment is averaged over windows and trajectories. For positive-P records
    this is the normally ordered moment <:dX^2:>, so a squeezed quadrature
    gives a negative value; the measured variance is 1 plus this number.
    """
    w = _windows(result, quad, T, t_transient)
    dw = w - np.mean(w, axis=-1, keepdims=True)
    return float(np.real(np.mean(dw * dw)))


def windowed_spectrum(
    result: EnsembleResult,
    quad,
    T: float,
    gamma_m: float,
    omega_grid,
    t_transient: float = 0.0,
) -> SpectrumEstimate:
    """
    Finite-detection-time spectrum V_T(omega) = 1 + (2 gamma_m / T) <Q_T(omega) Q_T(-omega)>

    Q_T is the rectangular-window transform of the quadrature fluctuation over
    consecutive windows of length T.
    """
    omega_grid = np.atleast_1d(np.asarray(omega_grid, dtype=float))
    w = _windows(result, quad, T, t_transient)
    dt_rec = result.record_interval
    tau = np.arange(w.shape[-1]) * dt_rec
    phases = np.exp(-1j * np.outer(omega_grid, tau))
    q_plus = np.einsum("twj,oj->two", w, phases) * dt_rec
    q_minus = np.einsum("twj,oj->two", w, np.conj(phases)) * dt_rec
    per_traj = 1.0 + (2.0 * gamma_m / T) * np.real(np.mean(q_plus * q_minus, axis=1))
    n = per_traj.shape[0]
    values = np.mean(per_traj, axis=0)
    stderr = np.std(per_traj, axis=0, ddof=1) / np.sqrt(n) if n > 1 else np.zeros_like(values)
    return SpectrumEstimate(omega_grid=omega_grid, values=values, stderr=stderr, n_traj=n)


def ornstein_uhlenbeck_model(gamma: float = 1.0, q: float = 1.0) -> SdeModel:
    """
    Reference model dX = -gamma X dt + sqrt(q) dW with stationary variance q / (2 gamma)
    """
    amp = np.sqrt(q)

    def drift(x, t):
        return -gamma * x

    def coupling(x, t):
        return np.full(x.shape + (1,), amp, dtype=complex)

    return SdeModel(name="ornstein-uhlenbeck", dim=1, n_noises=1, drift=drift, noise_coupling=coupling)


def frozen_model(dim: int = 1) -> SdeModel:
    """Zero drift and zero noise"""
    return SdeModel(
        name="frozen",
        dim=dim,
        n_noises=1,
        drift=lambda x, t: np.zeros_like(x),
        noise_coupling=lambda x, t: np.zeros(x.shape + (1,), dtype=complex),
    )
