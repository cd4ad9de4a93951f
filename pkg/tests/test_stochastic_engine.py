#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Tests for the stochastic engine: midpoint stepping, ensembles and spectra
"""

import numpy as np
import pytest

from errors import ConfigError, DivergenceError, SeriesTooShortError
from models.sde_model import SdeModel, TrajectoryConfig
from stochastic_engine import (
    frozen_model,
    noise_spectrum,
    ornstein_uhlenbeck_model,
    run_ensemble,
    step_semi_implicit,
    stratonovich_correction,
    trajectory_generator,
    windowed_spectrum,
    windowed_variance,
)


def _identity(x):
    return x[..., 0]


def _linear_decay_model():
    return SdeModel(
        name="decay",
        dim=1,
        n_noises=1,
        drift=lambda x, t: -x,
        noise_coupling=lambda x, t: np.zeros(x.shape + (1,), dtype=complex),
    )


def test_midpoint_step_converges_to_implicit_midpoint():
    h = 0.1
    x1 = step_semi_implicit(np.array([1.0 + 0j]), _linear_decay_model(), h, np.zeros(1), iterations=60)
    assert x1[0] == pytest.approx((1.0 - h / 2) / (1.0 + h / 2), abs=1e-12)


def test_step_rejects_wrong_noise_width():
    with pytest.raises(ConfigError):
        step_semi_implicit(np.zeros(1), _linear_decay_model(), 0.1, np.zeros(3))


def test_finite_difference_correction_matches_analytic():
    model = SdeModel(
        name="multiplicative",
        dim=1,
        n_noises=1,
        drift=lambda x, t: np.zeros_like(x),
        noise_coupling=lambda x, t: x[..., None],
    )
    x = np.array([[0.3 + 0.2j], [2.0 - 1.0j]])
    np.testing.assert_allclose(stratonovich_correction(model, x, 0.0), 0.5 * x, rtol=1e-6)


def test_trajectory_streams_are_independent_of_order():
    a = trajectory_generator(7, 3).standard_normal(5)
    trajectory_generator(7, 2).standard_normal(5)
    b = trajectory_generator(7, 3).standard_normal(5)
    np.testing.assert_array_equal(a, b)
    assert not np.allclose(a, trajectory_generator(7, 4).standard_normal(5))


def test_records_do_not_depend_on_batching():
    model = ornstein_uhlenbeck_model()
    cfg = TrajectoryConfig(dt=0.01, t_end=2.0, record_stride=10, seed=11)
    serial = run_ensemble(model, cfg, 30, {"x": _identity}, batch_size=30, workers=1)
    threaded = run_ensemble(model, cfg, 30, {"x": _identity}, batch_size=7, workers=3)
    np.testing.assert_array_equal(serial.records, threaded.records)


def test_ornstein_uhlenbeck_stationary_variance():
    cfg = TrajectoryConfig(dt=0.01, t_end=10.0, record_stride=50, seed=3)
    result = run_ensemble(ornstein_uhlenbeck_model(gamma=1.0, q=1.0), cfg, 400, {"x": _identity})
    final = np.real(result.series("x")[:, -1])
    assert np.var(final) == pytest.approx(0.5, abs=0.12)
    assert result.time_grid[-1] == pytest.approx(10.0)


def test_ornstein_uhlenbeck_spectrum_is_lorentzian():
    cfg = TrajectoryConfig(dt=0.01, t_end=110.0, record_stride=5, seed=5)
    result = run_ensemble(ornstein_uhlenbeck_model(gamma=1.0, q=1.0), cfg, 256, {"x": _identity})
    omega = np.array([0.0, 1.0, 3.0])
    spectrum = noise_spectrum(result, "x", 1.0, omega, t_transient=10.0, segment_time=25.0)
    expected = 1.0 + 2.0 / (1.0 + omega ** 2)
    np.testing.assert_allclose(spectrum.values - 1.0, expected - 1.0, rtol=0.15)
    assert spectrum.n_traj == 256


def test_frozen_records_give_shot_noise():
    cfg = TrajectoryConfig(dt=0.1, t_end=20.0, record_stride=1)
    result = run_ensemble(frozen_model(2), cfg, 4, {"x": _identity}, initial_state=np.array([1.0, 2.0]))
    np.testing.assert_array_equal(result.series("x"), np.ones((4, cfg.n_records)))
    spectrum = noise_spectrum(result, "x", 1.0, [0.0, 1.0], t_transient=0.0)
    np.testing.assert_allclose(spectrum.values, 1.0)


def test_spectrum_needs_records_after_transient():
    cfg = TrajectoryConfig(dt=0.1, t_end=5.0)
    result = run_ensemble(ornstein_uhlenbeck_model(), cfg, 2, {"x": _identity})
    with pytest.raises(SeriesTooShortError):
        noise_spectrum(result, "x", 1.0, [0.0], t_transient=10.0)


def test_windowed_variance_below_stationary_value():
    cfg = TrajectoryConfig(dt=0.01, t_end=30.0, record_stride=10, seed=2)
    result = run_ensemble(ornstein_uhlenbeck_model(), cfg, 50, {"x": _identity})
    value = windowed_variance(result, "x", T=5.0, t_transient=5.0)
    assert 0.0 < value < 0.5


def test_all_diverged_raises():
    explosive = SdeModel(
        name="explosive",
        dim=1,
        n_noises=1,
        drift=lambda x, t: 10.0 * x ** 3,
        noise_coupling=lambda x, t: np.zeros(x.shape + (1,), dtype=complex),
    )
    cfg = TrajectoryConfig(dt=0.01, t_end=1.0)
    with pytest.raises(DivergenceError):
        run_ensemble(explosive, cfg, 3, {"x": _identity}, initial_state=np.array([10.0]))


@pytest.mark.parametrize("kwargs", [{"dt": 0.0}, {"t_end": 0.001, "dt": 0.01}, {"record_stride": 0}, {"seed": -1}])
def test_trajectory_config_validation(kwargs):
    with pytest.raises(ConfigError):
        TrajectoryConfig(**kwargs)


def test_windowed_spectrum_of_frozen_records_is_shot_noise():
    cfg = TrajectoryConfig(dt=0.1, t_end=20.0, record_stride=1)
    result = run_ensemble(frozen_model(1), cfg, 3, {"x": _identity}, initial_state=np.array([0.5]))
    spectrum = windowed_spectrum(result, "x", T=5.0, gamma_m=1.0, omega_grid=[0.0, 2.0])
    np.testing.assert_allclose(spectrum.values, 1.0)
    assert spectrum.n_traj == 3
