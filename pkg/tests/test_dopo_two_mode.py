#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Tests for the two-transverse-mode DOPO
"""

from types import SimpleNamespace

import numpy as np
import pytest
from scipy.integrate import solve_ivp

import dopo_two_mode as dopo
from errors import ConfigError, NumericalError, UndefinedOrientationError
from models.optics_model import DopoParams, DopoState, SeedParams
from models.sde_model import TrajectoryConfig
from stochastic_engine import noise_spectrum, run_ensemble, windowed_spectrum


def test_params_from_sigma(dopo_params):
    assert dopo_params.sigma == pytest.approx(2.0)
    assert dopo_params.d == pytest.approx(1e-6)
    assert dopo_params.rho2 == pytest.approx((dopo_params.Ep - dopo_params.E_th) / dopo_params.chi)


@pytest.mark.parametrize("kwargs", [{"chi": 0.0}, {"Ep": -1.0}, {"gamma_s": -1.0}])
def test_params_validation(kwargs):
    with pytest.raises(ConfigError):
        DopoParams(**kwargs)


def test_steady_state_below_and_above_threshold():
    below = dopo.classical_steady_state(DopoParams.from_sigma(0.5, 1e-6))
    assert not below.broken and below.rho == 0.0
    with pytest.raises(ConfigError):
        dopo.broken_state(DopoParams.from_sigma(0.5, 1e-6))
    above = dopo.classical_steady_state(DopoParams.from_sigma(3.0, 1e-6))
    assert above.broken


@pytest.mark.parametrize("theta", [0.0, 0.4, 2.5])
def test_broken_state_is_stationary(dopo_params, theta):
    x = dopo.broken_state(dopo_params, theta).to_vector()
    drift = dopo.dopo_model(dopo_params).drift(x, 0.0)
    np.testing.assert_allclose(drift, 0.0, atol=1e-8)
    assert dopo.orientation_of(x) == pytest.approx(theta)


def test_drift_is_rotation_equivariant(dopo_params, rng):
    x = rng.normal(size=6) + 1j * rng.normal(size=6)
    drift = dopo.dopo_model(dopo_params).drift
    theta = 0.83
    np.testing.assert_allclose(
        drift(dopo.rotate_state(x, theta), 0.0), dopo.rotate_state(drift(x, 0.0), theta), atol=1e-10
    )


def test_noise_product_matches_coupling(dopo_params, rng):
    model = dopo.dopo_model(dopo_params)
    x = dopo.broken_state(dopo_params, 0.3).to_vector()[None, :]
    dW = rng.normal(size=(1, 4))
    B = model.noise_coupling(x, 0.0)
    np.testing.assert_allclose(model.noise_product(x, 0.0, dW), np.sum(B * dW[:, None, :], axis=-1))


def test_orientation_undefined_for_empty_mode():
    with pytest.raises(UndefinedOrientationError):
        dopo.orientation_of(DopoState.classical(1.0, 0.0, 1.0))


def test_dark_quadratures_vanish_on_classical_state(dopo_params):
    x = dopo.broken_state(dopo_params, 1.1).to_vector()
    X, Y = dopo.dark_quadrature_observables(x, 1.1)
    assert abs(X) < 1e-9 and abs(Y) < 1e-9


def test_dark_spectrum_closed_form():
    np.testing.assert_allclose(dopo.dark_spectrum_analytic([0.0, 2.0, 1e6]), [0.0, 0.5, 1.0], atol=1e-9)


def test_theta_variance_needs_threshold():
    with pytest.raises(ConfigError):
        dopo.theta_variance_analytic(DopoParams.from_sigma(0.9, 1e-6), 1.0)


def test_numeric_detection_time_matches_optimum():
    sigma, d = np.sqrt(2.0), 1e-6
    t_num, v_num = dopo.minimize_detection_time(sigma, d)
    assert t_num == pytest.approx(dopo.optimal_detection_time(sigma, d), rel=1e-5)
    assert 0.0 < v_num < 0.05


def test_fixed_lo_diverges_at_zero_frequency_off_quadrature():
    with pytest.raises(NumericalError):
        dopo.fixed_lo_spectrum_analytic(0.0, 0.0, 100.0, 1e-6, 2.0)
    with pytest.raises(ConfigError):
        dopo.fixed_lo_spectrum_analytic(1.0, 0.0, -1.0, 1e-6, 2.0)


def test_phase_error_degrades_fixed_lo_squeezing():
    sigma, d = np.sqrt(2.0), 1e-6
    _, v_aligned = dopo.fixed_lo_optimum(sigma, d, np.pi / 2)
    _, v_tilted = dopo.fixed_lo_optimum(sigma, d, np.radians(80.0))
    assert v_aligned < v_tilted <= 1.0 + 1e-9


@pytest.mark.parametrize("sigma,I_s", [(1.5, 1e-3), (2.0, 0.1), (4.0, 1.0)])
def test_seeded_root_solves_cubic(sigma, I_s):
    roots = dopo.seeded_roots(sigma, I_s)
    I10, stable = roots[-1]
    assert stable
    assert (sigma - 1.0 - 0.5 * I10) ** 2 * I10 == pytest.approx(I_s, rel=1e-8)
    assert I10 > 2.0 * (sigma - 1.0)


@pytest.mark.parametrize("I_s,n_roots", [(1e-3, 3), (0.03, 3), (0.05, 1), (0.1, 1)])
def test_seeded_branch_count(I_s, n_roots):
    # the cubic's local maximum at sigma = 1.5 sits at I_s = 1/27
    roots = dopo.seeded_roots(1.5, I_s)
    assert len(roots) == n_roots
    assert [stable for _, stable in roots] == [False] * (n_roots - 1) + [True]


def test_seeded_spectrum_at_zero_frequency():
    q = dopo.seeded_q(2.0, dopo.seeded_steady_state(2.0, 0.1))
    assert float(dopo.seeded_dark_spectrum(0.0, q)) == pytest.approx(((1.0 - q) / (1.0 + q)) ** 2)


def test_seed_intensity_round_trip(dopo_params):
    seed = SeedParams.from_intensity(0.25, dopo_params)
    assert seed.intensity(dopo_params) == pytest.approx(0.25)


def test_mean_field_reaches_seeded_root():
    params = DopoParams.from_sigma(2.0, 1e-6)
    seed = SeedParams.from_intensity(0.1, params)
    assert dopo.seeded_mean_field_intensity(params, seed) == pytest.approx(
        dopo.seeded_steady_state(2.0, 0.1), rel=1e-6
    )


@pytest.mark.slow
def test_orientation_diffuses_at_predicted_rate():
    params = DopoParams.from_sigma(2.0, 1e-3)
    cfg = TrajectoryConfig(dt=0.01, t_end=20.0, record_stride=50, seed=9)
    result = run_ensemble(
        dopo.dopo_model(params), cfg, 1000, {"theta": dopo.orientation_observable()},
        initial_state=dopo.broken_state(params).to_vector(),
    )
    fit = dopo.fit_diffusion(result.time_grid, dopo.orientation_variance(result), t_min=2.0)
    assert fit.slope == pytest.approx(params.d / (params.sigma - 1.0), rel=0.15)
    assert fit.r2 > 0.99


@pytest.mark.slow
def test_co_rotating_dark_mode_is_squeezed():
    params = DopoParams.from_sigma(np.sqrt(2.0), 1e-6)
    cfg = TrajectoryConfig(dt=0.01, t_end=110.0, record_stride=5, seed=4)
    result = run_ensemble(
        dopo.dopo_model(params), cfg, 2000, {"Y_d": dopo.dark_quadrature_observable(np.pi / 2)},
        initial_state=dopo.broken_state(params).to_vector(),
    )
    omega = np.array([0.0, 0.5, 1.0, 2.0, 4.0])
    spectrum = noise_spectrum(result, "Y_d", 1.0, omega, t_transient=10.0, segment_time=25.0)
    np.testing.assert_allclose(spectrum.values, dopo.dark_spectrum_analytic(omega), atol=0.05)


def test_seed_breaks_orientation_symmetry(dopo_params, rng):
    x = rng.normal(size=6) + 1j * rng.normal(size=6)
    free = dopo.seeded_model(dopo_params, SeedParams(Es=0.0)).drift
    np.testing.assert_allclose(free(x, 0.0), dopo.dopo_model(dopo_params).drift(x, 0.0))
    seeded = dopo.seeded_model(dopo_params, SeedParams.from_intensity(0.1, dopo_params)).drift
    theta = 0.6
    rotated = seeded(dopo.rotate_state(x, theta), 0.0)
    assert not np.allclose(rotated, dopo.rotate_state(seeded(x, 0.0), theta))


def test_mean_field_flow_relaxes_to_broken_state(dopo_params):
    rho = dopo.classical_steady_state(dopo_params).rho
    alpha0 = dopo_params.gamma_s / dopo_params.chi
    _, z = dopo.integrate_mean_field(dopo_params, (0.9 * alpha0, 0.8 * rho, 0.8 * rho), 200.0)
    assert abs(z[-1, 1]) == pytest.approx(rho, rel=1e-6)
    assert abs(z[-1, 0]) == pytest.approx(alpha0, rel=1e-6)


def test_photon_observables_on_broken_state(dopo_params):
    rho = dopo.classical_steady_state(dopo_params).rho
    x = dopo.broken_state(dopo_params, 0.7).to_vector()[None, :]
    observables = dopo.dopo_observables(dopo_params)
    assert abs(observables["n_diff"](x)[0]) < 1e-9 * rho ** 2
    assert observables["n_plus"](x)[0].real == pytest.approx(rho ** 2)


def test_lossless_flow_conserves_angular_momentum():
    params = SimpleNamespace(Ep=0.0, gamma_p=0.0, gamma_s=0.0, chi=0.5)
    start = np.array([0.3 + 0.1j, 1.0 + 0.2j, 0.4 - 0.5j])
    sol = solve_ivp(
        dopo.mean_field_rhs, (0.0, 10.0), np.concatenate([start.real, start.imag]),
        args=(params, None), method="DOP853", rtol=1e-11, atol=1e-13, t_eval=np.linspace(0.0, 10.0, 50),
    )
    z = sol.y[:3] + 1j * sol.y[3:]
    difference = np.abs(z[1]) ** 2 - np.abs(z[2]) ** 2
    np.testing.assert_allclose(difference, difference[0], atol=1e-8)
    assert np.ptp(np.abs(z[1]) ** 2) > 1e-2


@pytest.mark.slow
def test_fixed_frame_anti_squeezing_grows_with_record_length():
    params = DopoParams.from_sigma(2.0, 1e-3)
    cfg = TrajectoryConfig(dt=0.01, t_end=60.0, record_stride=10, seed=5)
    result = run_ensemble(
        dopo.dopo_model(params), cfg, 128, {"X_d": dopo.dark_quadrature_observable(0.0, theta_ref=0.0)},
        initial_state=dopo.broken_state(params).to_vector(),
    )
    short = noise_spectrum(result, "X_d", 1.0, [0.0], t_transient=0.0, segment_time=5.0)
    full = noise_spectrum(result, "X_d", 1.0, [0.0], t_transient=0.0)
    assert short.values[0] > 1.0
    assert full.values[0] > 3.0 * short.values[0]


@pytest.mark.slow
def test_twin_beam_intensity_difference_is_squeezed():
    params = DopoParams.from_sigma(2.0, 1e-6)
    cfg = TrajectoryConfig(dt=0.01, t_end=60.0, record_stride=5, seed=6)
    result = run_ensemble(
        dopo.dopo_model(params), cfg, 256, {"n_diff": dopo.intensity_difference_observable(params)},
        initial_state=dopo.broken_state(params).to_vector(),
    )
    spectrum = noise_spectrum(result, "n_diff", 1.0, [0.0, 4.0], t_transient=10.0, segment_time=25.0)
    assert spectrum.values[0] + 3.0 * spectrum.stderr[0] < 1.0
    assert spectrum.values[0] < spectrum.values[1]


@pytest.mark.slow
def test_frozen_lo_windowed_spectrum_matches_closed_form():
    sigma, d = np.sqrt(2.0), 1e-3
    params = DopoParams.from_sigma(sigma, d)
    t_opt = dopo.optimal_detection_time(sigma, d)
    cfg = TrajectoryConfig(dt=0.01, t_end=10.0 + 6.0 * t_opt, record_stride=10, seed=7)
    result = run_ensemble(
        dopo.dopo_model(params), cfg, 800, {"Y": dopo.dark_quadrature_observable(np.pi / 2, theta_ref=0.0)},
        initial_state=dopo.broken_state(params).to_vector(),
    )
    spectrum = windowed_spectrum(result, "Y", t_opt, 1.0, [0.0], t_transient=10.0)
    analytic = float(dopo.fixed_lo_spectrum_analytic(0.0, np.pi / 2, t_opt, d, sigma))
    assert spectrum.stderr[0] < 0.1
    assert abs(spectrum.values[0] - analytic) < 3.0 * spectrum.stderr[0] + 0.15 * analytic
