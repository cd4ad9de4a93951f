#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Tests for the one-dimensional pattern-forming DOPO
"""

import dataclasses

import numpy as np
import pytest

import spatial_dopo as spatial
from errors import ConfigError, GridError
from models.optics_model import SpatialParams
from models.sde_model import TrajectoryConfig
from stochastic_engine import run_ensemble, stratonovich_correction
from utils.statistics import fit_linear


@pytest.mark.parametrize("kwargs", [{"n_grid": 60}, {"delta_s": 0.0}, {"gamma_p": 0.0, "delta_p": 0.0}])
def test_params_validation(kwargs):
    with pytest.raises(ConfigError):
        SpatialParams(**kwargs)


def test_shift_by_one_cell_is_a_roll(spatial_params, rng):
    f = rng.normal(size=spatial_params.n_grid) + 1j * rng.normal(size=spatial_params.n_grid)
    shifted = spatial.shift_field(f, spatial_params.dx, spatial_params.L_domain)
    np.testing.assert_allclose(shifted, np.roll(f, 1), atol=1e-12)


def _shift_components(x, s, params):
    fields = x.reshape(-1, params.n_grid)
    return spatial.shift_field(fields, s, params.L_domain).reshape(x.shape)


@pytest.mark.parametrize("build", [
    spatial.spatial_model,
    lambda params: spatial.spatial_model(params, split=True),
    lambda params: spatial.eliminated_model(params, split=False),
    spatial.eliminated_model,
])
def test_drift_is_translation_equivariant(spatial_params, rng, build):
    model = build(spatial_params)
    x = 3.0 * (rng.normal(size=model.dim) + 1j * rng.normal(size=model.dim))
    s = 5 * spatial_params.dx
    np.testing.assert_allclose(
        model.drift(_shift_components(x, s, spatial_params), 0.0),
        _shift_components(model.drift(x, 0.0), s, spatial_params),
        atol=1e-9 * np.max(np.abs(model.drift(x, 0.0))),
    )


def test_empty_state_unstable_at_critical_wavenumber(spatial_params):
    regime = spatial.pattern_regime(spatial_params)
    assert regime["pattern_forming"] == 1
    assert regime["k_max"] == pytest.approx(1.0)
    assert regime["growth"] == pytest.approx(0.25)


def test_no_pattern_below_threshold():
    with pytest.raises(ConfigError):
        spatial.stripe_ansatz(SpatialParams(Ep=150.0))


def test_localized_ansatz_needs_positive_width(spatial_params):
    with pytest.raises(ConfigError):
        spatial.localized_ansatz(spatial_params)


def test_unknown_ansatz(spatial_params):
    with pytest.raises(ConfigError):
        spatial.pattern_solve(spatial_params, "hexagon")


def test_stripe_pattern_is_stationary(spatial_params, stripe_pattern):
    assert stripe_pattern.residual < 1e-9
    assert spatial.full_residual(spatial_params, stripe_pattern) < 1e-9
    assert 0.0 < stripe_pattern.beta < np.pi / 2
    assert stripe_pattern.x0 == 0.0
    assert int(np.argmax(stripe_pattern.profile)) in (0, 1, spatial_params.n_grid - 1)


def test_goldstone_mode_spans_kernel(spatial_params, stripe_pattern):
    op = spatial.linear_operator(spatial_params, stripe_pattern)
    v0 = spatial.goldstone_mode(spatial_params, stripe_pattern)
    relative = np.linalg.norm(op @ v0) / (np.linalg.norm(op, 2) * np.linalg.norm(v0))
    assert relative < 1e-8


def test_eigensystem_is_biorthonormal(spatial_params, stripe_pattern):
    values, right, left = stripe_pattern.eigenvalues, stripe_pattern.right, stripe_pattern.left
    pairing = left.conj().T @ right * spatial_params.dx
    np.testing.assert_allclose(pairing, np.eye(len(values)), atol=1e-7)
    assert np.min(np.abs(values)) < 1e-6
    assert np.all(np.diff(values.real) <= 1e-12)


def test_damped_partner_of_goldstone_mode(spatial_params, stripe_pattern):
    values = stripe_pattern.eigenvalues
    damped = values[np.argmin(np.abs(values + 2.0 * spatial_params.gamma_s))]
    assert damped.real == pytest.approx(-2.0 * spatial_params.gamma_s, rel=1e-3)


def test_adjoint_goldstone_normalization(spatial_params, stripe_pattern):
    w0 = spatial.adjoint_goldstone(spatial_params, stripe_pattern)
    v0 = spatial.goldstone_mode(spatial_params, stripe_pattern)
    assert np.sum(np.conj(w0) * v0) * spatial_params.dx == pytest.approx(1.0, abs=1e-10)


def test_projection_diffusion_is_positive(spatial_params, stripe_pattern):
    d_proj = spatial.projection_diffusion(spatial_params, stripe_pattern)
    assert np.isfinite(d_proj) and d_proj > 0
    assert spatial.diffusion_coefficient(spatial_params, stripe_pattern) == pytest.approx(
        d_proj / spatial_params.kappa ** 2
    )


def test_diffusion_scales_with_fourth_power_of_chi(spatial_params, stripe_pattern):
    # halving chi and doubling Ep keeps the gain and the pattern shape
    weak = SpatialParams(chi=spatial_params.chi / 2.0, Ep=2.0 * spatial_params.Ep)
    pattern = spatial.solve_eigensystem(weak, spatial.pattern_solve(weak, "stripe"))
    np.testing.assert_allclose(pattern.Abar, 2.0 * stripe_pattern.Abar, rtol=1e-6, atol=1e-8)
    assert spatial.projection_diffusion(weak, pattern) == pytest.approx(
        spatial.projection_diffusion(spatial_params, stripe_pattern) / 4.0, rel=1e-6
    )
    assert spatial.diffusion_coefficient(weak, pattern) == pytest.approx(
        spatial.diffusion_coefficient(spatial_params, stripe_pattern) / 16.0, rel=1e-6
    )


@pytest.mark.parametrize("shift", [0.37, 3.0, 5.9])
def test_track_shifted_pattern(spatial_params, stripe_pattern, shift):
    moved = spatial.shift_field(stripe_pattern.Abar, shift, spatial_params.L_domain)
    assert spatial.track_position(moved, stripe_pattern, spatial_params) == pytest.approx(shift, abs=1e-6)


def test_lost_pattern_tracks_as_nan(spatial_params, stripe_pattern):
    assert np.isnan(spatial.track_position(np.zeros(spatial_params.n_grid), stripe_pattern, spatial_params))


def test_tracking_rejects_other_grid(spatial_params, stripe_pattern):
    with pytest.raises(GridError):
        spatial.track_position(np.zeros(32), stripe_pattern, spatial_params)


def test_dark_quadrature_vanishes_on_pattern(spatial_params, stripe_pattern):
    quadrature = spatial.dark_mode_observable(stripe_pattern, spatial_params)
    state = spatial.pattern_initial_state(stripe_pattern)[None, :]
    assert abs(quadrature(state)[0]) < 1e-6


def test_slaved_noise_correction_matches_finite_differences(spatial_params, stripe_pattern):
    model = spatial.eliminated_model(spatial_params)
    x = spatial.pattern_initial_state(stripe_pattern)
    analytic = stratonovich_correction(model, x, 0.0)
    numeric = stratonovich_correction(dataclasses.replace(model, correction=None), x, 0.0)
    np.testing.assert_allclose(numeric, analytic, rtol=1e-5, atol=1e-9 * np.max(np.abs(analytic)))


def test_split_and_unsplit_models_share_fixed_point(spatial_params, stripe_pattern):
    x = spatial.pattern_initial_state(stripe_pattern)
    unsplit = spatial.eliminated_model(spatial_params, split=False)
    scale = spatial_params.gamma_s * np.max(np.abs(x))
    assert np.max(np.abs(unsplit.drift(x, 0.0))) / scale < 1e-9


@pytest.mark.slow
def test_short_ensemble_keeps_the_pattern(spatial_params, stripe_pattern):
    cfg = TrajectoryConfig(dt=0.01, t_end=2.0, record_stride=10, seed=1)
    result = run_ensemble(
        spatial.eliminated_model(spatial_params), cfg, 20,
        {"x0": spatial.position_observable(stripe_pattern, spatial_params)},
        initial_state=spatial.pattern_initial_state(stripe_pattern),
    )
    assert result.n_diverged == 0
    assert np.all(np.isfinite(np.real(result.series("x0"))))
    variance = spatial.position_variance(result, spatial_params)
    assert variance[0] == 0.0 and variance[-1] > 0.0


@pytest.mark.slow
def test_position_variance_grows_at_projected_rate(spatial_params, stripe_pattern):
    cfg = TrajectoryConfig(dt=0.01, t_end=20.0, record_stride=10, seed=3)
    result = run_ensemble(
        spatial.eliminated_model(spatial_params), cfg, 500,
        {"x0": spatial.position_observable(stripe_pattern, spatial_params)},
        initial_state=spatial.pattern_initial_state(stripe_pattern),
    )
    fit = fit_linear(result.time_grid, spatial.position_variance(result, spatial_params), t_min=2.0)
    slope = spatial.projection_diffusion(spatial_params, stripe_pattern) / spatial_params.gamma_s
    assert fit.r2 > 0.95
    assert fit.slope == pytest.approx(slope, rel=0.25)
