#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Tests for the four-wave-mixing cavity with two orbital angular momentum modes
"""

import numpy as np
import pytest

import fwm_rotational as fwm
from errors import ConfigError
from models.optics_model import FwmParams


@pytest.mark.parametrize("delta,rho2,inside", [
    (2.0, 0.6, True),
    (2.0, 0.4, False),
    (2.0, 0.9, False),
    (1.0, 0.6, False),
    (4.0, 1.0, True),
])
def test_existence_region(delta, rho2, inside):
    assert fwm.existence_region(FwmParams(delta=delta, rho2=rho2)) is inside


def test_pitchfork_interval():
    lower, upper = fwm.trivial_stability(FwmParams(delta=2.0))
    assert lower == pytest.approx(0.5)
    assert upper == pytest.approx(5.0 / 6.0)
    assert fwm.trivial_stability(FwmParams(delta=1.0)) is None


@pytest.mark.parametrize("rho2,stable", [(0.3, True), (0.7, False), (1.0, True)])
def test_trivial_state_stability(rho2, stable):
    assert fwm.steady_state_solve(FwmParams(delta=2.0, rho2=rho2))[0].stable is stable


def test_nontrivial_states_are_fixed_points_with_goldstone_mode():
    params = FwmParams(delta=2.0, rho2=0.6)
    states = fwm.steady_state_solve(params)
    assert len(states) > 1
    for state in states[1:]:
        d_plus, d_minus = fwm.fwm_mean_field_rhs(state.a_plus, state.a_minus, params)
        assert abs(d_plus) < 1e-9 and abs(d_minus) < 1e-9
        assert abs(state.goldstone) < 1e-8
    assert any(s.stable for s in states[1:])


def test_jacobian_matches_finite_differences():
    params = FwmParams(delta=2.5, rho2=0.8)
    zp, zm = 0.4 + 0.3j, -0.2 + 0.5j
    J = fwm.fwm_jacobian(zp, zm, params)
    h = 1e-7
    base = np.array(fwm.fwm_mean_field_rhs(zp, zm, params))
    # column of d/da+ on col(a+, a-, a+*, a-*), from the Wirtinger split of two real directions
    re = (np.array(fwm.fwm_mean_field_rhs(zp + h, zm, params)) - base) / h
    im = (np.array(fwm.fwm_mean_field_rhs(zp + 1j * h, zm, params)) - base) / h
    np.testing.assert_allclose(0.5 * (re - 1j * im), J[:2, 0], atol=1e-5)
    np.testing.assert_allclose(0.5 * (re + 1j * im), J[:2, 2], atol=1e-5)


def test_region_scan_interior_agrees():
    rows = fwm.region_scan(np.linspace(0.0, 5.0, 6), np.linspace(0.05, 2.5, 6))
    assert len(rows) == 36
    interior = [r for r in rows if not r["near_boundary"]]
    assert interior
    assert all(r["exists_closed"] == r["exists_numeric"] for r in interior)


def test_params_validation():
    with pytest.raises(ConfigError):
        FwmParams(g=0.0)
    with pytest.raises(ConfigError):
        FwmParams(rho2=-0.1)


def test_flow_rests_on_stable_state():
    params = FwmParams(delta=2.0, rho2=0.6)
    state = next(s for s in fwm.steady_state_solve(params)[1:] if s.stable)
    t, z = fwm.integrate_flow(state.a_plus, state.a_minus, params, 20.0, n_eval=50)
    assert t[-1] == pytest.approx(20.0)
    np.testing.assert_allclose(z[-1], [state.a_plus, state.a_minus], atol=1e-6)


def test_flow_is_phase_equivariant(rng):
    params = FwmParams(delta=2.5, rho2=0.7)
    a_plus, a_minus = rng.normal(size=2) + 1j * rng.normal(size=2)
    theta = 1.3
    d_plus, d_minus = fwm.fwm_mean_field_rhs(a_plus, a_minus, params)
    r_plus, r_minus = fwm.fwm_mean_field_rhs(np.exp(1j * theta) * a_plus, np.exp(-1j * theta) * a_minus, params)
    assert r_plus == pytest.approx(np.exp(1j * theta) * d_plus, abs=1e-12)
    assert r_minus == pytest.approx(np.exp(-1j * theta) * d_minus, abs=1e-12)


def test_lossless_flow_conserves_intensity_difference():
    params = FwmParams(delta=2.0, rho2=0.6, gamma_s=0.0)
    _, z = fwm.integrate_flow(0.4 + 0.1j, 0.2 - 0.3j, params, 10.0, n_eval=100)
    difference = np.abs(z[:, 0]) ** 2 - np.abs(z[:, 1]) ** 2
    np.testing.assert_allclose(difference, difference[0], atol=1e-8)
    assert np.ptp(np.abs(z[:, 0]) ** 2) > 1e-3
