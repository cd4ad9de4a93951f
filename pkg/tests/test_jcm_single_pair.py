#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Tests for the single-atom photon-pair model and its phase-difference observables
"""

import numpy as np
import pytest
from scipy.sparse.linalg import norm as sparse_norm

import jcm_single_pair as jcm
from errors import ConfigError, TruncationError
from models.atom_model import FockBasis, TwoModeAtomState


def test_basis_layout():
    b = FockBasis(2)
    assert (b.max_total, b.field_size, b.size) == (4, 15, 30)
    assert b.index("e", 0, 0) == 0
    assert b.index("f", 1, 0) == 15 + 1 + 1
    n_R, n_L = b.field_numbers
    assert all(b.field_index(r, l) == i for i, (r, l) in enumerate(zip(n_R, n_L)))
    with pytest.raises(ConfigError):
        b.field_index(3, 2)
    with pytest.raises(ConfigError):
        b.index("g", 0, 0)


def test_hamiltonian_is_hermitian():
    H = jcm.hamiltonian_matrix(3, 0.7)
    assert sparse_norm(H - H.conj().T) == 0.0


@pytest.mark.parametrize("N,t", [(0, 0.3), (2, 0.7), (5, 1.9)])
def test_closed_form_evolution_matches_propagator(N, t):
    exact = jcm.evolve(N, t, 1.3)
    numeric = jcm.evolve_numeric(jcm.initial_state(N), t, 1.3)
    np.testing.assert_allclose(numeric.amplitudes, exact.amplitudes, atol=1e-10)
    assert numeric.norm == pytest.approx(1.0, abs=1e-12)


def test_truncation_must_hold_emitted_pair():
    with pytest.raises(TruncationError):
        jcm.initial_state(3, n_max=3)
    with pytest.raises(ConfigError):
        jcm.initial_state(-1)


def test_leakage_detected():
    b = FockBasis(2)
    state = TwoModeAtomState.basis_state(b, "e", 2, 2)
    with pytest.raises(TruncationError):
        jcm.dark_variance_numeric(state)


def test_vacuum_start_is_shot_noise():
    assert float(jcm.dark_variance_closed(0, 0.0, 1.0)) == pytest.approx(1.0)
    assert float(jcm.phase_variance_closed(0, 0.0, 1.0)) == pytest.approx(0.0)


def test_small_s_sums():
    assert jcm.s_sum(0) == 0.0
    assert jcm.s_sum(1) == pytest.approx(8.0 * np.sqrt(2.0) / 9.0)
    assert jcm.s_sum_singularity_margin(50) > 0.0


def test_half_period_dark_variance_for_vacuum():
    t = np.pi / (2.0 * jcm.rabi_frequency(0, 1.0))
    expected = 5.0 / 3.0 - 8.0 * np.sqrt(2.0) / 9.0
    assert float(jcm.dark_variance_closed(0, t, 1.0)) == pytest.approx(expected)
    assert jcm.dark_variance_numeric(jcm.evolve(0, t, 1.0)) == pytest.approx(expected, abs=1e-10)


@pytest.mark.parametrize("N", [0, 1, 3, 6])
@pytest.mark.parametrize("fraction", [0.0, 0.3, 0.5, 0.85])
def test_dark_variance_closed_matches_numeric(N, fraction):
    t = fraction * np.pi / jcm.rabi_frequency(N, 1.0)
    state = jcm.evolve(N, t, 1.0)
    closed = float(jcm.dark_variance_closed(N, t, 1.0))
    assert jcm.dark_variance_numeric(state) == pytest.approx(closed, abs=1e-10)
    assert jcm.dark_variance_numeric(state, phi=0.9) == pytest.approx(closed, abs=1e-10)


@pytest.mark.parametrize("N", [0, 1, 4])
@pytest.mark.parametrize("fraction", [0.0, 0.25, 0.5])
def test_phase_variance_closed_matches_numeric(N, fraction):
    t = fraction * np.pi / jcm.rabi_frequency(N, 1.0)
    state = jcm.evolve(N, t, 1.0)
    assert jcm.phase_variance_numeric(state) == pytest.approx(float(jcm.phase_variance_closed(N, t, 1.0)), abs=1e-10)


def test_phase_variance_independent_of_reference_phase():
    t = np.pi / (4.0 * jcm.rabi_frequency(2, 1.0))
    values = jcm.phase_phi0_sweep(2, t, 1.0, [0.0, 0.4, 1.7, 3.0])
    assert np.ptp(values) < 1e-10


def test_dark_minimum_bounds_oscillation():
    times = np.linspace(0.0, np.pi / jcm.rabi_frequency(4, 1.0), 101)
    assert jcm.dark_variance_minimum(4) == pytest.approx(float(np.min(jcm.dark_variance_closed(4, times, 1.0))))


def test_phase_operator_is_hermitian_and_block_diagonal():
    op = jcm.phase_operator_function(lambda th: th, 3, phi0=0.2)
    assert op.is_hermitian()
    assert op.field_matrix().shape == (FockBasis(3).field_size,) * 2


def test_photon_statistics_of_emitted_pair():
    t = np.pi / (2.0 * jcm.rabi_frequency(1, 1.0))
    stats = jcm.photon_number_stats(jcm.evolve(1, t, 1.0))
    assert stats["N_s_mean"] == pytest.approx(4.0)
    assert stats["diff_mean"] == pytest.approx(0.0)
    assert stats["diff_var"] == pytest.approx(0.0)
    populations = jcm.mode_populations(jcm.evolve(1, 0.0, 1.0))
    assert populations["bright"] + populations["dark"] == pytest.approx(2.0)


def test_variance_table_shape():
    rows = jcm.variance_table([0, 2], n_times=5, numeric=False)
    assert len(rows) == 10
    assert "V_dark_numeric" not in rows[0]
    assert rows[-1]["t"] == pytest.approx(np.pi / jcm.rabi_frequency(2, 1.0))


def test_bright_dark_operators_act_on_field_space():
    a_b, a_d = jcm.bright_dark_operators(3)
    size = FockBasis(3).field_size
    assert a_b.shape == a_d.shape == (size, size)


@pytest.mark.parametrize("N", [0, 1, 3])
def test_emission_goes_into_the_bright_mode(N):
    omega = jcm.rabi_frequency(N, 1.0)
    for t in np.linspace(0.0, np.pi / omega, 7):
        populations = jcm.mode_populations(jcm.evolve(N, t, 1.0))
        assert abs(populations["dark"]) < 1e-12
        assert populations["bright"] == pytest.approx(2 * N + 2.0 * np.sin(omega * t) ** 2, abs=1e-12)


def test_bright_and_dark_numbers_add_to_total_photon_number():
    b = FockBasis(4)
    a_b, a_d = jcm.bright_dark_operators(4, 0.3)
    n_R, n_L = b.field_numbers
    total = (a_b.conj().T @ a_b + a_d.conj().T @ a_d).toarray()
    inner = np.flatnonzero(n_R + n_L <= b.max_total - 1)
    np.testing.assert_allclose(total[np.ix_(inner, inner)], np.diag((n_R + n_L)[inner]), atol=1e-10)


@pytest.mark.parametrize("N", [1, 2, 5])
def test_phase_spread_peaks_where_dark_noise_is_lowest(N):
    times = np.linspace(0.0, np.pi / jcm.rabi_frequency(N, 1.0), 101)
    assert int(np.argmax(jcm.phase_variance_closed(N, times, 1.0))) == int(
        np.argmin(jcm.dark_variance_closed(N, times, 1.0))
    )


def test_large_photon_number_limits():
    N = 100
    t_mid = np.pi / (2.0 * jcm.rabi_frequency(N, 1.0))
    assert jcm.dark_variance_minimum(N) == pytest.approx(0.17, abs=0.01)
    assert float(jcm.phase_variance_closed(N, t_mid, 1.0)) == pytest.approx(np.pi ** 2 / 12.0, rel=1e-3)


def test_vacuum_phase_spread_peaks_at_five_sixths():
    omega = jcm.rabi_frequency(0, 1.0)
    times = np.linspace(0.0, np.pi / (2.0 * omega), 20001)
    t_max = times[int(np.argmax(jcm.phase_variance_closed(0, times, 1.0)))]
    assert np.sin(omega * t_max) ** 2 == pytest.approx(5.0 / 6.0, abs=1e-3)
