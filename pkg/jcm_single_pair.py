#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
JCM Single Pair module
Handles the lossless single-atom cascade model emitting photon pairs into
two circularly polarized modes: exact Fock-space evolution, phase-difference
operator, bright and dark modes and their variances
"""

import logging
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import expm_multiply

from errors import ConfigError, TruncationError
from models.atom_model import FockBasis, PhaseDiffOperator, TwoModeAtomState

logger = logging.getLogger(__name__)

# Probability allowed in the photon blocks an operator product would push out of the basis
LEAKAGE_TOL = 1e-8
TRUNCATION_MARGIN = 4


def basis(n_max: int) -> FockBasis:
    return FockBasis(n_max)


def default_n_max(N: int) -> int:
    return N + TRUNCATION_MARGIN


def field_operators(n_max: int) -> Tuple[sparse.csr_matrix, sparse.csr_matrix]:
    """
    Annihilation operators a_R and a_L on the truncated field basis

    Returns:
        (a_R, a_L) as sparse matrices of size field_size
    """
    b = FockBasis(n_max)
    n_R, n_L = b.field_numbers
    rows_R, cols_R, vals_R = [], [], []
    rows_L, cols_L, vals_L = [], [], []
    for col, (r, l) in enumerate(zip(n_R, n_L)):
        if r > 0:
            rows_R.append(b.field_index(r - 1, l))
            cols_R.append(col)
            vals_R.append(np.sqrt(r))
        if l > 0:
            rows_L.append(b.field_index(r, l - 1))
            cols_L.append(col)
            vals_L.append(np.sqrt(l))
    shape = (b.field_size, b.field_size)
    a_R = sparse.csr_matrix((vals_R, (rows_R, cols_R)), shape=shape, dtype=complex)
    a_L = sparse.csr_matrix((vals_L, (rows_L, cols_L)), shape=shape, dtype=complex)
    return a_R, a_L


def _lift(field_op: sparse.spmatrix) -> sparse.csr_matrix:
    """Extend a field operator to the atom-field space"""
    return sparse.kron(sparse.identity(2, format="csr"), field_op, format="csr")


def hamiltonian_matrix(n_max: int, chi: float) -> sparse.csr_matrix:
    """
    H = chi (sigma_{f->e} a_R a_L + sigma_{e->f} a_R^+ a_L^+), hbar = 1

    Args:
        n_max: Truncation
        chi: Pair coupling

    Returns:
        Sparse Hermitian matrix on the atom-field basis
    """
    if n_max < 1:
        raise ConfigError(f"n_max must be >= 1, got {n_max}")
    a_R, a_L = field_operators(n_max)
    raise_atom = sparse.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex))
    pair = sparse.kron(raise_atom, a_R @ a_L, format="csr")
    H = chi * (pair + pair.conj().T)
    logger.debug(f"Hamiltonian built: {H.shape[0]} states, {H.nnz} non-zeros")
    return H.tocsr()


def initial_state(N: int, n_max: Optional[int] = None) -> TwoModeAtomState:
    """Excited atom with N photons in each mode, |e, N, N>"""
    if N < 0:
        raise ConfigError(f"N must be non-negative, got {N}")
    n_max = default_n_max(N) if n_max is None else n_max
    if n_max < N + 1:
        raise TruncationError(f"n_max={n_max} cannot hold |f, {N + 1}, {N + 1}>")
    return TwoModeAtomState.basis_state(FockBasis(n_max), "e", N, N)


def rabi_frequency(N: int, chi: float) -> float:
    return chi * (N + 1)


def evolve(N: int, t: float, chi: float, n_max: Optional[int] = None) -> TwoModeAtomState:
    """
    Closed-form evolution cos(W t)|e,N,N> - i sin(W t)|f,N+1,N+1> with W = chi (N+1)

    Raises:
        TruncationError: if n_max < N + 1
    """
    state = initial_state(N, n_max)
    b = state.basis
    w = rabi_frequency(N, chi) * t
    amps = np.zeros(b.size, dtype=complex)
    amps[b.index("e", N, N)] = np.cos(w)
    amps[b.index("f", N + 1, N + 1)] = -1j * np.sin(w)
    return TwoModeAtomState(amps, b)


def evolve_numeric(state: TwoModeAtomState, t: float, chi: float) -> TwoModeAtomState:
    """exp(-i H t) applied with expm_multiply; any initial state is accepted"""
    H = hamiltonian_matrix(state.basis.n_max, chi)
    amps = expm_multiply(-1j * t * H, state.amplitudes)
    out = TwoModeAtomState(amps, state.basis)
    if abs(out.norm - 1.0) > 1e-10 * max(1.0, abs(chi * t)):
        logger.warning(f"Norm drifted to {out.norm:.14f} during evolution")
    return out


def phase_operator_function(f: Callable[[np.ndarray], np.ndarray], n_max: int, phi0: float = 0.0) -> PhaseDiffOperator:
    """
    f(theta) of the half phase-difference operator through its spectral decomposition

    Block n has eigenphases phi_r = phi0 + 2 pi r / (n+1) and elements
    (1/(n+1)) sum_r f(-phi_r / 2) exp(i (m - m') phi_r) over |m, n-m>.

    Args:
        f: Vectorized scalar function
        n_max: Truncation, blocks run over totals 0..2 n_max
        phi0: Reference phase

    Returns:
        PhaseDiffOperator
    """
    blocks = {}
    for n in range(2 * n_max + 1):
        phases = phi0 + 2.0 * np.pi * np.arange(n + 1) / (n + 1)
        E = np.exp(1j * np.outer(np.arange(n + 1), phases))
        values = np.asarray(f(-0.5 * phases), dtype=complex) * np.ones(n + 1)
        blocks[n] = (E * values) @ E.conj().T / (n + 1)
    return PhaseDiffOperator(blocks=blocks, phi0=phi0, n_max=n_max)


@lru_cache(maxsize=32)
def bright_dark_operators(n_max: int, phi0: float = 0.0) -> Tuple[sparse.csr_matrix, sparse.csr_matrix]:
    """
    a_b = (e^{i theta} a_R + e^{-i theta} a_L) / sqrt(2) and
    a_d = i (e^{i theta} a_R - e^{-i theta} a_L) / sqrt(2) on the field basis
    """
    a_R, a_L = field_operators(n_max)
    plus = phase_operator_function(lambda th: np.exp(1j * th), n_max, phi0).field_matrix()
    minus = phase_operator_function(lambda th: np.exp(-1j * th), n_max, phi0).field_matrix()
    a_b = (plus @ a_R + minus @ a_L) / np.sqrt(2.0)
    a_d = 1j * (plus @ a_R - minus @ a_L) / np.sqrt(2.0)
    return a_b.tocsr(), a_d.tocsr()


def _check_leakage(state: TwoModeAtomState, depth: int) -> None:
    top = state.basis.max_total - depth
    leak = state.weight_above(top)
    if leak > LEAKAGE_TOL:
        raise TruncationError(
            f"State carries {leak:.3e} probability above {top} photons, "
            f"raise n_max above {state.basis.n_max}"
        )


def _expect(op: sparse.spmatrix, state: TwoModeAtomState) -> complex:
    psi = state.amplitudes
    return complex(np.vdot(psi, op @ psi))


def dark_variance_numeric(state: TwoModeAtomState, phi: float = 0.0, phi0: float = 0.0) -> float:
    """
    <(delta X_d^phi)^2> with X_d^phi = e^{-i phi} a_d + e^{i phi} a_d^+ by matrix algebra

    Raises:
        TruncationError: when the state reaches the blocks X^2 would leave
    """
    _check_leakage(state, depth=2)
    _, a_d = bright_dark_operators(state.basis.n_max, phi0)
    X = _lift(np.exp(-1j * phi) * a_d + np.exp(1j * phi) * a_d.conj().T)
    Xpsi = X @ state.amplitudes
    mean = np.vdot(state.amplitudes, Xpsi)
    return float(np.real(np.vdot(Xpsi, Xpsi) - mean ** 2))


def s_sum(M: int) -> float:
    """s(M) = (2M+1)^-2 sum_{m=0}^{2M} sqrt(m (2M+1-m)) / sin^2[(M - m + 1/2) pi / (2M+1)]"""
    if M < 0:
        raise ConfigError(f"M must be non-negative, got {M}")
    m = np.arange(2 * M + 1)
    args = (M - m + 0.5) * np.pi / (2 * M + 1)
    return float(np.sum(np.sqrt(m * (2 * M + 1 - m)) / np.sin(args) ** 2) / (2 * M + 1) ** 2)


def s_sum_singularity_margin(M_max: int = 200) -> float:
    """Smallest |sin| met by the s(M) terms for M <= M_max; positive means no singular term"""
    margin = np.inf
    for M in range(M_max + 1):
        m = np.arange(2 * M + 1)
        margin = min(margin, float(np.min(np.abs(np.sin((M - m + 0.5) * np.pi / (2 * M + 1))))))
    logger.debug(f"s(M) singularity margin up to M={M_max}: {margin:.3e}")
    return margin


def dark_variance_closed(N: int, t, chi: float):
    """
    V(X_d) = 1 + [2N^2/(2N+1) - s(N)] cos^2(W t) + [2(N+1)^2/(2N+3) - s(N+1)] sin^2(W t)

    Independent of the quadrature angle.
    """
    if N < 0:
        raise ConfigError(f"N must be non-negative, got {N}")
    s2 = np.sin(rabi_frequency(N, chi) * np.asarray(t, dtype=float)) ** 2
    lower = 2.0 * N ** 2 / (2 * N + 1) - s_sum(N)
    upper = 2.0 * (N + 1) ** 2 / (2 * N + 3) - s_sum(N + 1)
    return 1.0 + lower * (1.0 - s2) + upper * s2


def dark_variance_minimum(N: int) -> float:
    """Minimum over time of the closed-form dark variance, reached at a turning point of the oscillation"""
    lower = 2.0 * N ** 2 / (2 * N + 1) - s_sum(N)
    upper = 2.0 * (N + 1) ** 2 / (2 * N + 3) - s_sum(N + 1)
    return 1.0 + min(lower, upper)


def phase_variance_closed(N: int, t, chi: float):
    """
    V(theta) = (pi^2/3) {N(N+1)/(2N+1)^2 + [(5+2N) s - 3 s^2] / [3 + 4N(2+N)]^2}, s = sin^2(W t)
    """
    if N < 0:
        raise ConfigError(f"N must be non-negative, got {N}")
    s2 = np.sin(rabi_frequency(N, chi) * np.asarray(t, dtype=float)) ** 2
    return (np.pi ** 2 / 3.0) * (
        N * (N + 1) / (2 * N + 1) ** 2
        + ((5 + 2 * N) * s2 - 3.0 * s2 ** 2) / (3 + 4 * N * (2 + N)) ** 2
    )


@lru_cache(maxsize=32)
def _theta_matrices(n_max: int, phi0: float):
    theta = _lift(phase_operator_function(lambda th: th, n_max, phi0).field_matrix())
    theta2 = _lift(phase_operator_function(lambda th: th ** 2, n_max, phi0).field_matrix())
    return theta, theta2


def phase_variance_numeric(state: TwoModeAtomState, phi0: float = 0.0) -> float:
    """<theta^2> - <theta>^2 with both operators built from the spectral decomposition"""
    _check_leakage(state, depth=0)
    n_max = state.basis.n_max
    theta, theta2 = _theta_matrices(n_max, phi0)
    mean = np.real(_expect(theta, state))
    return float(np.real(_expect(theta2, state)) - mean ** 2)


def phase_phi0_sweep(N: int, t: float, chi: float, phi0s: Sequence[float]) -> np.ndarray:
    """Numeric phase variance of the evolved state for each reference phase"""
    state = evolve(N, t, chi)
    values = np.array([phase_variance_numeric(state, p) for p in phi0s])
    logger.info(f"phi0 sweep at N={N}: spread {np.ptp(values):.3e}")
    return values


def photon_number_stats(state: TwoModeAtomState) -> Dict[str, float]:
    """<N_s>, <n_R - n_L> and its variance"""
    n_R, n_L = state.basis.field_numbers
    p = np.abs(state.amplitudes) ** 2
    total = np.tile(n_R + n_L, 2)
    diff = np.tile(n_R - n_L, 2)
    mean_diff = float(np.sum(p * diff))
    return {
        "N_s_mean": float(np.sum(p * total)),
        "diff_mean": mean_diff,
        "diff_var": float(np.sum(p * diff ** 2) - mean_diff ** 2),
    }


def mode_populations(state: TwoModeAtomState, phi0: float = 0.0) -> Dict[str, float]:
    """Bright and dark photon numbers <a_b^+ a_b>, <a_d^+ a_d>"""
    _check_leakage(state, depth=0)
    a_b, a_d = bright_dark_operators(state.basis.n_max, phi0)
    out = {}
    for name, op in (("bright", a_b), ("dark", a_d)):
        v = _lift(op) @ state.amplitudes
        out[name] = float(np.real(np.vdot(v, v)))
    return out


def variance_table(
    N_values: Sequence[int], n_times: int = 32, chi: float = 1.0, numeric: bool = True, phi0: float = 0.0
) -> List[Dict[str, float]]:
    """
    Closed-form and numeric variances over one Rabi half-period per N

    Returns:
        Rows (N, t, V_dark_closed, V_dark_numeric, V_theta_closed, V_theta_numeric, N_s_mean)
    """
    rows = []
    for N in N_values:
        times = np.linspace(0.0, np.pi / rabi_frequency(N, chi), n_times)
        for t in times:
            state = evolve(N, t, chi)
            row = {
                "N": int(N),
                "t": float(t),
                "V_dark_closed": float(dark_variance_closed(N, t, chi)),
                "V_theta_closed": float(phase_variance_closed(N, t, chi)),
                "N_s_mean": photon_number_stats(state)["N_s_mean"],
            }
            if numeric:
                row["V_dark_numeric"] = dark_variance_numeric(state, 0.0, phi0)
                row["V_theta_numeric"] = phase_variance_numeric(state, phi0)
            rows.append(row)
        logger.debug(f"Variance table filled for N={N}")
    return rows
