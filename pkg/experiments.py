#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Experiments module
Handles the configured experiment runs and turns their results into CSV tables
"""

import logging
import os
from typing import Any, Callable, Dict, List, Tuple

import numpy as np

import dopo_two_mode as dopo
import fwm_rotational as fwm
import jcm_single_pair as jcm
import spatial_dopo as spatial
from errors import ConfigError
from models.experiment_model import ExperimentConfig
from models.mode_model import ModeGrid
from models.optics_model import DopoParams, SeedParams, SpatialParams
from models.sde_model import TrajectoryConfig
from stochastic_engine import noise_spectrum, run_ensemble, windowed_spectrum
from transverse_modes import check_mode_identities, dark_mode_of, hg10_mode, mode_to_rows
from utils.file_handlers import write_csv
from utils.statistics import fit_linear

logger = logging.getLogger(__name__)

# (columns, rows, results) produced by every experiment
Table = Tuple[List[str], List[Dict[str, Any]], Dict[str, Any]]

MODE_TOLERANCES = {
    "norm_gauss": 1e-10,
    "norm_lg": 1e-10,
    "overlap_lg_pair": 1e-10,
    "overlap_gauss_lg": 1e-10,
    "overlap_hg_lg": 1e-10,
    "overlap_bright_dark": 1e-10,
    "rotation_fourier": 1e-8,
    "rotation_bilinear": 1e-2,
    "psi_derivative": 1e-3,
}


def to_db(values) -> np.ndarray:
    """V[dB] = 10 log10 V, NaN for non-positive V"""
    values = np.asarray(values, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(values > 0, 10.0 * np.log10(np.where(values > 0, values, 1.0)), np.nan)


def diffusion_match(rel_err_projection: float, rel_err_kappa: float, tol: float) -> str:
    """Which predicted diffusion rate the measured slope agrees with, "neither" outside tol"""
    if rel_err_projection <= tol:
        return "projection"
    if rel_err_kappa <= tol:
        return "kappa"
    return "neither"


def _trajectory_config(p: Dict[str, Any]) -> TrajectoryConfig:
    return TrajectoryConfig(dt=p["dt"], t_end=p["t_end"], record_stride=p["record_stride"], seed=p["seed"])


class ExperimentRunner:
    """Class that runs one experiment per configuration and writes its CSV"""

    def __init__(self):
        """Initialize the experiment table"""
        self.experiments: Dict[str, Callable[[Dict[str, Any]], Table]] = {
            "dopo-spectrum": self.dopo_spectrum,
            "dopo-orientation": self.dopo_orientation,
            "dopo-fixed-lo": self.dopo_fixed_lo,
            "dopo-seeded": self.dopo_seeded,
            "fwm-region": self.fwm_region,
            "spatial-diffusion": self.spatial_diffusion,
            "jcm-variance": self.jcm_variance,
            "modes-check": self.modes_check,
        }
        self.extra_outputs: List[str] = []
        self._output = ""
        logger.info("Experiment runner initialized")

    def run(self, config: ExperimentConfig) -> str:
        """
        Run an experiment and write its CSV

        Args:
            config: Experiment configuration

        Returns:
            Path of the main CSV artifact
        """
        resolved = config.resolve()
        logger.info(f"Running {config.experiment} with {resolved}")
        self.extra_outputs = []
        self._output = config.output_path()
        columns, rows, results = self.experiments[config.experiment](resolved)
        path = write_csv(self._output, resolved, columns, rows, results)
        logger.info(f"{config.experiment} finished: {results}")
        return path

    def _extra_path(self, suffix: str) -> str:
        stem, ext = os.path.splitext(self._output)
        path = f"{stem}_{suffix}{ext or '.csv'}"
        self.extra_outputs.append(path)
        return path

    def dopo_spectrum(self, p: Dict[str, Any]) -> Table:
        """Dark-mode Y quadrature spectrum of the co-rotating frame against the closed form"""
        params = DopoParams.from_sigma(p["sigma"], p["d"], p["gamma_p"], p["gamma_s"])
        result = run_ensemble(
            dopo.dopo_model(params),
            _trajectory_config(p),
            p["n_traj"],
            {
                "Y_d": dopo.dark_quadrature_observable(np.pi / 2, None),
                "n_diff": dopo.intensity_difference_observable(params),
            },
            initial_state=dopo.broken_state(params).to_vector(),
            batch_size=p["batch_size"],
            workers=p["workers"],
        )
        omega = np.asarray(p["omega"], dtype=float)
        segment = p["segment_time"] or None
        spectrum = noise_spectrum(result, "Y_d", 1.0, omega, p["t_transient"], segment)
        twin = noise_spectrum(result, "n_diff", 1.0, omega, p["t_transient"], segment)
        analytic = dopo.dark_spectrum_analytic(omega)
        rows = [
            {"omega": w, "V_sim": v, "V_analytic": a, "stderr": e, "V_dB": db, "V_diff": vd, "V_diff_stderr": ed}
            for w, v, a, e, db, vd, ed in zip(
                omega, spectrum.values, analytic, spectrum.stderr, to_db(spectrum.values), twin.values, twin.stderr
            )
        ]
        results = {
            "max_dev": float(np.max(np.abs(spectrum.values - analytic))),
            "V_sim_min": float(np.min(spectrum.values)),
            "V_diff_min": float(np.min(twin.values)),
            "n_valid": spectrum.n_traj,
            "n_diverged": result.n_diverged,
        }
        columns = ["omega", "V_sim", "V_analytic", "stderr", "V_dB", "V_diff", "V_diff_stderr"]
        return columns, rows, results

    def dopo_orientation(self, p: Dict[str, Any]) -> Table:
        """Orientation variance growth against d gamma_s t / (sigma - 1)"""
        params = DopoParams.from_sigma(p["sigma"], p["d"], p["gamma_p"], p["gamma_s"])
        result = run_ensemble(
            dopo.dopo_model(params),
            _trajectory_config(p),
            p["n_traj"],
            {"theta": dopo.orientation_observable()},
            initial_state=dopo.broken_state(params).to_vector(),
            batch_size=p["batch_size"],
            workers=p["workers"],
        )
        t = result.time_grid
        variance = dopo.orientation_variance(result)
        analytic = dopo.theta_variance_analytic(params, t / params.gamma_s)
        fit = dopo.fit_diffusion(t, variance, p["t_fit_min"])
        slope_analytic = params.d / (params.sigma - 1.0)
        rows = [{"t": a, "var_sim": b, "var_analytic": c} for a, b, c in zip(t, variance, analytic)]
        results = {
            "slope": fit.slope,
            "slope_analytic": slope_analytic,
            "rel_err": abs(fit.slope - slope_analytic) / slope_analytic,
            "r2": fit.r2,
            "n_diverged": result.n_diverged,
        }
        return ["t", "var_sim", "var_analytic"], rows, results

    def dopo_fixed_lo(self, p: Dict[str, Any]) -> Table:
        """Local-oscillator phase sweep of the fixed-LO spectrum at the optimal detection time"""
        sigma, d = p["sigma"], p["d"]
        t_opt = dopo.optimal_detection_time(sigma, d)
        rows = []
        for phi_deg in p["phi_deg"]:
            omega_opt, v_min = dopo.fixed_lo_optimum(sigma, d, np.radians(phi_deg), t_opt, p["omega_max"])
            rows.append({"phi_deg": phi_deg, "T": t_opt, "omega_opt": omega_opt, "V_min": v_min,
                         "V_dB": float(to_db(v_min))})
        t_num, v_num = dopo.minimize_detection_time(sigma, d)
        results = {
            "T_opt": t_opt,
            "T_numeric": t_num,
            "V_numeric": v_num,
            "rel_err": abs(t_num - t_opt) / t_opt,
        }
        if p["mc"]:
            results.update(self._fixed_lo_monte_carlo(p))
        return ["phi_deg", "T", "omega_opt", "V_min", "V_dB"], rows, results

    def _fixed_lo_monte_carlo(self, p: Dict[str, Any]) -> Dict[str, Any]:
        """Frozen-LO dark quadrature of an ensemble detected in windows of T_opt, at omega = 0"""
        sigma, d = p["sigma"], p["mc_d"]
        params = DopoParams.from_sigma(sigma, d)
        t_opt = dopo.optimal_detection_time(sigma, d)
        cfg = TrajectoryConfig(
            dt=p["dt"], t_end=p["t_transient"] + p["mc_windows"] * t_opt,
            record_stride=p["record_stride"], seed=p["seed"],
        )
        result = run_ensemble(
            dopo.dopo_model(params),
            cfg,
            p["n_traj"],
            {"Y_fixed": dopo.dark_quadrature_observable(np.pi / 2, theta_ref=0.0)},
            initial_state=dopo.broken_state(params).to_vector(),
            batch_size=p["batch_size"],
            workers=p["workers"],
        )
        spectrum = windowed_spectrum(result, "Y_fixed", t_opt, 1.0, [0.0], p["t_transient"])
        analytic = float(dopo.fixed_lo_spectrum_analytic(0.0, np.pi / 2, t_opt, d, sigma))
        logger.info(
            f"Fixed-LO Monte Carlo: V(0)={spectrum.values[0]:.4g} +- {spectrum.stderr[0]:.2g}, closed form {analytic:.4g}"
        )
        return {
            "T_opt_mc": t_opt,
            "V_mc": float(spectrum.values[0]),
            "V_mc_stderr": float(spectrum.stderr[0]),
            "V_analytic_mc": analytic,
            "n_diverged_mc": result.n_diverged,
        }

    def dopo_seeded(self, p: Dict[str, Any]) -> Table:
        """Seeded branch structure, mean-field oracle and zero-frequency dark squeezing"""
        rows = []
        deviations = []
        for sigma in p["sigma"]:
            params = DopoParams.from_sigma(sigma, p["d"], p["gamma_p"], p["gamma_s"])
            for I_s in p["I_s"]:
                roots = dopo.seeded_roots(sigma, I_s)
                I10 = roots[-1][0]
                q = dopo.seeded_q(sigma, I10)
                row = {
                    "sigma": sigma,
                    "I_s": I_s,
                    "n_roots": len(roots),
                    "I10": I10,
                    "q": q,
                    "V0": float(dopo.seeded_dark_spectrum(0.0, q)),
                    "V0_q2": float(dopo.seeded_dark_spectrum(0.0, q, quadratic_gain=True)),
                }
                row["V0_dB"] = float(to_db(row["V0"]))
                if p["ode_check"]:
                    seed = SeedParams.from_intensity(I_s, params)
                    row["I10_ode"] = dopo.seeded_mean_field_intensity(params, seed)
                    deviations.append(abs(row["I10_ode"] - I10) / max(I10, 1e-12))
                else:
                    row["I10_ode"] = float("nan")
                rows.append(row)
        results = {
            "normalization": dopo.intensity_normalization(
                DopoParams.from_sigma(p["sigma"][0], p["d"], p["gamma_p"], p["gamma_s"])
            ),
            "max_rel_dev_ode": max(deviations) if deviations else float("nan"),
        }
        columns = ["sigma", "I_s", "n_roots", "I10", "I10_ode", "q", "V0", "V0_q2", "V0_dB"]
        return columns, rows, results

    def fwm_region(self, p: Dict[str, Any]) -> Table:
        """Closed-form against numeric existence region of the rotating pattern"""
        deltas = np.linspace(p["delta_min"], p["delta_max"], p["n_delta"])
        rho2s = np.linspace(p["rho2_min"], p["rho2_max"], p["n_rho2"])
        rows = fwm.region_scan(deltas, rho2s, p["gamma_s"], p["g"])
        interior = [r for r in rows if not r["near_boundary"]]
        results = {
            "interior_checked": len(interior),
            "interior_agree": sum(r["exists_closed"] == r["exists_numeric"] for r in interior),
            "n_bistable": sum(r["bistable"] for r in rows),
        }
        columns = ["delta", "rho2", "exists_closed", "exists_numeric", "n_stable", "bistable", "near_boundary"]
        return columns, rows, results

    def spatial_diffusion(self, p: Dict[str, Any]) -> Table:
        """Pattern eigensystem, Goldstone diffusion of the position and co-moving dark squeezing"""
        params = SpatialParams(
            gamma_p=p["gamma_p"], gamma_s=p["gamma_s"], delta_p=p["delta_p"], delta_s=p["delta_s"],
            l_p=p["l_p"], l_s=p["l_s"], chi=p["chi"], Ep=p["Ep"], L_domain=p["L_domain"], n_grid=p["n_grid"],
        )
        k = 2.0 * np.pi / params.L_domain * np.arange(params.n_grid // 2 + 1)
        write_csv(
            self._extra_path("stability"), p, ["k", "growth"],
            [{"k": a, "growth": b} for a, b in zip(k, spatial.uniform_stability_scan(params, k))],
            spatial.pattern_regime(params),
        )

        pattern = spatial.solve_eigensystem(params, spatial.pattern_solve(params, p["ansatz"]))
        values = pattern.eigenvalues
        write_csv(
            self._extra_path("pattern"), p, ["x", "re_A", "im_A", "re_A0", "im_A0"],
            [
                {"x": x, "re_A": a.real, "im_A": a.imag, "re_A0": a0.real, "im_A0": a0.imag}
                for x, a, a0 in zip(params.x(), pattern.Abar, pattern.A0bar)
            ],
            {"beta": pattern.beta, "residual": pattern.residual},
        )
        write_csv(
            self._extra_path("eigenvalues"), p, ["index", "re_lambda", "im_lambda"],
            [{"index": i, "re_lambda": v.real, "im_lambda": v.imag} for i, v in enumerate(values)],
        )
        goldstone = values[np.argmin(np.abs(values))]
        damped = values[np.argmin(np.abs(values + 2.0 * params.gamma_s))]
        d_proj = spatial.projection_diffusion(params, pattern)
        d_kappa = spatial.diffusion_coefficient(params, pattern)

        result = run_ensemble(
            spatial.eliminated_model(params),
            _trajectory_config(p),
            p["n_traj"],
            {
                "x0": spatial.position_observable(pattern, params),
                "Y_dark": spatial.dark_mode_observable(pattern, params, np.pi / 2),
            },
            initial_state=spatial.pattern_initial_state(pattern),
            batch_size=p["batch_size"],
            workers=p["workers"],
        )
        t = result.time_grid
        variance = spatial.position_variance(result, params)
        fit = fit_linear(t, variance, p["t_fit_min"])
        # record time is in units of 1/gamma_s
        slope_proj = d_proj / params.gamma_s
        slope_kappa = d_kappa / params.gamma_s
        omega = np.asarray(p["omega"], dtype=float)
        spectrum = noise_spectrum(result, "Y_dark", 1.0, omega, p["t_transient"], p["segment_time"] or None)
        rel_err_projection = abs(fit.slope - slope_proj) / abs(slope_proj)
        rel_err_kappa = abs(fit.slope - slope_kappa) / abs(slope_kappa)

        rows = [
            {"t": a, "var_sim": b, "var_projection": slope_proj * a, "var_kappa": slope_kappa * a}
            for a, b in zip(t, variance)
        ]
        results = {
            "goldstone_abs": float(abs(goldstone)),
            "damped_eigenvalue": float(damped.real),
            "damped_rel_err": float(abs(damped + 2.0 * params.gamma_s) / (2.0 * params.gamma_s)),
            "pattern_residual": pattern.residual,
            "beta": pattern.beta,
            "D_projection": d_proj,
            "D_kappa": d_kappa,
            "slope": fit.slope,
            "r2": fit.r2,
            "rel_err_projection": rel_err_projection,
            "rel_err_kappa": rel_err_kappa,
            "matches": diffusion_match(rel_err_projection, rel_err_kappa, p["match_tol"]),
            "n_diverged": result.n_diverged,
        }
        for w, v, e in zip(omega, spectrum.values, spectrum.stderr):
            results[f"V_dark_w{w:g}"] = float(v)
            results[f"V_dark_stderr_w{w:g}"] = float(e)
        return ["t", "var_sim", "var_projection", "var_kappa"], rows, results

    def jcm_variance(self, p: Dict[str, Any]) -> Table:
        """Closed-form and Fock-space variances of the single-pair model"""
        chi = p["chi"]
        if any(N < 0 for N in p["N"]):
            raise ConfigError("N values must be non-negative")
        rows = jcm.variance_table(p["N"], p["n_times"], chi, bool(p["numeric"]), p["phi0"])
        results: Dict[str, Any] = {}
        if p["numeric"]:
            results["max_dev_dark"] = max(abs(r["V_dark_closed"] - r["V_dark_numeric"]) for r in rows)
            results["max_dev_theta"] = max(abs(r["V_theta_closed"] - r["V_theta_numeric"]) for r in rows)

        N_large = p["N_large"]
        t_mid = np.pi / (2.0 * jcm.rabi_frequency(N_large, chi))
        theta_mid = float(jcm.phase_variance_closed(N_large, t_mid, chi))
        results["dark_min_N_large"] = jcm.dark_variance_minimum(N_large)
        results["theta_mid_N_large"] = theta_mid
        results["theta_mid_rel_to_pi2_12"] = theta_mid / (np.pi ** 2 / 12.0) - 1.0

        t0 = np.linspace(0.0, np.pi / jcm.rabi_frequency(0, chi), 2001)
        i_max = int(np.argmax(jcm.phase_variance_closed(0, t0, chi)))
        results["N0_argmax_sin2"] = float(np.sin(jcm.rabi_frequency(0, chi) * t0[i_max]) ** 2)
        results["s_margin"] = jcm.s_sum_singularity_margin(200)
        phi0s = [0.0, 0.7, 2.1]
        results["phi0_spread"] = float(np.ptp(jcm.phase_phi0_sweep(1, t_mid, chi, phi0s)))

        columns = ["N", "t", "V_dark_closed", "V_dark_numeric", "V_theta_closed", "V_theta_numeric", "N_s_mean"]
        return columns, rows, results

    def modes_check(self, p: Dict[str, Any]) -> Table:
        """Orthonormality, superposition and rotation identities of the transverse modes"""
        grid = ModeGrid(half_width=p["half_width"], n_points=p["n_points"])
        checks = check_mode_identities(p["w_s"], p["psi"], grid, p["eps"])
        rows = [
            {"check": name, "deviation": dev, "tolerance": MODE_TOLERANCES[name],
             "passed": int(dev <= MODE_TOLERANCES[name])}
            for name, dev in checks.items()
        ]
        results = {"all_passed": int(all(r["passed"] for r in rows))}
        if p["export"]:
            for suffix, mode in (
                ("bright", hg10_mode(p["psi"], p["w_s"], grid)),
                ("dark", dark_mode_of(p["psi"], p["w_s"], grid)),
            ):
                field_rows = [{"x": x, "y": y, "re": re, "im": im} for x, y, re, im in mode_to_rows(mode)]
                write_csv(self._extra_path(suffix), p, ["x", "y", "re", "im"], field_rows, {"mode": mode.label})
        return ["check", "deviation", "tolerance", "passed"], rows, results
