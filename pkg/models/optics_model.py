#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Optics Model module
Defines parameter and state models for the nonlinear cavities
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from errors import ConfigError

logger = logging.getLogger(__name__)


@dataclass
class DopoParams:
    """
    Class holding the parameters of the two-transverse-mode DOPO

    Attributes:
        gamma_p (float): Pump cavity decay rate
        gamma_s (float): Signal cavity decay rate
        chi (float): Nonlinear coupling
        Ep (float): Pump injection amplitude
    """

    gamma_p: float = 1.0
    gamma_s: float = 1.0
    chi: float = 2e-3
    Ep: float = 707.1067811865476

    def __post_init__(self):
        """Validate parameters after initialization"""
        if self.chi <= 0:
            raise ConfigError(f"chi must be positive, got {self.chi}")
        if self.gamma_p < 0 or self.gamma_s < 0:
            raise ConfigError(f"Decay rates must be non-negative, got {self.gamma_p}, {self.gamma_s}")
        if self.gamma_p == 0 or self.gamma_s == 0:
            logger.warning("Lossless cavity: threshold and sigma are not defined")
        if self.Ep < 0:
            raise ConfigError(f"Ep must be non-negative, got {self.Ep}")

    @classmethod
    def from_sigma(cls, sigma: float, d: float, gamma_p: float = 1.0, gamma_s: float = 1.0) -> "DopoParams":
        """Build parameters from the pump level sigma and the nonlinearity d"""
        if sigma <= 0 or d <= 0:
            raise ConfigError(f"sigma and d must be positive, got sigma={sigma}, d={d}")
        chi = np.sqrt(4.0 * d * gamma_p * gamma_s)
        return cls(gamma_p=gamma_p, gamma_s=gamma_s, chi=float(chi), Ep=float(sigma * gamma_p * gamma_s / chi))

    @property
    def E_th(self) -> float:
        return self.gamma_p * self.gamma_s / self.chi

    @property
    def sigma(self) -> float:
        if self.E_th == 0:
            return np.inf if self.Ep > 0 else 0.0
        return self.Ep / self.E_th

    @property
    def d(self) -> float:
        return self.chi ** 2 / (4.0 * self.gamma_p * self.gamma_s)

    @property
    def rho2(self) -> float:
        """rho^2 = (Ep - E_th) / chi, zero below threshold"""
        return max(0.0, (self.Ep - self.E_th) / self.chi)

    @property
    def rho(self) -> float:
        return float(np.sqrt(self.rho2))

    def __str__(self):
        return (
            f"DopoParams(gamma_p={self.gamma_p}, gamma_s={self.gamma_s}, chi={self.chi:.6g}, "
            f"Ep={self.Ep:.6g}, sigma={self.sigma:.6g})"
        )


@dataclass
class DopoState:
    """
    Positive-P amplitudes of the pump and the two signal modes

    The plus-partners are independent of the conjugates.

    Attributes:
        alpha0, alpha0p: Pump amplitude and partner
        alphap1, alphap1p: Mode +1 amplitude and partner
        alpham1, alpham1p: Mode -1 amplitude and partner
    """

    alpha0: complex = 0j
    alpha0p: complex = 0j
    alphap1: complex = 0j
    alphap1p: complex = 0j
    alpham1: complex = 0j
    alpham1p: complex = 0j

    @classmethod
    def classical(cls, alpha0: complex, alphap1: complex, alpham1: complex) -> "DopoState":
        """State with every partner equal to the conjugate amplitude"""
        return cls(alpha0, np.conj(alpha0), alphap1, np.conj(alphap1), alpham1, np.conj(alpham1))

    @classmethod
    def from_vector(cls, x) -> "DopoState":
        return cls(*(complex(v) for v in np.asarray(x).ravel()[:6]))

    def to_vector(self) -> np.ndarray:
        return np.array(
            [self.alpha0, self.alpha0p, self.alphap1, self.alphap1p, self.alpham1, self.alpham1p],
            dtype=complex,
        )


@dataclass
class DopoSteadyState:
    """
    Classical steady state of the unseeded DOPO

    Attributes:
        kind (str): "trivial" or "broken"
        rho (float): Signal amplitude, free orientation
        alpha0 (float): Pump amplitude
    """

    kind: str
    rho: float
    alpha0: float

    @property
    def broken(self) -> bool:
        return self.kind == "broken"


@dataclass
class SeedParams:
    """
    Coherent seed injected on amplification into the TEM10 mode

    Attributes:
        Es (float): Real, in-phase seed amplitude
    """

    Es: float = 0.0

    def __post_init__(self):
        if self.Es < 0:
            raise ConfigError(f"Seed amplitude must be non-negative, got {self.Es}")

    @classmethod
    def from_intensity(cls, I_s: float, params: DopoParams) -> "SeedParams":
        if I_s < 0:
            raise ConfigError(f"Seed intensity must be non-negative, got {I_s}")
        return cls(Es=float(np.sqrt(I_s * params.gamma_s ** 3 * params.gamma_p) / params.chi))

    def intensity(self, params: DopoParams) -> float:
        """I_s = chi^2 Es^2 / (gamma_s^3 gamma_p), equal to 2 P_s / P_p,th"""
        return params.chi ** 2 * self.Es ** 2 / (params.gamma_s ** 3 * params.gamma_p)


@dataclass
class FwmParams:
    """
    Class holding the parameters of the four-wave-mixing cavity

    Attributes:
        delta (float): Signal detuning
        g (float): Nonlinear coupling per photon
        rho2 (float): Pump intensity, both pumps equal
        gamma_s (float): Signal decay rate
    """

    delta: float = 2.0
    g: float = 1.0
    rho2: float = 0.6
    gamma_s: float = 1.0

    def __post_init__(self):
        if self.g <= 0:
            raise ConfigError(f"g must be positive, got {self.g}")
        if self.gamma_s < 0:
            raise ConfigError(f"gamma_s must be non-negative, got {self.gamma_s}")
        if self.rho2 < 0:
            raise ConfigError(f"rho2 must be non-negative, got {self.rho2}")

    def __str__(self):
        return f"FwmParams(delta={self.delta}, g={self.g}, rho2={self.rho2}, gamma_s={self.gamma_s})"


@dataclass
class FwmSteadyState:
    """
    Steady state of the four-wave-mixing mean-field flow

    Attributes:
        a_plus, a_minus (complex): Mode amplitudes
        intensity (float): |a_plus|^2 (equal to |a_minus|^2 on the symmetric sector)
        stable (bool): Linear stability, ignoring the symmetry direction
        eigenvalues (np.ndarray): Jacobian eigenvalues on col(a, a*)
    """

    a_plus: complex
    a_minus: complex
    intensity: float
    stable: bool
    eigenvalues: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))

    @property
    def trivial(self) -> bool:
        return self.intensity == 0.0

    @property
    def goldstone(self) -> complex:
        """Eigenvalue closest to zero"""
        return complex(self.eigenvalues[np.argmin(np.abs(self.eigenvalues))])

    def __str__(self):
        kind = "trivial" if self.trivial else f"I={self.intensity:.6g}"
        return f"FwmSteadyState({kind}, stable={self.stable})"


@dataclass
class SpatialParams:
    """
    Class holding the parameters of the one-dimensional pattern-forming DOPO

    Defaults sit in the far-detuned-pump limit (gamma_p = 0), where the
    slaved pump is local.

    Attributes:
        gamma_p, gamma_s (float): Decay rates
        delta_p, delta_s (float): Detunings
        l_p, l_s (float): Diffraction lengths
        chi (float): Nonlinear coupling
        Ep (float): Pump drive
        L_domain (float): Periodic domain length
        n_grid (int): Grid points, a power of two
    """

    gamma_p: float = 0.0
    gamma_s: float = 1.0
    delta_p: float = 10.0
    delta_s: float = -1.0
    l_p: float = 1.0
    l_s: float = 1.0
    chi: float = 0.05
    Ep: float = 250.0
    L_domain: float = 2.0 * np.pi
    n_grid: int = 64

    def __post_init__(self):
        """Validate parameters after initialization"""
        if self.n_grid < 4 or self.n_grid & (self.n_grid - 1):
            raise ConfigError(f"n_grid must be a power of two, got {self.n_grid}")
        if self.delta_s == 0:
            raise ConfigError("delta_s must be non-zero")
        if self.gamma_p == 0 and self.delta_p == 0:
            raise ConfigError("Pump needs gamma_p > 0 or delta_p != 0")
        if self.gamma_s <= 0 or self.gamma_p < 0 or self.chi <= 0:
            raise ConfigError("Rates and chi must be positive")
        if self.l_s / self.dx < 8:
            raise ConfigError(
                f"l_s={self.l_s} is resolved by {self.l_s / self.dx:.1f} points, need at least 8"
            )

    @property
    def dx(self) -> float:
        return self.L_domain / self.n_grid

    @property
    def kappa(self) -> float:
        return float(np.sqrt(2.0 * self.gamma_s) * abs(self.delta_s) / self.chi)

    @property
    def mu0(self) -> float:
        """Effective parametric gain chi Ep / |L_p(0)|"""
        return float(self.chi * self.Ep / abs(self.gamma_p + 1j * self.delta_p))

    def x(self) -> np.ndarray:
        return np.arange(self.n_grid) * self.dx

    def k(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.n_grid, d=self.dx)

    def __str__(self):
        return (
            f"SpatialParams(delta_p={self.delta_p}, delta_s={self.delta_s}, chi={self.chi}, "
            f"Ep={self.Ep}, n_grid={self.n_grid})"
        )


@dataclass
class FieldState1D:
    """
    Positive-P fields on the periodic grid

    Attributes:
        A0, A0p (np.ndarray): Pump field and partner
        A, Ap (np.ndarray): Signal field and partner
    """

    A0: np.ndarray
    A0p: np.ndarray
    A: np.ndarray
    Ap: np.ndarray

    def __post_init__(self):
        arrays = [np.asarray(a, dtype=complex) for a in (self.A0, self.A0p, self.A, self.Ap)]
        if len({a.shape for a in arrays}) != 1:
            raise ConfigError("All four fields must share one grid")
        self.A0, self.A0p, self.A, self.Ap = arrays

    @classmethod
    def from_vector(cls, x: np.ndarray) -> "FieldState1D":
        n = x.shape[-1] // 4
        return cls(x[:n], x[n:2 * n], x[2 * n:3 * n], x[3 * n:])

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.A0, self.A0p, self.A, self.Ap])


@dataclass
class PatternSolution:
    """
    Stationary pattern of the slaved-pump equations

    Attributes:
        Abar (np.ndarray): Signal field exp(i sign(delta_s) beta) F(x - x0)
        A0bar (np.ndarray): Slaved pump field
        beta (float): Positive phase constant
        x0 (float): Reference position of the maximum of F
        residual (float): Max-norm residual of the stationary equation
        residuals (list): Newton residual history
        eigenvalues, right, left: Biorthonormal eigensystem, when computed
    """

    Abar: np.ndarray
    A0bar: np.ndarray
    beta: float
    x0: float = 0.0
    residual: float = 0.0
    residuals: list = field(default_factory=list)
    eigenvalues: Optional[np.ndarray] = None
    right: Optional[np.ndarray] = None
    left: Optional[np.ndarray] = None

    @property
    def profile(self) -> np.ndarray:
        """Real profile F after removing the global phase"""
        return np.real(self.Abar * np.exp(-1j * self.phase))

    @property
    def phase(self) -> float:
        """Global phase reduced to (-pi/2, pi/2]"""
        idx = int(np.argmax(np.abs(self.Abar)))
        phi = float(np.angle(self.Abar[idx]))
        return phi - np.pi * np.ceil(phi / np.pi - 0.5)

    def __str__(self):
        return f"PatternSolution(beta={self.beta:.6g}, x0={self.x0:.6g}, residual={self.residual:.3g})"
