"""Mechanical oscillator: susceptibility, thermal force noise, zero-point scale.

Single-sided PSD convention throughout:
S_X(omega) = 2 int <X(t) X(0)> exp(-i omega t) dt.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .constants import HBAR, KB


@dataclass
class OscillatorParams:
    """Velocity-damped harmonic oscillator.

    omega_m : angular resonance frequency [rad/s]
    m_eff   : effective mass [kg]
    gamma_m : damping rate [rad/s]
    temperature : bath temperature [K]
    """

    omega_m: float
    m_eff: float
    gamma_m: float
    temperature: float = 0.0

    def __post_init__(self):
        if self.omega_m <= 0 or self.m_eff <= 0 or self.gamma_m <= 0:
            raise ValueError("omega_m, m_eff and gamma_m must be positive")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.gamma_m >= self.omega_m / 10:
            warnings.warn(
                f"gamma_m/omega_m = {self.gamma_m / self.omega_m:.3g}: "
                "high-Q assumptions of the noise formulas may not hold",
                RuntimeWarning,
                stacklevel=2,
            )

    @property
    def quality_factor(self) -> float:
        return self.omega_m / self.gamma_m


def susceptibility(osc: OscillatorParams, omega) -> np.ndarray | complex:
    """chi(omega) = 1 / (m ((omega_m^2 - omega^2) + i omega gamma_m)) [m/N]."""
    omega = np.asarray(omega, dtype=float)
    chi = 1.0 / (
        osc.m_eff * ((osc.omega_m**2 - omega**2) + 1j * omega * osc.gamma_m)
    )
    return complex(chi) if chi.ndim == 0 else chi


def bose_occupation(omega: float, temperature: float) -> float:
    """Mean thermal occupation n(omega, T); 0 at T = 0."""
    if temperature == 0.0:
        return 0.0
    return 1.0 / np.expm1(HBAR * omega / (KB * temperature))


def thermal_force_psd(osc: OscillatorParams, omega=None):
    """Thermal force PSD S_F^th = 4 m gamma_m hbar omega_m (n + 1/2) [N^2/Hz].

    White in omega; the occupation is evaluated at omega_m (narrowband
    oscillator). Reduces to 2 hbar omega_m gamma_m m at T = 0 and to
    4 m gamma_m kB T in the classical limit.
    """
    n = bose_occupation(osc.omega_m, osc.temperature)
    level = 4.0 * osc.m_eff * osc.gamma_m * HBAR * osc.omega_m * (n + 0.5)
    if omega is None:
        return level
    return np.full_like(np.asarray(omega, dtype=float), level)


def zero_point_amplitude(osc: OscillatorParams) -> float:
    """z_zp = sqrt(hbar / (2 m_eff omega_m)) [m]."""
    return float(np.sqrt(HBAR / (2.0 * osc.m_eff * osc.omega_m)))
