import numpy as np
import pytest
from numpy.testing import assert_allclose

import modemech as mm
from modemech.constants import HBAR, KB

# Q = 4e7 membrane at 40 kHz, 1 ng effective mass, as in the reference
# entanglement scenario
OSC = mm.OscillatorParams(
    omega_m=2 * np.pi * 4e4, m_eff=1e-12, gamma_m=2 * np.pi * 4e4 / 4e7, temperature=0.0
)

# frozen arithmetic from the parameters above
CHI_DC = 15.831434944115276  # 1/(m omega_m^2) [m/N]
S_F_TH_T0 = 3.3306261268249607e-43  # 2 hbar omega_m gamma_m m [N^2/Hz]
Z_ZP = 1.4484488147711316e-14  # sqrt(hbar/(2 m omega_m)) [m]


class TestOscillatorParams:
    def test_positivity_enforced(self):
        with pytest.raises(ValueError):
            mm.OscillatorParams(-1.0, 1e-12, 1.0)
        with pytest.raises(ValueError):
            mm.OscillatorParams(1e5, 0.0, 1.0)
        with pytest.raises(ValueError):
            mm.OscillatorParams(1e5, 1e-12, 1.0, temperature=-1.0)

    def test_low_q_warns(self):
        with pytest.warns(RuntimeWarning):
            mm.OscillatorParams(1e5, 1e-12, 2e4)


class TestSusceptibility:
    def test_static_limit(self):
        assert_allclose(mm.susceptibility(OSC, 0.0), 1 / (OSC.m_eff * OSC.omega_m**2))
        assert_allclose(mm.susceptibility(OSC, 0.0).real, CHI_DC, rtol=1e-12)

    def test_resonance_purely_imaginary(self):
        chi = mm.susceptibility(OSC, OSC.omega_m)
        assert chi.real == 0.0
        assert_allclose(
            abs(chi), OSC.quality_factor / (OSC.m_eff * OSC.omega_m**2), rtol=1e-12
        )
        assert_allclose(chi, 1 / (1j * OSC.m_eff * OSC.omega_m * OSC.gamma_m), rtol=1e-12)

    def test_parity(self):
        om = np.linspace(0.1, 3.0, 7) * OSC.omega_m
        chi_p = mm.susceptibility(OSC, om)
        chi_m = mm.susceptibility(OSC, -om)
        assert_allclose(chi_m.real, chi_p.real, rtol=1e-14)
        assert_allclose(chi_m.imag, -chi_p.imag, rtol=1e-14)

    def test_peak_near_resonance(self):
        om = np.linspace(OSC.omega_m - 5 * OSC.gamma_m, OSC.omega_m + 5 * OSC.gamma_m, 2001)
        mags = np.abs(mm.susceptibility(OSC, om))
        assert abs(om[np.argmax(mags)] - OSC.omega_m) <= OSC.gamma_m


class TestThermalForce:
    def test_zero_temperature_value(self):
        assert_allclose(mm.thermal_force_psd(OSC), S_F_TH_T0, rtol=1e-12)
        assert_allclose(
            mm.thermal_force_psd(OSC), 2 * HBAR * OSC.omega_m * OSC.gamma_m * OSC.m_eff,
            rtol=1e-15,
        )

    def test_classical_limit(self):
        # kB T / (hbar omega_m) = 1e3: within 1e-6 of 4 m gamma kB T
        t = 1e3 * HBAR * OSC.omega_m / KB
        osc = mm.OscillatorParams(OSC.omega_m, OSC.m_eff, OSC.gamma_m, temperature=t)
        assert_allclose(
            mm.thermal_force_psd(osc), 4 * osc.m_eff * osc.gamma_m * KB * t, rtol=1e-6
        )

    def test_monotone_in_temperature(self):
        temps = [0.0, 1e-8, 1e-6, 1e-4, 1e-2, 1.0]
        levels = [
            mm.thermal_force_psd(
                mm.OscillatorParams(OSC.omega_m, OSC.m_eff, OSC.gamma_m, temperature=t)
            )
            for t in temps
        ]
        assert all(b >= a for a, b in zip(levels, levels[1:]))

    def test_white_in_omega(self):
        om = np.array([1.0, OSC.omega_m, 10 * OSC.omega_m])
        vals = mm.thermal_force_psd(OSC, om)
        assert_allclose(vals, vals[0])


class TestZeroPoint:
    def test_reference_value(self):
        assert_allclose(mm.zero_point_amplitude(OSC), Z_ZP, rtol=1e-12)

    def test_scalings(self):
        double_m = mm.OscillatorParams(OSC.omega_m, 2 * OSC.m_eff, OSC.gamma_m)
        double_w = mm.OscillatorParams(2 * OSC.omega_m, OSC.m_eff, OSC.gamma_m)
        z0 = mm.zero_point_amplitude(OSC)
        assert_allclose(mm.zero_point_amplitude(double_m), z0 / np.sqrt(2), rtol=1e-12)
        assert_allclose(mm.zero_point_amplitude(double_w), z0 / np.sqrt(2), rtol=1e-12)

    def test_bose_occupation(self):
        assert mm.bose_occupation(OSC.omega_m, 0.0) == 0.0
        t = HBAR * OSC.omega_m / KB  # x = 1
        assert_allclose(mm.bose_occupation(OSC.omega_m, t), 1 / (np.e - 1), rtol=1e-12)
