import numpy as np
import pytest
from numpy.testing import assert_allclose

import modemech as mm
from modemech import _kernels
from modemech.constants import HBAR
from modemech.fields import SinusoidalMode

from conftest import LAMBDA_M, W0, WAVELENGTH, beta_squared_closed_form

FLUX = 1e9  # [1/s]
DT = 30.5e-9  # flux * dt ~ 30 photons per bin
ILL = mm.IlluminationParams(WAVELENGTH, FLUX)


@pytest.fixture(scope="module")
def small_grid():
    return mm.default_grid(W0, LAMBDA_M, n=256)


@pytest.fixture(scope="module")
def small_beam(small_grid):
    return mm.hg_mode(0, 0, W0, (0.0, 0.0), small_grid)


@pytest.fixture(scope="module")
def small_membrane(small_grid):
    return mm.membrane_cosine_mode(LAMBDA_M, small_grid)


@pytest.fixture(scope="module")
def batch(small_beam):
    return mm.simulate_arrivals(small_beam, FLUX, 4096 * DT, DT, seed=42)


class TestSimulateArrivals:
    def test_seed_determinism_bit_identical(self, small_beam, batch):
        again = mm.simulate_arrivals(small_beam, FLUX, 4096 * DT, DT, seed=42)
        assert np.array_equal(batch.counts, again.counts)
        assert np.array_equal(batch.x, again.x)
        assert np.array_equal(batch.y, again.y)
        assert np.array_equal(batch.ix, again.ix)

    def test_different_seed_differs(self, small_beam, batch):
        other = mm.simulate_arrivals(small_beam, FLUX, 4096 * DT, DT, seed=43)
        assert not np.array_equal(batch.x, other.x)

    def test_backends_bit_identical(self, small_beam, batch, monkeypatch):
        if not _kernels.numba_active():
            pytest.skip("numba unavailable")
        monkeypatch.setenv(_kernels.DISABLE_ENV, "1")
        assert not _kernels.numba_active()
        numpy_batch = mm.simulate_arrivals(small_beam, FLUX, 4096 * DT, DT, seed=42)
        assert numpy_batch.backend == "numpy"
        assert np.array_equal(batch.x, numpy_batch.x)
        assert np.array_equal(batch.y, numpy_batch.y)
        assert np.array_equal(batch.counts, numpy_batch.counts)

    def test_poisson_count_statistics(self, batch):
        expected = FLUX * DT * batch.n_bins
        # 3 sigma on the total count
        assert abs(batch.n_photons - expected) <= 3 * np.sqrt(expected)
        # per-bin variance consistent with Poisson (loose 10% check)
        assert batch.counts.var() == pytest.approx(FLUX * DT, rel=0.1)

    def test_positions_follow_beam_intensity(self, small_beam, batch):
        # radial CDF check: fraction of photons within r of the center
        r = np.hypot(batch.x, batch.y)
        for radius, expected in [
            (W0 / 2, 1 - np.exp(-2 * (0.5) ** 2)),
            (W0, 1 - np.exp(-2.0)),
            (2 * W0, 1 - np.exp(-8.0)),
        ]:
            frac = np.mean(r <= radius)
            sigma = np.sqrt(expected * (1 - expected) / batch.n_photons)
            assert abs(frac - expected) <= 5 * sigma + 1e-4

    def test_photon_positions_inside_grid(self, small_grid, batch):
        assert batch.x.min() >= small_grid.x_min - small_grid.dx
        assert batch.x.max() <= small_grid.x_max + small_grid.dx

    def test_large_bin_occupancy_warns(self, small_beam):
        with pytest.warns(RuntimeWarning):
            mm.simulate_arrivals(small_beam, 1e13, 2e-6, 1e-6, seed=0)

    def test_invalid_run_lengths(self, small_beam):
        with pytest.raises(ValueError):
            mm.simulate_arrivals(small_beam, FLUX, -1.0, DT, seed=0)
        with pytest.raises(ValueError):
            mm.simulate_arrivals(small_beam, FLUX, 1e-6, 0.0, seed=0)


class TestForceSeries:
    def test_uniform_modeshape_counts_only(self, small_grid, small_beam, batch):
        # phi = 1: F_i = 2 hbar k counts_i / dt, pure temporal shot noise
        flat = mm.MembraneModeShape.from_descriptor(
            SinusoidalMode(LAMBDA_M, j=0, k=0), small_grid
        )
        series = mm.force_series(batch, flat, ILL.k)
        expected = 2 * HBAR * ILL.k * batch.counts / DT
        assert_allclose(series.samples, expected, rtol=1e-12)

    def test_zero_modeshape_zero_force(self, small_grid, batch):
        dead = mm.MembraneModeShape(
            small_grid, np.zeros((small_grid.nx, small_grid.ny)), _Zero()
        )
        series = mm.force_series(batch, dead, ILL.k)
        assert np.all(series.samples == 0.0)

    def test_node_mean_zero_variance_positive(self, small_grid, small_membrane):
        u = mm.hg_mode(0, 0, W0, (LAMBDA_M / 2, 0.0), small_grid)
        b = mm.simulate_arrivals(u, FLUX, 8192 * DT, DT, seed=3)
        series = mm.force_series(b, small_membrane, ILL.k)
        rms = series.samples.std()
        assert abs(series.samples.mean()) < 5 * rms / np.sqrt(b.n_bins)
        assert rms > 0


class _Zero:
    def evaluate(self, x, y):
        return np.zeros_like(np.asarray(x, dtype=float))


class TestPsdEstimate:
    def test_white_gaussian_level(self):
        # known estimator identity: white noise of variance s^2 sampled at
        # 1/dt has a single-sided PSD of 2 s^2 dt
        rng = np.random.default_rng(0)
        dt = 1e-5
        sigma = 3.7
        series = mm.ForceSeries(dt, sigma * rng.standard_normal(65536))
        spec = mm.psd_estimate(series, 512)
        level = mm.white_level(spec)
        assert level == pytest.approx(2 * sigma**2 * dt, rel=0.03)

    def test_sinusoid_peak_location(self):
        dt = 1e-5
        f0 = 5e3
        t = np.arange(16384) * dt
        series = mm.ForceSeries(dt, np.sin(2 * np.pi * f0 * t))
        spec = mm.psd_estimate(series, 2048)
        peak_omega = spec.omega[np.argmax(spec.values)]
        df = spec.omega[1] - spec.omega[0]
        assert abs(peak_omega - 2 * np.pi * f0) <= df

    def test_poisson_counts_reproduce_eq1_level(self, small_grid, small_beam):
        flat = mm.MembraneModeShape.from_descriptor(
            SinusoidalMode(LAMBDA_M, j=0, k=0), small_grid
        )
        b = mm.simulate_arrivals(small_beam, FLUX, 16384 * DT, DT, seed=11)
        spec = mm.psd_estimate(mm.force_series(b, flat, ILL.k), 256)
        level = mm.white_level(spec)
        assert level == pytest.approx(8 * HBAR**2 * ILL.k**2 * FLUX, rel=0.05)

    def test_too_short_series_rejected(self):
        series = mm.ForceSeries(1e-6, np.zeros(64))
        with pytest.raises(ValueError):
            mm.psd_estimate(series, 128)

    def test_spectrum_is_white_across_band(self, small_beam, small_membrane):
        # no spurious structure: quarter-band means agree within error
        b = mm.simulate_arrivals(small_beam, FLUX, 32768 * DT, DT, seed=5)
        spec = mm.psd_estimate(mm.force_series(b, small_membrane, ILL.k), 256)
        om, vals = spec.omega, spec.values
        nyq = om[-1]
        quarters = []
        for lo, hi in [(0.05, 0.25), (0.25, 0.45), (0.45, 0.65), (0.65, 0.85)]:
            sel = (om > lo * nyq) & (om <= hi * nyq)
            quarters.append(np.mean(vals[sel]))
        mean = np.mean(quarters)
        # each quarter averages ~6400 periodogram cells: 4 sigma ~ 5%
        for q in quarters:
            assert abs(q - mean) <= 0.05 * mean


class TestValidateBackaction:
    def run_params(self, seed=1, n_bins=32768):
        return mm.McRunParams(dt=DT, n_bins=n_bins, seed=seed, segment_length=256)

    def test_uniform_modeshape_passes(self, small_grid, small_beam):
        flat = mm.MembraneModeShape.from_descriptor(
            SinusoidalMode(LAMBDA_M, j=0, k=0), small_grid
        )
        report = mm.validate_backaction(small_beam, flat, ILL, self.run_params())
        assert report.status == "pass"
        assert abs(report.rel_error) <= 0.05
        assert_allclose(report.analytic_value, 8 * HBAR**2 * ILL.k**2 * FLUX, rtol=1e-12)

    def test_antinode_passes_with_oracle_beta(self, small_beam, small_membrane):
        report = mm.validate_backaction(small_beam, small_membrane, ILL, self.run_params(seed=2))
        assert report.status == "pass"
        assert_allclose(
            report.beta, np.sqrt(beta_squared_closed_form(0.0, 0.0, W0)), rtol=1e-9
        )

    def test_node_passes(self, small_grid, small_membrane):
        u = mm.hg_mode(0, 0, W0, (LAMBDA_M / 2, 0.0), small_grid)
        report = mm.validate_backaction(u, small_membrane, ILL, self.run_params(seed=3))
        assert report.status == "pass"
        assert_allclose(
            report.beta, np.sqrt(beta_squared_closed_form(LAMBDA_M / 2, 0.0, W0)), rtol=1e-9
        )

    def test_subsurface_flux_law(self, small_beam, small_membrane):
        report = mm.validate_backaction(small_beam, small_membrane, ILL, self.run_params(seed=4))
        assert len(report.subsurface) == 3
        for check in report.subsurface:
            assert abs(check.rel_error) <= 0.05
            assert check.ci_rel <= 0.05

    def test_underconverged_run_is_inconclusive(self, small_beam, small_membrane):
        run = mm.McRunParams(
            dt=DT, n_bins=4096, seed=5, segment_length=64, tolerance=0.002
        )
        report = mm.validate_backaction(small_beam, small_membrane, ILL, run)
        assert report.status == "inconclusive"

    def test_convergence_rate(self, small_beam, small_membrane):
        # rms error over seeds shrinks ~ 1/sqrt(run length)
        analytic = mm.backaction_force_psd(ILL, mm.beta_overlap(small_beam, small_membrane))
        lengths = [2048, 8192, 32768]
        rms = []
        for n_bins in lengths:
            errs = []
            for seed in range(6):
                b = mm.simulate_arrivals(small_beam, FLUX, n_bins * DT, DT, seed=seed)
                level = mm.white_level(
                    mm.psd_estimate(mm.force_series(b, small_membrane, ILL.k), 256)
                )
                errs.append((level - analytic) / analytic)
            rms.append(np.sqrt(np.mean(np.square(errs))))
        slope = np.polyfit(np.log(lengths), np.log(rms), 1)[0]
        assert -0.8 <= slope <= -0.25

    def test_report_serializes(self, small_beam, small_membrane):
        import json

        report = mm.validate_backaction(small_beam, small_membrane, ILL, self.run_params(seed=6))
        payload = json.dumps(report.to_dict())
        decoded = json.loads(payload)
        assert {"analytic_value", "mc_value", "rel_error", "ci", "seeds", "params"} <= set(
            decoded
        )
