"""Semiclassical Monte-Carlo oracle for spatiotemporal photon shot noise.

Photon arrivals are random in time (Poisson counts per bin of width dt)
and in space (positions drawn from the beam intensity |u_in|^2). Each
photon kicks the membrane mode with generalized momentum 2 hbar k
phi(x, y), so the binned force series

    F_i = (2 hbar k / dt) sum_{photons j in bin i} phi(x_j, y_j)

has a white PSD that must match the closed form 8 hbar^2 k^2 beta^2 N.
This is an independent validation route: beta comes from quadrature, the
MC level from averaged periodograms of sampled arrivals.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import signal, stats

from . import _kernels
from .constants import HBAR
from .coupling import beta_overlap
from .fields import MembraneModeShape, SpatialField
from .spectra import IlluminationParams, SpectrumSeries, backaction_force_psd

RNG_NAME = "numpy-PCG64"


@dataclass
class ArrivalBatch:
    """Sampled photon arrivals, flat arrays grouped into time bins.

    Photons of bin i occupy the slice cumsum(counts)[i-1]:cumsum(counts)[i]
    of the position arrays. Cell indices (ix, iy) are kept so that
    subsurface membership is exact (a photon belongs to the grid cell it
    was drawn from).
    """

    dt: float
    duration: float
    counts: np.ndarray  # photons per bin
    x: np.ndarray  # positions [m]
    y: np.ndarray
    ix: np.ndarray  # grid cell indices
    iy: np.ndarray
    seed: int
    rng_name: str = RNG_NAME
    backend: str = "numpy"

    @property
    def n_bins(self) -> int:
        return self.counts.shape[0]

    @property
    def n_photons(self) -> int:
        return int(self.counts.sum())

    def bin_index(self) -> np.ndarray:
        return np.repeat(np.arange(self.n_bins), self.counts)


@dataclass
class ForceSeries:
    """Binned generalized force samples [N]; mean (DC) retained."""

    dt: float
    samples: np.ndarray


def simulate_arrivals(
    u_in: SpatialField, flux: float, duration: float, dt: float, seed: int
) -> ArrivalBatch:
    """Draw Poisson photon arrivals distributed as |u_in|^2.

    Per bin the count is Poisson(flux * dt); positions are drawn by
    inverse CDF on the grid marginals (x marginal, then y conditional on
    the x cell) with uniform jitter inside each cell. Reproducible: one
    PCG64 stream seeded with ``seed`` supplies counts, then the four
    uniform blocks (column, row, x jitter, y jitter) in that order.
    """
    if dt <= 0 or duration <= 0:
        raise ValueError("dt and duration must be positive")
    n_bins = int(round(duration / dt))
    if n_bins < 1:
        raise ValueError("duration shorter than one bin")
    if flux * dt > 1e6:
        warnings.warn(
            f"flux * dt = {flux * dt:.3g} photons per bin; consider a smaller dt",
            RuntimeWarning,
            stacklevel=2,
        )
    grid = u_in.grid
    p = np.abs(u_in.amplitude) ** 2 * grid.weights
    total_p = p.sum()
    if total_p <= 0:
        raise ValueError("beam carries no power on the grid")
    px = p.sum(axis=1)
    cdf_x = np.cumsum(px) / px.sum()
    cdf_x[-1] = 1.0
    row_tot = p.sum(axis=1, keepdims=True)
    safe = np.where(row_tot > 0, row_tot, 1.0)
    cond_cdf_y = np.cumsum(p, axis=1) / safe
    cond_cdf_y[:, -1] = 1.0

    rng = np.random.default_rng(seed)
    counts = rng.poisson(flux * dt, n_bins)
    total = int(counts.sum())
    u_col = rng.random(total)
    u_row = rng.random(total)
    jit_x = rng.random(total)
    jit_y = rng.random(total)
    ix, iy = _kernels.sample_cell_indices(cdf_x, cond_cdf_y, u_col, u_row)
    # cell centered on the grid point, jitter uniform across the cell
    xs = grid.x_min + (ix + jit_x - 0.5) * grid.dx
    ys = grid.y_min + (iy + jit_y - 0.5) * grid.dy
    return ArrivalBatch(
        dt=dt,
        duration=n_bins * dt,
        counts=counts,
        x=xs,
        y=ys,
        ix=ix,
        iy=iy,
        seed=seed,
        backend="numba" if _kernels.numba_active() else "numpy",
    )


def force_series(batch: ArrivalBatch, phi: MembraneModeShape, k: float) -> ForceSeries:
    """Generalized backaction force per bin, F_i = (2 hbar k/dt) sum phi(x_j, y_j)."""
    phi_vals = phi.evaluate(batch.x, batch.y)
    sums = np.bincount(batch.bin_index(), weights=phi_vals, minlength=batch.n_bins)
    return ForceSeries(batch.dt, (2.0 * HBAR * k / batch.dt) * sums)


def _welch(samples: np.ndarray, dt: float, segment_length: int, window: str):
    if segment_length > samples.shape[0]:
        raise ValueError("segment_length exceeds the series length")
    if segment_length < 8:
        raise ValueError("segment_length too short for a meaningful estimate")
    f, pxx = signal.welch(
        samples,
        fs=1.0 / dt,
        window=window,
        nperseg=segment_length,
        noverlap=segment_length // 2,
        detrend="constant",
        scaling="density",
    )
    return 2.0 * np.pi * f, pxx


def psd_estimate(
    series: ForceSeries, segment_length: int, window: str = "hann"
) -> SpectrumSeries:
    """Single-sided Welch PSD, 50% overlap, power-normalized window.

    Per-segment constant detrend removes the retained DC component so it
    cannot leak into the analysis band; the DC bin itself is excluded
    from any white-level fit downstream.
    """
    omega, pxx = _welch(series.samples, series.dt, segment_length, window)
    return SpectrumSeries(omega, pxx, "N^2/Hz", "mc-force")


def white_level(spectrum, band: tuple[float, float] = (0.05, 0.75)) -> float:
    """Mean PSD over a fractional Nyquist band, DC and band edges excluded."""
    om = spectrum.omega
    nyq = om[-1]
    mask = (om > band[0] * nyq) & (om <= band[1] * nyq)
    if not mask.any():
        raise ValueError("analysis band is empty")
    return float(np.mean(spectrum.values[mask].real))


@dataclass
class McRunParams:
    """Run-length, estimator and acceptance parameters for one validation."""

    dt: float
    n_bins: int
    seed: int
    segment_length: int = 256
    n_chunks: int = 8
    tolerance: float = 0.05
    band: tuple[float, float] = (0.05, 0.75)
    subsurface_scales: tuple[float, ...] = (1.0, 2.0, 3.0)

    def __post_init__(self):
        if self.n_chunks < 2:
            raise ValueError("need at least 2 chunks for a confidence interval")
        if self.n_bins < 2 * self.n_chunks * self.segment_length:
            raise ValueError(
                "n_bins too small: each chunk needs at least two Welch segments"
            )


def _chunk_white_levels(
    samples: np.ndarray, dt: float, run: McRunParams
) -> np.ndarray:
    chunk_len = samples.shape[0] // run.n_chunks
    levels = []
    for c in range(run.n_chunks):
        omega, pxx = _welch(
            samples[c * chunk_len : (c + 1) * chunk_len], dt, run.segment_length, "hann"
        )
        levels.append(
            white_level(SpectrumSeries(omega, pxx, "arb/Hz", "mc-chunk"), run.band)
        )
    return np.asarray(levels)


def _mean_and_ci(levels: np.ndarray) -> tuple[float, float]:
    mean = float(np.mean(levels))
    sem = float(np.std(levels, ddof=1) / np.sqrt(levels.size))
    t975 = float(stats.t.ppf(0.975, levels.size - 1))
    return mean, t975 * sem


@dataclass
class SubsurfaceCheck:
    half_width: float  # [m]
    flux_expected: float  # N_A [1/s]
    psd_expected: float  # 2 N_A
    psd_mc: float
    rel_error: float
    ci_rel: float


@dataclass
class McValidationReport:
    analytic_value: float
    mc_value: float
    rel_error: float
    ci_rel_halfwidth: float
    status: str  # pass | fail | inconclusive
    beta: float
    seeds: list[int]
    backend: str
    rng_name: str
    params: dict
    subsurface: list[SubsurfaceCheck] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "analytic_value": self.analytic_value,
            "mc_value": self.mc_value,
            "rel_error": self.rel_error,
            "ci": {"rel_halfwidth": self.ci_rel_halfwidth, "level": 0.95},
            "status": self.status,
            "beta": self.beta,
            "seeds": self.seeds,
            "backend": self.backend,
            "rng": self.rng_name,
            "params": self.params,
            "subsurface": [
                {
                    "half_width_m": s.half_width,
                    "flux_expected_per_s": s.flux_expected,
                    "psd_expected": s.psd_expected,
                    "psd_mc": s.psd_mc,
                    "rel_error": s.rel_error,
                    "ci_rel_halfwidth": s.ci_rel,
                }
                for s in self.subsurface
            ],
        }


def _intensity_centroid_and_radius(u_in: SpatialField) -> tuple[float, float, float]:
    w = u_in.grid.weights
    p = np.abs(u_in.amplitude) ** 2 * w
    total = p.sum()
    xg, yg = u_in.grid.meshgrid()
    xc = float((p * xg).sum() / total)
    yc = float((p * yg).sum() / total)
    r2 = float((p * ((xg - xc) ** 2 + (yg - yc) ** 2)).sum() / total)
    return xc, yc, np.sqrt(max(r2, 0.0))


def subsurface_flux_checks(
    batch: ArrivalBatch, u_in: SpatialField, flux: float, run: McRunParams
) -> list[SubsurfaceCheck]:
    """Shot-noise law S_N_A = 2 N_A on nested square subsurfaces.

    Regions are cell sets (cells whose centers fall inside the square), so
    photon membership and the quadrature of the expected flux agree
    exactly.
    """
    grid = u_in.grid
    p_cell = np.abs(u_in.amplitude) ** 2 * grid.weights
    norm = p_cell.sum()
    xc, yc, r_eff = _intensity_centroid_and_radius(u_in)
    half_widths = [s * r_eff * np.sqrt(2.0) for s in run.subsurface_scales]
    bin_idx = batch.bin_index()
    checks = []
    for h in half_widths:
        cell_mask = (np.abs(grid.x[:, None] - xc) <= h) & (
            np.abs(grid.y[None, :] - yc) <= h
        )
        n_a = flux * float(p_cell[cell_mask].sum() / norm)
        inside = cell_mask[batch.ix, batch.iy]
        counts_a = np.bincount(bin_idx[inside], minlength=batch.n_bins)
        levels = _chunk_white_levels(counts_a / batch.dt, batch.dt, run)
        mean, ci = _mean_and_ci(levels)
        expected = 2.0 * n_a
        checks.append(
            SubsurfaceCheck(
                half_width=h,
                flux_expected=n_a,
                psd_expected=expected,
                psd_mc=mean,
                rel_error=(mean - expected) / expected,
                ci_rel=ci / expected,
            )
        )
    return checks


def validate_backaction(
    u_in: SpatialField,
    phi: MembraneModeShape,
    ill: IlluminationParams,
    run: McRunParams,
) -> McValidationReport:
    """Compare the MC white-level force PSD against 8 hbar^2 k^2 beta^2 N.

    beta comes from grid quadrature (the coupling route); the MC value is
    the mean of per-chunk Welch white levels, with a 95% t-interval from
    the chunk spread. An interval wider than the tolerance yields status
    "inconclusive" (never a false pass).
    """
    beta = beta_overlap(u_in, phi)
    analytic = backaction_force_psd(ill, beta)
    batch = simulate_arrivals(u_in, ill.photon_flux, run.n_bins * run.dt, run.dt, run.seed)
    series = force_series(batch, phi, ill.k)
    levels = _chunk_white_levels(series.samples, run.dt, run)
    mc_value, ci = _mean_and_ci(levels)
    rel_error = (mc_value - analytic) / analytic
    ci_rel = ci / analytic
    if ci_rel > run.tolerance:
        status = "inconclusive"
    elif abs(rel_error) <= run.tolerance:
        status = "pass"
    else:
        status = "fail"
    subsurface = subsurface_flux_checks(batch, u_in, ill.photon_flux, run)
    return McValidationReport(
        analytic_value=analytic,
        mc_value=mc_value,
        rel_error=rel_error,
        ci_rel_halfwidth=ci_rel,
        status=status,
        beta=beta,
        seeds=[run.seed],
        backend=batch.backend,
        rng_name=batch.rng_name,
        params={
            "dt_s": run.dt,
            "n_bins": run.n_bins,
            "segment_length": run.segment_length,
            "n_chunks": run.n_chunks,
            "tolerance": run.tolerance,
            "band": list(run.band),
            "photon_flux_per_s": ill.photon_flux,
            "wavelength_m": ill.wavelength,
            "n_photons": batch.n_photons,
        },
        subsurface=subsurface,
    )
