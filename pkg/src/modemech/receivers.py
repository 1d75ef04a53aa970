"""Structured homodyne and far-field camera receivers.

Both receivers estimate the membrane displacement z0 from the reflected
field. Their shot-noise-referred imprecision is bounded below by
hbar^2 / S_F^BA (the standard quantum limit); the camera's shortfall is
the unitless ideality factor kappa >= 1.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .constants import HBAR
from .fields import Grid2D, GridMismatchError, SpatialField, far_field, inner_product
from .spectra import IlluminationParams

DARK_PIXEL_FLOOR = 1e-12  # relative mean-intensity cutoff for 1/I weights
KAPPA_INF_TOL = 1e-12  # dimensionless 1/kappa below this reports kappa = inf


class NoInformationError(ValueError):
    """No pixel carries displacement information."""


@dataclass
class HomodyneConfig:
    """Structured homodyne receiver.

    u_lo       : local oscillator mode (unit norm)
    n_lo       : LO photon flux [1/s]
    phase_diff : theta_LO - theta_in [rad]
    xi         : photodetection efficiency in (0, 1]
    """

    u_lo: SpatialField
    n_lo: float
    phase_diff: float
    xi: float = 1.0

    def __post_init__(self):
        if self.n_lo <= 0:
            raise ValueError("LO flux must be positive")
        if not (0.0 < self.xi <= 1.0):
            raise ValueError("efficiency must lie in (0, 1]")
        if self.u_lo.normalization != "unit_norm":
            raise ValueError("LO mode must be unit-normalized")


class HomodyneImprecision(NamedTuple):
    s_z_imp: float  # [m^2/Hz]; inf if the receiver is blind
    ideality: float  # S_z^imp S_F^BA / hbar^2; 1 is ideal


def _homodyne_slope(
    cfg: HomodyneConfig, ill: IlluminationParams, beta: float, u_sc: SpatialField
) -> float:
    ov = inner_product(cfg.u_lo, u_sc)
    return (
        4.0
        * ill.k
        * beta
        * cfg.xi
        * np.sqrt(cfg.n_lo * ill.photon_flux)
        * abs(ov)
        * np.sin(cfg.phase_diff)
    )


def homodyne_signal(
    cfg: HomodyneConfig,
    ill: IlluminationParams,
    beta: float,
    u_sc: SpatialField,
    z0: float,
) -> float:
    """Balanced photocurrent i = 4 k z0 beta xi sqrt(N_LO N) <u_LO, u_sc> sin(dphase).

    Returned in photon-flux units [1/s]. The mode overlap is complex in
    general; its real part enters here (the modes of interest are real).
    """
    ov = inner_product(cfg.u_lo, u_sc)
    if abs(ov.imag) > 1e-9 * max(abs(ov), 1e-30):
        warnings.warn(
            "complex LO/scattered-mode overlap; using its real part",
            RuntimeWarning,
            stacklevel=2,
        )
    return (
        4.0
        * ill.k
        * z0
        * beta
        * cfg.xi
        * np.sqrt(cfg.n_lo * ill.photon_flux)
        * ov.real
        * np.sin(cfg.phase_diff)
    )


def homodyne_imprecision(
    cfg: HomodyneConfig, ill: IlluminationParams, beta: float, u_sc: SpatialField
) -> HomodyneImprecision:
    """Shot-noise-referred imprecision S_z^imp = (di/dz0)^-2 2 xi (N_LO + N).

    The bound (8 k^2 beta^2 N)^-1 is reached for u_LO = u_sc, quadrature
    phase pi/2, xi = 1 and a strong local oscillator. A blind receiver
    (orthogonal LO or zero phase) returns inf for both fields.
    """
    slope = _homodyne_slope(cfg, ill, beta, u_sc)
    if slope == 0.0:
        return HomodyneImprecision(np.inf, np.inf)
    s_imp = 2.0 * cfg.xi * (cfg.n_lo + ill.photon_flux) / slope**2
    s_f_ba = 8.0 * HBAR**2 * ill.k**2 * beta**2 * ill.photon_flux
    return HomodyneImprecision(s_imp, s_imp * s_f_ba / HBAR**2)


# --------------------------------------------------------------------------
# far-field camera


@dataclass
class CameraConfig:
    """Pixelated camera in the far field.

    distance   : membrane-to-sensor distance d [m] (Fraunhofer regime)
    pixel_size : square pixel side l [m]; must be an integer multiple of
                 the sensor-grid spacing (box-averaged pixelation)
    xi         : photodetection efficiency
    bandwidth  : measurement bandwidth Delta_f [Hz] (enters pixel noise
                 variance sigma^2 = 2 i_mean Delta_f; cancels in PSDs)
    """

    distance: float
    pixel_size: float
    xi: float = 1.0
    bandwidth: float = 1.0

    def __post_init__(self):
        if self.distance <= 0 or self.pixel_size <= 0 or self.bandwidth <= 0:
            raise ValueError("distance, pixel_size and bandwidth must be positive")
        if not (0.0 < self.xi <= 1.0):
            raise ValueError("efficiency must lie in (0, 1]")


def camera_intensity(
    u_in_far: SpatialField,
    u_sc_far: SpatialField,
    ill: IlluminationParams,
    beta: float,
    z0: float,
    distance: float,
) -> np.ndarray:
    """Photon intensity on the sensor [1/(s m^2)], first order in k z0.

    I = N/(lambda^2 d^2) (|u~_in|^2 - 4 beta k z0 Im[u~_sc u~_in*]).
    """
    if u_in_far.grid != u_sc_far.grid:
        raise GridMismatchError("far fields must share the sensor grid")
    if abs(ill.k * z0) > 0.1:
        warnings.warn(
            "k z0 is not small; the first-order intensity expansion degrades",
            RuntimeWarning,
            stacklevel=2,
        )
    jac = ill.photon_flux / (ill.wavelength**2 * distance**2)
    base = np.abs(u_in_far.amplitude) ** 2
    signal = np.imag(u_sc_far.amplitude * np.conj(u_in_far.amplitude))
    return jac * (base - 4.0 * beta * ill.k * z0 * signal)


def pixelate(values: np.ndarray, grid: Grid2D, pixel_size: float):
    """Box-average sensor samples onto square pixels of side ``pixel_size``.

    Returns (pixel_means, x_centers, y_centers). The pixel side must be
    an integer multiple of the sensor spacing; trailing samples that do
    not fill a pixel are dropped.
    """
    fx = pixel_size / grid.dx
    f = int(round(fx))
    if f < 1 or abs(fx - f) > 1e-6:
        raise ValueError("pixel_size must be an integer multiple of the grid spacing")
    nx = (grid.nx // f) * f
    ny = (grid.ny // f) * f
    if nx == 0 or ny == 0:
        raise ValueError("pixel larger than the sensor")
    v = values[:nx, :ny].reshape(nx // f, f, ny // f, f).mean(axis=(1, 3))
    xc = grid.x[:nx].reshape(-1, f).mean(axis=1)
    yc = grid.y[:ny].reshape(-1, f).mean(axis=1)
    return v, xc, yc


class CameraModel(NamedTuple):
    mean_currents: np.ndarray  # i_mean per pixel [1/s]
    deriv_currents: np.ndarray  # di/dz0 per pixel [1/(s m)]
    x_centers: np.ndarray
    y_centers: np.ndarray


def camera_forward_model(
    cfg: CameraConfig,
    u_in_far: SpatialField,
    u_sc_far: SpatialField,
    ill: IlluminationParams,
    beta: float,
) -> CameraModel:
    """Per-pixel mean photocurrent and displacement derivative.

    i_mean = xi N/(lambda^2 d^2) |u~_in|^2 l^2 and
    di/dz0 = -4 beta k xi N/(lambda^2 d^2) Im[u~_sc u~_in*] l^2,
    box-averaged over l x l pixels.
    """
    if u_in_far.grid != u_sc_far.grid:
        raise GridMismatchError("far fields must share the sensor grid")
    jac = cfg.xi * ill.photon_flux / (ill.wavelength**2 * cfg.distance**2)
    area = cfg.pixel_size**2
    base, xc, yc = pixelate(np.abs(u_in_far.amplitude) ** 2, u_in_far.grid, cfg.pixel_size)
    sig, _, _ = pixelate(
        np.imag(u_sc_far.amplitude * np.conj(u_in_far.amplitude)),
        u_in_far.grid,
        cfg.pixel_size,
    )
    return CameraModel(jac * base * area, -4.0 * beta * ill.k * jac * sig * area, xc, yc)


class WlsEstimate(NamedTuple):
    z_est: float  # [m]
    s_z_imp: float  # [m^2/Hz]


def wls_estimate(
    cfg: CameraConfig,
    mean_currents: np.ndarray,
    deriv_currents: np.ndarray,
    currents: np.ndarray,
) -> WlsEstimate:
    """Weighted-least-squares displacement estimate from pixel photocurrents.

    Minimizes sum_p (d_p z - delta_i_p)^2 / sigma_p^2 with shot-noise
    weights sigma_p^2 = 2 i_mean_p Delta_f over the residual currents
    delta_i = currents - mean_currents. Pixels with mean current below
    1e-12 of the peak are excluded: their 1/i_mean weight diverges while
    they carry vanishing Fisher information.

    Returns the estimate and its shot-noise-limited imprecision PSD
    S_z^imp = (sum_p d_p^2 / (2 i_mean_p))^-1 (bandwidth-independent).
    """
    i_mean = np.asarray(mean_currents, dtype=float)
    d = np.asarray(deriv_currents, dtype=float)
    i_obs = np.asarray(currents, dtype=float)
    if i_mean.shape != d.shape or i_mean.shape != i_obs.shape:
        raise ValueError("pixel arrays must share a shape")
    live = i_mean > DARK_PIXEL_FLOOR * i_mean.max()
    fisher = np.sum(d[live] ** 2 / (2.0 * i_mean[live]))
    if fisher == 0.0:
        raise NoInformationError("all pixel derivatives vanish")
    w = 1.0 / (2.0 * i_mean[live] * cfg.bandwidth)
    denom = np.sum(w * d[live] ** 2)
    z_est = np.sum(w * d[live] * (i_obs[live] - i_mean[live])) / denom
    return WlsEstimate(float(z_est), float(1.0 / fisher))


def ideality_kappa(
    u_in: SpatialField,
    u_sc: SpatialField,
    beta_par: float,
    beta_perp: float,
    beta: float,
    wavelength: float,
    distance: float,
    form: str = "auto",
) -> float:
    """Receiver ideality factor of the far-field camera.

    kappa = lambda^2 d^2 (iint (Im[u~_sc u~_in*])^2 / |u~_in|^2 dx dy)^-1,

    with the integrand floored to zero where |u~_in|^2 < 1e-12 of its
    peak. Equals 1 for an ideal measurement (e.g. a tilting surface probed
    by a centered Gaussian) and inf for purely dispersive coupling, where
    the far-field intensity carries no displacement signal.

    ``form`` selects the direct integrand ("direct"), the numerically
    stabler orthogonal-component factorization
    kappa = lambda^2 d^2 (beta/beta_perp)^2 (iint (Im[u~_perp u~_in*])^2
    / |u~_in|^2)^-1 ("orthogonal"), or a heuristic choice ("auto",
    orthogonal form when the modes strongly overlap). Both forms agree to
    1e-6 relative whenever both are finite.
    """
    if u_in.grid != u_sc.grid:
        raise GridMismatchError("source fields must share a grid")
    if form not in ("auto", "direct", "orthogonal"):
        raise ValueError("form must be 'auto', 'direct' or 'orthogonal'")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        uf_in = far_field(u_in, wavelength, distance)

    def inv_kappa(field_src: SpatialField) -> float:
        """Dimensionless iint (Im[u~ u~_in*])^2 / |u~_in|^2 / (lambda d)^2."""
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            uf = far_field(field_src, wavelength, distance)
        i0 = np.abs(uf_in.amplitude) ** 2
        b = np.imag(uf.amplitude * np.conj(uf_in.amplitude))
        live = i0 > DARK_PIXEL_FLOOR * i0.max()
        integrand = np.zeros_like(i0)
        integrand[live] = b[live] ** 2 / i0[live]
        integral = np.sum(integrand * uf_in.grid.weights)
        return float(integral / (wavelength**2 * distance**2))

    use_orthogonal = form == "orthogonal" or (
        form == "auto" and abs(inner_product(u_in, u_sc)) > 0.9 and beta_perp > 0
    )
    if use_orthogonal:
        if beta_perp <= 0:
            return np.inf
        amp = (beta * u_sc.amplitude - beta_par * u_in.amplitude) / beta_perp
        u_perp = SpatialField(u_in.grid, amp, "unit_norm")
        q = (beta_perp / beta) ** 2 * inv_kappa(u_perp)
    else:
        q = inv_kappa(u_sc)
    if q < KAPPA_INF_TOL:
        return np.inf
    return 1.0 / q
