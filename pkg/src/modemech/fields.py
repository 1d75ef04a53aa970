"""Sampling grids, transverse optical modes, membrane modeshapes, propagation.

Conventions
-----------
- Fields live on uniform tensor grids and are indexed ``amplitude[ix, iy]``
  (``meshgrid`` indexing ``"ij"``).
- Surface integrals use trapezoidal quadrature; the integrands handled here
  are smooth and rapidly decaying, so the trapezoid rule converges
  spectrally as long as the grid covers the field support.
- ``w0`` is the 1/e^2 intensity radius of a Gaussian beam.
- Unit-normalized fields carry amplitude units of 1/m so that
  ``iint |u|^2 dx dy`` is dimensionless.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np


class GridMismatchError(ValueError):
    """Two fields that must share a grid do not."""


class AliasingError(ValueError):
    """A field carries significant power at the grid edge."""


@dataclass
class Grid2D:
    """Uniform rectangular sampling domain.

    Spacing is ``dx = (x_max - x_min)/(nx - 1)`` (endpoints included).
    """

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ValueError(f"degenerate grid: nx={self.nx}, ny={self.ny} (need >= 2)")
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise ValueError("degenerate grid: empty extent")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def dy(self) -> float:
        return (self.y_max - self.y_min) / (self.ny - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def y(self) -> np.ndarray:
        return np.linspace(self.y_min, self.y_max, self.ny)

    @property
    def wx(self) -> np.ndarray:
        """1D trapezoid quadrature weights along x [m]."""
        w = np.full(self.nx, self.dx)
        w[0] *= 0.5
        w[-1] *= 0.5
        return w

    @property
    def wy(self) -> np.ndarray:
        w = np.full(self.ny, self.dy)
        w[0] *= 0.5
        w[-1] *= 0.5
        return w

    @property
    def weights(self) -> np.ndarray:
        """2D quadrature weights [m^2], shape (nx, ny)."""
        return np.outer(self.wx, self.wy)

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.y, indexing="ij")


def default_grid(w0: float, lambda_m: float | None = None, n: int = 512) -> Grid2D:
    """Default square domain: +/- 4 max(w0, lambda_m), n x n samples."""
    half = 4.0 * max(w0, lambda_m if lambda_m is not None else w0)
    return Grid2D(-half, half, -half, half, n, n)


@dataclass(frozen=True)
class HGMeta:
    """Provenance of an analytically constructed Hermite-Gauss field."""

    m: int
    n: int
    w0: float
    center: tuple[float, float]


@dataclass
class SpatialField:
    """Complex transverse field samples with declared normalization.

    ``normalization == "unit_norm"`` asserts ``iint |u|^2 dx dy = 1`` to
    1e-6; ``"unnormalized"`` makes no claim (e.g. far fields, which carry
    a lambda^2 d^2 Jacobian).
    """

    grid: Grid2D
    amplitude: np.ndarray
    normalization: str = "unit_norm"
    meta: HGMeta | None = None

    def __post_init__(self):
        self.amplitude = np.asarray(self.amplitude, dtype=complex)
        if self.amplitude.shape != (self.grid.nx, self.grid.ny):
            raise ValueError(
                f"amplitude shape {self.amplitude.shape} does not match grid "
                f"({self.grid.nx}, {self.grid.ny})"
            )
        if self.normalization not in ("unit_norm", "unnormalized"):
            raise ValueError(f"unknown normalization tag {self.normalization!r}")
        if self.normalization == "unit_norm":
            p = self.power()
            if abs(p - 1.0) > 1e-6:
                raise ValueError(f"field tagged unit_norm but iint|u|^2 = {p!r}")

    def power(self) -> float:
        """iint |u|^2 dx dy by trapezoid quadrature."""
        return float(np.sum(np.abs(self.amplitude) ** 2 * self.grid.weights))


# --------------------------------------------------------------------------
# membrane modeshapes


@dataclass(frozen=True)
class SinusoidalMode:
    """phi(x, y) = cos(j pi x / lambda_m) cos(k pi y / lambda_m).

    ``j = k = 1`` is the symmetric membrane mode with nodal spacing
    lambda_m; ``j = k = 0`` degenerates to phi = 1 (uniform piston), the
    purely dispersive limit.
    """

    lambda_m: float
    j: int = 1
    k: int = 1

    def evaluate(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.cos(self.j * np.pi * x / self.lambda_m) * np.cos(
            self.k * np.pi * y / self.lambda_m
        )


@dataclass(frozen=True)
class TiltMode:
    """phi = 2 x / lambda_m (or 2 y / lambda_m for axis "y").

    The normalization constant 2/lambda_m is chosen so that the lever arm
    of the equivalent torque is lambda_m / 2; see
    :func:`modemech.spectra.torque_view`.
    """

    lambda_m: float
    axis: str = "x"

    def evaluate(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        coord = x if self.axis == "x" else y
        return 2.0 * coord / self.lambda_m


@dataclass
class MembraneModeShape:
    """Dimensionless mechanical modeshape phi(x, y) sampled on a grid.

    The analytic descriptor is kept alongside the samples so that phi can
    be evaluated exactly at off-grid points (Monte-Carlo photon positions).
    """

    grid: Grid2D
    values: np.ndarray
    descriptor: SinusoidalMode | TiltMode

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.nx, self.grid.ny):
            raise ValueError("modeshape samples do not match grid")

    @classmethod
    def from_descriptor(cls, descriptor, grid: Grid2D) -> "MembraneModeShape":
        xg, yg = grid.meshgrid()
        return cls(grid, descriptor.evaluate(xg, yg), descriptor)

    def evaluate(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """phi at arbitrary coordinates, from the analytic descriptor."""
        return self.descriptor.evaluate(np.asarray(x), np.asarray(y))


def membrane_cosine_mode(lambda_m: float, grid: Grid2D) -> MembraneModeShape:
    """Symmetric membrane mode cos(pi x/lambda_m) cos(pi y/lambda_m)."""
    if lambda_m <= 0:
        raise ValueError("lambda_m must be positive")
    return MembraneModeShape.from_descriptor(SinusoidalMode(lambda_m), grid)


def tilt_mode(lambda_m: float, grid: Grid2D, axis: str = "x") -> MembraneModeShape:
    """Rotation-like modeshape phi = 2 x / lambda_m (anti-symmetric)."""
    if lambda_m <= 0:
        raise ValueError("lambda_m must be positive")
    if axis not in ("x", "y"):
        raise ValueError("axis must be 'x' or 'y'")
    return MembraneModeShape.from_descriptor(TiltMode(lambda_m, axis), grid)


# --------------------------------------------------------------------------
# Hermite-Gauss modes


def hermite_gauss_1d(
    n_max: int, coords: np.ndarray, w0: float, x0: float, weights: np.ndarray | None = None
) -> np.ndarray:
    """Stack of 1D Hermite-Gauss amplitudes, orders 0..n_max, shape (n_max+1, len).

    u_n(x) = (2/pi)^(1/4) / sqrt(w0 2^n n!) H_n(sqrt(2)(x-x0)/w0)
             exp(-(x-x0)^2/w0^2),

    built with the stable three-term recurrence for orthonormal Hermite
    functions. When quadrature ``weights`` are given, each order is
    re-normalized to unit norm on the grid (continuum normalization is
    exact only on an infinite domain).
    """
    if n_max < 0:
        raise ValueError("mode order must be >= 0")
    if w0 <= 0:
        raise ValueError("waist must be positive")
    t = np.sqrt(2.0) * (np.asarray(coords, dtype=float) - x0) / w0
    h = np.empty((n_max + 1, t.size))
    # orthonormal Hermite functions psi_n(t), scaled so iint u_n^2 dx = 1
    scale = np.sqrt(np.sqrt(2.0) / w0)
    h[0] = scale * np.pi ** -0.25 * np.exp(-0.5 * t * t)
    if n_max >= 1:
        h[1] = np.sqrt(2.0) * t * h[0]
    for n in range(1, n_max):
        h[n + 1] = np.sqrt(2.0 / (n + 1)) * t * h[n] - np.sqrt(n / (n + 1)) * h[n - 1]
    if weights is not None:
        norms = np.sqrt(np.sum(h * h * weights, axis=1))
        if not np.all(norms > 0) or not np.all(np.isfinite(norms)):
            raise ValueError(
                "grid does not resolve the mode (zero norm after sampling); "
                "shrink the domain or refine the sampling"
            )
        h /= norms[:, None]
    return h


def _warn_if_grid_tight(grid: Grid2D, m: int, n: int, w0: float, center) -> None:
    # effective 1D extent: classical turning point w0 sqrt(2 order + 1)
    x0, y0 = center
    ext_x = w0 * np.sqrt(2 * m + 1)
    ext_y = w0 * np.sqrt(2 * n + 1)
    margin = 4.0 * w0
    if (
        x0 - grid.x_min < ext_x + margin
        or grid.x_max - x0 < ext_x + margin
        or y0 - grid.y_min < ext_y + margin
        or grid.y_max - y0 < ext_y + margin
    ):
        warnings.warn(
            f"grid spans less than 4 waists beyond the HG({m},{n}) extent; "
            "quadrature accuracy may degrade",
            RuntimeWarning,
            stacklevel=3,
        )


def hg_mode(
    m: int,
    n: int,
    w0: float,
    center: tuple[float, float],
    grid: Grid2D,
) -> SpatialField:
    """Unit-normalized Hermite-Gauss mode HG_mn at waist, centered at ``center``.

    Physicists' Hermite polynomials; HG_00 is
    sqrt(2/(pi w0^2)) exp(-((x-x0)^2+(y-y0)^2)/w0^2).
    """
    if m < 0 or n < 0:
        raise ValueError("mode orders must be >= 0")
    _warn_if_grid_tight(grid, m, n, w0, center)
    hx = hermite_gauss_1d(m, grid.x, w0, center[0], grid.wx)[m]
    hy = hermite_gauss_1d(n, grid.y, w0, center[1], grid.wy)[n]
    return SpatialField(
        grid,
        np.outer(hx, hy).astype(complex),
        "unit_norm",
        meta=HGMeta(m, n, w0, (center[0], center[1])),
    )


# --------------------------------------------------------------------------
# inner product and far-field propagation


def inner_product(u: SpatialField, v: SpatialField) -> complex:
    """<u, v> = iint u* v dx dy by trapezoid quadrature on the shared grid."""
    if u.grid != v.grid:
        raise GridMismatchError("inner_product requires identical grids")
    return complex(np.sum(np.conj(u.amplitude) * v.amplitude * u.grid.weights))


def _effective_radius(field: SpatialField) -> float:
    """Gaussian-equivalent waist from intensity second moments."""
    w = field.grid.weights
    p = np.abs(field.amplitude) ** 2 * w
    total = p.sum()
    if total <= 0:
        return 0.0
    xg, yg = field.grid.meshgrid()
    xc = (p * xg).sum() / total
    yc = (p * yg).sum() / total
    r2 = (p * ((xg - xc) ** 2 + (yg - yc) ** 2)).sum() / total
    return float(np.sqrt(2.0 * r2))


def far_field(
    u: SpatialField,
    wavelength: float,
    distance: float,
    edge_power_tol: float = 1e-6,
) -> SpatialField:
    """Fraunhofer far field of ``u`` at ``distance``.

    Computes u~(x, y) = iint exp(-i k (x x' + y y')/d) u(x', y') dx' dy'
    via FFT and maps spatial frequencies to physical sensor coordinates
    x = lambda d f_x. The output is tagged ``unnormalized``; for
    unit-norm input, iint |u~|^2 dx dy = lambda^2 d^2 (Plancherel), i.e.
    the 1/(lambda^2 d^2) Jacobian is left to the caller.

    Raises :class:`AliasingError` if more than ``edge_power_tol`` of the
    field power sits in the outermost sample ring.
    """
    if wavelength <= 0 or distance <= 0:
        raise ValueError("wavelength and distance must be positive")
    grid = u.grid
    k = 2.0 * np.pi / wavelength
    w_eff = _effective_radius(u)
    if w_eff > 0 and distance < 10.0 * k * w_eff**2:
        warnings.warn(
            f"distance {distance:g} m is not far outside the Rayleigh range "
            f"(k w^2 = {k * w_eff**2:g} m); Fraunhofer formula may be inaccurate",
            RuntimeWarning,
            stacklevel=2,
        )
    p = np.abs(u.amplitude) ** 2 * grid.weights
    total = p.sum()
    edge = p[0, :].sum() + p[-1, :].sum() + p[1:-1, 0].sum() + p[1:-1, -1].sum()
    if total > 0 and edge > edge_power_tol * total:
        raise AliasingError(
            f"{edge / total:.2e} of the field power lies on the grid edge; "
            "enlarge the domain or refine sampling"
        )
    fx = np.fft.fftshift(np.fft.fftfreq(grid.nx, grid.dx))
    fy = np.fft.fftshift(np.fft.fftfreq(grid.ny, grid.dy))
    amp = np.fft.fftshift(np.fft.fft2(u.amplitude)) * (grid.dx * grid.dy)
    # continuous-kernel phase for a grid whose first sample is (x_min, y_min)
    amp *= np.exp(-2j * np.pi * np.add.outer(fx * grid.x_min, fy * grid.y_min))
    s = wavelength * distance
    out_grid = Grid2D(fx[0] * s, fx[-1] * s, fy[0] * s, fy[-1] * s, grid.nx, grid.ny)
    return SpatialField(out_grid, amp, "unnormalized")
