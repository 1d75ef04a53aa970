"""Scattered-mode construction and overlap coefficients.

A beam ``u_in`` reflecting off a membrane vibrating in modeshape ``phi``
scatters motional sidebands into the spatial mode
``u_sc = u_in phi / beta`` with overall coupling

    beta^2 = iint |u_in|^2 phi^2 dx dy.

``beta_par = beta <u_in, u_sc>`` (signed; it changes sign between nodes)
is the dispersive component along the input mode and
``beta_perp = sqrt(beta^2 - beta_par^2) >= 0`` the spatial component into
the orthogonal complement ``u_perp``. The expansion coefficients of the
scattered field in the Hermite-Gauss basis co-translated with the beam are
``beta_mn = <u_mn, phi u_00>``, with ``beta_00 = beta_par`` and
``sum |beta_mn|^2 -> beta^2`` (Parseval).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import (
    GridMismatchError,
    HGMeta,
    MembraneModeShape,
    SpatialField,
    hermite_gauss_1d,
    hg_mode,
    inner_product,
)

BETA_DEGENERATE_TOL = 1e-12


class DegenerateCouplingError(ValueError):
    """beta is numerically zero: there is no scattered field."""


@dataclass
class CouplingSet:
    """All overlap coefficients for one beam/membrane configuration."""

    beta: float
    beta_par: float
    beta_perp: float
    beta_mn: np.ndarray  # complex, (max_order+1, max_order+1)
    u_sc: SpatialField
    u_perp: SpatialField | None  # None in the purely dispersive case
    config: dict

    @property
    def parseval_residual(self) -> float:
        """Truncation residual beta^2 - sum |beta_mn|^2 (never dropped)."""
        return self.beta**2 - float(np.sum(np.abs(self.beta_mn) ** 2))


def beta_overlap(u_in: SpatialField, phi: MembraneModeShape) -> float:
    """Root-mean-square modeshape weighted by the beam intensity (>= 0)."""
    if u_in.grid != phi.grid:
        raise GridMismatchError("beam and membrane must share a grid")
    b2 = np.sum(np.abs(u_in.amplitude) ** 2 * phi.values**2 * u_in.grid.weights)
    return float(np.sqrt(b2))


def scattered_mode(
    u_in: SpatialField, phi: MembraneModeShape
) -> tuple[float, SpatialField]:
    """(beta, u_sc) with u_sc = u_in phi / beta, unit-normalized.

    Because beta is evaluated with the same quadrature, the grid norm of
    u_sc is exactly 1 and ``u_sc * beta == u_in * phi`` pointwise.
    """
    beta = beta_overlap(u_in, phi)
    if beta < BETA_DEGENERATE_TOL:
        raise DegenerateCouplingError(
            f"beta = {beta:.3e}: beam does not overlap the membrane mode"
        )
    u_sc = SpatialField(u_in.grid, u_in.amplitude * phi.values / beta, "unit_norm")
    return beta, u_sc


def parallel_perp_split(
    u_in: SpatialField, u_sc: SpatialField, beta: float
) -> tuple[float, float, SpatialField | None]:
    """Decompose the scattered mode onto {u_in, u_perp}.

    Returns (beta_par, beta_perp, u_perp). beta_par is signed; beta_perp
    is non-negative. For beta_perp below 1e-12 (purely dispersive
    coupling) u_perp is undefined and returned as None.
    """
    ov = inner_product(u_in, u_sc)
    if abs(ov.imag) > 1e-9 * max(abs(ov), 1e-30):
        raise ValueError("complex overlap: split assumes a real membrane modeshape")
    beta_par = beta * ov.real
    bp2 = beta**2 - beta_par**2
    beta_perp = float(np.sqrt(max(bp2, 0.0)))
    if beta_perp < BETA_DEGENERATE_TOL:
        return beta_par, 0.0, None
    amp = (beta * u_sc.amplitude - beta_par * u_in.amplitude) / beta_perp
    return beta_par, beta_perp, SpatialField(u_in.grid, amp, "unit_norm")


def hg_expansion(
    u_in: SpatialField, phi: MembraneModeShape, max_order: int
) -> np.ndarray:
    """beta_mn = <u_mn, phi u_00> for 0 <= m, n <= max_order.

    The expansion basis shares the waist and center of the input beam
    (co-translated basis), so ``u_in`` must be an HG_00 field built by
    :func:`modemech.fields.hg_mode`. The result uses the same grid
    quadrature as :func:`beta_overlap`, making ``beta_00`` identical to
    ``<u_in, phi u_in>`` up to rounding.
    """
    meta = u_in.meta
    if not isinstance(meta, HGMeta) or (meta.m, meta.n) != (0, 0):
        raise ValueError("hg_expansion requires an HG_00 input field with known waist")
    if max_order < 0:
        raise ValueError("max_order must be >= 0")
    if u_in.grid != phi.grid:
        raise GridMismatchError("beam and membrane must share a grid")
    grid = u_in.grid
    hx = hermite_gauss_1d(max_order, grid.x, meta.w0, meta.center[0], grid.wx)
    hy = hermite_gauss_1d(max_order, grid.y, meta.w0, meta.center[1], grid.wy)
    g = phi.values * u_in.amplitude
    return (hx * grid.wx) @ g @ (hy * grid.wy).T


def couple_beam(
    w0: float,
    center: tuple[float, float],
    phi: MembraneModeShape,
    max_order: int = 20,
) -> CouplingSet:
    """Full coupling analysis of one Gaussian-beam configuration."""
    u_in = hg_mode(0, 0, w0, center, phi.grid)
    beta, u_sc = scattered_mode(u_in, phi)
    beta_par, beta_perp, u_perp = parallel_perp_split(u_in, u_sc, beta)
    beta_mn = hg_expansion(u_in, phi, max_order)
    return CouplingSet(
        beta=beta,
        beta_par=beta_par,
        beta_perp=beta_perp,
        beta_mn=beta_mn,
        u_sc=u_sc,
        u_perp=u_perp,
        config={
            "w0": w0,
            "x0": center[0],
            "y0": center[1],
            "membrane": phi.descriptor,
        },
    )


def beam_scan(
    x0_values: np.ndarray,
    w0_values: np.ndarray,
    y0: float,
    phi: MembraneModeShape,
    max_order: int = 20,
) -> list[CouplingSet]:
    """Couplings over the (w0, x0) product scan, w0-major then x0 order."""
    out = []
    for w0 in np.atleast_1d(w0_values):
        for x0 in np.atleast_1d(x0_values):
            out.append(couple_beam(float(w0), (float(x0), y0), phi, max_order))
    return out
