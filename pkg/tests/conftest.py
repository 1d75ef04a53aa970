import numpy as np
import pytest

import modemech as mm

LAMBDA_M = 1e-4  # membrane nodal spacing [m]
W0 = 0.3e-4  # beam waist, w0 = 0.3 lambda_m
WAVELENGTH = 1.55e-6


def beta00_closed_form(x0, y0, w0, lambda_m=LAMBDA_M):
    """Independent Gaussian-cosine overlap oracle.

    <u00, phi u00> for phi = cos(pi x/lm) cos(pi y/lm), per-axis
    integral int f(x) cos(pi x/lm) dx = cos(pi x0/lm) exp(-pi^2 w0^2/(8 lm^2))
    with f the normalized Gaussian intensity profile.
    """
    return (
        np.cos(np.pi * x0 / lambda_m)
        * np.cos(np.pi * y0 / lambda_m)
        * np.exp(-np.pi**2 * w0**2 / (4 * lambda_m**2))
    )


def beta_squared_closed_form(x0, y0, w0, lambda_m=LAMBDA_M):
    """Independent oracle for beta^2: per-axis 0.5 (1 + cos(2 pi x0/lm) E2)."""
    e2 = np.exp(-np.pi**2 * w0**2 / (2 * lambda_m**2))
    bx = 0.5 * (1 + np.cos(2 * np.pi * x0 / lambda_m) * e2)
    by = 0.5 * (1 + np.cos(2 * np.pi * y0 / lambda_m) * e2)
    return bx * by


@pytest.fixture(scope="session")
def grid():
    return mm.default_grid(W0, LAMBDA_M)


@pytest.fixture(scope="session")
def membrane(grid):
    return mm.membrane_cosine_mode(LAMBDA_M, grid)


@pytest.fixture(scope="session")
def beam(grid):
    return mm.hg_mode(0, 0, W0, (0.0, 0.0), grid)
