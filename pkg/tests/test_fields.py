import numpy as np
import pytest
from numpy.testing import assert_allclose

import modemech as mm
from modemech.fields import hermite_gauss_1d

from conftest import LAMBDA_M, W0, WAVELENGTH, beta00_closed_form


def odd_grid(half, n=513):
    # odd sample count puts the origin (beam center, antinodes) on the grid
    return mm.Grid2D(-half, half, -half, half, n, n)


class TestGrid:
    def test_spacing_and_weights(self):
        g = mm.Grid2D(-1.0, 1.0, -2.0, 2.0, 5, 9)
        assert g.dx == pytest.approx(0.5)
        assert g.dy == pytest.approx(0.5)
        # trapezoid weights integrate a constant to the domain area
        assert np.sum(g.weights) == pytest.approx(2.0 * 4.0)

    @pytest.mark.parametrize("nx,ny", [(1, 8), (8, 1), (0, 0)])
    def test_degenerate_counts(self, nx, ny):
        with pytest.raises(ValueError):
            mm.Grid2D(-1, 1, -1, 1, nx, ny)

    def test_degenerate_extent(self):
        with pytest.raises(ValueError):
            mm.Grid2D(1, 1, -1, 1, 8, 8)


class TestHermiteGauss:
    def test_hg00_unit_norm(self, beam):
        assert beam.power() == pytest.approx(1.0, abs=1e-12)

    def test_hg00_peak_intensity(self):
        # |u00|^2 peak is 2/(pi w0^2) at the center
        g = odd_grid(4 * LAMBDA_M)
        u = mm.hg_mode(0, 0, W0, (0.0, 0.0), g)
        peak = np.abs(u.amplitude).max() ** 2
        assert_allclose(peak, 2.0 / (np.pi * W0**2), rtol=1e-9)

    def test_hg_orthogonality(self, grid):
        u00 = mm.hg_mode(0, 0, W0, (0.0, 0.0), grid)
        u10 = mm.hg_mode(1, 0, W0, (0.0, 0.0), grid)
        assert abs(mm.inner_product(u00, u10)) < 1e-12

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_orthonormality_up_to_order_six(self):
        # grid +/- 6 w0, 256^2 samples: |<u_mn, u_m'n'> - delta| <= 1e-6
        g = mm.Grid2D(-6 * W0, 6 * W0, -6 * W0, 6 * W0, 256, 256)
        modes = {}
        for m in range(7):
            for n in range(7 - m):
                modes[(m, n)] = mm.hg_mode(m, n, W0, (0.0, 0.0), g)
        keys = sorted(modes)
        for a in keys:
            for b in keys:
                ip = mm.inner_product(modes[a], modes[b])
                expected = 1.0 if a == b else 0.0
                assert abs(ip - expected) <= 1e-6, (a, b, ip)

    def test_negative_order_rejected(self, grid):
        with pytest.raises(ValueError):
            mm.hg_mode(-1, 0, W0, (0.0, 0.0), grid)

    def test_tight_grid_warns(self):
        g = mm.Grid2D(-2 * W0, 2 * W0, -2 * W0, 2 * W0, 64, 64)
        with pytest.warns(RuntimeWarning):
            mm.hg_mode(0, 0, W0, (0.0, 0.0), g)

    def test_recurrence_matches_explicit_low_orders(self):
        # H1(t) = 2t: u1(x) = (2x/w0) u0(x)
        x = np.linspace(-4 * W0, 4 * W0, 301)
        h = hermite_gauss_1d(1, x, W0, 0.0)
        assert_allclose(h[1], (2 * x / W0) * h[0], rtol=1e-12, atol=1e-30)


class TestMembraneModes:
    def test_cosine_antinode_node_values(self):
        g = odd_grid(4 * LAMBDA_M)
        phi = mm.membrane_cosine_mode(LAMBDA_M, g)
        x = g.x
        i0 = np.argmin(np.abs(x))
        i_node = np.argmin(np.abs(x - LAMBDA_M / 2))
        i_anti = np.argmin(np.abs(x - LAMBDA_M))
        assert phi.values[i0, i0] == pytest.approx(1.0, abs=1e-12)
        assert phi.values[i_node, i0] == pytest.approx(0.0, abs=1e-12)
        assert phi.values[i_anti, i0] == pytest.approx(-1.0, abs=1e-12)

    def test_cosine_max_abs_is_one(self):
        g = odd_grid(4 * LAMBDA_M)
        phi = mm.membrane_cosine_mode(LAMBDA_M, g)
        assert abs(np.abs(phi.values).max() - 1.0) <= 1e-6

    def test_tilt_definition_and_antisymmetry(self):
        g = odd_grid(2 * LAMBDA_M, n=257)
        phi = mm.tilt_mode(LAMBDA_M, g)
        i_half = np.argmin(np.abs(g.x - LAMBDA_M / 2))
        assert_allclose(phi.values[i_half, :], 1.0, rtol=1e-12)
        i0 = np.argmin(np.abs(g.x))
        assert_allclose(phi.values[i0, :], 0.0, atol=1e-12)
        # phi(-x, y) = -phi(x, y): the odd grid is symmetric sample-by-sample
        assert_allclose(phi.values[::-1, :], -phi.values, atol=1e-18)

    def test_invalid_nodal_spacing(self, grid):
        with pytest.raises(ValueError):
            mm.membrane_cosine_mode(-1.0, grid)
        with pytest.raises(ValueError):
            mm.tilt_mode(0.0, grid)

    def test_descriptor_evaluate_matches_samples(self, membrane, grid):
        xg, yg = grid.meshgrid()
        assert_allclose(membrane.evaluate(xg, yg), membrane.values, rtol=1e-15)


class TestInnerProduct:
    def test_self_norm(self, beam):
        assert mm.inner_product(beam, beam) == pytest.approx(1.0, abs=1e-12)

    def test_conjugate_symmetry(self, grid):
        u00 = mm.hg_mode(0, 0, W0, (0.0, 0.0), grid)
        u10 = mm.hg_mode(1, 0, W0, (0.0, 0.0), grid)
        u01 = mm.hg_mode(0, 1, W0, (0.2 * W0, 0.0), grid)
        a = mm.SpatialField(grid, u00.amplitude + 1j * u10.amplitude, "unnormalized")
        b = mm.SpatialField(grid, u01.amplitude - 0.3j * u00.amplitude, "unnormalized")
        assert mm.inner_product(a, b) == pytest.approx(
            np.conj(mm.inner_product(b, a)), abs=1e-15
        )

    def test_grid_mismatch(self, beam):
        other = mm.hg_mode(0, 0, W0, (0.0, 0.0), mm.default_grid(W0, LAMBDA_M, n=256))
        with pytest.raises(mm.GridMismatchError):
            mm.inner_product(beam, other)

    def test_gaussian_cosine_overlap_closed_form(self, grid, membrane):
        # <u00, phi u00> against the independently derived closed form
        for x0, y0 in [(0.0, 0.0), (0.3e-4, -0.2e-4), (0.5e-4, 0.1e-4)]:
            u = mm.hg_mode(0, 0, W0, (x0, y0), grid)
            v = mm.SpatialField(grid, u.amplitude * membrane.values, "unnormalized")
            got = mm.inner_product(u, v).real
            assert_allclose(got, beta00_closed_form(x0, y0, W0), rtol=1e-10, atol=1e-14)

    def test_quadrature_convergence_default_resolution(self, membrane):
        # doubling the sampling changes the overlap by <= 1e-8 relative
        vals = []
        for n in (512, 1024):
            g = mm.default_grid(W0, LAMBDA_M, n=n)
            u = mm.hg_mode(0, 0, W0, (0.2e-4, 0.0), g)
            phi = mm.membrane_cosine_mode(LAMBDA_M, g)
            v = mm.SpatialField(g, u.amplitude * phi.values, "unnormalized")
            vals.append(mm.inner_product(u, v).real)
        assert abs(vals[1] - vals[0]) <= 1e-8 * abs(vals[0])


class TestFarField:
    def test_plancherel(self, beam):
        ff = mm.far_field(beam, WAVELENGTH, 1.0)
        assert ff.power() / (WAVELENGTH * 1.0) ** 2 == pytest.approx(1.0, rel=1e-4)

    def test_gaussian_waist_mapping(self):
        # far field of a centered Gaussian is a real Gaussian of waist lam d/(pi w0)
        d = 1.0
        g = odd_grid(4 * LAMBDA_M)
        u = mm.hg_mode(0, 0, W0, (0.0, 0.0), g)
        ff = mm.far_field(u, WAVELENGTH, d)
        w_far = WAVELENGTH * d / (np.pi * W0)
        xg, yg = ff.grid.meshgrid()
        expected = (
            np.sqrt(2 / np.pi) / w_far * np.exp(-(xg**2 + yg**2) / w_far**2)
        ) * (WAVELENGTH * d)
        assert np.abs(ff.amplitude.imag).max() < 1e-9 * np.abs(ff.amplitude).max()
        sel = np.abs(ff.amplitude) > 1e-6 * np.abs(ff.amplitude).max()
        assert_allclose(ff.amplitude.real[sel], expected[sel], rtol=1e-5)

    def test_odd_mode_far_field_purely_imaginary(self, grid):
        # u_sc ~ x u00 (odd, real) has a purely imaginary, odd far field
        u10 = mm.hg_mode(1, 0, W0, (0.0, 0.0), grid)
        ff = mm.far_field(u10, WAVELENGTH, 1.0)
        scale = np.abs(ff.amplitude).max()
        assert np.abs(ff.amplitude.real).max() < 1e-10 * scale
        # on the FFT-conjugate grid the mirror of sample i is sample n - i
        im = ff.amplitude.imag
        mirrored = np.roll(im[::-1, :], 1, axis=0)
        assert_allclose(im[1:, :], -mirrored[1:, :], atol=1e-10 * scale)

    def test_aliasing_detected(self):
        g = mm.Grid2D(-1e-4, 1e-4, -1e-4, 1e-4, 128, 128)
        xg, yg = g.meshgrid()
        wide = np.exp(-(xg**2 + yg**2) / (2e-4) ** 2)  # spills over the edge
        u = mm.SpatialField(g, wide, "unnormalized")
        with pytest.raises(mm.AliasingError):
            mm.far_field(u, WAVELENGTH, 1.0)

    def test_near_field_warning(self, beam):
        k = 2 * np.pi / WAVELENGTH
        with pytest.warns(RuntimeWarning):
            mm.far_field(beam, WAVELENGTH, 0.5 * k * W0**2)

    def test_invalid_args(self, beam):
        with pytest.raises(ValueError):
            mm.far_field(beam, -1.0, 1.0)


class TestSpatialFieldValidation:
    def test_unit_norm_enforced(self, grid):
        with pytest.raises(ValueError):
            mm.SpatialField(grid, np.ones((grid.nx, grid.ny)), "unit_norm")

    def test_shape_checked(self, grid):
        with pytest.raises(ValueError):
            mm.SpatialField(grid, np.ones((3, 3)), "unnormalized")

    def test_unknown_tag(self, grid):
        with pytest.raises(ValueError):
            mm.SpatialField(grid, np.ones((grid.nx, grid.ny)), "whatever")
