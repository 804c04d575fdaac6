# wavemaps/tests/test_grids.py
import numpy as np
from django.test import SimpleTestCase

from wavemaps.exceptions import CalculusMismatch, GridError
from wavemaps.grids import (
    FrequencyGrid, RadialField, RadialGrid, SpectralDensity, dyadic_cutoff, radial_cutoff, smooth_step,
)
from wavemaps.spectral_core import partition_check

from . import desk


class RadialGridTests(SimpleTestCase):
    def test_graded_grid_is_geometric_then_uniform(self):
        grid = desk.radial_grid()
        r = grid.nodes
        self.assertAlmostEqual(r[0], 1e-3)
        self.assertAlmostEqual(grid.r_max, 48.0)
        self.assertLessEqual(np.diff(r).max(), 0.05 + 1e-12)
        self.assertLessEqual((r[1:] / r[:-1]).max(), 2 ** (1 / 24) + 1e-9)

    def test_rejects_bad_nodes(self):
        with self.assertRaises(GridError):
            RadialGrid.graded(2.0, 1.0)
        with self.assertRaises(GridError):
            RadialGrid(np.array([1.0, 2.0, 3.0]))
        with self.assertRaises(GridError):
            RadialGrid(np.linspace(0.0, 1.0, 10))
        with self.assertRaises(GridError):
            RadialGrid(np.geomspace(1.0, 8.0, 7))

    def test_uniform_grid_starts_at_one_step(self):
        grid = RadialGrid.uniform(0.5, 4.0)
        np.testing.assert_allclose(grid.nodes, 0.5 * np.arange(1, 9))
        self.assertEqual(grid.grading["kind"], "uniform")

    def test_gaussian_integrals(self):
        grid = desk.radial_grid()
        r = grid.nodes
        self.assertAlmostEqual(grid.integrate_rdr(np.exp(-r ** 2)), 0.5, places=6)

    def test_cumulative_integrals(self):
        grid = desk.radial_grid()
        r = grid.nodes
        np.testing.assert_allclose(grid.cumulative_from_zero(2 * r), r ** 2, rtol=1e-8)
        f = r * np.exp(-r ** 2)
        total = grid.cumulative_from_zero(f) + grid.cumulative_to_edge(f)
        np.testing.assert_allclose(total, 0.5, atol=1e-6)

    def test_derivative_of_smooth_field(self):
        grid = desk.radial_grid()
        r = grid.nodes
        inner = (r > 0.01) & (r < 40)
        d = grid.derivative(np.sin(r))
        np.testing.assert_allclose(d[inner], np.cos(r[inner]), atol=1e-5)

    def test_digest_depends_on_nodes(self):
        a = RadialGrid.graded(1e-3, 10.0, 24, 0.05)
        b = RadialGrid.graded(1e-3, 10.0, 24, 0.05)
        c = RadialGrid.graded(1e-3, 12.0, 24, 0.05)
        self.assertEqual(a.digest, b.digest)
        self.assertNotEqual(a.digest, c.digest)


class FrequencyGridTests(SimpleTestCase):
    def test_needs_sixteen_nodes_per_octave(self):
        with self.assertRaises(GridError):
            FrequencyGrid.dyadic(-2, 2, 8)

    def test_endpoints_and_weights(self):
        fg = desk.freq_grid()
        self.assertEqual(fg.xi[0], 2.0 ** -3)
        self.assertEqual(fg.xi[-1], 4.0)
        # ∫ξ dξ over [1/8, 4]
        self.assertAlmostEqual(float(fg.weights @ fg.xi), (16 - 1 / 64) / 2, places=4)

    def test_max_spacing_caps_the_step(self):
        fg = FrequencyGrid.dyadic(-2, 3, 16, max_spacing=0.05)
        self.assertLessEqual(np.diff(fg.xi).max(), 0.05 * 1.01)

    def test_partition_of_unity(self):
        self.assertLessEqual(partition_check(desk.freq_grid()), 1e-12)

    def test_cutoff_support(self):
        xi = np.geomspace(1e-3, 1e3, 400)
        chi = dyadic_cutoff(xi, 0)
        self.assertTrue(np.all(chi[(xi < 0.5) | (xi > 2.0)] == 0))
        self.assertAlmostEqual(float(dyadic_cutoff(np.array([1.0]), 0)[0]), 1.0)

    def test_smooth_steps(self):
        self.assertEqual(float(smooth_step(np.array([-1.0]))[0]), 1.0)
        self.assertEqual(float(smooth_step(np.array([2.0]))[0]), 0.0)
        self.assertEqual(float(radial_cutoff(np.array([1.0]), 1.0)[0]), 1.0)
        self.assertEqual(float(radial_cutoff(np.array([2.0]), 1.0)[0]), 0.0)


class FieldTests(SimpleTestCase):
    def test_field_must_match_grid(self):
        grid = desk.radial_grid()
        with self.assertRaises(GridError):
            RadialField(grid, np.zeros(grid.size - 1))
        with self.assertRaises(GridError):
            RadialField(grid, np.full(grid.size, np.nan))
        with self.assertRaises(GridError):
            RadialField(grid, np.zeros(grid.size), "phase")

    def test_topological_flag(self):
        grid = desk.radial_grid()
        Q = 2 * np.arctan(grid.nodes)
        RadialField(grid, Q, "map", topological=True)
        with self.assertRaises(GridError):
            RadialField(grid, Q, "gauge", topological=True)
        with self.assertRaises(GridError):
            RadialField(grid, np.zeros(grid.size), "map", topological=True)

    def test_density_calculus(self):
        fg = desk.freq_grid()
        density = SpectralDensity(fg, np.ones(fg.size), "H")
        self.assertIs(density.require("H"), density)
        with self.assertRaises(CalculusMismatch):
            density.require("Htilde")
        with self.assertRaises(CalculusMismatch):
            SpectralDensity(fg, np.ones(fg.size), "Fourier")
