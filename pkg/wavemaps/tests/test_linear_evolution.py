# wavemaps/tests/test_linear_evolution.py
import numpy as np
from django.test import SimpleTestCase
from scipy.integrate import simpson

from wavemaps.exceptions import NonresonanceError
from wavemaps.grids import RadialField
from wavemaps.linear_evolution import (
    SpaceTimeSource, WaveState, closed_form_power_source, duhamel_integrate, duhamel_nodes, duhamel_residual,
    filon_interval_weights, free_evolve, free_snapshots, kest_audit, oscillatory_moments, pointwise_decay_audit,
)

from . import desk


class FreeWaveTests(SimpleTestCase):
    def test_zero_time_is_identity(self):
        state = desk.state()
        same = state.evolve(state.t)
        np.testing.assert_array_equal(same.c, state.c)
        np.testing.assert_array_equal(same.c_t, state.c_t)

    def test_energy_is_conserved(self):
        state = desk.state()
        e0 = state.spectral_energy()
        for t in (1.0, 10.0, 100.0):
            self.assertAlmostEqual(state.evolve(t).spectral_energy() / e0, 1.0, places=12)

    def test_reversible(self):
        state = desk.state()
        back = state.evolve(7.5).evolve(0.0)
        np.testing.assert_allclose(back.c, state.c, atol=1e-12 * np.max(np.abs(state.c)))
        np.testing.assert_allclose(back.c_t, state.c_t, atol=1e-12 * np.max(np.abs(state.c_t)))

    def test_vectorized_times(self):
        state = desk.state()
        times = np.array([1.0, 2.0, 4.0])
        values, velocities = free_snapshots(state, times)
        self.assertEqual(values.shape, (3, state.table.radial_grid.size))
        w, w_t = state.evolve(2.0).fields()
        np.testing.assert_allclose(values[1], w.values)
        np.testing.assert_allclose(velocities[1], w_t.values)

    def test_resonant_data_rejected(self):
        grid = desk.radial_grid()
        r = grid.nodes
        w0 = RadialField(grid, r ** 2 * np.exp(-r ** 2), "gauge")
        with self.assertRaises(NonresonanceError):
            WaveState.from_data(w0, w0, desk.table())
        bw, _ = free_evolve(w0, w0, 1.0, desk.table(), check=False)
        self.assertEqual(bw.space_tag, "gauge")


class DecayAuditTests(SimpleTestCase):
    def test_interior_and_cone_exponents(self):
        grid = desk.radial_grid()
        r = grid.nodes
        times = np.array([4.0, 8.0, 16.0])
        snaps = np.stack([t ** -3 * np.exp(-r ** 2) + t ** -0.5 * np.exp(-(r - t) ** 2) for t in times])
        report = pointwise_decay_audit(times, snaps, grid)
        self.assertAlmostEqual(report["interior"]["exponent"], -3.0, delta=0.05)
        self.assertAlmostEqual(report["cone"]["exponent"], -0.5, delta=0.01)
        self.assertEqual(len(report["exterior_sup"]), 3)
        self.assertLess(max(report["exterior_sup"]), 1e-6)
        self.assertTrue(np.isfinite(report["profile_constant"]))


class QuadratureTests(SimpleTestCase):
    def test_moments_against_dense_quadrature(self):
        h = 0.3
        xi = np.array([0.1, 2.0, 1 / h - 1e-9, 1 / h + 1e-9, 30.0])
        moments = oscillatory_moments(xi, h)
        x = np.linspace(0.0, h, 20001)
        for m in range(4):
            for i, k in enumerate(xi):
                expected = simpson(x ** m * np.exp(-1j * k * x), x=x)
                self.assertLess(abs(moments[m, i] - expected), 1e-10 * h ** (m + 1))

    def test_filon_weights_are_exact_for_cubics(self):
        nodes = np.array([0.0, 0.3, 0.7, 1.0, 1.4])
        xi = np.array([0.5, 3.0, 20.0])
        F = 1 + nodes - nodes ** 2 + 0.5 * nodes ** 3
        idx, w = filon_interval_weights(xi, nodes, 1)
        approx = np.exp(-1j * xi * nodes[1]) * np.einsum("jk,j->k", w, F[idx])
        s = np.linspace(nodes[1], nodes[2], 20001)
        Fs = 1 + s - s ** 2 + 0.5 * s ** 3
        for k, value in zip(xi, approx):
            expected = simpson(np.exp(-1j * k * s) * Fs, x=s)
            self.assertLess(abs(value - expected), 1e-10)

    def test_nodes(self):
        nodes = duhamel_nodes(8.0, 32.0, ratio=1.01, ds_max=0.25, extra=(10.0, 20.0, 40.0))
        self.assertEqual(nodes[0], 8.0)
        self.assertEqual(nodes[-1], 32.0)
        self.assertTrue(np.all(np.diff(nodes) > 0))
        self.assertLessEqual(np.diff(nodes).max(), 0.25 + 1e-12)
        self.assertTrue(np.all(np.diff(nodes) <= 0.01 * nodes[:-1] + 1e-12))
        for t in (10.0, 20.0):
            self.assertTrue(np.any(np.isclose(nodes, t, rtol=0, atol=1e-12)))
        self.assertFalse(np.any(nodes > 32.0))


class DuhamelTests(SimpleTestCase):
    def test_power_law_source_against_closed_form(self):
        table = desk.table()
        xi = table.xi
        g_hat = xi * np.exp(-xi)
        source = SpaceTimeSource(lambda s: s ** -3 * g_hat, alpha=1.0)
        result = duhamel_integrate(source, [8.0], table, s_max=32.0, ratio=1.01, ds_max=0.25)
        k_hat, dt_hat = closed_form_power_source(g_hat, xi, 8.0, 32.0)
        self.assertLess(np.max(np.abs(result.K[0] - k_hat)) / np.max(np.abs(k_hat)), 1e-5)
        self.assertLess(np.max(np.abs(result.dtK[0] - dt_hat)) / np.max(np.abs(dt_hat)), 1e-5)
        np.testing.assert_allclose(result.LstarK, result.K * xi)

    def test_source_is_linear(self):
        table = desk.table()
        xi = table.xi
        g_hat = np.exp(-((xi - 1.0) ** 2))
        one = duhamel_integrate(SpaceTimeSource(lambda s: s ** -3 * g_hat), [8.0, 12.0], table, s_max=24.0)
        ten = duhamel_integrate(SpaceTimeSource(lambda s: 10 * s ** -3 * g_hat), [8.0, 12.0], table, s_max=24.0)
        np.testing.assert_allclose(ten.K, 10 * one.K, rtol=1e-10, atol=1e-12 * np.max(np.abs(ten.K)))
        self.assertAlmostEqual(ten.source_sup / one.source_sup, 10.0, places=10)

    def test_zero_source(self):
        table = desk.table()
        source = SpaceTimeSource(lambda s: np.zeros(table.freq_grid.size))
        result = duhamel_integrate(source, [8.0], table, s_max=16.0)
        self.assertFalse(np.any(result.K))
        self.assertEqual(result.source_sup, 0.0)
        self.assertEqual(result.field("K", 0).space_tag, "gauge")
        self.assertEqual(result.field("LstarK", 0).space_tag, "map")

    def test_requested_times(self):
        table = desk.table()
        source = SpaceTimeSource(lambda s: np.zeros(table.freq_grid.size))
        with self.assertRaises(ValueError):
            duhamel_integrate(source, [40.0], table, s_max=16.0)
        result = duhamel_integrate(source, [8.0], table, s_max=16.0)
        self.assertEqual(result.index(8.0), 0)
        with self.assertRaises(ValueError):
            result.index(9.0)

    def test_kernel_solves_the_wave_equation(self):
        table = desk.table()
        xi = table.xi
        g_hat = xi * np.exp(-xi)
        source = SpaceTimeSource(lambda s: s ** -3 * g_hat, alpha=1.0)
        self.assertLess(duhamel_residual(source, 8.0, table, 32.0), 1e-2)
        zero = SpaceTimeSource(lambda s: np.zeros(table.freq_grid.size))
        self.assertEqual(duhamel_residual(zero, 8.0, table, 16.0), 0.0)


class KestAuditTests(SimpleTestCase):
    @staticmethod
    def _source(scale=1.0):
        xi = desk.table().xi
        g_hat = scale * xi * np.exp(-xi)
        return SpaceTimeSource(lambda s: s ** -3 * g_hat, alpha=1.0)

    def test_ratios_do_not_depend_on_the_source_size(self):
        table = desk.table()
        one = kest_audit(self._source(), [8.0, 16.0], table, s_max=32.0)
        ten = kest_audit(self._source(10.0), [8.0, 16.0], table, s_max=32.0)
        self.assertAlmostEqual(ten["source_sup"] / one["source_sup"], 10.0, places=10)
        self.assertEqual(one["alpha"], 1.0)
        for key in ("lx", "dt_lx", "hdot1"):
            np.testing.assert_allclose(ten["ratios"][key], one["ratios"][key], rtol=1e-9)
            self.assertTrue(np.all(np.isfinite(one["ratios"][key])))
            self.assertGreater(one["sup"][key], 0.0)
        self.assertAlmostEqual(one["tail_K"], one["source_sup"] / 32.0, places=12)

    def test_zero_source_has_zero_ratios(self):
        table = desk.table()
        zero = SpaceTimeSource(lambda s: np.zeros(table.freq_grid.size))
        report = kest_audit(zero, [8.0, 16.0], table, s_max=32.0)
        self.assertEqual(report["source_sup"], 0.0)
        for key in ("lx", "dt_lx", "hdot1"):
            self.assertEqual(report["ratios"][key], [0.0, 0.0])
            self.assertTrue(report["doubling"][key]["stable"])
