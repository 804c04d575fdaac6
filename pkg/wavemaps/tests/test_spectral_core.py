# wavemaps/tests/test_spectral_core.py
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from wavemaps.exceptions import GridError
from wavemaps.soliton_geometry import phi0
from wavemaps.spectral_core import (
    ISOMETRY_AMPLITUDE, frobenius_seed, load_table, osc_symbol, pointwise_profile_audit, save_table,
    series_crosscheck, sigma_tilde_coefficient, sigma_tilde_eval, weight_audit,
)

from . import desk


class SymbolTests(SimpleTestCase):
    def test_next_coefficient_of_sigma_tilde(self):
        self.assertAlmostEqual(sigma_tilde_coefficient(include_potential=True), 0.125, delta=1e-3)
        self.assertAlmostEqual(sigma_tilde_coefficient(include_potential=False), -0.875, delta=1e-3)

    def test_sigma_tends_to_one(self):
        r = np.array([1e3, 1e4])
        sigma = osc_symbol().sigma(1.0, r)
        np.testing.assert_allclose(sigma, 1.0, atol=1e-2)
        self.assertLess(abs(sigma[1] - 1.0), abs(sigma[0] - 1.0))

    def test_sigma_tilde_needs_large_argument(self):
        with self.assertRaises(GridError):
            sigma_tilde_eval(np.array([0.5]), np.array([2.0]))

    def test_frobenius_seed_is_regular(self):
        phi, psi = frobenius_seed(np.array([0.5, 2.0]), 1e-4)
        np.testing.assert_allclose(phi, 1e-4, rtol=1e-6)
        self.assertTrue(np.all(np.abs(psi) < 1e-6))


class TableTests(SimpleTestCase):
    def test_isometric_normalization(self):
        table = desk.table()
        np.testing.assert_allclose(table.amplitude, ISOMETRY_AMPLITUDE, rtol=1e-10)
        self.assertTrue(np.all(table.q > 0))
        self.assertLessEqual(float(np.max(table.residual)), 1e-6)
        self.assertLessEqual(float(np.max(table.fit_residual)), 1e-6)

    def test_regular_at_the_origin(self):
        table = desk.table()
        r0 = table.radial_grid.nodes[0]
        self.assertTrue(np.all(np.abs(table.phi[:, 0]) < 10 * r0 * table.q))
        self.assertTrue(np.all(np.abs(table.psi[:, 0]) < 1e-3))

    def test_low_frequency_tracks_the_resonance(self):
        table = desk.table()
        r = table.radial_grid.nodes
        inner = r <= 1.0
        phi = table.phi[0, inner]
        ref = phi0(r[inner])
        corr = phi @ ref / np.sqrt((phi @ phi) * (ref @ ref))
        self.assertGreater(corr, 0.999)

    def test_interior_series(self):
        self.assertLess(series_crosscheck(desk.table(), xi=1.0), 1e-4)

    def test_dual_identity_on_resolved_band(self):
        dual = desk.table().dual_residual
        self.assertLess(float(np.nanmax(dual)), 1e-4)

    def test_weight_audit_reports_amplitude(self):
        report = weight_audit(desk.table())
        self.assertLess(report["amplitude_deviation"], 1e-10)
        self.assertAlmostEqual(report["printed_modulus_ratio"], 2.0, places=8)

    def test_pointwise_constants_are_finite(self):
        audit = pointwise_profile_audit(desk.table())
        self.assertTrue(audit["psi_constants"])
        self.assertTrue(all(np.isfinite(v) for v in audit["psi_constants"].values()))

    def test_cache_round_trip(self):
        table = desk.table()
        with tempfile.TemporaryDirectory() as tmp:
            path = save_table(table, tmp)
            self.assertTrue(Path(tmp, f"eigen-{table.digest()}.json").exists())
            loaded = load_table(path, table.freq_grid, table.radial_grid, table.tolerances)
        np.testing.assert_array_equal(loaded.phi, table.phi)
        np.testing.assert_array_equal(loaded.psi, table.psi)
        np.testing.assert_array_equal(loaded.q, table.q)
        self.assertEqual(loaded.digest(), table.digest())
