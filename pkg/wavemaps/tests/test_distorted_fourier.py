# wavemaps/tests/test_distorted_fourier.py
import numpy as np
from django.test import SimpleTestCase

from wavemaps.distorted_fourier import (
    FORWARD, INVERSE, default_projector, enforce_nonresonance, forward_tapered, nonres_pairing, norm_suite,
    physical_norms, project_dyadic, schwartz_suite, spectral_decay_audit, transform, transform_audit,
)
from wavemaps.exceptions import CalculusMismatch, NonresonanceError, TailBoundError
from wavemaps.grids import RadialField, RadialGrid, SpectralDensity
from wavemaps.soliton_geometry import psi0

from . import desk


def bump():
    grid = desk.radial_grid()
    r = grid.nodes
    return RadialField(grid, r ** 2 * np.exp(-r ** 2 / 2), "gauge")


class TransformTests(SimpleTestCase):
    def test_isometry_in_the_tilde_calculus(self):
        f = enforce_nonresonance(bump())
        density = transform(FORWARD, "Htilde", f, desk.table())
        norm = np.sqrt(f.grid.integrate_rdr(f.values ** 2))
        self.assertAlmostEqual(density.l2_norm() / norm, 1.0, delta=1e-2)

    def test_round_trip_on_the_inner_region(self):
        table = desk.table()
        f = enforce_nonresonance(bump())
        back = transform(INVERSE, "Htilde", transform(FORWARD, "Htilde", f, table), table)
        self.assertEqual(back.space_tag, "gauge")
        inner = f.r <= 8.0
        err = np.max(np.abs(back.values - f.values)[inner])
        self.assertLess(err, 2e-2 * np.max(np.abs(f.values)))

    def test_intertwining(self):
        table = desk.table()
        fields = schwartz_suite(table.radial_grid, n=6)
        report = transform_audit(fields, table)
        self.assertLess(report["worst"]["intertwining"], 1e-3)
        self.assertEqual(len(report["rows"]), 6)

    def test_grid_and_calculus_mismatch(self):
        table = desk.table()
        other = RadialGrid.graded(1e-3, 20.0, 24, 0.05)
        with self.assertRaises(CalculusMismatch):
            transform(FORWARD, "H", RadialField(other, np.zeros(other.size), "map"), table)
        density = SpectralDensity(table.freq_grid, np.zeros(table.freq_grid.size), "H")
        with self.assertRaises(CalculusMismatch):
            transform(INVERSE, "Htilde", density, table)
        with self.assertRaises(CalculusMismatch):
            transform("sideways", "H", bump(), table)

    def test_tail_bound(self):
        grid = desk.radial_grid()
        slow = RadialField(grid, 1.0 / (1.0 + grid.nodes), "gauge")
        with self.assertRaises(TailBoundError):
            transform(FORWARD, "Htilde", slow, desk.table())

    def test_tapered_transform_of_a_decayed_field(self):
        table = desk.table()
        f = bump()
        direct = transform(FORWARD, "Htilde", f, table)
        tapered, change = forward_tapered(f, "Htilde", table, 6.0)
        self.assertLess(change, 1e-10)
        scale = np.max(np.abs(direct.values))
        np.testing.assert_allclose(tapered.values, direct.values, rtol=0, atol=1e-10 * scale)
        np.testing.assert_array_equal(transform(FORWARD, "Htilde", f, table, taper=6.0).values, tapered.values)
        with self.assertRaises(TailBoundError):
            forward_tapered(f, "Htilde", table, 8.0)


class DyadicTests(SimpleTestCase):
    def test_pieces_reassemble(self):
        table = desk.table()
        density = transform(FORWARD, "Htilde", bump(), table)
        fg = table.freq_grid
        total = sum(project_dyadic(density, k).values for k in fg.block_range())
        np.testing.assert_allclose(total, density.values, atol=1e-12)

    def test_out_of_range_block(self):
        table = desk.table()
        density = transform(FORWARD, "Htilde", bump(), table)
        with self.assertRaises(CalculusMismatch):
            project_dyadic(density, 7)

    def test_distant_blocks_are_disjoint(self):
        table = desk.table()
        density = transform(FORWARD, "Htilde", bump(), table)
        a = project_dyadic(density, -3).values
        b = project_dyadic(density, 0).values
        self.assertEqual(float(np.max(np.abs(a * b))), 0.0)


class NormTests(SimpleTestCase):
    def test_norm_suite(self):
        table = desk.table()
        report = norm_suite(bump(), table)
        self.assertEqual(report.calculus, "Htilde")
        self.assertIsNone(report.x)
        self.assertGreater(report.lx, 0)
        self.assertLess(report.reassembly_error, 1e-12)
        for value in (report.l2, report.l1, report.linf, report.hdot1_e, report.h1_e):
            self.assertGreaterEqual(value, 0)
        as_map = norm_suite(bump().like(bump().values, "map"), table)
        self.assertEqual(as_map.calculus, "H")
        self.assertGreater(as_map.x, 0)

    def test_physical_norms_of_a_gaussian(self):
        grid = desk.radial_grid()
        norms = physical_norms(grid, np.exp(-grid.nodes ** 2))
        self.assertAlmostEqual(norms["l1"], 0.5, places=6)
        self.assertAlmostEqual(norms["l2"], 0.5, places=6)
        self.assertAlmostEqual(norms["linf"], 1.0, places=5)


class NonresonanceTests(SimpleTestCase):
    def test_projector_pairs_positively(self):
        grid = desk.radial_grid()
        self.assertGreater(nonres_pairing(default_projector(grid)).value, 0)

    def test_enforcement_removes_the_pairing(self):
        f = bump()
        self.assertGreater(abs(nonres_pairing(f).value), 1e-3)
        g = enforce_nonresonance(f)
        scale = f.grid.integrate_rdr(np.abs(g.values * psi0(f.r)))
        self.assertLess(abs(nonres_pairing(g).value), 1e-12 * scale)

    def test_resonant_datum_is_rejected(self):
        with self.assertRaises(NonresonanceError):
            spectral_decay_audit(bump(), desk.table())
        report = spectral_decay_audit(bump(), desk.table(), control=True)
        self.assertTrue(report["control"])
        self.assertNotEqual(report["pairing"], 0.0)
