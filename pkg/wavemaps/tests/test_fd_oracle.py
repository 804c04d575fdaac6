# wavemaps/tests/test_fd_oracle.py
import numpy as np
from django.test import SimpleTestCase

from wavemaps.exceptions import BlowupDetected, GridError
from wavemaps.fd_oracle import (
    FDState, LambdaTrace, _mismatch, classify, crosscheck, discrete_energy, discrete_force, fd_evolve, lambda_track,
    origin_spline, synthetic_trajectory,
)
from wavemaps.grids import RadialField
from wavemaps.soliton_geometry import SOLITON_ENERGY, SolitonProfile, soliton

from . import desk


def _bumped(r):
    return SolitonProfile(1.0).Q(r) + 0.01 * r ** 2 * np.exp(-r ** 2)


class StateTests(SimpleTestCase):
    def test_boundary_values_are_pinned(self):
        state = FDState.soliton(0.02, 20.0)
        self.assertEqual(state.u[0], 0.0)
        self.assertAlmostEqual(state.far_value, 2 * np.arctan(20.0))
        self.assertAlmostEqual(state.dt, 0.01)
        self.assertEqual(state.radial_field().space_tag, "map")

    def test_validation(self):
        with self.assertRaises(GridError):
            FDState(0.02, np.zeros(5), np.zeros(5))
        with self.assertRaises(GridError):
            FDState.soliton(0.02, 20.0, cfl=0.8)
        with self.assertRaises(GridError):
            fd_evolve(FDState.soliton(0.02, 20.0, t=5.0), 1.0)

    def test_discrete_force_converges_on_the_soliton(self):
        sups = []
        for h in (0.02, 0.01):
            r = h * np.arange(int(20 / h) + 1)
            sups.append(float(np.max(np.abs(discrete_force(SolitonProfile(1.0).Q(r), r, h)))))
        self.assertLess(sups[0], 0.05)
        self.assertLess(sups[1], sups[0])

    def test_discrete_energy_of_the_soliton(self):
        state = FDState.soliton(0.02, 40.0)
        self.assertAlmostEqual(discrete_energy(state) / SOLITON_ENERGY, 1.0, delta=5e-3)


class EvolutionTests(SimpleTestCase):
    def test_soliton_is_stationary(self):
        state = FDState.soliton(0.02, 20.0)
        traj = fd_evolve(state, 10.0, record_every=1.0)
        Q = SolitonProfile(1.0).Q(traj.r)
        self.assertLessEqual(float(np.max(np.abs(traj.snapshots - Q))), 1e-6)
        self.assertFalse(traj.blowup)
        self.assertEqual(len(traj.times), 11)

    def test_energy_drift(self):
        state = FDState.from_profile(0.02, 20.0, _bumped)
        traj = fd_evolve(state, 4.0, record_every=0.5)
        self.assertLessEqual(traj.energy_drift, 1e-6)
        self.assertTrue(np.all(np.isfinite(traj.snapshots)))

    def test_absorbing_layer_drains_energy(self):
        state = FDState.from_profile(0.02, 20.0, _bumped)
        open_ = fd_evolve(state, 30.0, record_every=10.0, sponge_width=6.0, sponge_strength=2.0)
        closed = fd_evolve(state, 30.0, record_every=10.0)
        self.assertLess(open_.energies[-1], closed.energies[-1])

    def test_blowup_detector(self):
        state = FDState.soliton(0.02, 20.0, lam=20.0)
        traj = fd_evolve(state, 0.1)
        self.assertTrue(traj.blowup)
        with self.assertRaises(BlowupDetected):
            fd_evolve(state, 0.1, raise_on_blowup=True)
        self.assertEqual(lambda_track(traj).classification, "Type1")

    def test_origin_spline_is_pinned(self):
        r = np.linspace(0.1, 5.0, 50)
        spline = origin_spline(r, np.sin(r))
        self.assertEqual(float(spline(0.0)), 0.0)
        self.assertAlmostEqual(float(spline(2.0)), np.sin(2.0), places=4)


class ClassifierTests(SimpleTestCase):
    times = np.arange(0.0, 16.5, 0.5)

    def test_concentration(self):
        traj = synthetic_trajectory(self.times, lambda t: 0.25 * (1 + t), h=0.01, r_max=20.0)
        trace = lambda_track(traj)
        self.assertEqual(trace.classification, "Type2")
        self.assertEqual(trace.rescaled(2.0).classification, "Type2")
        np.testing.assert_allclose(trace.lambdas, 0.25 * (1 + self.times), rtol=2e-3)

    def test_spreading(self):
        traj = synthetic_trajectory(self.times, lambda t: 4.0 / (1 + t) ** 0.5, h=0.01, r_max=20.0)
        self.assertEqual(lambda_track(traj).classification, "Type3")

    def test_constant_scale(self):
        traj = synthetic_trajectory(self.times, lambda t: 2.0, h=0.02, r_max=20.0)
        trace = lambda_track(traj)
        self.assertEqual(trace.classification, "Type4")
        np.testing.assert_allclose(trace.lambdas, 2.0, rtol=1e-3)
        self.assertEqual(trace.rescaled(2.0).classification, "Type4")

    def test_missing_crossings_are_undecided(self):
        lambdas = np.full(self.times.shape, np.nan)
        self.assertEqual(classify(self.times, lambdas).classification, "undecided")

    def test_windows_that_disagree_are_undecided(self):
        lambdas = np.where(self.times < 8.0, 1.0 + self.times, 9.0)
        self.assertEqual(classify(self.times, lambdas).classification, "undecided")

    def test_trace_validation(self):
        with self.assertRaises(GridError):
            LambdaTrace(self.times, -np.ones_like(self.times))
        with self.assertRaises(GridError):
            LambdaTrace(self.times, np.ones_like(self.times), "Type5")


class CrosscheckTests(SimpleTestCase):
    @staticmethod
    def _soliton_fields(bump=0.0):
        grid = desk.radial_grid()
        r = grid.nodes
        Q = soliton(1.0, grid)
        zero = np.zeros(grid.size)
        target = Q.like(Q.values + bump * r ** 2 * np.exp(-r ** 2 / 4))
        return Q, Q.like(zero), target, RadialField(grid, zero, "gauge")

    def test_gap_is_measured_against_the_departure_from_q(self):
        r = 0.02 * np.arange(1, 1001)
        Q = SolitonProfile(1.0).Q(r)
        ref = Q + 1e-3 * r ** 2 * np.exp(-r ** 2 / 4)
        gap = _mismatch(r, Q, ref, Q, r <= 15.0)
        self.assertAlmostEqual(gap["l2"], 1.0, places=12)
        self.assertAlmostEqual(gap["abs_l2"], gap["departure"], places=15)
        self.assertGreater(gap["linf"], 1e-4)
        same = _mismatch(r, ref, ref, Q, r <= 15.0)
        self.assertEqual(same["l2"], 0.0)

    def test_perturbed_reference_is_not_matched_by_the_soliton(self):
        u0, u0_t, u1, w1 = self._soliton_fields(bump=1e-3)
        report = crosscheck(u0, u0_t, u1, w1, 1.0, h=0.05, r_max=20.0)
        self.assertGreater(report["mismatch"], 0.5)
        self.assertGreater(report["departure"], 0.0)
        self.assertEqual(len(report["runs"]), 2)

    def test_soliton_matches_itself(self):
        u0, u0_t, u1, w1 = self._soliton_fields()
        report = crosscheck(u0, u0_t, u1, w1, 1.0, h=0.05, r_max=20.0)
        self.assertEqual(report["departure"], 0.0)
        self.assertLess(report["mismatch"], 1e-5)
