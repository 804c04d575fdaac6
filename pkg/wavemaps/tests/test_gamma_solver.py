# wavemaps/tests/test_gamma_solver.py
import numpy as np
from django.test import SimpleTestCase

from wavemaps.exceptions import ConsistencyError
from wavemaps.gamma_solver import (
    TARGET_EXPONENTS, certify, constraint_remainder, constraint_residual, construct_solution, epsilon_from_gamma,
    difference_run, epsilon_gain, epsilon_values, low_r_constant, nonlinearity, source_norm_audit, wave_nonlinearity,
)
from wavemaps.grids import RadialField
from wavemaps.linear_evolution import WaveState
from wavemaps.profile_builder import build_profiles
from wavemaps.soliton_geometry import h3, soliton

from . import desk


def _perturbation(grid):
    r = grid.nodes
    return 0.05 * r ** 2 * np.exp(-r ** 2 / 4)


class ConstraintTests(SimpleTestCase):
    def test_remainder_matches_its_definition(self):
        grid = desk.radial_grid()
        r = grid.nodes
        Q = soliton(1.0, grid).values
        p = _perturbation(grid)
        eps = 0.03 * r * np.exp(-r ** 2)
        direct = (np.sin(eps + Q + p) - np.sin(Q + p) - np.cos(Q) * eps) / r
        np.testing.assert_allclose(constraint_remainder(r, Q, p, eps), direct, atol=1e-12)
        np.testing.assert_allclose(np.cos(Q), -h3(r), atol=1e-15)
        self.assertFalse(np.any(constraint_remainder(r, Q, p, np.zeros_like(r))))

    def test_epsilon_satisfies_the_constraint(self):
        grid = desk.radial_grid()
        r = grid.nodes
        gamma = 1e-3 * r ** 2 * np.exp(-r ** 2)
        p = _perturbation(grid)
        result = epsilon_values(grid, gamma, p, t=8.0)
        self.assertGreater(result.iterations, 0)
        self.assertLess(constraint_residual(grid, gamma, result.values, p), 1e-4)

    def test_zero_gamma_gives_zero_epsilon(self):
        grid = desk.radial_grid()
        result = epsilon_values(grid, np.zeros(grid.size), np.zeros(grid.size))
        self.assertEqual(result.iterations, 0)
        self.assertFalse(np.any(result.values))

    def test_space_tags_are_checked(self):
        grid = desk.radial_grid()
        zero = np.zeros(grid.size)
        with self.assertRaises(ConsistencyError):
            epsilon_from_gamma(RadialField(grid, zero, "map"), soliton(1.0, grid), 8.0)
        eps = epsilon_from_gamma(RadialField(grid, zero, "gauge"), soliton(1.0, grid), 8.0)
        self.assertEqual(eps.space_tag, "map")


class NonlinearityTests(SimpleTestCase):
    def test_split_reassembles(self):
        r = np.geomspace(1e-2, 40.0, 200)
        rng = np.random.default_rng(7)
        Q = 2 * np.arctan(r)
        bw, bu_t, gamma, eps, eps_t = (1e-2 * rng.standard_normal(r.size) for _ in range(5))
        bu = Q + 1e-2 * rng.standard_normal(r.size)
        split = nonlinearity(r, Q, bw, bu, bu_t, gamma, eps, eps_t)
        self.assertLess(split.mismatch, 1e-12)
        np.testing.assert_allclose(split.source, wave_nonlinearity(r, Q, bw, bu, bu_t), atol=1e-15)

    def test_soliton_is_a_stationary_point(self):
        r = np.geomspace(1e-2, 40.0, 50)
        Q = 2 * np.arctan(r)
        zero = np.zeros_like(r)
        self.assertFalse(np.any(wave_nonlinearity(r, Q, zero, Q, zero)))


class CertificateTests(SimpleTestCase):
    def test_exact_power_laws_pass(self):
        t = np.array([16.0, 32.0, 64.0])
        norms = {key: 3.0 * t ** -target for key, target in TARGET_EXPONENTS.items()}
        exponents, constants, passed = certify(norms, t)
        self.assertTrue(all(passed.values()))
        for key, target in TARGET_EXPONENTS.items():
            self.assertAlmostEqual(exponents[key], target, places=10)
            self.assertAlmostEqual(constants[key], 3.0, places=10)

    def test_slow_decay_fails(self):
        t = np.array([16.0, 32.0, 64.0])
        norms = {key: t ** -target for key, target in TARGET_EXPONENTS.items()}
        norms["gamma_lx"] = t ** -1.0
        _, _, passed = certify(norms, t)
        self.assertFalse(passed["gamma_lx"])
        self.assertTrue(passed["epsilon_x"])

    def test_zero_norms_pass(self):
        t = np.array([16.0, 32.0, 64.0])
        _, _, passed = certify({key: np.zeros(3) for key in TARGET_EXPONENTS}, t)
        self.assertTrue(all(passed.values()))

    def test_non_finite_norms_fail(self):
        t = np.array([16.0, 32.0, 64.0])
        norms = {key: t ** -target for key, target in TARGET_EXPONENTS.items()}
        norms["gamma_lx"] = np.full(3, np.nan)
        norms["epsilon_x"] = np.array([t[0] ** -1.5, np.inf, t[2] ** -1.5])
        _, constants, passed = certify(norms, t)
        self.assertFalse(passed["gamma_lx"])
        self.assertFalse(passed["epsilon_x"])
        self.assertTrue(np.isnan(constants["gamma_lx"]))
        self.assertTrue(passed["gamma_t_lx"])

    def test_single_nonzero_sample_fails(self):
        t = np.array([16.0, 32.0, 64.0])
        norms = {key: np.zeros(3) for key in TARGET_EXPONENTS}
        norms["gamma_hdot1"] = np.array([1e3, 0.0, 0.0])
        exponents, _, passed = certify(norms, t)
        self.assertTrue(np.isnan(exponents["gamma_hdot1"]))
        self.assertFalse(passed["gamma_hdot1"])
        self.assertTrue(passed["gamma_lx"])


class EpsilonBoundTests(SimpleTestCase):
    def test_low_r_constant_reads_the_log_envelope(self):
        grid = desk.radial_grid()
        r = grid.nodes
        eps = 0.3 * r * np.abs(np.log(r / 2)) * np.exp(-r ** 2)
        self.assertAlmostEqual(low_r_constant(grid, eps), 0.3 * np.exp(-r[0] ** 2), places=8)
        self.assertEqual(low_r_constant(grid, np.zeros(grid.size)), 0.0)

    def test_epsilon_gain_is_scale_free(self):
        table = desk.table()
        grid = table.radial_grid
        r = grid.nodes
        gamma = 1e-3 * r ** 2 * np.exp(-r ** 2)
        eps = epsilon_values(grid, gamma, _perturbation(grid), t=8.0).values
        gain = epsilon_gain(table, gamma, eps)
        self.assertGreater(gain, 0.0)
        self.assertTrue(np.isfinite(gain))
        self.assertAlmostEqual(epsilon_gain(table, 2 * gamma, 2 * eps) / gain, 1.0, places=10)
        self.assertEqual(epsilon_gain(table, np.zeros(grid.size), eps), 0.0)


class ConstructionTests(SimpleTestCase):
    def test_zero_datum_constructs_the_soliton(self):
        w0, w1 = desk.zero_datum()
        construction = construct_solution(w0, w1, desk.table(), T_init=4.0, s_max=32.0, ratio=1.05, ds_max=0.5)
        record = construction.record
        self.assertEqual(record.T, 4.0)
        self.assertTrue(all(record.passed.values()))
        self.assertFalse(np.any(construction.pair.gamma))
        self.assertFalse(np.any(construction.pair.epsilon))
        self.assertLess(record.lambda_spread, 1e-3)
        u = construction.u(float(construction.audit_times[0]))
        np.testing.assert_allclose(u.values, soliton(1.0, u.grid).values)
        self.assertEqual(record.to_dict()["attempts"], [{"T": 4.0, "error": None}])
        self.assertEqual(record.audits["epsilon_gain"], [0.0] * len(construction.audit_times))
        self.assertFalse(any(record.audits["epsilon_low_r"]))


class SourceAuditTests(SimpleTestCase):
    def test_split_norms_are_ordered(self):
        report = source_norm_audit(desk.profiles())
        self.assertEqual([row["t"] for row in report["rows"]], list(desk.PROFILE_TIMES))
        for row in report["rows"]:
            self.assertGreater(row["lx"], 0.0)
            self.assertGreaterEqual(row["naive"], row["naive_near"])
            self.assertGreaterEqual(row["reorganized"], row["g_h1"])
        for key in ("lx", "naive", "naive_near", "reorganized", "g_h1"):
            self.assertIn(f"{key}_exponent", report)

    def test_soliton_has_no_source(self):
        w0, w1 = desk.zero_datum()
        prof = build_profiles(WaveState.from_data(w0, w1, desk.table()), desk.PROFILE_TIMES)
        report = source_norm_audit(prof)
        self.assertEqual([row["lx"] for row in report["rows"]], [0.0] * len(desk.PROFILE_TIMES))
        self.assertTrue(np.isnan(report["lx_exponent"]))


class DifferenceRunTests(SimpleTestCase):
    options = {"T_init": 4.0, "s_max": 32.0, "ratio": 1.05, "ds_max": 0.5, "tolerances": {"consistency": 1e-3}}

    def test_difference_is_linear_in_the_perturbation(self):
        w0, w1 = desk.datum(amplitude=2e-3, amplitude_t=1e-3)
        table = desk.table()
        runs = [
            difference_run((w0, w1), (w0.like((1 + delta) * w0.values), w1), table, **self.options)
            for delta in (1e-2, 5e-3)
        ]
        self.assertAlmostEqual(runs[0]["seminorm"] / runs[1]["seminorm"], 2.0, places=10)
        self.assertGreater(runs[1]["y_difference"], 0.0)
        self.assertAlmostEqual(runs[0]["y_difference"] / runs[1]["y_difference"], 2.0, delta=0.1)
        self.assertAlmostEqual(runs[0]["ratio"] / runs[1]["ratio"], 1.0, delta=0.05)
        self.assertEqual(len(runs[0]["rows"]), len(runs[1]["rows"]))

    def test_identical_data_have_no_difference(self):
        w0, w1 = desk.zero_datum()
        run = difference_run((w0, w1), (w0, w1), desk.table(), **self.options)
        self.assertEqual(run, {"y_difference": 0.0, "seminorm": 0.0, "ratio": 0.0, "rows": []})
