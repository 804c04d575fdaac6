# wavemaps/tests/test_fitting.py
import numpy as np
from django.test import SimpleTestCase

from wavemaps.fitting import dyadic_times, fit_power_law, stable_under_doubling, sup_ratio


class PowerLawTests(SimpleTestCase):
    def test_exact_power_law(self):
        t = np.array([4.0, 8.0, 16.0, 32.0])
        fit = fit_power_law(t, 3.0 * t ** -1.5)
        self.assertAlmostEqual(fit.exponent, -1.5, places=10)
        self.assertAlmostEqual(fit.constant, 3.0, places=9)
        self.assertLess(fit.rms, 1e-12)
        self.assertEqual(fit.points, 4)

    def test_sign_is_ignored(self):
        t = np.array([1.0, 2.0, 4.0])
        self.assertAlmostEqual(fit_power_law(t, -t ** 2).exponent, 2.0, places=10)

    def test_log_correction(self):
        x = np.array([2.0 ** -8, 2.0 ** -6, 2.0 ** -4])
        y = x ** 2.5 / np.abs(np.log(x))
        fit = fit_power_law(x, y, log_power=-1.0)
        self.assertAlmostEqual(fit.exponent, 2.5, places=10)

    def test_zeros_are_dropped(self):
        fit = fit_power_law([1.0, 2.0, 4.0], [0.0, 0.0, 1.0])
        self.assertTrue(np.isnan(fit.exponent))
        self.assertEqual(fit.points, 1)
        self.assertEqual(fit_power_law([1.0, 2.0, 4.0], [0.0, 2.0, 4.0]).points, 2)

    def test_dropped_samples_are_counted(self):
        fit = fit_power_law([1.0, 2.0, 4.0, 8.0, 16.0], [np.nan, 0.0, 4.0, 8.0, np.inf])
        self.assertEqual(fit.points, 2)
        self.assertEqual(fit.dropped, 3)
        self.assertEqual(fit.nonfinite, 2)
        self.assertTrue(fit.usable)
        self.assertEqual(fit.to_dict()["dropped"], 3)
        clean = fit_power_law([1.0, 2.0], [1.0, 2.0])
        self.assertEqual((clean.dropped, clean.nonfinite), (0, 0))
        self.assertFalse(fit_power_law([1.0, 2.0], [0.0, 1.0]).usable)


class RatioTests(SimpleTestCase):
    def test_sup_ratio(self):
        self.assertEqual(sup_ratio([1.0, -3.0, 5.0], [1.0, 1.0, 0.0]), 3.0)
        self.assertEqual(sup_ratio([1.0], [0.0]), 0.0)

    def test_dyadic_times(self):
        np.testing.assert_allclose(dyadic_times(4, 16, 2), 2.0 ** np.linspace(2, 4, 5))
        np.testing.assert_allclose(dyadic_times(4, 16), [4.0, 8.0, 16.0])

    def test_stable_under_doubling(self):
        t = np.array([1.0, 2.0, 4.0, 8.0])
        report = stable_under_doubling(t, [2.0, 1.0, 0.5, 0.25])
        self.assertEqual(report["ratio"], 1.0)
        self.assertTrue(report["stable"])
        growing = stable_under_doubling(t, [1.0, 1.0, 2.0, 4.0])
        self.assertEqual(growing["full_sup"], 4.0)
        self.assertFalse(growing["stable"])
        self.assertTrue(stable_under_doubling(t, np.zeros(4))["stable"])
