# wavemaps/tests/test_serializers.py
import math

from django.conf import settings
from django.test import SimpleTestCase, override_settings

from wavemaps.exceptions import ConfigError
from wavemaps.pipelines import validate_config
from wavemaps.serializers import RunConfigSerializer, flatten_errors


class RunConfigSerializerTests(SimpleTestCase):
    def test_empty_config_takes_the_defaults(self):
        serializer = RunConfigSerializer(data={})
        self.assertTrue(serializer.is_valid(), serializer.errors)
        data = serializer.validated_data
        self.assertEqual(data["grid"]["r_max"], 192.0)
        self.assertEqual(data["window"]["S_max"], 128.0)
        self.assertEqual(data["frequency"]["nodes_per_octave"], 16)
        self.assertAlmostEqual(data["frequency"]["max_spacing"], math.pi / (2 * (128.0 + 192.0)))
        self.assertEqual(data["datum"]["family"], "default")
        self.assertEqual(data["fd"]["mode"], "datum")
        self.assertEqual(data["tolerances"], settings.WAVEMAPS["TOLERANCES"])

    def test_tolerances_merge_over_settings(self):
        config = validate_config({"tolerances": {"picard": 1e-6}})
        self.assertEqual(config["tolerances"]["picard"], 1e-6)
        self.assertEqual(config["tolerances"]["ode_rtol"], settings.WAVEMAPS["TOLERANCES"]["ode_rtol"])

    @override_settings(WAVEMAPS={**settings.WAVEMAPS, "TOLERANCES": {"picard": 1e-4}})
    def test_tolerance_defaults_follow_settings(self):
        self.assertEqual(validate_config({})["tolerances"], {"picard": 1e-4})

    def test_explicit_max_spacing_is_kept(self):
        config = validate_config({"frequency": {"max_spacing": 1e-3}})
        self.assertEqual(config["frequency"]["max_spacing"], 1e-3)

    def test_window_constraints(self):
        for window in ({"T_init": 32.0}, {"audit_start": 64.0}, {"S_max": 256.0}):
            serializer = RunConfigSerializer(data={"window": window})
            self.assertFalse(serializer.is_valid(), window)
        self.assertTrue(RunConfigSerializer(data={"window": {"S_max": 256.0}, "grid": {"r_max": 264.0}}).is_valid())

    def test_unknown_section(self):
        serializer = RunConfigSerializer(data={"grids": {}})
        self.assertFalse(serializer.is_valid())
        self.assertIn("grids", serializer.errors)
        self.assertFalse(RunConfigSerializer(data=[1, 2]).is_valid())

    def test_file_family_needs_a_path(self):
        self.assertFalse(RunConfigSerializer(data={"datum": {"family": "file"}}).is_valid())
        self.assertTrue(RunConfigSerializer(data={"datum": {"family": "file", "path": "w.csv"}}).is_valid())

    def test_fd_constraints(self):
        self.assertFalse(RunConfigSerializer(data={"fd": {"h": 0.1}}).is_valid())
        self.assertFalse(RunConfigSerializer(data={"fd": {"r_max": 9.0}}).is_valid())
        self.assertFalse(RunConfigSerializer(data={"fd": {"sponge_width": 30.0}}).is_valid())

    def test_invalid_config_raises_config_error(self):
        with self.assertRaises(ConfigError) as ctx:
            validate_config({"window": {"T_init": 100.0}})
        self.assertEqual(ctx.exception.exit_code, 4)
        self.assertIn("window", str(ctx.exception))


class FlattenErrorsTests(SimpleTestCase):
    def test_nested_errors(self):
        errors = {"grid": {"r_max": ["must exceed r_min"]}, "non_field_errors": ["bad"]}
        self.assertEqual(
            flatten_errors(errors),
            ["grid.r_max: must exceed r_min", "non_field_errors: bad"],
        )
