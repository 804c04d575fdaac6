# wavemaps/serializers.py
import math

from django.conf import settings
from rest_framework import serializers

from .models import CheckResult, RunRecord

SECTIONS = ("grid", "frequency", "window", "tolerances", "datum", "fd")


class GridSerializer(serializers.Serializer):
    r_min = serializers.FloatField(default=1e-3, min_value=1e-8)
    r_max = serializers.FloatField(default=192.0)
    nodes_per_octave = serializers.IntegerField(default=24, min_value=3)
    h_max = serializers.FloatField(default=0.05, min_value=1e-4)

    def validate(self, attrs):
        if attrs["r_max"] <= attrs["r_min"]:
            raise serializers.ValidationError({"r_max": "must exceed r_min"})
        return attrs


class FrequencySerializer(serializers.Serializer):
    k_min = serializers.IntegerField(default=-8)
    k_max = serializers.IntegerField(default=4)
    nodes_per_octave = serializers.IntegerField(default=16, min_value=16)
    # None means π/(2(S_max + r_max)), filled in by RunConfigSerializer
    max_spacing = serializers.FloatField(default=None, allow_null=True, min_value=1e-6)

    def validate(self, attrs):
        if attrs["k_min"] >= attrs["k_max"]:
            raise serializers.ValidationError({"k_max": "must exceed k_min"})
        return attrs


class WindowSerializer(serializers.Serializer):
    T_init = serializers.FloatField(default=16.0, min_value=1.0)
    S_max = serializers.FloatField(default=128.0)
    audit_start = serializers.FloatField(default=8.0, min_value=1.0)
    ratio = serializers.FloatField(default=1.02, min_value=1.0 + 1e-6, max_value=1.5)
    ds_max = serializers.FloatField(default=0.5, min_value=1e-4)
    max_doublings = serializers.IntegerField(default=6, min_value=0)
    # rerun with the datum scaled by 1 + δ and report the difference ratios
    lipschitz = serializers.BooleanField(default=False)


class ToleranceSerializer(serializers.Serializer):
    ode_rtol = serializers.FloatField(required=False, min_value=0)
    eigen_residual = serializers.FloatField(required=False, min_value=0)
    dual_identity = serializers.FloatField(required=False, min_value=0)
    fixed_point = serializers.FloatField(required=False, min_value=0)
    picard = serializers.FloatField(required=False, min_value=0)
    constraint = serializers.FloatField(required=False, min_value=0)
    tail = serializers.FloatField(required=False, min_value=0)
    consistency = serializers.FloatField(required=False, min_value=0)

    def validate(self, attrs):
        return {**settings.WAVEMAPS["TOLERANCES"], **attrs}


class DatumSerializer(serializers.Serializer):
    FAMILY_CHOICES = (
        ("default", "Projected r⁴e^{-r²} / r²(1 − r²/2)e^{-r²} pair"),
        ("resonant", "Same pair without the nonresonance projection"),
        ("zero", "Zero data"),
        ("file", "CSV with columns r, w0, w1"),
    )
    family = serializers.ChoiceField(choices=FAMILY_CHOICES, default="default")
    amplitude = serializers.FloatField(default=0.02)
    amplitude_t = serializers.FloatField(default=0.01)
    scale = serializers.FloatField(default=1.0)
    path = serializers.CharField(required=False, allow_blank=True, default="")

    def validate(self, attrs):
        if attrs["family"] == "file" and not attrs["path"]:
            raise serializers.ValidationError({"path": "the file family needs a CSV path"})
        return attrs


class FDSerializer(serializers.Serializer):
    MODE_CHOICES = (
        ("datum", "Map built from the datum around Q"),
        ("soliton", "Static Q_λ"),
        ("synthetic", "Prescribed λ(t) family Q_{λ(t)}"),
    )
    LAW_CHOICES = (("linear", "λ = lam(1 + t)"), ("inverse", "λ = lam/(1 + t)"), ("constant", "λ = lam"))
    h = serializers.FloatField(default=0.02, min_value=1e-4, max_value=0.05)
    r_max = serializers.FloatField(default=48.0)
    horizon = serializers.FloatField(default=8.0, min_value=0.0)
    t_end = serializers.FloatField(default=64.0, min_value=0.0)
    record_every = serializers.FloatField(default=1.0, min_value=1e-3)
    sponge_width = serializers.FloatField(default=0.0, min_value=0.0)
    sponge_strength = serializers.FloatField(default=0.0, min_value=0.0)
    mode = serializers.ChoiceField(choices=MODE_CHOICES, default="datum")
    lam = serializers.FloatField(default=1.0, min_value=1e-3)
    law = serializers.ChoiceField(choices=LAW_CHOICES, default="linear")

    def validate(self, attrs):
        if attrs["r_max"] <= attrs["horizon"] + 2.0:
            raise serializers.ValidationError({"r_max": "must exceed horizon + 2 so the comparison band is not empty"})
        if attrs["sponge_width"] >= attrs["r_max"] / 2:
            raise serializers.ValidationError({"sponge_width": "must stay below half of r_max"})
        return attrs


class RunConfigSerializer(serializers.Serializer):
    grid = GridSerializer()
    frequency = FrequencySerializer()
    window = WindowSerializer()
    tolerances = ToleranceSerializer()
    datum = DatumSerializer()
    fd = FDSerializer()

    # light-cone margin between S_max and the radial edge
    CONE_MARGIN = 8.0

    def to_internal_value(self, data):
        if not isinstance(data, dict):
            raise serializers.ValidationError({"non_field_errors": ["config must be a JSON object"]})
        unknown = sorted(set(data) - set(SECTIONS))
        if unknown:
            raise serializers.ValidationError({key: ["unknown section"] for key in unknown})
        return super().to_internal_value({section: data.get(section) or {} for section in SECTIONS})

    def validate(self, attrs):
        window, grid, freq = attrs["window"], attrs["grid"], attrs["frequency"]
        if window["T_init"] >= window["S_max"] / 4:
            raise serializers.ValidationError({"window": [f"T_init must be below S_max/4 = {window['S_max'] / 4:g}"]})
        if window["audit_start"] >= window["S_max"] / 2:
            raise serializers.ValidationError({"window": ["audit_start must be below S_max/2"]})
        if window["S_max"] + self.CONE_MARGIN > grid["r_max"]:
            raise serializers.ValidationError({
                "grid": [f"r_max must be at least S_max + {self.CONE_MARGIN:g} = {window['S_max'] + self.CONE_MARGIN:g}"],
            })
        if freq["max_spacing"] is None:
            freq["max_spacing"] = math.pi / (2 * (window["S_max"] + grid["r_max"]))
        return attrs


class CheckResultSerializer(serializers.ModelSerializer):
    class Meta:
        model = CheckResult
        fields = ("name", "anchor", "passed", "value")


class RunRecordSerializer(serializers.ModelSerializer):
    checks = CheckResultSerializer(many=True, read_only=True)
    passed = serializers.SerializerMethodField(read_only=True)

    class Meta:
        model = RunRecord
        fields = ("id", "created", "subcommand", "config_hash", "status", "exit_code", "output_dir", "message",
                  "checks", "passed")

    def get_passed(self, obj):
        return all(check.passed for check in obj.checks.all())


def flatten_errors(errors, prefix=""):
    """Serializer error dict → ['section.field: message', ...]."""
    out = []
    if isinstance(errors, dict):
        for key, value in errors.items():
            out.extend(flatten_errors(value, f"{prefix}{key}."))
    elif isinstance(errors, list):
        for item in errors:
            if isinstance(item, (dict, list)):
                out.extend(flatten_errors(item, prefix))
            else:
                out.append(f"{prefix.rstrip('.') or 'config'}: {item}")
    else:
        out.append(f"{prefix.rstrip('.') or 'config'}: {errors}")
    return out
