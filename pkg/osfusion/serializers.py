# osfusion/serializers.py
import math

from django.utils.dateparse import parse_datetime
from rest_framework import serializers

from .bench import MIN_RUNS, parse_bench_rules
from .cli import COMMANDS
from .combiners import CombinerRule, parse_rules
from .exceptions import InvalidRuleError
from .mlp import ARCHITECTURES
from .moments import MAX_TABLE_N, MIN_ORACLE_SAMPLES
from .reports import SCHEMA_VERSION, ReportEnvelope
from .simulation import MIN_TRIALS


class RuleField(serializers.Field):
    """A single combiner rule in its text form (``ave``, ``os:3``, ``trim:2:4``...)."""

    def to_internal_value(self, data):
        try:
            return CombinerRule.parse(data)
        except InvalidRuleError as exc:
            raise serializers.ValidationError(str(exc))

    def to_representation(self, value):
        return str(value)


class RuleListField(RuleField):
    """Comma-separated rules; ``allow_auto`` also accepts ``trim:auto``."""

    def __init__(self, allow_auto=False, **kwargs):
        self.allow_auto = allow_auto
        super().__init__(**kwargs)

    def to_internal_value(self, data):
        parse = parse_bench_rules if self.allow_auto else parse_rules
        try:
            return parse(data)
        except InvalidRuleError as exc:
            raise serializers.ValidationError(str(exc))

    def to_representation(self, value):
        return ",".join(str(rule) for rule in value)


class IntListField(serializers.Field):
    """Comma-separated integers, e.g. ``2,3,5``."""

    def to_internal_value(self, data):
        try:
            values = [int(token) for token in str(data).split(',') if token.strip()]
        except ValueError:
            raise serializers.ValidationError(f"expected comma-separated integers, got {data!r}")
        if not values:
            raise serializers.ValidationError("at least one value is required")
        return values

    def to_representation(self, value):
        return ",".join(str(v) for v in value)


def _require_finite(attrs, *names):
    for name in names:
        value = attrs.get(name)
        if value is not None and not math.isfinite(value):
            raise serializers.ValidationError({name: f"must be finite, got {value}"})


def _require_rule_fits(rule, n, field='rule'):
    try:
        rule.validate_for(n)
    except InvalidRuleError as exc:
        raise serializers.ValidationError({field: str(exc)})


class MomentsParametersSerializer(serializers.Serializer):
    n_max = serializers.IntegerField(min_value=1, max_value=MAX_TABLE_N)
    cache = serializers.CharField(required=False, allow_null=True, default=None)
    verify_mc = serializers.IntegerField(
        min_value=MIN_ORACLE_SAMPLES, required=False, allow_null=True, default=None,
    )
    seed = serializers.IntegerField(min_value=0, default=0)


class ReduceParametersSerializer(serializers.Serializer):
    """
    Options of ``reduce``.

    The error terms (``sigma_b`` and friends) only matter with ``biased``.
    """
    rule = RuleField()
    n = serializers.IntegerField(min_value=1, max_value=MAX_TABLE_N)
    biased = serializers.BooleanField(default=False)
    s = serializers.FloatField(default=1.0)
    sigma_b = serializers.FloatField(min_value=0.0, default=0.0)
    sigma_beta = serializers.FloatField(min_value=0.0, default=0.0)
    beta_bar = serializers.FloatField(default=0.0)
    beta_m = serializers.FloatField(default=0.0)

    def validate(self, attrs):
        _require_finite(attrs, 's', 'sigma_b', 'sigma_beta', 'beta_bar', 'beta_m')
        if attrs['s'] <= 0:
            raise serializers.ValidationError({'s': "slope difference must be > 0"})
        _require_rule_fits(attrs['rule'], attrs['n'])
        return attrs


class SimulateParametersSerializer(serializers.Serializer):
    rule = RuleField()
    n = serializers.IntegerField(min_value=1, max_value=MAX_TABLE_N)
    sigma = serializers.FloatField(default=0.1)
    s = serializers.FloatField(default=1.0)
    trials = serializers.IntegerField(min_value=MIN_TRIALS, default=1_000_000)
    seed = serializers.IntegerField(min_value=0, default=0)
    bias_file = serializers.CharField(required=False, allow_null=True, default=None)

    def validate(self, attrs):
        _require_finite(attrs, 'sigma', 's')
        if attrs['sigma'] <= 0:
            raise serializers.ValidationError({'sigma': "noise sigma must be > 0"})
        if attrs['s'] <= 0:
            raise serializers.ValidationError({'s': "slope difference must be > 0"})
        _require_rule_fits(attrs['rule'], attrs['n'])
        return attrs


class SweepParametersSerializer(serializers.Serializer):
    rules = RuleListField()
    n_values = IntListField()
    sigma = serializers.FloatField(default=0.1)
    s = serializers.FloatField(default=1.0)
    trials = serializers.IntegerField(min_value=MIN_TRIALS, default=1_000_000)
    seed = serializers.IntegerField(min_value=0, default=0)

    def validate_n_values(self, value):
        if any(not 1 <= n <= MAX_TABLE_N for n in value):
            raise serializers.ValidationError(f"ensemble sizes must lie in [1, {MAX_TABLE_N}]")
        return value

    def validate(self, attrs):
        _require_finite(attrs, 'sigma', 's')
        if attrs['sigma'] <= 0 or attrs['s'] <= 0:
            raise serializers.ValidationError("sigma and s must be > 0")
        return attrs


class BenchParametersSerializer(serializers.Serializer):
    """
    Options of ``bench``.

    ``hidden`` falls back to the preset's hidden-unit count, then to 10.
    """
    data = serializers.CharField()
    n = serializers.IntegerField(min_value=1)
    rules = RuleListField(allow_auto=True)
    runs = serializers.IntegerField(min_value=MIN_RUNS, default=20)
    variability = serializers.BooleanField(default=False)
    preset = serializers.ChoiceField(
        choices=sorted(ARCHITECTURES), required=False, allow_null=True, default=None,
    )
    hidden = serializers.IntegerField(min_value=1, required=False, allow_null=True, default=None)
    epochs = serializers.IntegerField(min_value=1, default=100)
    lr = serializers.FloatField(default=0.5)
    batch_size = serializers.IntegerField(min_value=1, default=16)
    seed = serializers.IntegerField(min_value=0, default=0)
    fixed_split = serializers.BooleanField(default=False)

    def validate(self, attrs):
        _require_finite(attrs, 'lr')
        if attrs['lr'] <= 0:
            raise serializers.ValidationError({'lr': "learning rate must be > 0"})
        for rule in attrs['rules']:
            if isinstance(rule, CombinerRule):
                _require_rule_fits(rule, attrs['n'], field='rules')
        if attrs['hidden'] is None:
            attrs['hidden'] = ARCHITECTURES.get(attrs['preset'], 10)
        return attrs


class BlobsParametersSerializer(serializers.Serializer):
    path = serializers.CharField()
    patterns = serializers.IntegerField(min_value=10, default=800)
    classes = serializers.IntegerField(min_value=2, default=2)
    dims = serializers.IntegerField(min_value=1, default=2)
    separation = serializers.FloatField(default=3.0)
    seed = serializers.IntegerField(min_value=0, default=0)

    def validate(self, attrs):
        _require_finite(attrs, 'separation')
        if attrs['separation'] < 0:
            raise serializers.ValidationError({'separation': "must be >= 0"})
        if attrs['patterns'] < attrs['classes']:
            raise serializers.ValidationError("need at least one pattern per class")
        return attrs


class ReportEnvelopeSerializer(serializers.Serializer):
    """
    Validates a report envelope read back from disk.

    Expected input format:
    {
        "command": "reduce",
        "parameters": {"rule": "spread", "n": 2, ...},
        "results": {...},
        "tool_version": "1.0.0",
        "timestamp": "2026-01-01T00:00:00+00:00",
        "schema_version": 1
    }
    """
    command = serializers.ChoiceField(choices=COMMANDS)
    parameters = serializers.DictField()
    results = serializers.JSONField()
    tool_version = serializers.CharField()
    timestamp = serializers.CharField()
    schema_version = serializers.IntegerField(min_value=1)

    def validate_timestamp(self, value):
        if parse_datetime(value) is None:
            raise serializers.ValidationError(f"not an ISO-8601 timestamp: {value!r}")
        return value

    def validate_schema_version(self, value):
        if value > SCHEMA_VERSION:
            raise serializers.ValidationError(
                f"report schema {value} is newer than this version of osfusion ({SCHEMA_VERSION})"
            )
        return value

    def create(self, validated_data):
        return ReportEnvelope(**validated_data)
