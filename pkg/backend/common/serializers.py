"""
Serializers for PotLab result objects.

Results are plain frozen dataclasses; these DRF serializers turn them into
primitive structures for the JSON reports written by the management
commands and rendered with ``rest_framework.renderers.JSONRenderer``.

Features:
    - Infinite sentinels (an empty touching set gives an infinite Kuran gap)
      are written as the string ``"Infinity"``; NaN becomes ``null``
    - GapEstimate samples are written as ``{"t": ..., "value": ...}`` pairs
    - Reports embed both sides, the margin, tolerance, flags and provenance

Examples:
    >>> data = VerificationReportSerializer(report).data
    >>> render_json(data)
    b'{"name":"thm12",...}'
"""

import math

from rest_framework import serializers
from rest_framework.renderers import JSONRenderer


class SentinelFloatField(serializers.FloatField):
    """Float field that keeps infinite sentinels representable in strict JSON."""

    def to_representation(self, value):
        value = float(value)
        if math.isnan(value):
            return None
        if math.isinf(value):
            return 'Infinity' if value > 0 else '-Infinity'
        return value


class FlexibleValueField(serializers.Field):
    """Scalar or vector numeric value."""

    def to_representation(self, value):
        if hasattr(value, 'tolist'):
            value = value.tolist()
        if isinstance(value, (list, tuple)):
            return [SentinelFloatField().to_representation(v) for v in value]
        return SentinelFloatField().to_representation(value)


def _plain(value):
    """Convert numpy scalars/arrays and nested containers into JSON primitives."""
    if hasattr(value, 'tolist'):
        value = value.tolist()
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, float):
        return SentinelFloatField().to_representation(value)
    return value


class PlainDictField(serializers.Field):
    def to_representation(self, value):
        return _plain(value)


class IntegralResultSerializer(serializers.Serializer):
    value = FlexibleValueField()
    error_estimate = FlexibleValueField()
    levels_used = serializers.ListField(child=serializers.IntegerField())
    converged = serializers.BooleanField()
    facet_count = serializers.IntegerField()


class GapSampleSerializer(serializers.Serializer):
    t = serializers.FloatField()
    value = SentinelFloatField()


class GapEstimateSerializer(serializers.Serializer):
    samples = serializers.SerializerMethodField()
    extrapolated = SentinelFloatField()
    converged = serializers.BooleanField()
    method = serializers.CharField()
    tolerance = SentinelFloatField()
    flags = serializers.ListField(child=serializers.CharField())
    z = FlexibleValueField()

    def get_samples(self, obj):
        pairs = [{'t': t, 'value': value} for t, value in obj.samples]
        return GapSampleSerializer(pairs, many=True).data


class VerificationReportSerializer(serializers.Serializer):
    name = serializers.CharField()
    lhs = SentinelFloatField()
    rhs = SentinelFloatField()
    relation = serializers.CharField()
    margin = SentinelFloatField()
    tolerance = SentinelFloatField()
    passed = serializers.BooleanField()
    provenance = PlainDictField()
    flags = serializers.ListField(child=serializers.CharField())
    details = PlainDictField()


class PotentialProfileSerializer(serializers.Serializer):
    points = PlainDictField()
    values = PlainDictField()
    ratios = PlainDictField()
    spread = SentinelFloatField()
    mean_ratio = SentinelFloatField()
    flags = serializers.ListField(child=serializers.CharField())


def render_json(data):
    """Render primitive data with DRF's JSON renderer as indented UTF-8 bytes."""
    return JSONRenderer().render(_plain(data), renderer_context={'indent': 2})
