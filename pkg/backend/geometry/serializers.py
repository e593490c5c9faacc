"""
Domain spec serializers.

Reads domain descriptions from JSON-compatible mappings (config files and
command-line flags) and writes specs back out for report provenance.

Schema:
    {"kind": "ball", "n": 3, "radius": 1.0, "center": [0, 0, 0]}
    {"kind": "spheroid", "n": 2, "semi_axes": [1.2, 1.0], "rotation": [[...], [...]]}
    {"kind": "graph_perturbed_ball", "n": 2, "radius": 1.0, "amplitude": 0.1, "flat_angle": 0.8}
    {"kind": "beaked_sphere", "n": 2, "eps": 0.1, "m": 3, "recentered": true}

Examples:
    >>> serializer = DomainSpecSerializer(data={'kind': 'ball', 'n': 2})
    >>> serializer.is_valid(raise_exception=True)
    >>> serializer.validated_data['spec']
    Ball(n=2, center=(0.0, 0.0), rotation=None, radius=1.0)
"""

from dataclasses import asdict

from rest_framework import serializers

from common.exceptions import PotlabError

from .domains import Ball, BeakedSphere, GraphPerturbedBall, Spheroid

DOMAIN_KINDS = {
    'ball': Ball,
    'spheroid': Spheroid,
    'graph_perturbed_ball': GraphPerturbedBall,
    'beaked_sphere': BeakedSphere,
}

_FIELDS_BY_KIND = {
    'ball': ('center', 'rotation', 'radius'),
    'spheroid': ('center', 'rotation', 'semi_axes'),
    'graph_perturbed_ball': ('center', 'rotation', 'radius', 'amplitude', 'flat_angle'),
    'beaked_sphere': ('eps', 'm', 'recentered'),
}


class DomainSpecSerializer(serializers.Serializer):
    """
    Validate a domain mapping and build the ``DomainSpec``.

    Fields that do not belong to the chosen ``kind`` are rejected so that a
    typo in a config file never silently falls back to a default.
    """

    kind = serializers.ChoiceField(choices=sorted(DOMAIN_KINDS))
    n = serializers.IntegerField(min_value=2)
    radius = serializers.FloatField(required=False)
    center = serializers.ListField(child=serializers.FloatField(), required=False)
    rotation = serializers.ListField(child=serializers.ListField(child=serializers.FloatField()), required=False)
    semi_axes = serializers.ListField(child=serializers.FloatField(), required=False)
    amplitude = serializers.FloatField(required=False)
    flat_angle = serializers.FloatField(required=False)
    eps = serializers.FloatField(required=False)
    m = serializers.IntegerField(required=False)
    recentered = serializers.BooleanField(required=False)

    def validate(self, attrs):
        kind = attrs['kind']
        allowed = _FIELDS_BY_KIND[kind]
        extra = sorted(set(attrs) - set(allowed) - {'kind', 'n'})
        if extra:
            raise serializers.ValidationError({key: f'not a field of {kind}' for key in extra})
        kwargs = {key: attrs[key] for key in allowed if key in attrs}
        try:
            attrs['spec'] = DOMAIN_KINDS[kind](n=attrs['n'], **kwargs)
        except PotlabError as exc:
            raise serializers.ValidationError({'kind': f'{kind}: {exc.detail}'})
        return attrs


def from_mapping(data):
    """Build a spec from a mapping; raises ``rest_framework.exceptions.ValidationError``."""
    serializer = DomainSpecSerializer(data=data)
    serializer.is_valid(raise_exception=True)
    return serializer.validated_data['spec']


def describe(spec):
    """Plain mapping of a spec, for report provenance."""
    data = {'kind': spec.kind}
    data.update({key: value for key, value in asdict(spec).items() if value is not None})
    return data
