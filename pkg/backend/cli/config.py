"""
Run configuration for the management commands.

A run configuration is merged from three layers, later ones winning:

    settings.POTLAB defaults  <  JSON file given with --config  <  command-line flags

and validated by ``RunConfigSerializer``. Validation errors name the
offending key, which the commands report as a usage error (exit status 2).

Example config file:
    {
        "suite": "spheroid",
        "a": 1.2,
        "n": "2",
        "tol": 1e-3,
        "schedule": {"t0": 1.2, "q": 0.5, "count": 8},
        "out": "runs/spheroid"
    }
"""

import json
import os
from pathlib import Path

from django.conf import settings
from django.test import override_settings
from rest_framework import serializers

from common.defaults import get_default
from geometry.serializers import DomainSpecSerializer

SUITES = ('ball', 'spheroid', 'beaked', 'identity', 'invariance')
ASZ_MODES = ('profile', 'limit-c')


def parse_dimensions(value):
    """``'3'``, ``'2,3'`` or ``'2..6'`` to a sorted tuple of dimensions."""
    value = str(value).strip()
    if '..' in value:
        lo, hi = (int(part) for part in value.split('..', 1))
        dims = range(lo, hi + 1)
    else:
        dims = (int(part) for part in value.split(','))
    dims = tuple(sorted(set(dims)))
    if not dims:
        raise ValueError('empty dimension list')
    return dims


def parse_grid(value):
    """``'lo:hi:count'`` to a tuple; a single number is a one-point grid."""
    parts = str(value).split(':')
    if len(parts) == 1:
        return (float(parts[0]), float(parts[0]), 1)
    if len(parts) != 3:
        raise ValueError('expected lo:hi:count')
    return (float(parts[0]), float(parts[1]), int(parts[2]))


class ScheduleSerializer(serializers.Serializer):
    t0 = serializers.FloatField(min_value=1.0)
    q = serializers.FloatField(min_value=0.0, max_value=1.0)
    count = serializers.IntegerField(min_value=4)


class RunConfigSerializer(serializers.Serializer):
    """
    Serializer for one command invocation.

    Fields:
        command (str): ``verify``, ``sweep`` or ``asz``
        suite (str): Verification suite (verify only)
        mode (str): ``profile`` or ``limit-c`` (asz only)
        domain (dict): Domain mapping, see ``geometry.serializers``
        n (str): Dimension, list or range such as ``2..6``
        a (float): Spheroid semi-axis along x_1
        eps (str): Beak parameter or ``lo:hi:count`` geometric grid
        m (int): Cap exponent of the beaked sphere
        level (int): Production mesh level override
        x0 (list): Interior reference point
        tol (float): Verification tolerance override
        schedule (dict): Approach schedule ``t0, q, count``
        out (str): Output directory
        deterministic (bool): Exactly rounded facet sums
        seed (int): Seed for sampled checks
        export_mesh (bool): Also write the mesh of ``domain`` (verify only)

    Validation:
        - Every tolerance is positive
        - Sweep grids are increasing and have at least four points
        - The output directory exists (it is created) and is writable
    """

    command = serializers.ChoiceField(choices=('verify', 'sweep', 'asz'))
    suite = serializers.ChoiceField(choices=SUITES, required=False)
    mode = serializers.ChoiceField(choices=ASZ_MODES, default='profile')
    domain = serializers.DictField(required=False)
    n = serializers.CharField(required=False, help_text='Dimension, list or range such as 2..6')
    a = serializers.FloatField(required=False, min_value=0.0)
    eps = serializers.CharField(required=False, help_text='eps or lo:hi:count')
    m = serializers.IntegerField(required=False)
    level = serializers.IntegerField(required=False, min_value=0)
    x0 = serializers.ListField(child=serializers.FloatField(), required=False)
    tol = serializers.FloatField(required=False)
    schedule = ScheduleSerializer(required=False)
    out = serializers.CharField(required=False)
    deterministic = serializers.BooleanField(required=False)
    seed = serializers.IntegerField(required=False)
    export_mesh = serializers.BooleanField(required=False)

    def validate_n(self, value):
        try:
            dims = parse_dimensions(value)
        except ValueError as exc:
            raise serializers.ValidationError(f'not a dimension list: {exc}')
        if dims[0] < 2:
            raise serializers.ValidationError('dimensions start at 2')
        return dims

    def validate_eps(self, value):
        try:
            lo, hi, count = parse_grid(value)
        except ValueError as exc:
            raise serializers.ValidationError(f'not an eps grid: {exc}')
        if lo <= 0 or hi < lo:
            raise serializers.ValidationError('eps grid must satisfy 0 < lo <= hi')
        if count < 1:
            raise serializers.ValidationError('eps grid is empty')
        return (lo, hi, count)

    def validate_tol(self, value):
        if value <= 0:
            raise serializers.ValidationError('tolerances must be positive')
        return value

    def validate_domain(self, value):
        serializer = DomainSpecSerializer(data=value)
        if not serializer.is_valid():
            raise serializers.ValidationError(serializer.errors)
        return serializer.validated_data['spec']

    def validate_out(self, value):
        path = Path(value)
        try:
            os.makedirs(path, exist_ok=True)
        except OSError as exc:
            raise serializers.ValidationError(f'cannot create {path}: {exc.strerror}')
        if not os.access(path, os.W_OK):
            raise serializers.ValidationError(f'{path} is not writable')
        return path

    def validate(self, attrs):
        command = attrs['command']
        if command == 'verify' and 'suite' not in attrs:
            raise serializers.ValidationError({'suite': 'verify needs a suite'})
        if attrs.get('export_mesh') and 'domain' not in attrs:
            raise serializers.ValidationError({'export_mesh': 'mesh export needs a domain'})
        if command == 'sweep':
            lo, hi, count = attrs.get('eps', get_default('SWEEP_EPS'))
            if count < 4 or hi <= lo:
                raise serializers.ValidationError({'eps': 'a sweep needs an increasing grid of at least four points'})
            attrs['eps'] = (lo, hi, count)
        attrs.setdefault('out', Path(get_default('OUTPUT_DIR')) / command)
        attrs.setdefault('deterministic', get_default('DETERMINISTIC'))
        attrs.setdefault('seed', get_default('SEED'))
        return attrs


def load_config_file(path):
    """Read a JSON config file; ``ValidationError`` names ``config`` on failure."""
    try:
        with open(path, encoding='utf-8') as handle:
            data = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise serializers.ValidationError({'config': str(exc)})
    if not isinstance(data, dict):
        raise serializers.ValidationError({'config': 'the config file must hold a JSON object'})
    return data


def build_run_config(command, options):
    """Merge the config file and the non-empty command-line options, then validate."""
    data = {}
    if options.get('config'):
        data.update(load_config_file(options['config']))
    for key in RunConfigSerializer().fields:
        value = options.get(key)
        if value is not None and value is not False:
            data[key] = value
    if isinstance(data.get('domain'), str):
        try:
            data['domain'] = json.loads(data['domain'])
        except json.JSONDecodeError as exc:
            raise serializers.ValidationError({'domain': f'not JSON: {exc}'})
    data['command'] = command
    serializer = RunConfigSerializer(data=data)
    serializer.is_valid(raise_exception=True)
    return serializer.validated_data


def run_settings(config):
    """``override_settings`` applying the run-level switches to ``POTLAB``."""
    table = dict(settings.POTLAB)
    table['DETERMINISTIC'] = config['deterministic']
    table['SEED'] = config['seed']
    if 'level' in config:
        table['PRODUCTION_LEVEL'] = {n: config['level'] for n in table['PRODUCTION_LEVEL']}
    if 'schedule' in config:
        table['SCHEDULE'] = dict(config['schedule'])
    return override_settings(POTLAB=table)
