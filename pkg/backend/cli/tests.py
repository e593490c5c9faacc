import csv
import json
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from beaked.sweeps import SWEEP_HEADER
from geometry.domains import Ball

from .config import RunConfigSerializer, parse_dimensions, parse_grid
from .suites import plane_rotation, spheroid_family


class ConfigTests(SimpleTestCase):
    def test_dimension_lists(self):
        self.assertEqual(parse_dimensions('2..6'), (2, 3, 4, 5, 6))
        self.assertEqual(parse_dimensions('3,2'), (2, 3))
        self.assertEqual(parse_dimensions(3), (3,))

    def test_grids(self):
        self.assertEqual(parse_grid('0.02:0.2:6'), (0.02, 0.2, 6))
        self.assertEqual(parse_grid('0.1'), (0.1, 0.1, 1))
        with self.assertRaises(ValueError):
            parse_grid('0.1:0.2')

    def test_valid_config(self):
        with tempfile.TemporaryDirectory() as tmp:
            serializer = RunConfigSerializer(
                data={'command': 'verify', 'suite': 'ball', 'n': '2', 'domain': {'kind': 'ball', 'n': 2}, 'out': tmp}
            )
            self.assertTrue(serializer.is_valid(), serializer.errors)
            self.assertEqual(serializer.validated_data['n'], (2,))
            self.assertIsInstance(serializer.validated_data['domain'], Ball)
            self.assertEqual(serializer.validated_data['out'], Path(tmp))

    def test_errors_name_the_key(self):
        cases = [
            ({'command': 'verify'}, 'suite'),
            ({'command': 'verify', 'suite': 'ball', 'tol': -1.0}, 'tol'),
            ({'command': 'verify', 'suite': 'ball', 'n': 'two'}, 'n'),
            ({'command': 'sweep', 'eps': '0.02:0.2:3'}, 'eps'),
            ({'command': 'asz', 'domain': {'kind': 'cube', 'n': 2}}, 'domain'),
            ({'command': 'verify', 'suite': 'ball', 'schedule': {'t0': 1.2, 'q': 0.5, 'count': 2}}, 'schedule'),
        ]
        for data, key in cases:
            serializer = RunConfigSerializer(data=data)
            self.assertFalse(serializer.is_valid(), msg=data)
            self.assertIn(key, serializer.errors, msg=data)

    def test_plane_rotation_is_orthogonal(self):
        rotation = plane_rotation(3, 0.3)
        np.testing.assert_allclose(rotation @ rotation.T, np.eye(3), atol=1e-15)

    def test_spheroid_family_defaults(self):
        specs = spheroid_family({})
        self.assertEqual([(s.n, s.semi_axes[0]) for s in specs], [(2, 1.05), (2, 1.1), (2, 1.2), (3, 1.1)])
        specs = spheroid_family({'a': 1.3, 'n': (2,)})
        self.assertEqual([(s.n, s.semi_axes) for s in specs], [(2, (1.3, 1.0))])


class CommandTests(SimpleTestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.out = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def call(self, *args, **options):
        stdout = StringIO()
        call_command(*args, stdout=stdout, out=str(self.out), **options)
        return stdout.getvalue()

    def test_identity_suite_passes(self):
        output = self.call('verify', suite='identity', n='2..6')
        self.assertIn('all 5 check(s) passed', output)
        report = json.loads((self.out / 'identity' / 'sphere_ratio[n=4].json').read_text())
        self.assertTrue(report['passed'])
        self.assertIn('margin', report)

    def test_config_file(self):
        path = self.out / 'run.json'
        path.write_text(json.dumps({'suite': 'identity', 'n': '2,3'}))
        output = self.call('verify', config=str(path))
        self.assertIn('all 2 check(s) passed', output)

    def test_ball_suite_passes(self):
        output = self.call('verify', suite='ball', domain='{"kind": "ball", "n": 2}', export_mesh=True)
        self.assertIn('passed', output)
        report = json.loads((self.out / 'ball' / 'poisson_mass[ball,n=2].json').read_text())
        self.assertTrue(report['passed'])
        self.assertIn('levels_used', report['details']['integral'])
        with open(self.out / 'ball' / 'mesh_ball_n2.csv', encoding='utf-8') as handle:
            rows = list(csv.reader(handle))
        self.assertEqual(rows[0], ['piece', 'cx', 'cy', 'area', 'nx', 'ny'])
        self.assertEqual(len(rows), 1 + 64 * 2 ** 4)

    def test_mesh_export_needs_domain(self):
        with self.assertRaises(CommandError) as caught:
            self.call('verify', suite='ball', export_mesh=True)
        self.assertEqual(caught.exception.returncode, 2)
        self.assertIn('export_mesh', str(caught.exception))

    def test_usage_errors_exit_with_two(self):
        for options in (
            {'command_name': 'verify'},
            {'command_name': 'verify', 'suite': 'ball', 'tol': -1.0},
            {'command_name': 'verify', 'suite': 'ball', 'domain': '{"kind": "cube", "n": 2}'},
            {'command_name': 'verify', 'suite': 'ball', 'domain': 'not json'},
            {'command_name': 'sweep', 'eps': '0.2:0.02:6'},
            {'command_name': 'sweep', 'eps': '0.02:0.2:0'},
        ):
            options = dict(options)
            with self.assertRaises(CommandError, msg=options) as caught:
                self.call(options.pop('command_name'), **options)
            self.assertEqual(caught.exception.returncode, 2)

    def test_parameter_error_exits_with_two(self):
        with self.assertRaises(CommandError) as caught:
            self.call('verify', suite='beaked', eps='0.3')
        self.assertEqual(caught.exception.returncode, 2)
        self.assertIn('parameter', str(caught.exception))

    def test_failed_check_exits_with_one(self):
        with self.assertRaises(CommandError) as caught:
            self.call('asz', mode='limit-c', n='2', tol=1e-15)
        self.assertEqual(caught.exception.returncode, 1)

    def test_asz_profile_writes_csv(self):
        output = self.call('asz', n='2')
        self.assertIn('ratio constant', output)
        with open(self.out / 'profile_ball_n2.csv', encoding='utf-8') as handle:
            rows = list(csv.reader(handle))
        self.assertEqual(rows[0], ['y1', 'y2', 'potential', 'ratio'])
        self.assertEqual(len(rows), 17)

    def test_asz_spheroid_is_non_constant(self):
        output = self.call('asz', domain='{"kind": "spheroid", "n": 2, "semi_axes": [1.2, 1.0]}')
        self.assertIn('ratio non-constant', output)

    def test_sweep_writes_table_and_summary(self):
        output = self.call('sweep', n='2', m=3, eps='0.02:0.2:6')
        self.assertIn('n=2 m=3', output)
        with open(self.out / 'sweep_n2_m3.csv', encoding='utf-8') as handle:
            rows = list(csv.reader(handle))
        self.assertEqual(rows[0], ['eps', 'K_hat', 'gauss_ratio', 'area_deficit', 'I1', 'I2', 'I3', 'slope_running'])
        self.assertEqual(tuple(rows[0]), SWEEP_HEADER)
        self.assertEqual(len(rows), 7)
        self.assertEqual(rows[1][-1], '')
        summary = json.loads((self.out / 'sweep_n2_m3.json').read_text())
        self.assertIsInstance(summary['passed'], bool)
        for key in ('kuran_slope', 'kuran_asymptotic_slope', 'area_slope', 'area_asymptotic_slope', 'alpha0'):
            self.assertIn(key, summary['details'])
        self.assertAlmostEqual(summary['details']['area_slope'], 1.0, delta=0.1)
