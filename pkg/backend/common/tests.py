import csv
import json
import math
import tempfile
import threading
from pathlib import Path

from django.test import SimpleTestCase, override_settings

from gaps.estimators import GapEstimate
from geometry.domains import Ball
from geometry.meshing import mesh_boundary

from .defaults import get_default, level_default
from .exceptions import NonFiniteValueError, ParameterError, PotlabError, SingularityError
from .export import export_mesh_csv, format_value, write_csv, write_json
from .parallel import ordered_map
from .reports import combine, compare
from .serializers import GapEstimateSerializer, VerificationReportSerializer, render_json


class ExceptionTests(SimpleTestCase):
    def test_codes_and_messages(self):
        error = SingularityError('pole on the sphere')
        self.assertEqual(error.code, 'singularity')
        self.assertEqual(str(error), '[singularity] pole on the sphere')
        self.assertEqual(PotlabError().detail, 'PotLab error.')

    def test_parameter_error_is_value_error(self):
        with self.assertRaises(ValueError):
            raise ParameterError('eps out of range')

    def test_non_finite_names_facet(self):
        error = NonFiniteValueError(facet=17)
        self.assertEqual(error.facet, 17)
        self.assertIn('facet 17', str(error))


class ReportTests(SimpleTestCase):
    def test_greater_equal(self):
        report = compare('check', 2.0, 1.5, 1e-3)
        self.assertTrue(report.passed)
        self.assertAlmostEqual(report.margin, 0.5)

        report = compare('check', 1.0, 1.5, 0.1)
        self.assertFalse(report.passed)
        self.assertTrue(report.failed)

    def test_tolerance_absorbs_small_violation(self):
        self.assertTrue(compare('check', 1.0, 1.0005, 1e-3).passed)
        self.assertTrue(compare('check', 1.0005, 1.0, 1e-3, relation='<=').passed)

    def test_equality_margin_is_non_positive(self):
        report = compare('check', 1.0, 1.25, 0.5, relation='==')
        self.assertEqual(report.margin, -0.25)
        self.assertTrue(report.passed)

    def test_infinite_sides(self):
        self.assertTrue(compare('check', math.inf, 1.0, 1e-3).passed)
        self.assertTrue(compare('check', math.inf, math.inf, 1e-3).passed)
        self.assertFalse(compare('check', math.nan, 1.0, 1e-3).passed)

    def test_flags_fail_the_report(self):
        report = compare('check', 2.0, 1.0, 1e-3, flags=('quadrature-not-converged', 'quadrature-not-converged'))
        self.assertFalse(report.passed)
        self.assertEqual(report.flags, ('quadrature-not-converged',))

    def test_unknown_relation(self):
        with self.assertRaises(ValueError):
            compare('check', 1.0, 1.0, 1e-3, relation='<')

    def test_combine(self):
        good = compare('good', 2.0, 1.0, 1e-3)
        bad = compare('bad', 0.5, 1.0, 1e-3)
        merged = combine('both', [good, bad], details={'points': 3})
        self.assertFalse(merged.passed)
        self.assertEqual(merged.margin, bad.margin)
        self.assertEqual(merged.provenance['parts'], ['good', 'bad'])
        self.assertEqual(merged.details['points'], 3)
        self.assertTrue(merged.details['good']['passed'])
        self.assertTrue(combine('one', [good]).passed)


class SerializerTests(SimpleTestCase):
    def test_report_sentinels(self):
        report = compare('thm12', math.inf, 0.25, 1e-3, details={'h_star': math.inf, 'spread': math.nan})
        data = VerificationReportSerializer(report).data
        self.assertEqual(data['lhs'], 'Infinity')
        self.assertEqual(data['details']['h_star'], 'Infinity')
        self.assertIsNone(data['details']['spread'])
        self.assertEqual(json.loads(render_json(data))['margin'], 'Infinity')

    def test_gap_estimate_samples(self):
        gap = GapEstimate(samples=((1.2, 0.5), (1.1, 0.25)), extrapolated=0.0, converged=True, method='richardson')
        data = GapEstimateSerializer(gap).data
        self.assertEqual([dict(sample) for sample in data['samples']], [{'t': 1.2, 'value': 0.5}, {'t': 1.1, 'value': 0.25}])
        self.assertIsNone(data['z'])
        self.assertEqual(data['flags'], [])


class ExportTests(SimpleTestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.out = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def test_format_value(self):
        self.assertEqual(format_value(0.1), '0.10000000000000001')
        self.assertEqual(format_value(3), '3')
        self.assertEqual(format_value(True), 'true')
        self.assertEqual(format_value(None), '')
        self.assertEqual(format_value('sigma'), 'sigma')

    def test_csv_is_reproducible(self):
        rows = [(0.02, 1.0 / 3.0, None), (0.2, 2.0, 5)]
        first = write_csv(self.out / 'a' / 'sweep.csv', ('eps', 'K_hat', 'I1'), rows)
        second = write_csv(self.out / 'b' / 'sweep.csv', ('eps', 'K_hat', 'I1'), rows)
        self.assertEqual(first.read_bytes(), second.read_bytes())
        self.assertEqual(first.read_text(encoding='utf-8').splitlines()[1], '0.02,0.33333333333333331,')

    def test_json(self):
        path = write_json(self.out / 'report.json', {'value': math.inf, 'levels': (0, 1)})
        self.assertEqual(json.loads(path.read_text()), {'value': 'Infinity', 'levels': [0, 1]})

    def test_mesh_export(self):
        mesh = mesh_boundary(Ball(3), 0)
        path = export_mesh_csv(mesh, self.out / 'mesh.csv')
        with open(path, encoding='utf-8') as handle:
            rows = list(csv.reader(handle))
        self.assertEqual(rows[0], ['piece', 'cx', 'cy', 'cz', 'area', 'nx', 'ny', 'nz'])
        self.assertEqual(len(rows), mesh.size + 1)
        self.assertAlmostEqual(sum(float(row[4]) for row in rows[1:]), mesh.total_area, places=12)


class DefaultsTests(SimpleTestCase):
    def test_lookup(self):
        self.assertEqual(get_default('SCHEDULE'), {'t0': 1.2, 'q': 0.5, 'count': 8})
        self.assertEqual(get_default('NO_SUCH_KEY', 7), 7)
        with self.assertRaises(KeyError):
            get_default('NO_SUCH_KEY')

    def test_level_table_falls_back_to_three_dimensions(self):
        self.assertEqual(level_default('PRODUCTION_LEVEL', 2), 4)
        self.assertEqual(level_default('PRODUCTION_LEVEL', 4), level_default('PRODUCTION_LEVEL', 3))

    @override_settings(POTLAB={'QUAD_TOL': 1e-9})
    def test_override(self):
        self.assertEqual(get_default('QUAD_TOL'), 1e-9)


class ParallelTests(SimpleTestCase):
    def test_order_is_preserved(self):
        items = list(range(20))
        self.assertEqual(ordered_map(lambda x: x * x, items, workers=4), [x * x for x in items])

    def test_serial_runs_in_calling_thread(self):
        caller = threading.get_ident()
        self.assertEqual(ordered_map(lambda _: threading.get_ident(), range(3), workers=1), [caller] * 3)

    @override_settings(POTLAB={'WORKERS': 3})
    def test_workers_from_settings(self):
        threads = ordered_map(lambda _: threading.get_ident(), range(30))
        self.assertEqual(len(threads), 30)
