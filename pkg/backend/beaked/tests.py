import math

import numpy as np
from django.test import SimpleTestCase

from common.exceptions import ParameterError, UnsupportedDimensionError
from geometry.domains import BeakedSphere
from geometry.measures import deficit_quantities, inradius_touching

from .construction import build_beaked, containment_check, limit_constants
from .sweeps import (
    I_decomposition,
    area_deficit_sweep,
    exponent_fit,
    exponent_report,
    gauss_ratio,
    kuran_point,
    kuran_sweep,
    piece_route_limit,
    run_sweep,
    sweep_grid,
)


class ConstructionTests(SimpleTestCase):
    def test_limit_constants(self):
        two = limit_constants(2)
        self.assertAlmostEqual(two['alpha0'], 2 * math.sqrt(2) - 2)
        three = limit_constants(3)
        self.assertAlmostEqual(three['alpha0'], math.pi * math.sqrt(6) - 2 * math.pi)
        self.assertGreater(three['alpha0'], 0.0)
        with self.assertRaises(ParameterError):
            limit_constants(4)

    def test_parameter_validation(self):
        with self.assertRaises(ParameterError):
            build_beaked(0.3)
        with self.assertRaises(ParameterError):
            build_beaked(0.1, m=2, n=2)
        with self.assertRaises(ParameterError):
            build_beaked(0.1, m=4.5, n=3)
        with self.assertRaises(UnsupportedDimensionError):
            BeakedSphere(4, eps=0.1)

    def test_mesh_matches_analytic_pieces(self):
        for eps, m, n in ((0.1, 4, 3), (0.1, 3, 2), (0.2, 5, 2)):
            _, pieces = build_beaked(eps, m, n)
            for label, mismatch in pieces.mismatch.items():
                self.assertLess(mismatch, 5e-3, msg=f'{label} at eps={eps}, n={n}')

    def test_boundary_area_is_sum_of_pieces(self):
        spec, pieces = build_beaked(0.1, 4, 3)
        areas = pieces.analytic_areas
        expected = areas['sphere'] - areas['sigma'] + areas['sigma_star'] + areas['cone_side']
        self.assertAlmostEqual(pieces.boundary_area, expected, places=12)
        self.assertAlmostEqual(spec.boundary_area(), expected, places=12)
        self.assertAlmostEqual(pieces.area_deficit, expected - 4 * math.pi, places=12)

    def test_cap_scales_exactly(self):
        for n, m in ((2, 3), (3, 4), (3, 6)):
            star0 = limit_constants(n)['Sigma_star0']
            for eps in (0.02, 0.07, 0.15):
                star = BeakedSphere(n, eps=eps, m=m).piece_areas()['sigma_star']
                self.assertAlmostEqual(star / eps ** (m * (n - 1)) / star0, 1.0, delta=1e-12)

    def test_recentered_inradius(self):
        spec, pieces = build_beaked(0.1, n=3, recentered=True)
        np.testing.assert_allclose(pieces.x_eps, 0.0)
        r, candidates = inradius_touching(spec, np.zeros(3))
        self.assertEqual(r, 1.0)
        np.testing.assert_allclose(candidates[0].point, [1.0, 0.0, 0.0])
        self.assertGreater(deficit_quantities(spec, np.zeros(3)).deficit_ratio, 0.0)

    def test_containment(self):
        for eps, n in ((0.05, 2), (0.2, 2), (0.1, 3), (0.2, 3)):
            result = containment_check(eps, n=n, samples=4000)
            self.assertTrue(result.passed, msg=f'eps={eps}, n={n}: {result}')
            self.assertEqual(result.samples, 4000)


class ExponentFitTests(SimpleTestCase):
    def test_pure_power_law(self):
        eps = sweep_grid()
        fit = exponent_fit(eps, 3.0 * eps ** 2)
        self.assertAlmostEqual(fit.slope, 2.0, places=10)
        self.assertAlmostEqual(fit.asymptotic_slope, 2.0, places=10)
        self.assertEqual(len(fit.secants), len(eps) - 1)

    def test_first_order_correction_removed(self):
        eps = sweep_grid()
        fit = exponent_fit(eps, eps ** 2 * (1.0 + 2.0 * eps))
        self.assertGreater(fit.slope, 2.1)
        self.assertAlmostEqual(fit.asymptotic_slope, 2.0, delta=0.02)

    def test_report_judges_the_least_squares_exponent(self):
        eps = sweep_grid()
        fit = exponent_fit(eps, eps ** 2 * (1.0 + 2.0 * eps))
        report = exponent_report('area_exponent', fit, 2, 0.1)
        self.assertFalse(report.passed)
        self.assertEqual(report.lhs, fit.slope)
        self.assertEqual(report.details['asymptotic_slope'], fit.asymptotic_slope)
        self.assertTrue(report.details['asymptotic_passed'])
        self.assertTrue(exponent_report('area_exponent', exponent_fit(eps, 3.0 * eps ** 2), 2, 0.1).passed)

    def test_grid_validation(self):
        self.assertEqual(len(sweep_grid()), 6)
        self.assertAlmostEqual(sweep_grid()[0], 0.02)
        with self.assertRaises(ParameterError):
            sweep_grid(0.2, 0.02)


class AreaSweepTests(SimpleTestCase):
    def test_two_dimensional_exponent_and_constant(self):
        sweep = area_deficit_sweep(sweep_grid(), n=2)
        self.assertAlmostEqual(sweep.fit.slope, 1.0, delta=0.1)
        self.assertAlmostEqual(sweep.fit.asymptotic_slope, 1.0, delta=0.1)
        self.assertLess(sweep.alpha0_relative_error, 0.03)
        self.assertLess(sweep.star_spread, 1e-12)
        np.testing.assert_allclose(sweep.mesh_deficits, sweep.deficits, rtol=1e-9)

    def test_three_dimensional_exponent_and_constant(self):
        sweep = area_deficit_sweep(sweep_grid(0.01, 0.1, 6), m=4, n=3)
        self.assertAlmostEqual(sweep.fit.asymptotic_slope, 2.0, delta=0.1)
        self.assertGreater(sweep.fit.slope, sweep.fit.asymptotic_slope)
        self.assertLess(sweep.alpha0_relative_error, 0.03)
        self.assertTrue(all(d > 0 for d in sweep.deficits))

    def test_too_few_points_refused(self):
        with self.assertRaises(ParameterError):
            area_deficit_sweep([0.05, 0.1, 0.2])


class ConeFunctionTests(SimpleTestCase):
    def test_gauss_ratio_stays_bounded_below(self):
        large = gauss_ratio(0.2, n=2)
        small = gauss_ratio(0.05, n=2)
        for result in (large, small):
            self.assertGreaterEqual(result.ratio, 0.25)
            self.assertLessEqual(result.ratio, 1.0 + 1e-9)
            self.assertLess(result.ball_ratio, 1e-4)
            self.assertLess(result.control_ratio, result.ratio)
        self.assertGreaterEqual(small.ratio, 0.5 * large.ratio)
        self.assertLess(small.control_ratio, large.control_ratio)

    def test_scaled_numerator_is_bounded(self):
        c0 = limit_constants(2)['c0']
        for eps in (0.2, 0.05):
            result = gauss_ratio(eps, n=2)
            self.assertLess(result.scaled_numerator, 2.0 * c0)
            self.assertGreater(result.scaled_numerator, 0.1 * c0)

    def test_decomposition_two_dimensions(self):
        result = I_decomposition(0.1, m=3, n=2)
        self.assertAlmostEqual(result.I3_scaled / result.c0, 1.0, delta=0.02)
        self.assertTrue(result.bounded)
        self.assertLess(result.cone_max, 1e-10)
        self.assertLess(result.identity_residual, 1e-3)

    def test_decomposition_three_dimensions(self):
        result = I_decomposition(0.1, m=4, n=3)
        self.assertAlmostEqual(result.I3_scaled / result.c0, 1.0, delta=0.02)
        self.assertTrue(result.bounded)
        self.assertLess(result.cone_max, 1e-10)


class KuranSweepTests(SimpleTestCase):
    def test_piece_route_brackets(self):
        spec = BeakedSphere(2, eps=0.1, recentered=True)
        route = piece_route_limit(0.1, n=2)
        deficit = deficit_quantities(spec, np.zeros(2)).deficit_ratio
        self.assertGreaterEqual(route.limit, deficit)
        self.assertGreaterEqual(route.triangle_bound, route.limit)
        self.assertGreater(route.cone_integral, spec.piece_areas()['cone_side'])

    def test_two_dimensional_sweep(self):
        sweep = kuran_sweep(sweep_grid(), n=2)
        self.assertTrue(sweep.report.passed, msg=sweep.report)
        self.assertAlmostEqual(sweep.fit.asymptotic_slope, 1.0, delta=0.15)
        self.assertEqual(len(sweep.points), 6)
        self.assertEqual(sweep.m, 3)
        for point in sweep.points:
            self.assertGreater(point.K_hat, 0.0)
            self.assertGreater(point.alpha_star, 0.0)

    def test_three_dimensional_sweep(self):
        sweep = kuran_sweep(sweep_grid(0.05, 0.2, 3), m=4, n=3)
        self.assertEqual(sweep.m, 4)
        for point in sweep.points:
            self.assertTrue(point.converged, msg=point)
            self.assertGreater(point.K_hat, 0.0)
            self.assertTrue(sweep.report.details[f'thm12@{point.eps:.4g}']['passed'], msg=point)
        self.assertAlmostEqual(sweep.fit.slope, 2.0, delta=0.3)
        self.assertEqual(sweep.report.details['kuran_exponent']['lhs'], sweep.fit.slope)
        self.assertIn('asymptotic_passed', sweep.report.details)

    def test_point_tail_is_relative_to_the_deficit(self):
        point = kuran_point(0.05, n=2)
        self.assertTrue(point.converged, msg=point.flags)
        self.assertLess(point.K_hat, 0.1)
        self.assertGreater(point.K_hat / point.deficit_ratio, 1.0 - 1e-2)

    def test_sweep_table(self):
        table = run_sweep(sweep_grid(0.05, 0.2, 4), n=2)
        self.assertEqual(len(table.rows), 4)
        self.assertIsNone(table.rows[0][-1])
        self.assertTrue(all(row[-1] is not None for row in table.rows[1:]))
        self.assertIn('alpha0', table.summary.details)
        self.assertIn('gauss_floor', table.summary.details)
