import math

import numpy as np
from django.conf import settings
from django.test import SimpleTestCase, override_settings

from common.defaults import get_default
from common.exceptions import InvalidPoleError, ParameterError, PreconditionError, SingularityError
from geometry.domains import Ball, BeakedSphere, Spheroid
from geometry.measures import TouchingPoint, deficit_quantities
from kernels.functions import ConeU, FundamentalSolution, KuranK

from .estimators import (
    EMPTY_TOUCHING_SET,
    L_of_z,
    Lstar_of_z,
    default_dictionary,
    extrapolate_tail,
    function_label,
    gauss_gap_lower,
    hstar,
    kuran_gap,
    sample_kuran_means,
)
from .schedules import ApproachSchedule
from .verification import (
    closeness_bounds,
    pseudosphere_verdict,
    verify_cor13,
    verify_prop32,
    verify_thm12,
)

SHORT = ApproachSchedule(t0=1.2, q=0.5, count=5)


def rotation_2d(angle):
    c, s = math.cos(angle), math.sin(angle)
    return ((c, -s), (s, c))


class ScheduleTests(SimpleTestCase):
    def test_factors_decrease_to_one(self):
        factors = ApproachSchedule().factors
        self.assertEqual(len(factors), 8)
        self.assertAlmostEqual(factors[0], 1.2)
        self.assertTrue(np.all(np.diff(factors) < 0))
        self.assertTrue(np.all(factors > 1))

    def test_parameter_errors(self):
        with self.assertRaises(PreconditionError):
            ApproachSchedule(count=3)
        with self.assertRaises(ParameterError):
            ApproachSchedule(t0=1.0)
        with self.assertRaises(ParameterError):
            ApproachSchedule(q=1.5)

    def test_unbound_schedule_has_no_poles(self):
        with self.assertRaises(PreconditionError):
            ApproachSchedule().poles()

    def test_poles_are_radial(self):
        poles = SHORT.toward((0.0, 0.0), (0.0, 2.0)).poles()
        np.testing.assert_allclose(poles[:, 0], 0.0)
        np.testing.assert_allclose(poles[:, 1], 2.0 * SHORT.factors)

    def test_interior_pole_refused(self):
        schedule = SHORT.toward((0.0, 0.0), (0.5, 0.0))
        with self.assertRaises(InvalidPoleError):
            schedule.check_exterior(Ball(2))

    def test_degenerate_schedule_refused_before_sampling(self):
        with self.assertRaises(PreconditionError):
            Lstar_of_z(Ball(2), (0.0, 0.0), (1.0, 0.0), ApproachSchedule(count=2))


class ExtrapolationTests(SimpleTestCase):
    def test_linear_approach(self):
        factors = ApproachSchedule().factors
        values = 0.3 + 0.2 * (factors - 1.0)
        extrapolated, converged, method = extrapolate_tail(factors, values, 2.0, 'min')
        self.assertAlmostEqual(extrapolated, 0.3, places=12)
        self.assertTrue(converged)
        self.assertEqual(method, 'richardson')

    def test_oscillating_tail_falls_back(self):
        factors = ApproachSchedule(count=6).factors
        values = [0.5, 0.3, 0.6, 0.2, 0.7, 0.1]
        extrapolated, converged, method = extrapolate_tail(factors, values, 2.0, 'min')
        self.assertEqual(method, 'tail-min')
        self.assertEqual(extrapolated, 0.1)
        self.assertFalse(converged)
        self.assertEqual(extrapolate_tail(factors, values, 2.0, 'max')[0], 0.7)

    def test_small_tail_is_judged_against_its_scale(self):
        factors = [1.2, 1.1, 1.05, 1.025]
        values = [1e-5, 3e-4, 9e-4, 1.2e-4]
        extrapolated, converged, method = extrapolate_tail(factors, values, 0.5, 'min', floor=0.0, scale=1e-3)
        self.assertFalse(converged)
        self.assertEqual(method, 'richardson')
        self.assertGreaterEqual(extrapolated, 0.0)

    def test_small_oscillation_falls_back_at_its_scale(self):
        factors = ApproachSchedule(count=5).factors
        values = [2e-4, 1e-4, 3e-4, 1e-4, 3e-4]
        self.assertEqual(extrapolate_tail(factors, values, 2.0, 'min')[2], 'richardson')
        extrapolated, converged, method = extrapolate_tail(factors, values, 2.0, 'min', scale=1e-4)
        self.assertEqual(method, 'tail-min')
        self.assertEqual(extrapolated, 1e-4)
        self.assertFalse(converged)

    def test_scale_must_be_positive(self):
        with self.assertRaises(ParameterError):
            extrapolate_tail([1.2, 1.1, 1.05, 1.025], [1.0, 1.0, 1.0, 1.0], 2.0, 'min', scale=0.0)

    def test_estimate_tolerance_carries_the_scale(self):
        spec = Spheroid(2, semi_axes=(1.1, 1.0))
        estimate = L_of_z(spec, (0.0, 0.0), (0.0, 1.0), SHORT, scale=1e-2)
        self.assertAlmostEqual(estimate.tolerance, get_default('GAP_TOL') * 1e-2)
        self.assertEqual(estimate.extrapolated, L_of_z(spec, (0.0, 0.0), (0.0, 1.0), SHORT).extrapolated)


class SampleCacheTests(SimpleTestCase):
    def test_mesh_settings_are_part_of_the_key(self):
        args = (Ball(2), (0.0, 0.0), (1.0, 0.0), SHORT)
        first = sample_kuran_means(*args)
        self.assertIs(sample_kuran_means(*args), first)
        with override_settings(POTLAB={**settings.POTLAB, 'MESH_BASE_ARCS_2D': 32}):
            coarse = sample_kuran_means(*args)
        self.assertIsNot(coarse, first)
        self.assertIs(sample_kuran_means(*args), first)


class BallGapTests(SimpleTestCase):
    def test_kuran_gap_of_disc(self):
        gap = kuran_gap(Ball(2))
        self.assertLess(gap.extrapolated, 1e-3)
        self.assertTrue(gap.converged)
        self.assertEqual(len(gap.samples), 8)

    def test_hstar_of_disc(self):
        self.assertAlmostEqual(hstar(Ball(2)).extrapolated, 1.0, delta=1e-2)

    def test_unit_ball_in_three_dimensions(self):
        ball = Ball(3)
        gap = kuran_gap(ball)
        self.assertLess(gap.extrapolated, 1e-3)
        self.assertEqual(gap.details['classes'], ['sphere'])
        self.assertAlmostEqual(hstar(ball).extrapolated, 1.0, delta=1e-2)

    def test_empty_touching_set_gives_sentinel(self):
        gap = kuran_gap(Ball(2), candidates=[])
        self.assertTrue(math.isinf(gap.extrapolated))
        self.assertEqual(gap.method, EMPTY_TOUCHING_SET)
        not_dini = [TouchingPoint((1.0, 0.0), dini_asserted=False)]
        self.assertTrue(math.isinf(hstar(Ball(2), candidates=not_dini).extrapolated))

    def test_gauss_lower_bound_vanishes(self):
        bound = gauss_gap_lower(Ball(2), tol=1e-7)
        self.assertLess(bound.value, 1e-4)
        self.assertTrue(any(label.startswith('kuran_k') for label in bound.ratios))

    def test_ball_verifications(self):
        ball = Ball(2, radius=1.5)
        self.assertTrue(verify_thm12(ball).passed)
        self.assertTrue(verify_cor13(ball).passed)
        self.assertTrue(verify_prop32(ball).passed)
        verdict = pseudosphere_verdict(ball)
        self.assertTrue(verdict.passed)
        self.assertEqual(verdict.details['verdict'], 'ball')


class DictionaryTests(SimpleTestCase):
    def test_empty_dictionary_refused(self):
        with self.assertRaises(ParameterError):
            gauss_gap_lower(Ball(2), dictionary=[])

    def test_interior_singularity_refused(self):
        with self.assertRaises(SingularityError):
            gauss_gap_lower(Ball(2), dictionary=[FundamentalSolution((0.5, 0.0))])

    def test_default_dictionary_singularities_are_exterior(self):
        spec = Spheroid(2, semi_axes=(1.2, 1.0))
        for fn in default_dictionary(spec):
            singular = fn.singular_points()
            if len(singular):
                self.assertFalse(spec.closure_contains(singular).any(), msg=fn)


class SpheroidGapTests(SimpleTestCase):
    def test_L_exceeds_deficit_ratio(self):
        spec = Spheroid(2, semi_axes=(1.1, 1.0))
        estimate = L_of_z(spec, (0.0, 0.0), (0.0, 1.0))
        self.assertTrue(estimate.converged)
        self.assertLessEqual(estimate.tail_difference, estimate.tolerance)
        self.assertGreater(estimate.extrapolated, deficit_quantities(spec).deficit_ratio - 1e-3)

    def test_Lstar_is_finite(self):
        estimate = Lstar_of_z(Spheroid(2, semi_axes=(1.2, 1.0)), (0.0, 0.0), (0.0, 1.0))
        self.assertTrue(estimate.converged)
        self.assertTrue(math.isfinite(estimate.extrapolated))
        self.assertGreater(estimate.extrapolated, 0.5)

    def test_thm12_family(self):
        for a in (1.05, 1.1, 1.2):
            report = verify_thm12(Spheroid(2, semi_axes=(a, 1.0)))
            self.assertTrue(report.passed, msg=f'a={a}: {report}')
            self.assertGreater(report.rhs, 0.0)

    def test_cor13(self):
        report = verify_cor13(Spheroid(2, semi_axes=(1.2, 1.0)))
        self.assertTrue(report.passed, msg=report)

    def test_three_dimensional_spheroid(self):
        spec = Spheroid(3, semi_axes=(1.1, 1.0, 1.0))
        thm12 = verify_thm12(spec)
        self.assertTrue(thm12.passed, msg=thm12)
        self.assertTrue(verify_cor13(spec).passed)

    def test_prop32(self):
        report = verify_prop32(Spheroid(2, semi_axes=(1.1, 1.0)))
        self.assertTrue(report.passed, msg=report)
        self.assertTrue(math.isfinite(report.details['h_star']))

    def test_kuran_dictionary_bound(self):
        spec = Spheroid(2, semi_axes=(1.2, 1.0))
        dictionary = [KuranK((0.0, t)) for t in (1.01, 1.05)]
        bound = gauss_gap_lower(spec, dictionary=dictionary)
        L = L_of_z(spec, (0.0, 0.0), (0.0, 1.0))
        L_star = Lstar_of_z(spec, (0.0, 0.0), (0.0, 1.0))
        self.assertGreaterEqual(bound.value, L.extrapolated / (1.0 + L_star.extrapolated) - 1e-2)

    def test_closeness_and_verdict(self):
        spec = Spheroid(2, semi_axes=(1.2, 1.0))
        self.assertTrue(closeness_bounds(spec, K=1.0).passed)
        self.assertFalse(closeness_bounds(spec, K=0.0).passed)
        verdict = pseudosphere_verdict(spec)
        self.assertFalse(verdict.passed)
        self.assertEqual(verdict.details['verdict'], 'not a pseudosphere')


class InvarianceTests(SimpleTestCase):
    spec = Spheroid(2, semi_axes=(1.2, 1.0))

    def transforms(self):
        x0 = np.zeros(2)
        rotation = rotation_2d(0.3)
        shift = np.array([0.4, -1.7])
        return [
            (self.spec.translated(shift), x0 + shift),
            (self.spec.rotated(rotation), np.asarray(rotation) @ x0),
            (self.spec.dilated(2.5), 2.5 * x0),
        ]

    def test_kuran_gap_and_hstar(self):
        gap = kuran_gap(self.spec, schedule=SHORT).extrapolated
        h = hstar(self.spec, schedule=SHORT).extrapolated
        for moved, x0 in self.transforms():
            self.assertAlmostEqual(kuran_gap(moved, x0, schedule=SHORT).extrapolated, gap, delta=1e-6, msg=moved)
            self.assertAlmostEqual(hstar(moved, x0, schedule=SHORT).extrapolated, h, delta=1e-6, msg=moved)

    def test_gauss_lower_bound(self):
        base = gauss_gap_lower(self.spec, dictionary=default_dictionary(self.spec, schedule=SHORT))
        for moved, x0 in self.transforms():
            bound = gauss_gap_lower(moved, x0, dictionary=default_dictionary(moved, x0, schedule=SHORT))
            self.assertAlmostEqual(bound.value, base.value, delta=1e-6, msg=moved)


class BeakedGapTests(SimpleTestCase):
    spec = BeakedSphere(2, eps=0.2, m=3)

    def test_thm12_and_cor13(self):
        thm12 = verify_thm12(self.spec)
        self.assertTrue(thm12.passed, msg=thm12)
        self.assertGreater(thm12.rhs, 0.0)
        self.assertTrue(verify_cor13(self.spec).passed)

    def test_prop32(self):
        report = verify_prop32(self.spec)
        self.assertTrue(report.passed, msg=report)
        self.assertTrue(math.isfinite(report.details['h_star']))

    def test_cone_function_in_default_dictionary(self):
        labels = [function_label(fn) for fn in default_dictionary(self.spec)]
        self.assertTrue(any(label.startswith('cone_u@') for label in labels), msg=labels)

    def test_gauss_lower_bound_from_cone_function(self):
        from beaked.sweeps import gauss_ratio

        bound = gauss_gap_lower(self.spec, dictionary=[ConeU(2, apex=tuple(self.spec.apex))])
        self.assertTrue(bound.converged, msg=bound.flags)
        self.assertTrue(bound.maximizer.startswith('cone_u'))
        self.assertGreaterEqual(bound.value, get_default('GAUSS_RATIO_FLOOR'))
        self.assertAlmostEqual(bound.value, gauss_ratio(0.2, m=3, n=2).ratio, delta=1e-2)
        self.assertGreater(bound.value, deficit_quantities(self.spec).deficit_ratio)
