import math

import numpy as np
from django.test import SimpleTestCase

from common.exceptions import DomainError, ParameterError, PreconditionError, SingularityError
from geometry.domains import Ball, BeakedSphere, Spheroid
from geometry.measures import analytic_boundary_area
from kernels.functions import FundamentalSolution

from .potentials import (
    asz_limit_c,
    exterior_sample,
    lemma51_check,
    potential_profile,
    profile_header,
    rigidity_discriminator,
    sample_directions,
    single_layer,
)


class SampleTests(SimpleTestCase):
    def test_directions_are_antipodal_units(self):
        for n, count in ((2, 16), (3, 64)):
            units = sample_directions(n, count)
            self.assertEqual(units.shape, (count, n))
            np.testing.assert_allclose(np.linalg.norm(units, axis=1), 1.0)
            np.testing.assert_allclose(units.sum(axis=0), 0.0, atol=1e-12)

    def test_odd_count_refused(self):
        with self.assertRaises(ParameterError):
            sample_directions(2, 7)

    def test_exterior_sample_clears_the_domain(self):
        spec = Spheroid(2, semi_axes=(1.2, 1.0))
        points = exterior_sample(spec)
        self.assertEqual(len(points), 16)
        self.assertFalse(spec.closure_contains(points).any())

    def test_profile_header(self):
        self.assertEqual(profile_header(3), ('y1', 'y2', 'y3', 'potential', 'ratio'))


class SingleLayerTests(SimpleTestCase):
    def test_unit_sphere(self):
        result = single_layer(Ball(3), (0.0, 0.0, 3.0), tol=1e-9)
        self.assertAlmostEqual(result.value, 1.0 / 3.0, places=7)

    def test_unit_circle(self):
        result = single_layer(Ball(2), (5.0, 0.0), tol=1e-9)
        self.assertAlmostEqual(result.value, -math.log(5.0), places=7)

    def test_spheroid_breaks_the_shell_identity(self):
        spec = Spheroid(2, semi_axes=(1.2, 1.0))
        value = single_layer(spec, (3.0, 0.0), tol=1e-9).value
        shell = analytic_boundary_area(spec) * float(FundamentalSolution((3.0, 0.0))(np.zeros(2)))
        self.assertTrue(math.isfinite(value))
        self.assertGreater(abs(value - shell) / abs(shell), 1e-3)

    def test_interior_point_refused(self):
        with self.assertRaises(DomainError):
            single_layer(Ball(2), (0.5, 0.0))
        with self.assertRaises(DomainError):
            single_layer(Ball(2), (1.0, 0.0))


class ProfileTests(SimpleTestCase):
    def test_ball_ratio_is_the_sphere_area(self):
        for n in (2, 3):
            profile = potential_profile(Ball(n))
            self.assertLess(profile.spread, 1e-5)
            self.assertAlmostEqual(profile.mean_ratio / analytic_boundary_area(Ball(n)), 1.0, delta=1e-5)
            self.assertFalse(profile.flags)

    def test_rows_match_header(self):
        profile = potential_profile(Ball(2))
        self.assertEqual(len(profile.rows()[0]), len(profile_header(2)))


class LimitTests(SimpleTestCase):
    def test_ball(self):
        limit = asz_limit_c(Ball(3))
        self.assertAlmostEqual(limit.value, 4 * math.pi, delta=1e-4)
        self.assertTrue(limit.converged)

    def test_spheroid(self):
        limit = asz_limit_c(Spheroid(2, semi_axes=(1.2, 1.0)))
        self.assertLess(limit.relative_error, 1e-3)

    def test_beaked_sphere(self):
        spec = BeakedSphere(2, eps=0.1, m=3)
        limit = asz_limit_c(spec)
        self.assertLess(limit.relative_error, 1e-3)
        self.assertAlmostEqual(limit.boundary_area, spec.boundary_area())

    def test_radii_must_double(self):
        with self.assertRaises(ParameterError):
            asz_limit_c(Ball(2), radii_factors=(8.0, 10.0, 12.0))


class RigidityTests(SimpleTestCase):
    def test_ball_is_constant(self):
        report, _ = rigidity_discriminator(Ball(2, radius=1.5))
        self.assertTrue(report.passed, msg=report)
        self.assertEqual(report.details['verdict'], 'constant')

    def test_spheroid_is_not_constant(self):
        report, profile = rigidity_discriminator(Spheroid(2, semi_axes=(1.2, 1.0)))
        self.assertTrue(report.passed, msg=report)
        self.assertEqual(report.details['verdict'], 'non-constant')
        self.assertGreater(profile.spread, 1e-3)

    def test_beaked_sphere_is_not_constant(self):
        report, _ = rigidity_discriminator(BeakedSphere(2, eps=0.1, m=3))
        self.assertTrue(report.passed, msg=report)
        self.assertEqual(report.details['verdict'], 'non-constant')

    def test_sample_touching_the_domain_refused(self):
        with self.assertRaises(DomainError):
            rigidity_discriminator(Ball(2), points=[(3.0, 0.0), (1.0, 0.0)])


class Lemma51Tests(SimpleTestCase):
    def test_ball_passes(self):
        for n in (2, 3):
            report = lemma51_check(Ball(n))
            self.assertTrue(report.passed, msg=report)

    def test_off_centre_point_refused(self):
        with self.assertRaises(PreconditionError):
            lemma51_check(Ball(2), x0=(0.2, 0.0))
        with self.assertRaises(PreconditionError):
            lemma51_check(Spheroid(2, semi_axes=(1.2, 1.0)))

    def test_singular_dictionary_refused(self):
        with self.assertRaises(SingularityError):
            lemma51_check(Ball(2), dictionary=[FundamentalSolution((0.3, 0.0))])
