import math

import numpy as np
from django.test import SimpleTestCase

from common.exceptions import InvalidPoleError, NonFiniteValueError, SingularityError
from geometry.domains import Ball, Spheroid
from geometry.meshing import mesh_boundary
from kernels.functions import FundamentalSolution, HarmonicMonomial, KuranH, KuranK

from .extrapolation import local_slopes, loglog_slope, richardson_limit
from .identities import (
    ball_mean_value_residual,
    ball_poisson_kernel_gap,
    ball_poisson_mass,
    sphere_ratio_identity,
)
from .integration import boundary_mean, integrate, integrate_near_singular


class ExtrapolationTests(SimpleTestCase):
    def test_richardson_removes_even_powers(self):
        steps = [0.1, 0.05, 0.025]
        values = [2.0 + 3.0 * h ** 2 - 7.0 * h ** 4 for h in steps]
        self.assertAlmostEqual(richardson_limit(4.0, values), 2.0, places=13)
        self.assertEqual(richardson_limit(4.0, [5.0]), 5.0)

    def test_richardson_on_arrays(self):
        values = [np.array([1.0 + 1.0, 3.0 + 2.0]), np.array([1.0 + 0.5, 3.0 + 1.0])]
        np.testing.assert_allclose(richardson_limit(2.0, values), [1.0, 3.0])

    def test_slopes(self):
        x = np.array([0.02, 0.05, 0.1, 0.2])
        np.testing.assert_allclose(local_slopes(x, x ** 2), 2.0)
        self.assertAlmostEqual(loglog_slope(x, 3.0 * x ** 1.5), 1.5, places=12)


class IntegrateTests(SimpleTestCase):
    def test_constant_on_sphere(self):
        result = integrate(mesh_boundary(Ball(3), 2), lambda x: np.ones(len(x)))
        self.assertAlmostEqual(result.value, 4 * math.pi, delta=1e-4)
        self.assertLess(result.error_estimate, 1e-10)
        self.assertEqual(result.levels_used, (1, 2))

    def test_odd_function_on_sphere(self):
        result = integrate(mesh_boundary(Ball(3), 2), lambda x: x[:, 0])
        self.assertAlmostEqual(result.value, 0.0, delta=1e-6)

    def test_poisson_mass_on_sphere(self):
        result = integrate(mesh_boundary(Ball(3), 3), KuranH((0.0, 0.0, 2.0)))
        self.assertAlmostEqual(result.value, -4 * math.pi, delta=1e-3)

    def test_vector_integrand(self):
        mesh = mesh_boundary(Ball(2), 2)
        result = integrate(mesh, lambda x: np.column_stack([np.ones(len(x)), x[:, 1] ** 2]))
        np.testing.assert_allclose(result.value, [2 * math.pi, math.pi], atol=1e-10)
        self.assertAlmostEqual(result[1].value, math.pi, places=10)

    def test_non_finite_value_names_facet(self):
        mesh = mesh_boundary(Ball(2), 0)

        def spiky(points):
            values = np.ones(len(points))
            values[5] = np.nan
            return values

        with self.assertRaises(NonFiniteValueError) as ctx:
            integrate(mesh, spiky)
        self.assertEqual(ctx.exception.facet, 5)


class NearSingularTests(SimpleTestCase):
    def test_kuran_function_near_circle(self):
        alpha = (1.0 + 1e-3, 0.0)
        result = integrate_near_singular(Ball(2), KuranK(alpha), alpha, tol=1e-4)
        self.assertTrue(result.converged)
        self.assertLess(abs(result.value), 2e-4)

    def test_kuran_function_near_sphere(self):
        alpha = (0.0, 0.0, 1.01)
        result = integrate_near_singular(Ball(3), KuranK(alpha), alpha, tol=1e-4)
        self.assertTrue(result.converged)
        self.assertLess(abs(result.value), 2e-4)

    def test_absolute_poisson_mean_on_ball(self):
        alpha = (0.0, 1.0 + 1e-3)
        fn = KuranH(alpha)
        result = boundary_mean(Ball(2), lambda x: np.abs(fn(x)), tol=1e-5, pole=alpha)
        self.assertAlmostEqual(result.value, 1.0, delta=1e-4)

    def test_spheroid_converges(self):
        alpha = (0.0, 1.01)
        result = integrate_near_singular(Spheroid(2, semi_axes=(1.2, 1.0)), KuranK(alpha), alpha, tol=1e-4)
        self.assertTrue(result.converged)
        self.assertLess(result.error_estimate, 1e-4)
        self.assertTrue(np.isfinite(result.value))

    def test_interior_pole_refused(self):
        with self.assertRaises(InvalidPoleError):
            integrate_near_singular(Ball(2), KuranK((0.5, 0.0)), (0.5, 0.0))

    def test_level_cap_flags_result(self):
        alpha = (1.0 + 1e-4, 0.0)
        result = integrate_near_singular(Ball(2), KuranK(alpha), alpha, tol=1e-15, max_level=2)
        self.assertFalse(result.converged)
        self.assertEqual(result.flags, ('quadrature-not-converged',))
        self.assertEqual(result.levels_used, (0, 1, 2))


class IdentityTests(SimpleTestCase):
    def test_sphere_ratio_identity(self):
        for n in range(2, 7):
            self.assertLess(sphere_ratio_identity(n), 1e-8, msg=f'n={n}')

    def test_mean_value_residuals(self):
        ball = Ball(3)
        x1x1_minus_x2x2 = HarmonicMonomial(3, (((2, 0, 0), 1.0), ((0, 2, 0), -1.0)))
        self.assertLess(ball_mean_value_residual(x1x1_minus_x2x2, ball), 1e-6)
        self.assertLess(ball_mean_value_residual(KuranK((2.0, 0.0, 0.0)), ball, tol=1e-7), 1e-4)
        self.assertLess(ball_mean_value_residual(FundamentalSolution((0.0, 3.0, 0.0)), ball, tol=1e-7), 1e-5)

    def test_mean_value_on_given_mesh(self):
        mesh = mesh_boundary(Ball(2), 2)
        fn = HarmonicMonomial(2, (((2, 0), 1.0), ((0, 2), -1.0)))
        self.assertLess(ball_mean_value_residual(fn, Ball(2), mesh=mesh), 1e-12)

    def test_mean_value_refuses_interior_singularity(self):
        with self.assertRaises(SingularityError):
            ball_mean_value_residual(KuranK((0.5, 0.0, 0.0)), Ball(3))

    def test_poisson_mass(self):
        self.assertLess(ball_poisson_mass((0.0, 0.0, 2.0), tol=1e-6), 1e-4)
        self.assertLess(ball_poisson_mass((10.0, 0.0)), 1e-6)
        self.assertLess(ball_poisson_mass((0.0, 0.0, 1.1), tol=1e-6), 1e-3)
        for radius in (1.5, 2.0, 10.0):
            self.assertLess(ball_poisson_mass((radius, 0.0), tol=1e-6), 1e-4)

    def test_poisson_mass_invalid_pole(self):
        with self.assertRaises(InvalidPoleError):
            ball_poisson_mass((1.0, 0.0))

    def test_grading_beats_uniform_mesh(self):
        alpha = (1.01, 0.0)
        uniform = mesh_boundary(Ball(2), 2)
        graded = mesh_boundary(Ball(2), 1, grading_center=(1.0, 0.0), pole_gap=0.01)
        self.assertLessEqual(graded.size, uniform.size)
        graded_residual = ball_poisson_mass(alpha, mesh=graded)
        uniform_residual = ball_poisson_mass(alpha, mesh=uniform)
        self.assertLess(10 * graded_residual, uniform_residual)

    def test_poisson_kernel_gap_of_ball(self):
        for n in (2, 3):
            ball = Ball(n, radius=1.5)
            self.assertLess(ball_poisson_kernel_gap(ball, mesh_boundary(ball, 1)), 1e-12)
