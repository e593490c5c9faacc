import math

import numpy as np
from django.test import SimpleTestCase

from common.exceptions import InvalidPoleError, NearSingularityError, ParameterError, SingularityError

from .functions import (
    ConeU,
    FundamentalSolution,
    HarmonicMonomial,
    KuranH,
    KuranK,
    Transformed,
    ball_volume,
    cone_u,
    gamma,
    harmonic_monomials,
    kuran_h,
    kuran_k,
    laplacian_residual,
    sphere_area,
)


def rotation_3d(angle_x, angle_z):
    cx, sx = math.cos(angle_x), math.sin(angle_x)
    cz, sz = math.cos(angle_z), math.sin(angle_z)
    rx = np.array([[1, 0, 0], [0, cx, -sx], [0, sx, cx]])
    rz = np.array([[cz, -sz, 0], [sz, cz, 0], [0, 0, 1]])
    return rz @ rx


class ConstantsTests(SimpleTestCase):
    def test_sphere_areas(self):
        self.assertAlmostEqual(sphere_area(2), 2 * math.pi)
        self.assertAlmostEqual(sphere_area(3), 4 * math.pi)
        self.assertAlmostEqual(sphere_area(4), 2 * math.pi ** 2)

    def test_ball_volumes(self):
        self.assertAlmostEqual(ball_volume(2), math.pi)
        self.assertAlmostEqual(ball_volume(3), 4 * math.pi / 3)


class GammaTests(SimpleTestCase):
    def test_three_dimensional_normalization(self):
        self.assertAlmostEqual(gamma([1.0, 0.0, 0.0]), 1 / (4 * math.pi), places=15)
        self.assertAlmostEqual(gamma([0.0, 2.0, 0.0]), 1 / (8 * math.pi), places=15)

    def test_two_dimensional_log(self):
        self.assertEqual(gamma([1.0, 0.0]), 0.0)
        self.assertAlmostEqual(gamma([5.0, 0.0]), -math.log(5) / (2 * math.pi), places=15)

    def test_origin_is_singular(self):
        with self.assertRaises(SingularityError):
            gamma([0.0, 0.0, 0.0])

    def test_vectorized(self):
        values = gamma(np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 2.0]]))
        self.assertEqual(values.shape, (2,))


class KuranTests(SimpleTestCase):
    def test_value_at_origin(self):
        for alpha in ([2.0, 0.0, 0.0], [0.3, -0.4], [0.0, 1.1, 0.2]):
            self.assertAlmostEqual(kuran_h(alpha, np.zeros(len(alpha))), -1.0, places=14)
            self.assertAlmostEqual(kuran_k(alpha, np.zeros(len(alpha))), 0.0, places=14)

    def test_hand_evaluation(self):
        self.assertAlmostEqual(kuran_h([2.0, 0.0, 0.0], [1.0, 0.0, 0.0]), -6.0, places=14)
        self.assertAlmostEqual(kuran_k([2.0, 0.0, 0.0], [1.0, 0.0, 0.0]), -5.0, places=14)

    def test_sphere_of_radius_alpha(self):
        alpha = np.array([0.0, 0.0, 1.5])
        angles = np.linspace(0.3, 2.8, 7)
        points = 1.5 * np.column_stack([np.sin(angles), np.zeros_like(angles), np.cos(angles)])
        np.testing.assert_allclose(kuran_h(alpha, points), 0.0, atol=1e-14)
        np.testing.assert_allclose(kuran_k(alpha, points), 1.0, atol=1e-14)

    def test_rotation_and_dilation_invariance(self):
        rot = rotation_3d(0.7, -1.1)
        alpha = np.array([1.3, 0.2, -0.4])
        x = np.array([0.1, 0.5, 0.3])
        base = kuran_h(alpha, x)
        self.assertAlmostEqual(kuran_h(rot @ alpha, rot @ x), base, places=12)
        for t in (0.1, 3.0, 17.0):
            self.assertAlmostEqual(kuran_h(t * alpha, t * x), base, places=10)

    def test_errors(self):
        with self.assertRaises(InvalidPoleError):
            kuran_h([0.0, 0.0], [1.0, 0.0])
        with self.assertRaises(SingularityError):
            kuran_k([1.0, 2.0], [1.0, 2.0])


class ConeTests(SimpleTestCase):
    def test_values(self):
        self.assertAlmostEqual(cone_u([1.0, 0.0, 0.0]), 2 / 3, places=15)
        self.assertAlmostEqual(cone_u([0.0, 1.0]), -0.5, places=15)

    def test_vanishes_on_cone_boundary(self):
        for n in (2, 3):
            theta = math.acos(1 / math.sqrt(n))
            point = np.zeros(n)
            point[0], point[1] = 2.0 * math.cos(theta), 2.0 * math.sin(theta)
            self.assertAlmostEqual(cone_u(point), 0.0, places=14)

    def test_positive_inside_cone(self):
        self.assertGreater(cone_u([1.0, 0.3, 0.2]), 0.0)
        self.assertLess(cone_u([0.2, 1.0, 0.0]), 0.0)

    def test_apex_shift(self):
        fn = ConeU(3, apex=(-1.0, 0.0, 0.0))
        self.assertAlmostEqual(fn([0.0, 0.0, 0.0]), 2 / 3, places=15)
        np.testing.assert_allclose(fn.singular_points(), [[-1.0, 0.0, 0.0]])


class MonomialTests(SimpleTestCase):
    def test_dictionary_is_harmonic_and_unique(self):
        for n in (2, 3):
            dictionary = harmonic_monomials(n, 4)
            keys = {tuple(sorted(fn.terms)) for fn in dictionary}
            self.assertEqual(len(keys), len(dictionary))
            self.assertTrue(all(fn.degree <= 4 for fn in dictionary))

    def test_two_dimensional_count(self):
        # Re/Im of (x1 + i x2)**d for d = 1..4
        self.assertEqual(len(harmonic_monomials(2, 4)), 8)

    def test_non_harmonic_rejected(self):
        with self.assertRaises(ParameterError):
            HarmonicMonomial(2, (((2, 0), 1.0),))

    def test_degree_cap(self):
        with self.assertRaises(ParameterError):
            harmonic_monomials(3, 5)


class TransformedTests(SimpleTestCase):
    def test_similarity_moves_singular_set(self):
        rot = rotation_3d(0.4, 0.9)
        fn = Transformed(FundamentalSolution((2.0, 0.0, 0.0)), origin=(1.0, 1.0, 0.0), frame=tuple(map(tuple, rot)), scale=3.0)
        expected = np.array([1.0, 1.0, 0.0]) + 3.0 * rot @ np.array([2.0, 0.0, 0.0])
        np.testing.assert_allclose(fn.singular_points()[0], expected, atol=1e-14)
        self.assertAlmostEqual(fn.distance_to_singular_set(expected), 0.0, places=12)

    def test_identity_transform(self):
        inner = KuranK((0.0, 2.0))
        fn = Transformed(inner, origin=(0.0, 0.0))
        self.assertAlmostEqual(fn([0.3, 0.1]), inner([0.3, 0.1]), places=15)


class LaplacianResidualTests(SimpleTestCase):
    def test_kuran_function(self):
        residual = laplacian_residual(KuranK((2.0, 0.0, 0.0)), [0.5, 0.0, 0.0], 1e-3)
        self.assertLess(abs(residual), 1e-4)

    def test_cone_function(self):
        residual = laplacian_residual(ConeU(3), [1.0, 0.2, 0.0], 1e-3)
        self.assertLess(abs(residual), 1e-4)

    def test_monomial_exact(self):
        fn = HarmonicMonomial(3, (((1, 1, 0), 1.0),), 'x1x2')
        self.assertLess(abs(laplacian_residual(fn, [0.3, -0.7, 0.2], 1e-3)), 1e-8)

    def test_refuses_near_singularity(self):
        with self.assertRaises(NearSingularityError):
            laplacian_residual(KuranH((1.0, 0.0)), [0.995, 0.0], 1e-3)

    def test_second_order_rate_in_extended_precision(self):
        cases = [
            (KuranK((2.0, 0.0, 0.0)), [0.5, 0.3, 0.1]),
            (ConeU(3), [1.0, 0.2, 0.0]),
            (FundamentalSolution((0.0, 0.0, 1.5)), [0.2, 0.1, 0.0]),
            (KuranK((0.0, 1.5)), [0.3, 0.2]),
        ]
        steps = [1e-2, 1e-3, 1e-4]
        for fn, x in cases:
            residuals = [abs(float(laplacian_residual(fn, x, h, dtype=np.longdouble))) for h in steps]
            slopes = np.diff(np.log10(residuals)) / np.diff(np.log10(steps))
            for slope in slopes:
                self.assertAlmostEqual(slope, 2.0, delta=0.2, msg=f'{fn.label}: {residuals}')
