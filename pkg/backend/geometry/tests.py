import math

import numpy as np
from django.test import SimpleTestCase
from rest_framework.exceptions import ValidationError

from common.exceptions import DomainError, ParameterError, UnsupportedDimensionError

from .domains import Ball, BeakedSphere, GraphPerturbedBall, Spheroid
from .measures import (
    analytic_boundary_area,
    boundary_area,
    inradius_touching,
    isoperimetric_report,
    volume,
)
from .meshing import mesh_boundary
from .serializers import describe, from_mapping


def polyline_perimeter(a, b, segments=1_000_000):
    t = np.linspace(0.0, 2.0 * math.pi, segments + 1)
    x, y = a * np.cos(t), b * np.sin(t)
    return float(np.hypot(np.diff(x), np.diff(y)).sum())


def shoelace(points):
    x, y = points[:, 0], points[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def beaked_polygon_area(spec, samples=200_000):
    """|D(eps)| in 2-D from a dense polygon of the upper half boundary."""
    c = spec.shift
    psi = np.linspace(math.pi, spec.psi_sigma, samples)
    sphere = np.column_stack([c - np.cos(psi), np.sin(psi)])
    r = np.linspace(spec.r_eps, spec.rho_star, samples)[1:]
    cone = np.column_stack([r * spec.cos_theta, r * spec.sin_theta])
    phi = np.linspace(spec.theta, 0.0, samples)[1:]
    cap = spec.rho_star * np.column_stack([np.cos(phi), np.sin(phi)])
    return 2.0 * shoelace(np.vstack([sphere, cone, cap]))


class DomainTests(SimpleTestCase):
    def test_invalid_parameters(self):
        with self.assertRaises(ParameterError):
            Ball(2, radius=-1.0)
        with self.assertRaises(ParameterError):
            Spheroid(2, semi_axes=(1.0, 0.0))
        with self.assertRaises(ParameterError):
            GraphPerturbedBall(2, amplitude=-0.1)

    def test_beaked_parameter_errors(self):
        with self.assertRaises(ParameterError):
            BeakedSphere(2, eps=0.3, m=4)
        with self.assertRaises(ParameterError):
            BeakedSphere(2, eps=0.1, m=2)
        # cone boundary rays miss the ball for n=3 once (1 + eps) sin(theta) >= 1
        with self.assertRaises(ParameterError):
            BeakedSphere(3, eps=0.24, m=4)
        with self.assertRaises(UnsupportedDimensionError):
            BeakedSphere(4, eps=0.1, m=5)

    def test_default_m(self):
        self.assertEqual(BeakedSphere(3, eps=0.1).m, 4)

    def test_beaked_membership(self):
        spec = BeakedSphere(2, eps=0.1, m=4)
        inside = spec.contains(np.array([[0.05, 0.0], [1.1, 0.9], [0.05, 0.01]]))
        outside = spec.contains(np.array([[0.05, 0.06], [0.0, 0.0], [2.2, 0.0], [5e-5, 0.0]]))
        self.assertTrue(inside.all())
        self.assertFalse(outside.any())

    def test_recentered_shift(self):
        spec = BeakedSphere(3, eps=0.1, m=4, recentered=True)
        np.testing.assert_allclose(spec.x_eps, 0.0)
        np.testing.assert_allclose(spec.apex, [-1.1, 0.0, 0.0])
        self.assertTrue(spec.contains(np.array([[-1.05, 0.0, 0.0]]))[0])

    def test_similarity_transforms(self):
        spec = Spheroid(2, semi_axes=(1.2, 1.0))
        moved = spec.translated([3.0, -1.0])
        self.assertTrue(moved.contains(np.array([[4.1, -1.0]]))[0])
        self.assertFalse(moved.contains(np.array([[1.1, 0.0]]))[0])
        quarter = np.array([[0.0, -1.0], [1.0, 0.0]])
        turned = spec.rotated(quarter)
        self.assertTrue(turned.contains(np.array([[0.0, 1.15]]))[0])
        self.assertFalse(turned.contains(np.array([[1.15, 0.0]]))[0])
        self.assertEqual(Ball(3, radius=2.0).dilated(0.5).radius, 1.0)

    def test_graph_perturbed_ball_flat_cap(self):
        spec = GraphPerturbedBall(2, radius=1.0, amplitude=0.2, flat_angle=math.pi / 3)
        omega = np.array([[1.0, 0.0], [math.cos(0.9), math.sin(0.9)], [-1.0, 0.0]])
        np.testing.assert_allclose(spec.radial_function(omega), [1.0, 1.0, 1.2])
        np.testing.assert_allclose(spec.normal_body(omega[:2]), omega[:2], atol=1e-15)


class MeshTests(SimpleTestCase):
    def test_circle_facet_count_and_length(self):
        for level in range(4):
            mesh = mesh_boundary(Ball(2), level)
            self.assertEqual(mesh.size, 64 * 2 ** level)
        self.assertAlmostEqual(boundary_area(mesh_boundary(Ball(2), 4)), 2 * math.pi, delta=1e-6)

    def test_sphere_area_and_growth(self):
        coarse = mesh_boundary(Ball(3), 0)
        fine = mesh_boundary(Ball(3), 1)
        self.assertEqual(fine.size, 4 * coarse.size)
        self.assertAlmostEqual(boundary_area(fine), 4 * math.pi, delta=1e-4)

    def test_facets_are_valid(self):
        specs = [
            Ball(3, radius=2.0, center=(1.0, 0.0, 0.0)),
            Spheroid(3, semi_axes=(1.2, 1.0, 0.9)),
            Spheroid(2, semi_axes=(1.2, 1.0)),
            GraphPerturbedBall(3, amplitude=0.1, flat_angle=0.7),
            BeakedSphere(3, eps=0.1, m=4),
            BeakedSphere(2, eps=0.1, m=3),
        ]
        for spec in specs:
            mesh = mesh_boundary(spec, 1)
            self.assertTrue((mesh.areas > 0).all(), spec.kind)
            np.testing.assert_allclose(np.linalg.norm(mesh.normals, axis=1), 1.0, atol=1e-12)

    def test_normals_point_outward(self):
        spec = Spheroid(3, semi_axes=(1.2, 1.0, 0.9))
        mesh = mesh_boundary(spec, 1)
        outside = mesh.centroids + 1e-6 * mesh.normals
        inside = mesh.centroids - 1e-6 * mesh.normals
        self.assertFalse(spec.contains(outside).any())
        self.assertTrue(spec.contains(inside).all())

    def test_grading_follows_distance(self):
        center = np.array([1.0, 0.0])
        gap = 1e-3
        mesh = mesh_boundary(Ball(2), 0, grading_center=center, pole_gap=gap)
        distance = np.linalg.norm(mesh.centroids - center, axis=1)
        bound = np.maximum(gap / 4 * 1.0001, 0.4 * distance)
        self.assertTrue((mesh.diameters <= bound).all())
        self.assertLess(mesh.diameters[np.argmin(distance)], gap / 2)
        self.assertGreater(mesh.size, mesh_boundary(Ball(2), 0).size)
        self.assertAlmostEqual(mesh.total_area, 2 * math.pi, places=12)

    def test_graded_sphere_area(self):
        mesh = mesh_boundary(Ball(3), 0, grading_center=(0.0, 0.0, 1.0), pole_gap=1e-2)
        nearest = np.argmin(np.linalg.norm(mesh.centroids - [0.0, 0.0, 1.0], axis=1))
        self.assertLess(mesh.diameters[nearest], 1e-2)
        self.assertAlmostEqual(mesh.total_area, 4 * math.pi, places=10)

    def test_beaked_pieces_two_dimensional(self):
        spec = BeakedSphere(2, eps=0.1, m=4)
        mesh = mesh_boundary(spec, 2)
        areas = spec.piece_areas()
        self.assertEqual(set(mesh.labels), {'sphere_remainder', 'cone_side', 'sigma_star'})
        expected = areas['sphere'] + areas['cone_side'] + areas['sigma_star'] - areas['sigma']
        self.assertAlmostEqual(boundary_area(mesh) / expected, 1.0, delta=1e-3)
        sigma = mesh_boundary(spec, 2, pieces=('sigma',))
        self.assertAlmostEqual(sigma.total_area, areas['sigma'], places=12)

    def test_beaked_pieces_three_dimensional(self):
        spec = BeakedSphere(3, eps=0.1, m=4)
        mesh = mesh_boundary(spec, 1, pieces=('sphere_remainder', 'cone_side', 'sigma_star', 'sigma'))
        areas = spec.piece_areas()
        for label in ('sphere_remainder', 'cone_side', 'sigma_star', 'sigma'):
            self.assertAlmostEqual(mesh.piece(label).total_area / areas[label], 1.0, delta=5e-3)

    def test_levels_and_dimensions(self):
        with self.assertRaises(UnsupportedDimensionError):
            mesh_boundary(Ball(4), 0)
        with self.assertRaises(ParameterError):
            mesh_boundary(Ball(2), -1)
        mesh = mesh_boundary(Ball(2), 2, grading_center=(0.0, 1.0), pole_gap=1e-2)
        coarse = mesh.coarsen()
        self.assertEqual(coarse.level, 1)
        self.assertEqual(coarse.grading_center, mesh.grading_center)
        with self.assertRaises(ParameterError):
            mesh_boundary(Ball(2), 0).coarsen()

    def test_mesh_is_read_only(self):
        mesh = mesh_boundary(Ball(2), 0)
        with self.assertRaises(ValueError):
            mesh.areas[0] = 1.0


class MeasureTests(SimpleTestCase):
    def test_ellipse_perimeter_oracle(self):
        oracle = polyline_perimeter(1.2, 1.0)
        spec = Spheroid(2, semi_axes=(1.2, 1.0))
        self.assertAlmostEqual(analytic_boundary_area(spec), oracle, delta=1e-8)
        self.assertAlmostEqual(boundary_area(mesh_boundary(spec, 4)), oracle, delta=1e-8)

    def test_ellipsoid_area(self):
        spec = Spheroid(3, semi_axes=(1.2, 1.0, 0.9))
        self.assertAlmostEqual(boundary_area(mesh_boundary(spec, 2)) / analytic_boundary_area(spec), 1.0, delta=1e-5)
        self.assertAlmostEqual(analytic_boundary_area(Spheroid(3, semi_axes=(2.0, 2.0, 2.0))), 16 * math.pi)

    def test_ball_volumes(self):
        result = volume(Ball(3), mesh_boundary(Ball(3), 2))
        self.assertAlmostEqual(result.mesh_value / (4 * math.pi / 3), 1.0, delta=1e-10)
        self.assertAlmostEqual(volume(Ball(2), mesh_boundary(Ball(2), 4)).mesh_value, math.pi, delta=1e-10)

    def test_spheroid_volumes(self):
        for spec in (Spheroid(2, semi_axes=(1.2, 1.0)), Spheroid(3, semi_axes=(1.1, 1.0, 1.0))):
            result = volume(spec)
            self.assertLess(result.relative_gap, 1e-4)

    def test_beaked_volume_polygon_oracle(self):
        spec = BeakedSphere(2, eps=0.1, m=4)
        oracle = beaked_polygon_area(spec)
        self.assertAlmostEqual(spec.volume() / oracle, 1.0, delta=1e-8)
        self.assertAlmostEqual(volume(spec).mesh_value / oracle, 1.0, delta=1e-4)

    def test_graph_perturbed_ball_measures(self):
        spec = GraphPerturbedBall(2, radius=1.0, amplitude=0.1, flat_angle=0.8)
        self.assertAlmostEqual(boundary_area(mesh_boundary(spec, 4)) / analytic_boundary_area(spec), 1.0, delta=1e-6)
        self.assertLess(volume(spec).relative_gap, 1e-4)
        flat = GraphPerturbedBall(3, radius=1.0, amplitude=0.0, flat_angle=0.8)
        self.assertAlmostEqual(analytic_boundary_area(flat), 4 * math.pi, places=10)

    def test_inradius_ball(self):
        r, candidates = inradius_touching(Ball(3))
        self.assertEqual(r, 1.0)
        self.assertEqual({c.symmetry_class for c in candidates}, {'sphere'})
        for c in candidates:
            self.assertAlmostEqual(np.linalg.norm(c.point), 1.0)

    def test_inradius_spheroid(self):
        r, candidates = inradius_touching(Spheroid(2, semi_axes=(1.2, 1.0)), [0.0, 0.0])
        self.assertEqual(r, 1.0)
        self.assertEqual({tuple(np.round(c.point, 12)) for c in candidates}, {(0.0, 1.0), (0.0, -1.0)})

    def test_inradius_recentered_beaked(self):
        r, candidates = inradius_touching(BeakedSphere(3, eps=0.1, m=4, recentered=True), np.zeros(3))
        self.assertEqual(r, 1.0)
        np.testing.assert_allclose(candidates[0].point, [1.0, 0.0, 0.0])
        self.assertTrue(candidates[0].dini_asserted)

    def test_inradius_spheroid_off_centre(self):
        spec = Spheroid(2, semi_axes=(1.2, 1.0))
        t = np.linspace(-math.pi, math.pi, 200_001)
        boundary = np.column_stack([1.2 * np.cos(t), np.sin(t)])
        for x0 in ([0.3, 0.2], [-0.5, -0.1], [0.0, 0.4]):
            r, candidates = inradius_touching(spec, x0)
            brute = np.linalg.norm(boundary - x0, axis=1).min()
            self.assertAlmostEqual(r, brute, delta=1e-8, msg=x0)
            self.assertEqual(len(candidates), 1)
            z = candidates[0].point
            self.assertAlmostEqual((z[0] / 1.2) ** 2 + z[1] ** 2, 1.0, places=12)
            self.assertAlmostEqual(np.linalg.norm(z - x0), r, places=12)

    def test_inradius_spheroid_on_major_axis(self):
        spec = Spheroid(2, semi_axes=(1.2, 1.0))
        r, candidates = inradius_touching(spec, [0.1, 0.0])
        t = np.linspace(-math.pi, math.pi, 200_001)
        brute = np.hypot(1.2 * np.cos(t) - 0.1, np.sin(t)).min()
        self.assertAlmostEqual(r, brute, delta=1e-8)
        self.assertEqual(len(candidates), 2)
        self.assertEqual({c.symmetry_class for c in candidates}, {'minor-axes'})
        self.assertAlmostEqual(candidates[0].point[1], -candidates[1].point[1])

    def test_inradius_graph_perturbed_off_centre(self):
        spec = GraphPerturbedBall(2, radius=1.0, amplitude=0.1, flat_angle=0.8)
        t = np.linspace(-math.pi, math.pi, 400_001)
        omega = np.column_stack([np.cos(t), np.sin(t)])
        boundary = spec.radial_function(omega)[:, None] * omega
        for x0 in ([0.2, 0.1], [-0.3, 0.25]):
            r, candidates = inradius_touching(spec, x0)
            brute = np.linalg.norm(boundary - x0, axis=1).min()
            self.assertAlmostEqual(r, brute, delta=1e-7, msg=x0)
            self.assertTrue(candidates)
            for c in candidates:
                self.assertAlmostEqual(np.linalg.norm(c.point - x0), r, delta=1e-8)

    def test_inradius_beaked_off_centre(self):
        spec = BeakedSphere(2, eps=0.1, m=3)
        x0 = spec.x_eps + np.array([0.3, 0.1])
        r, candidates = inradius_touching(spec, x0)
        self.assertAlmostEqual(r, 1.0 - math.hypot(0.3, 0.1), places=12)
        self.assertEqual([c.symmetry_class for c in candidates], ['sphere_remainder'])
        self.assertTrue(candidates[0].dini_asserted)

    def test_inradius_inside_the_beak(self):
        spec = BeakedSphere(2, eps=0.1, m=3)
        r, candidates = inradius_touching(spec, [0.05, 0.0])
        self.assertAlmostEqual(r, 0.05 * math.sqrt(0.5), places=12)
        self.assertEqual([c.symmetry_class for c in candidates], ['cone_side-ring'])
        self.assertTrue(candidates[0].dini_asserted)
        np.testing.assert_allclose(candidates[0].point, [0.025, 0.025], atol=1e-12)

    def test_inradius_outside_point(self):
        with self.assertRaises(DomainError):
            inradius_touching(Ball(2), [2.0, 0.0])

    def test_inradius_against_mesh(self):
        for spec in (Ball(2, radius=1.5), Spheroid(3, semi_axes=(1.2, 1.0, 1.1)), BeakedSphere(2, eps=0.1, m=3)):
            r, _ = inradius_touching(spec)
            mesh = mesh_boundary(spec, 1)
            nearest = np.linalg.norm(mesh.centroids - spec.reference_point, axis=1).min()
            self.assertLessEqual(abs(nearest - r), mesh.max_diameter)

    def test_isoperimetric_ball(self):
        report = isoperimetric_report(Ball(3))
        self.assertTrue(report.passed)
        self.assertEqual(report.details['deficit_ratio'], 0.0)
        self.assertEqual(report.details['chained_rhs'], 0.0)

    def test_isoperimetric_spheroid(self):
        report = isoperimetric_report(Spheroid(2, semi_axes=(1.1, 1.0)))
        self.assertTrue(report.passed)
        self.assertGreater(report.details['isoperimetric_area']['margin'], 0.0)
        self.assertGreater(report.details['isoperimetric_volume']['margin'], 0.0)

    def test_isoperimetric_beaked(self):
        report = isoperimetric_report(BeakedSphere(2, eps=0.1, m=4))
        self.assertTrue(report.passed)
        self.assertGreater(report.details['deficit_ratio'], 0.0)


class SerializerTests(SimpleTestCase):
    def test_round_trip_mapping(self):
        spec = from_mapping({'kind': 'spheroid', 'n': 2, 'semi_axes': [1.2, 1.0]})
        self.assertIsInstance(spec, Spheroid)
        self.assertEqual(describe(spec)['semi_axes'], (1.2, 1.0))

    def test_rejects_foreign_fields(self):
        with self.assertRaises(ValidationError):
            from_mapping({'kind': 'ball', 'n': 2, 'eps': 0.1})

    def test_reports_invalid_beaked_parameters(self):
        with self.assertRaises(ValidationError) as ctx:
            from_mapping({'kind': 'beaked_sphere', 'n': 2, 'eps': 0.3, 'm': 4})
        self.assertIn('kind', ctx.exception.detail)
