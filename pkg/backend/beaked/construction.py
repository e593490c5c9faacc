"""
Construction of the beaked sphere D(eps) = B(eps) U K(eps) and its pieces.

``build_beaked`` returns the domain together with a ``BeakedPieces`` record:
labelled submeshes of every boundary piece (plus the removed cap Sigma_eps),
their analytic measures and the mesh-versus-analytic mismatch. The limit
shapes as eps -> 0 are known in closed form and give the reference constants
of the sweeps:

    |S_0|     = 2 sqrt(2)         (n=2)    pi sqrt(6)          (n=3)
    |Sigma_0| = 2                           2 pi
    |Sigma*_0| = pi / 2                     2 pi (1 - 1/sqrt(3))
    c_0 = int_{K ∩ S^(n-1)} (y_1^2 - 1/n) = 1/2          4 pi / (9 sqrt(3))
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from common.defaults import get_default
from common.exceptions import ParameterError
from geometry.domains import BeakedSphere
from geometry.measures import production_level
from geometry.meshing import BEAKED_ALL_PIECES, mesh_boundary

logger = logging.getLogger('potlab')


def limit_constants(n):
    """Analytic eps -> 0 constants ``S0, Sigma0, Sigma_star0, alpha0, c0`` for n in {2, 3}."""
    if n == 2:
        s0, sigma0, star0, c0 = 2.0 * math.sqrt(2.0), 2.0, 0.5 * math.pi, 0.5
    elif n == 3:
        s0 = math.pi * math.sqrt(6.0)
        sigma0 = 2.0 * math.pi
        star0 = 2.0 * math.pi * (1.0 - 1.0 / math.sqrt(3.0))
        c0 = 4.0 * math.pi / (9.0 * math.sqrt(3.0))
    else:
        raise ParameterError(f'beaked sphere constants are tabulated for n in {{2, 3}}, got {n}')
    return {'S0': s0, 'Sigma0': sigma0, 'Sigma_star0': star0, 'alpha0': s0 - sigma0, 'c0': c0}


@dataclass(frozen=True)
class BeakedPieces:
    """Labelled submeshes and measures of one beaked sphere."""

    spec: BeakedSphere
    mesh: object
    analytic_areas: dict

    @property
    def eps(self):
        return self.spec.eps

    @property
    def m(self):
        return self.spec.m

    @property
    def n(self):
        return self.spec.n

    @property
    def x_eps(self):
        return self.spec.x_eps

    @property
    def cos_theta(self):
        return self.spec.cos_theta

    def submesh(self, label):
        return self.mesh.piece(label)

    @property
    def mesh_areas(self):
        return {label: self.submesh(label).total_area for label in self.mesh.labels}

    @property
    def mismatch(self):
        """Relative difference of mesh and analytic measure for every meshed piece."""
        mesh_areas = self.mesh_areas
        return {
            label: abs(mesh_areas[label] - self.analytic_areas[label]) / self.analytic_areas[label]
            for label in mesh_areas
        }

    @property
    def boundary_area(self):
        a = self.analytic_areas
        return a['sphere_remainder'] + a['cone_side'] + a['sigma_star']

    @property
    def area_deficit(self):
        """``|∂D(eps)| - |∂B(eps)| = -|Sigma| + |S| + |Sigma*|``."""
        a = self.analytic_areas
        return a['cone_side'] + a['sigma_star'] - a['sigma']


def build_beaked(eps, m=None, n=2, recentered=False, level=None):
    """
    Beaked sphere and its labelled pieces.

    Args:
        eps (float): Beak parameter in (0, BEAKED_EPS_MAX).
        m (int, optional): Cap exponent, an integer > n; defaults to n + 1.
        n (int): Dimension, 2 or 3.
        recentered (bool): Translate by -x(eps) so B(eps) is the unit ball at 0.
        level (int, optional): Mesh level; ``POTLAB['PRODUCTION_LEVEL'][n]``.

    Returns:
        tuple: ``(BeakedSphere, BeakedPieces)``.

    Raises:
        ParameterError: If eps or m are out of range.
        UnsupportedDimensionError: If n is not 2 or 3.
    """
    spec = BeakedSphere(n, eps=eps, m=m, recentered=recentered)
    level = production_level(n) if level is None else level
    mesh = mesh_boundary(spec, level, pieces=BEAKED_ALL_PIECES)
    pieces = BeakedPieces(spec=spec, mesh=mesh, analytic_areas=spec.piece_areas())
    logger.debug('built beaked sphere eps=%g m=%d n=%d: %d facets', eps, spec.m, n, mesh.size)
    return spec, pieces


@dataclass(frozen=True)
class ContainmentResult:
    samples: int
    inner_violations: int
    outer_violations: int

    @property
    def passed(self):
        return self.inner_violations == 0 and self.outer_violations == 0


def containment_check(eps, m=None, n=2, samples=10_000, seed=None):
    """
    Sampled ``B(eps) ⊆ D(eps) ⊆ B*(eps)`` with ``B*(eps) = B(x(eps), 1 + eps)``.

    Half of the points are uniform in the bounding box of B*(eps), half in a
    box of side ``4 r_eps`` around the beak where the pieces meet.
    """
    spec = BeakedSphere(n, eps=eps, m=m)
    seed = seed if seed is not None else get_default('SEED')
    rng = np.random.default_rng(seed)
    centre = spec.x_eps
    outer_radius = 1.0 + spec.eps
    half = samples // 2
    wide = centre + rng.uniform(-outer_radius, outer_radius, size=(half, n))
    near = rng.uniform(-2.0 * spec.r_eps, 2.0 * spec.r_eps, size=(samples - half, n))
    points = np.vstack([wide, near])

    distance = np.linalg.norm(points - centre, axis=1)
    inside_d = spec.contains(points)
    inner = int(np.count_nonzero((distance < 1.0) & ~inside_d))
    outer = int(np.count_nonzero(inside_d & (distance > outer_radius)))
    if inner or outer:
        logger.warning('containment violated for eps=%g: %d inner, %d outer', eps, inner, outer)
    return ContainmentResult(samples=len(points), inner_violations=inner, outer_violations=outer)
