"""
Measures of domains and their boundaries.

Mesh-based measures (``boundary_area``, the divergence-identity ``volume``)
sit next to closed-form oracles (``analytic_boundary_area``,
``analytic_volume``) so every mesh can be checked against geometry it is
supposed to reproduce. ``inradius_touching`` finds the nearest boundary
points per variant (closed form, root-find or meridian profile) and
``isoperimetric_report`` checks the chain

    |∂D| - |∂B| >= n w_n^(1/n) (|D|^((n-1)/n) - |B|^((n-1)/n))
                >= (n-1) w_n^(1/n) |D \\ B| / |D|^(1/n)

for the biggest ball B centred at x0.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special

from common.defaults import get_default, level_default
from common.exceptions import OrientationError, PreconditionError
from common.reports import combine, compare
from kernels.functions import ball_volume, sphere_area

from .domains import Ball, BeakedSphere, GraphPerturbedBall, Spheroid
from .meshing import mesh_boundary

logger = logging.getLogger('potlab')


def production_level(n):
    return level_default('PRODUCTION_LEVEL', n)


def weighted_sum(values, weights):
    """``sum(values * weights)``; exactly rounded and order independent in deterministic mode."""
    products = np.asarray(values) * np.asarray(weights)
    if get_default('DETERMINISTIC', False):
        if products.ndim == 1:
            return math.fsum(products.tolist())
        return np.array([math.fsum(col) for col in products.T.tolist()])
    return products.sum(axis=0)


def boundary_area(mesh):
    """Sum of the facet areas."""
    return float(weighted_sum(mesh.areas, np.ones_like(mesh.areas)))


# =============================================================================
# CLOSED FORMS
# =============================================================================


def _revolution_integral(spec, power):
    """
    Integrals over the body polar angle for a radial graph symmetric about e_1.

    ``power='area'`` gives |∂D|, ``power='volume'`` gives |D|.
    """
    def rho(psi):
        omega = np.zeros((1, spec.n))
        omega[0, 0], omega[0, 1] = math.cos(psi), math.sin(psi)
        return float(spec.radial_function(omega)[0]), omega

    def area_integrand(psi):
        r, omega = rho(psi)
        density = float(spec.area_density(omega)[0])
        return density * (math.sin(psi) if spec.n == 3 else 1.0)

    def volume_integrand(psi):
        r, _ = rho(psi)
        return r ** spec.n / spec.n * (math.sin(psi) if spec.n == 3 else 1.0)

    integrand = area_integrand if power == 'area' else volume_integrand
    points = [spec.flat_angle]
    value, _ = integrate.quad(integrand, 0.0, math.pi, points=points, epsabs=0.0, epsrel=1e-13, limit=200)
    return (2.0 if spec.n == 2 else 2.0 * math.pi) * value


def _ellipsoid_area(axes):
    a, b, c = sorted(axes, reverse=True)
    if math.isclose(a, c, rel_tol=1e-15):
        return 4.0 * math.pi * a * a
    phi = math.acos(c / a)
    m = a * a * (b * b - c * c) / (b * b * (a * a - c * c))
    sin_phi = math.sin(phi)
    elliptic = special.ellipeinc(phi, m) * sin_phi ** 2 + special.ellipkinc(phi, m) * math.cos(phi) ** 2
    return 2.0 * math.pi * c * c + 2.0 * math.pi * a * b / sin_phi * elliptic


def analytic_boundary_area(spec):
    """
    Closed-form |∂D|.

    Ball: sigma_n r**(n-1); ellipse: 4 a E(1 - b**2/a**2); ellipsoid: the
    Legendre incomplete-elliptic formula; graph-perturbed ball: a
    one-dimensional profile integral; beaked sphere: exact piece formulas.
    """
    if isinstance(spec, Ball):
        return sphere_area(spec.n) * spec.radius ** (spec.n - 1)
    if isinstance(spec, Spheroid):
        if spec.n == 2:
            a, b = max(spec.semi_axes), min(spec.semi_axes)
            return float(4.0 * a * special.ellipe(1.0 - (b / a) ** 2))
        if spec.n == 3:
            return float(_ellipsoid_area(spec.semi_axes))
        return None
    if isinstance(spec, GraphPerturbedBall) and spec.n in (2, 3):
        return _revolution_integral(spec, 'area')
    if isinstance(spec, BeakedSphere):
        return spec.boundary_area()
    return None


def analytic_volume(spec):
    if isinstance(spec, Ball):
        return ball_volume(spec.n) * spec.radius ** spec.n
    if isinstance(spec, Spheroid):
        return ball_volume(spec.n) * float(np.prod(spec.axes_array))
    if isinstance(spec, GraphPerturbedBall) and spec.n in (2, 3):
        return _revolution_integral(spec, 'volume')
    if isinstance(spec, BeakedSphere):
        return spec.volume()
    return None


@dataclass(frozen=True)
class VolumeResult:
    value: float
    mesh_value: float
    analytic_value: float = None

    @property
    def relative_gap(self):
        if self.analytic_value is None:
            return None
        return abs(self.mesh_value - self.analytic_value) / self.analytic_value


def volume(spec, mesh=None):
    """
    |D| through the divergence identity ``(1/n) * integral of <x, nu> dsigma``.

    Args:
        spec (DomainSpec): Domain.
        mesh (SurfaceMesh, optional): Mesh of ∂D; the production level mesh
            is built when omitted.

    Returns:
        VolumeResult: ``value`` is the analytic volume when one exists and the
        mesh value otherwise.

    Raises:
        OrientationError: If the mesh volume is not positive.
    """
    mesh = mesh if mesh is not None else mesh_boundary(spec, production_level(spec.n))
    support = np.einsum('ij,ij->i', mesh.centroids, mesh.normals)
    mesh_value = float(weighted_sum(support, mesh.areas)) / spec.n
    if not mesh_value > 0:
        raise OrientationError(f'divergence volume {mesh_value:.6g} is not positive; normals point inward')
    analytic = analytic_volume(spec)
    result = VolumeResult(value=analytic if analytic is not None else mesh_value, mesh_value=mesh_value, analytic_value=analytic)
    if analytic is not None and result.relative_gap > 1e-4:
        logger.warning('mesh volume %.10g differs from analytic %.10g (level %d)', mesh_value, analytic, mesh.level)
    return result


# =============================================================================
# TOUCHING SETS
# =============================================================================


@dataclass(frozen=True)
class TouchingPoint:
    """
    A point of ∂D at distance ``r`` from x0.

    ``dini_asserted`` is a caller assertion that ∂D is Lyapunov-Dini regular
    at ``z``; it cannot be checked from a mesh. Points sharing a
    ``symmetry_class`` are images of each other under a symmetry of (D, x0).
    """

    z: tuple
    dini_asserted: bool = True
    symmetry_class: str = ''

    @property
    def point(self):
        return np.asarray(self.z, dtype=float)


def _at_reference(spec, x0):
    return np.allclose(x0, spec.reference_point, atol=1e-12)


def _spheroid_feet(spec, x0):
    """Nearest boundary points of a spheroid from an interior point (body-frame root-find)."""
    axes = spec.axes_array
    p = spec.to_body(x0)[0]
    a_min = float(axes.min())
    minor = np.isclose(axes, a_min, rtol=1e-12, atol=0.0)
    shift = axes ** 2 - a_min ** 2
    rtol = 4 * np.finfo(float).eps

    def foot(s, keep_minor=True):
        with np.errstate(divide='ignore', invalid='ignore'):
            x = axes ** 2 * p / (shift + s)
        if not keep_minor:
            x[minor] = 0.0
        return x

    def excess(s, keep_minor=True):
        return float(np.sum((foot(s, keep_minor) / axes) ** 2) - 1.0)

    if np.any(np.abs(p[minor]) > 1e-12 * float(axes.max())):
        lo = a_min ** 2
        while excess(lo) <= 0.0 and lo > 1e-300:
            lo *= 0.5
        s = optimize.brentq(excess, lo, a_min ** 2, xtol=1e-15 * a_min ** 2, rtol=rtol)
        return [(foot(s), 'nearest', True)]

    others = ~minor
    y = np.zeros(spec.n)
    y[others] = axes[others] ** 2 * p[others] / shift[others]
    rest = 1.0 - float(np.sum((y[others] / axes[others]) ** 2))
    if rest > 0.0:
        feet = []
        for i in np.flatnonzero(minor):
            for sign in (1.0, -1.0):
                x = y.copy()
                x[i] = sign * a_min * math.sqrt(rest)
                feet.append((x, 'minor-axes', True))
        return feet
    if excess(0.0, keep_minor=False) <= 0.0:
        return [(y, 'nearest', True)]
    s = optimize.brentq(lambda value: excess(value, False), 0.0, a_min ** 2, xtol=1e-15 * a_min ** 2, rtol=rtol)
    return [(foot(s, keep_minor=False), 'nearest', True)]


# Graph-perturbed balls and beaked spheres are surfaces of revolution about
# e_1: distances are taken in the meridian half-plane (axial, distance to axis).


def _meridian(p):
    radial = p[1:]
    rho = float(np.linalg.norm(radial))
    return float(p[0]), rho, (radial / rho if rho > 0 else None)


def _from_meridian(axial, rho, direction, n):
    point = np.zeros(n)
    point[0] = axial
    if rho > 0:
        if direction is None:
            direction = np.zeros(n - 1)
            direction[0] = 1.0
        point[1:] = rho * direction
    return point


def _nearest_on_segment(q, start, end):
    d = end - start
    s = float(np.clip(np.dot(q - start, d) / np.dot(d, d), 0.0, 1.0))
    return start + s * d, 0.0 < s < 1.0


def _nearest_on_arc(q, lo, hi, angle_of, point_at, smooth_end=None):
    """
    Nearest point of the circular arc ``point_at(phi)``, ``phi`` in [lo, hi].

    ``angle_of`` inverts ``point_at``; an end point counts as smooth only when
    it is ``smooth_end``.
    """
    phi = angle_of(q)
    if lo <= phi <= hi:
        return point_at(phi), True
    end = min((lo, hi), key=lambda value: np.linalg.norm(point_at(value) - q))
    return point_at(end), end == smooth_end


def _beaked_feet(spec, x0):
    """Nearest point of each boundary piece; rim points are flagged as not smooth."""
    axial, rho, direction = _meridian(spec.to_original(x0)[0])
    q = np.array([axial, rho])
    rim = np.array([spec.cos_theta, spec.sin_theta])
    centre = np.array([spec.shift, 0.0])
    pieces = {
        'cone_side': _nearest_on_segment(q, spec.rho_star * rim, spec.r_eps * rim),
        'sigma_star': _nearest_on_arc(
            q,
            0.0,
            spec.theta,
            lambda v: math.atan2(v[1], v[0]),
            lambda phi: spec.rho_star * np.array([math.cos(phi), math.sin(phi)]),
            smooth_end=0.0,
        ),
        # angle from -e_1 at x(eps); pi is the far pole
        'sphere_remainder': _nearest_on_arc(
            q,
            spec.psi_sigma,
            math.pi,
            lambda v: math.atan2(v[1], centre[0] - v[0]),
            lambda psi: centre + np.array([-math.cos(psi), math.sin(psi)]),
            smooth_end=math.pi,
        ),
    }
    feet = []
    for piece, (foot, smooth) in pieces.items():
        ring = direction is None and foot[1] > 1e-12
        point = _from_meridian(foot[0], foot[1], direction, spec.n) + spec.offset
        feet.append((point, f'{piece}-ring' if ring else piece, smooth))
    return feet


def _graph_feet(spec, x0, samples=721):
    """Local minimisers of the distance to the radial-graph profile, refined from a polar-angle grid."""
    axial, rho, direction = _meridian(spec.to_body(x0)[0])
    q = np.array([axial, rho])

    def profile(psi):
        omega = np.zeros((1, spec.n))
        omega[0, 0], omega[0, 1] = math.cos(psi), math.sin(psi)
        return float(spec.radial_function(omega)[0]) * omega[0, :2]

    def distance(psi):
        return float(np.linalg.norm(profile(psi) - q))

    grid = np.linspace(0.0, math.pi, samples)
    values = np.array([distance(psi) for psi in grid])
    step = grid[1] - grid[0]
    feet = []
    for i in range(samples):
        if values[i] > values[max(i - 1, 0)] or values[i] > values[min(i + 1, samples - 1)]:
            continue
        bounds = (max(grid[i] - step, 0.0), min(grid[i] + step, math.pi))
        result = optimize.minimize_scalar(distance, bounds=bounds, method='bounded', options={'xatol': 1e-13})
        foot = profile(float(result.x))
        label = 'ring' if direction is None and foot[1] > 1e-12 else f'nearest-{len(feet)}'
        body = _from_meridian(foot[0], foot[1], direction, spec.n)
        feet.append((spec.to_world(body)[0], label, True))
    return feet


def _touching(x0, feet, tol):
    """Inradius and the distinct feet within ``tol`` (relative) of it."""
    distances = [float(np.linalg.norm(point - x0)) for point, _, _ in feet]
    r = min(distances)
    candidates, seen = [], []
    for (point, label, smooth), d in zip(feet, distances):
        if d > r + tol * max(r, 1.0):
            continue
        if any(np.linalg.norm(point - other) <= 1e-9 * max(r, 1.0) for other in seen):
            continue
        seen.append(point)
        candidates.append(TouchingPoint(tuple(float(v) for v in point), smooth, label))
    return r, candidates


def inradius_touching(spec, x0=None):
    """
    Inradius ``r = dist(x0, ∂D)`` and the touching candidates.

    Away from the centre the nearest boundary points come from a root-find
    (spheroid) or from the meridian profile (graph-perturbed ball, beaked
    sphere). Every foot within ``POTLAB['TOUCHING_TOL']`` (relative) of the
    minimum distance is a candidate; feet on a rim between beaked pieces are
    corners and carry ``dini_asserted=False``.

    Args:
        spec (DomainSpec): Domain.
        x0 (array_like, optional): Interior point; defaults to the centre
            (x(eps) for the beaked sphere).

    Returns:
        tuple: ``(r, candidates)``; candidates is a list of TouchingPoint
        representatives of the touching set.

    Raises:
        DomainError: If ``x0`` is not inside D.
        PreconditionError: If the variant has no touching-set formula.
    """
    x0 = spec.require_inside(spec.reference_point if x0 is None else x0)
    tol = get_default('TOUCHING_TOL')
    if isinstance(spec, Ball):
        offset = x0 - spec.center_array
        distance = float(np.linalg.norm(offset))
        r = spec.radius - distance
        if distance < 1e-12:
            points = []
            for i in range(spec.n):
                for sign in (1.0, -1.0):
                    axis = np.zeros(spec.n)
                    axis[i] = sign
                    points.append(spec.center_array + spec.radius * (spec.frame @ axis))
            return r, [TouchingPoint(tuple(p), True, 'sphere') for p in points]
        z = spec.center_array + spec.radius * offset / distance
        return r, [TouchingPoint(tuple(z), True, 'nearest')]
    if isinstance(spec, Spheroid):
        feet = [(spec.to_world(x)[0], label, smooth) for x, label, smooth in _spheroid_feet(spec, x0)]
        return _touching(x0, feet, tol)
    if isinstance(spec, GraphPerturbedBall):
        if _at_reference(spec, x0):
            axis = np.zeros(spec.n)
            axis[0] = spec.radius
            half = 0.5 * spec.flat_angle
            cap = np.zeros(spec.n)
            cap[0], cap[1] = spec.radius * math.cos(half), spec.radius * math.sin(half)
            return spec.radius, [
                TouchingPoint(tuple(spec.to_world(axis)[0]), True, 'flat-cap-axis'),
                TouchingPoint(tuple(spec.to_world(cap)[0]), True, 'flat-cap'),
            ]
        return _touching(x0, _graph_feet(spec, x0), tol)
    if isinstance(spec, BeakedSphere):
        if _at_reference(spec, x0):
            # corners on the rim of Sigma_eps are Lipschitz, not Dini: only the smooth remainder counts
            z = spec.x_eps.copy()
            z[0] += 1.0
            return 1.0, [TouchingPoint(tuple(z), True, 'sphere_remainder')]
        return _touching(x0, _beaked_feet(spec, x0), tol)
    raise PreconditionError(f'no touching-set formula for {spec.kind}')


def nearest_boundary_point(spec, point):
    """Boundary point closest (exactly for balls, radially otherwise) to an exterior ``point``."""
    point = np.asarray(point, dtype=float)
    if isinstance(spec, BeakedSphere):
        best = spec.radial_projection(point)
        coarse = mesh_boundary(spec, 1)
        idx = int(np.argmin(np.linalg.norm(coarse.centroids - point, axis=-1)))
        if best is None or np.linalg.norm(coarse.centroids[idx] - point) < np.linalg.norm(best - point):
            best = coarse.centroids[idx]
        return best
    return spec.radial_projection(point)


# =============================================================================
# ISOPERIMETRIC CHAIN
# =============================================================================


@dataclass(frozen=True)
class DeficitQuantities:
    boundary_area: float
    ball_area: float
    domain_volume: float
    ball_volume: float
    inradius: float

    @property
    def deficit_ratio(self):
        return (self.boundary_area - self.ball_area) / self.boundary_area

    @property
    def difference_volume(self):
        return max(self.domain_volume - self.ball_volume, 0.0)


def deficit_quantities(spec, x0=None):
    """|∂D|, |∂B|, |D|, |B| for the biggest ball B centred at ``x0``, from closed forms."""
    r, _ = inradius_touching(spec, x0)
    area = analytic_boundary_area(spec)
    vol = analytic_volume(spec)
    if area is None or vol is None:
        mesh = mesh_boundary(spec, production_level(spec.n))
        area = boundary_area(mesh) if area is None else area
        vol = volume(spec, mesh).mesh_value if vol is None else vol
    return DeficitQuantities(
        boundary_area=float(area),
        ball_area=sphere_area(spec.n) * r ** (spec.n - 1),
        domain_volume=float(vol),
        ball_volume=ball_volume(spec.n) * r ** spec.n,
        inradius=r,
    )


def solid_rhs(spec, quantities):
    """``(n-1) w_n^(1/n) |D \\ B| / (|D|^(1/n) |∂D|)``."""
    n = spec.n
    return (
        (n - 1)
        * ball_volume(n) ** (1.0 / n)
        * quantities.difference_volume
        / (quantities.domain_volume ** (1.0 / n) * quantities.boundary_area)
    )


def isoperimetric_report(spec, x0=None, tol=None):
    """
    Check the isoperimetric chain for the biggest ball centred at ``x0``.

    Returns:
        VerificationReport: Combined report of both links; ``details`` holds
        |∂D|, |∂B|, the deficit ratio and the chained right-hand side.
    """
    tol = tol if tol is not None else get_default('ISOPERIMETRIC_TOL')
    n = spec.n
    q = deficit_quantities(spec, x0)
    w = ball_volume(n) ** (1.0 / n)
    area_gap = q.boundary_area - q.ball_area
    middle = n * w * (q.domain_volume ** ((n - 1) / n) - q.ball_volume ** ((n - 1) / n))
    lower = (n - 1) * w * q.difference_volume / q.domain_volume ** (1.0 / n)
    provenance = {'areas': 'closed form', 'volumes': 'closed form'}
    report = combine(
        'isoperimetric',
        [
            compare('isoperimetric_area', area_gap, middle, tol, provenance=provenance),
            compare('isoperimetric_volume', middle, lower, tol, provenance=provenance),
        ],
        details={
            'boundary_area': q.boundary_area,
            'ball_area': q.ball_area,
            'domain_volume': q.domain_volume,
            'ball_volume': q.ball_volume,
            'deficit_ratio': q.deficit_ratio,
            'chained_rhs': lower / q.boundary_area,
        },
    )
    logger.info('isoperimetric chain for %s: deficit ratio %.6g, passed=%s', spec.kind, q.deficit_ratio, report.passed)
    return report
