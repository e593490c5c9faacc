"""
Single-layer potentials of uniform surface density.

For y outside the closure of D,

    V(y) = int_(∂D) Gamma(x - y) dsigma(x).

On a ball B(x0, r) the shell identity gives ``V(y) = |∂B| Gamma(x0 - y)`` for
every exterior y, and the converse holds for domains with a touching point:
a constant ratio ``V(y) / Gamma(x0 - y)`` forces D to be a ball. Whatever D
is, the ratio tends to |∂D| as |y| -> infinity.

Features:
    - ``single_layer``: V(y) by graded adaptive quadrature (or one mesh sum)
    - ``potential_profile``: V and the ratio over an exterior sample
    - ``asz_limit_c``: the large-|y| limit of the direction-averaged ratio
    - ``rigidity_discriminator``: spread of the ratio, checked against the
      ball tolerance or the frozen non-ball floor
    - ``lemma51_check``: shell identity and mean value property on a ball

Sample directions are antipodally symmetric, so the direction average of the
ratio has no 1/|y| term and radii doubling is extrapolated with step ratio 4.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from common.defaults import get_default, level_default
from common.exceptions import DomainError, ParameterError, PreconditionError
from common.parallel import ordered_map
from common.reports import combine, compare
from geometry.domains import Ball
from geometry.measures import analytic_boundary_area
from geometry.meshing import mesh_boundary
from kernels.functions import FundamentalSolution, KuranK, Transformed, gamma, harmonic_monomials
from quadrature.extrapolation import richardson_limit
from quadrature.identities import ball_mean_value_residual, ball_poisson_kernel_gap
from quadrature.integration import IntegralResult, integrate_near_singular, mesh_sum

logger = logging.getLogger('potlab')


# =============================================================================
# EXTERIOR SAMPLES
# =============================================================================


def sample_directions(n, count):
    """
    ``count`` unit vectors closed under ``d -> -d``.

    n=2: equally spaced angles. n=3: a Fibonacci spiral on the upper half
    count plus the antipodes.
    """
    if count < 2 or count % 2:
        raise ParameterError(f'direction count must be even and >= 2, got {count}')
    if n == 2:
        angles = 2.0 * math.pi * np.arange(count) / count
        return np.column_stack([np.cos(angles), np.sin(angles)])
    if n == 3:
        half = count // 2
        k = np.arange(half) + 0.5
        z = 1.0 - 2.0 * k / count
        phi = math.pi * (3.0 - math.sqrt(5.0)) * k
        rho = np.sqrt(1.0 - z * z)
        upper = np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])
        return np.vstack([upper, -upper])
    raise ParameterError(f'direction samples are built for n in {{2, 3}}, got {n}')


def exterior_sample(spec, x0=None, factors=None, directions=None):
    """
    Points ``x0 + f R d`` with R the circumradius about ``x0``.

    Defaults come from ``ASZ_PROFILE_FACTORS`` and ``ASZ_PROFILE_DIRECTIONS``.
    """
    x0 = spec.require_inside(spec.reference_point if x0 is None else x0)
    factors = factors if factors is not None else get_default('ASZ_PROFILE_FACTORS')
    count = directions if directions is not None else level_default('ASZ_PROFILE_DIRECTIONS', spec.n)
    units = sample_directions(spec.n, count)
    radius = spec.circumradius(x0)
    return np.vstack([x0 + factor * radius * units for factor in factors])


def _require_exterior(spec, points):
    points = np.atleast_2d(np.asarray(points, dtype=float))
    inside = spec.closure_contains(points)
    if inside.any():
        bad = points[np.flatnonzero(inside)[0]]
        raise DomainError(f'single-layer point {bad.tolist()} lies in the closed {spec.kind}')
    return points


# =============================================================================
# POTENTIALS
# =============================================================================


def single_layer(spec, y, tol=None, mesh=None):
    """
    ``int_(∂D) Gamma(x - y) dsigma(x)`` for ``y`` outside the closure of D.

    Args:
        spec (DomainSpec): Domain.
        y (array_like): Exterior point.
        tol (float, optional): Absolute tolerance; ``POTLAB['QUAD_TOL']``.
        mesh (SurfaceMesh, optional): Use one midpoint sum on this mesh
            instead of adaptive refinement.

    Returns:
        IntegralResult

    Raises:
        DomainError: If ``y`` is in the closure of D.
    """
    y = _require_exterior(spec, y)[0]
    fn = FundamentalSolution(tuple(y))
    if mesh is not None:
        return IntegralResult(
            value=mesh_sum(mesh, fn), error_estimate=math.nan, levels_used=(mesh.level,), facet_count=mesh.size
        )
    return integrate_near_singular(spec, fn, y, tol=tol)


@dataclass(frozen=True)
class PotentialProfile:
    points: np.ndarray
    values: np.ndarray
    references: np.ndarray
    flags: tuple = ()

    @property
    def ratios(self):
        """``V(y) / Gamma(x0 - y)`` per sample point."""
        return self.values / self.references

    @property
    def mean_ratio(self):
        return float(np.mean(self.ratios))

    @property
    def spread(self):
        """``(max - min) / |mean|`` of the ratios."""
        ratios = self.ratios
        return float((ratios.max() - ratios.min()) / abs(ratios.mean()))

    def rows(self):
        return [(*point, value, ratio) for point, value, ratio in zip(self.points, self.values, self.ratios)]


def profile_header(n):
    return tuple(f'y{i + 1}' for i in range(n)) + ('potential', 'ratio')


def _reference_values(spec, x0, points):
    references = np.atleast_1d(gamma(points - x0, spec.n))
    if np.any(np.abs(references) < 1e-12):
        raise DomainError('Gamma(x0 - y) vanishes at a sample point; the ratio is undefined there')
    return references


def potential_profile(spec, x0=None, points=None, rtol=None):
    """
    Single-layer potential and ratio over an exterior sample.

    Each point is integrated to ``rtol * |∂D| * |Gamma(x0 - y)|``, i.e. the
    ratio to relative accuracy ``rtol`` (default ``BALL_SPREAD_TOL / 100``).
    """
    x0 = spec.require_inside(spec.reference_point if x0 is None else x0)
    points = exterior_sample(spec, x0) if points is None else _require_exterior(spec, points)
    rtol = rtol if rtol is not None else 1e-2 * get_default('BALL_SPREAD_TOL')
    references = _reference_values(spec, x0, points)
    area = analytic_boundary_area(spec) or 1.0

    def one(index):
        return single_layer(spec, points[index], tol=rtol * area * abs(references[index]))

    results = ordered_map(one, range(len(points)))
    flags = tuple(dict.fromkeys(flag for result in results for flag in result.flags))
    if flags:
        logger.warning('potential profile on %s flagged: %s', spec.kind, flags)
    return PotentialProfile(
        points=points,
        values=np.array([result.value for result in results]),
        references=references,
        flags=flags,
    )


@dataclass(frozen=True)
class AszLimit:
    value: float
    radii: tuple
    averages: tuple
    boundary_area: float
    flags: tuple = ()

    @property
    def relative_error(self):
        return abs(self.value - self.boundary_area) / self.boundary_area

    @property
    def converged(self):
        return not self.flags


def asz_limit_c(spec, x0=None, radii_factors=None, directions=None, rtol=None):
    """
    ``lim_{|y| -> inf} V(y) / Gamma(x0 - y)``, which equals |∂D| for every D.

    The ratio is averaged over ``ASZ_DIRECTIONS`` antipodal directions at each
    radius ``f * circumradius`` (``f`` in ``ASZ_RADII_FACTORS``) and the
    averages at the three largest radii are Richardson-extrapolated.
    """
    x0 = spec.require_inside(spec.reference_point if x0 is None else x0)
    factors = tuple(radii_factors if radii_factors is not None else get_default('ASZ_RADII_FACTORS'))
    if len(factors) < 2 or any(b != 2.0 * a for a, b in zip(factors, factors[1:])):
        raise ParameterError(f'radii factors must double, got {factors}')
    count = directions if directions is not None else level_default('ASZ_DIRECTIONS', spec.n)
    radius = spec.circumradius(x0)

    averages, flags = [], []
    for factor in factors:
        profile = potential_profile(spec, x0, exterior_sample(spec, x0, (factor,), count), rtol)
        averages.append(profile.mean_ratio)
        flags.extend(profile.flags)
        logger.debug('asz average at |y| = %.4g: %.10g', factor * radius, profile.mean_ratio)

    value = float(richardson_limit(4.0, averages[-3:]))
    area = analytic_boundary_area(spec)
    if area is None:
        area = mesh_boundary(spec, level_default('PRODUCTION_LEVEL', spec.n)).total_area
    logger.info('asz limit on %s: %.10g vs |∂D| = %.10g', spec.kind, value, area)
    return AszLimit(
        value=value,
        radii=tuple(factor * radius for factor in factors),
        averages=tuple(averages),
        boundary_area=float(area),
        flags=tuple(dict.fromkeys(flags)),
    )


def rigidity_discriminator(spec, x0=None, points=None, rtol=None):
    """
    Verdict on whether ``V(y) / Gamma(x0 - y)`` is constant over the sample.

    A ball centred at ``x0`` must give spread <= ``BALL_SPREAD_TOL``; any
    other domain must exceed the frozen ``RIGIDITY_SPREAD_FLOOR``. The
    report's ``details['verdict']`` is ``'constant'`` or ``'non-constant'``.
    """
    x0 = spec.require_inside(spec.reference_point if x0 is None else x0)
    ball_tol = get_default('BALL_SPREAD_TOL')
    floor = get_default('RIGIDITY_SPREAD_FLOOR')
    centred_ball = isinstance(spec, Ball) and np.allclose(x0, spec.center_array)
    if rtol is None:
        rtol = 1e-2 * (ball_tol if centred_ball else floor)
    profile = potential_profile(spec, x0, points, rtol)
    spread = profile.spread
    verdict = 'constant' if spread <= ball_tol else 'non-constant'
    details = {
        'verdict': verdict,
        'spread': spread,
        'mean_ratio': profile.mean_ratio,
        'samples': len(profile.points),
    }
    if centred_ball:
        report = compare(
            'rigidity',
            spread,
            0.0,
            ball_tol,
            relation='<=',
            provenance={'lhs': 'ratio spread', 'rhs': 'shell identity'},
            flags=profile.flags,
            details=details,
        )
    else:
        report = compare(
            'rigidity',
            spread,
            floor,
            0.0,
            provenance={'lhs': 'ratio spread', 'rhs': 'frozen non-ball floor'},
            flags=profile.flags,
            details=details,
        )
    logger.info('rigidity on %s: spread %.3e, %s', spec.kind, spread, verdict)
    return report, profile


def lemma51_dictionary(ball):
    """Harmonic monomials up to degree 4 and Kuran functions with |alpha| = 2, both centred on the ball."""
    n, centre, radius = ball.n, tuple(ball.center_array), ball.radius
    dictionary = [Transformed(fn, origin=centre, scale=radius) for fn in harmonic_monomials(n, 4)]
    for i in range(n):
        for sign in (1.0, -1.0):
            alpha = [0.0] * n
            alpha[i] = 2.0 * sign
            dictionary.append(Transformed(KuranK(tuple(alpha)), origin=centre, scale=radius))
    return dictionary


def lemma51_check(ball, x0=None, dictionary=None, points=None, tol=None):
    """
    Both directions of the ball characterization, sampled.

    ``gamma`` parts: ``fint Gamma(. - y) = Gamma(x0 - y)`` for exterior y at
    three times the circumradius. ``mean_value`` parts: ``fint u = u(x0)`` for every
    dictionary member, measured relative to ``1 + |u(x0)|``. The Poisson
    kernel at the centre is also checked to be exactly ``1 / |∂B|``.

    Raises:
        PreconditionError: If ``ball`` is not a Ball centred at ``x0``.
        SingularityError: If a dictionary member is singular on the closed ball.
    """
    if not isinstance(ball, Ball):
        raise PreconditionError('the characterization is checked on a ball')
    x0 = ball.center_array if x0 is None else np.asarray(x0, dtype=float)
    if not np.allclose(x0, ball.center_array):
        raise PreconditionError('the characterization is checked at the centre of the ball')
    tol = tol if tol is not None else get_default('LEMMA51_TOL')
    dictionary = lemma51_dictionary(ball) if dictionary is None else dictionary
    points = exterior_sample(ball, x0, (3.0,)) if points is None else points
    area = analytic_boundary_area(ball)

    profile = potential_profile(ball, x0, points, rtol=1e-2 * tol)
    reports = [
        compare(
            f'gamma@{i}',
            value / area,
            reference,
            tol * (1.0 + abs(reference)),
            relation='==',
            flags=profile.flags,
        )
        for i, (value, reference) in enumerate(zip(profile.values, profile.references))
    ]
    residuals = ordered_map(lambda fn: ball_mean_value_residual(fn, ball, tol=1e-2 * tol), dictionary)
    reports += [
        compare(f'mean_value:{getattr(fn, "label", "u")}#{i}', residual, 0.0, tol, relation='<=')
        for i, (fn, residual) in enumerate(zip(dictionary, residuals))
    ]
    mesh = mesh_boundary(ball, level_default('PRODUCTION_LEVEL', ball.n))
    reports.append(compare('poisson_kernel_gap', ball_poisson_kernel_gap(ball, mesh), 0.0, 1e-12, relation='<='))
    return combine('lemma51', reports, details={'points': len(profile.points), 'dictionary': len(dictionary)})
