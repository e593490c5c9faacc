"""
Kuran gap, h* and Gauss-gap estimators.

Definitions, for a domain D, an interior point x0 and a touching point z of
the biggest ball B(x0, r) inside D (all recentred so that x0 is the origin):

    L(z)   liminf over alpha -> z radially of | fint_{∂D} k_alpha dsigma |
    L*(z)  limsup of fint_{∂D} |h_alpha| dsigma
    K      inf of L(z) over the touching set (+inf when it is empty)
    h*     inf of L*(z) over the touching set

Each limit is sampled along an ``ApproachSchedule`` and extrapolated in
``t - 1``. One schedule pass integrates the vector ``(k, |k|, |h|)`` so L, L*
and the Kuran ratios share the same meshes; passes are memoized per
(domain, x0, z, schedule, tolerance, mesh settings).

The surface Gauss gap ``sup_u |u(x0) - fint u| / fint |u|`` runs over every
harmonic u, so ``gauss_gap_lower`` only ever returns a lower bound over a
finite dictionary.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from common.defaults import get_default, level_default
from common.exceptions import ParameterError, SingularityError
from common.parallel import ordered_map
from geometry.domains import BeakedSphere
from geometry.measures import inradius_touching, nearest_boundary_point
from kernels.functions import (
    ConeU,
    FundamentalSolution,
    HarmonicMonomial,
    KuranH,
    KuranK,
    Transformed,
    harmonic_monomials,
)
from quadrature.extrapolation import richardson_limit
from quadrature.integration import boundary_mean

from .schedules import ApproachSchedule

logger = logging.getLogger('potlab')

EMPTY_TOUCHING_SET = 'empty-touching-set'
SCHEDULE_NOT_CONVERGED = 'schedule-not-converged'


@dataclass(frozen=True)
class GapEstimate:
    samples: tuple
    extrapolated: float
    converged: bool
    method: str
    tolerance: float = 0.0
    flags: tuple = ()
    z: tuple = None
    details: dict = field(default_factory=dict, compare=False)

    @property
    def values(self):
        return np.array([value for _, value in self.samples])

    @property
    def tail_difference(self):
        if len(self.samples) < 2:
            return 0.0
        return abs(self.samples[-1][1] - self.samples[-2][1])


@dataclass(frozen=True)
class KuranSamples:
    """Schedule means of ``k``, ``|k|`` and ``|h|`` at each pole, in schedule order."""

    factors: tuple
    mean_k: tuple
    mean_abs_k: tuple
    mean_abs_h: tuple
    flags: tuple

    @property
    def kuran_ratios(self):
        return np.abs(self.mean_k) / np.asarray(self.mean_abs_k)


def _tuple(x):
    return tuple(float(v) for v in np.asarray(x, dtype=float).ravel())


def _kuran_vector(alpha, x0):
    h = Transformed(KuranH(_tuple(alpha)), origin=_tuple(x0))

    def integrand(points):
        values = h.evaluate(points)
        return np.column_stack([1.0 + values, np.abs(1.0 + values), np.abs(values)])

    return integrand


MESH_KEYS = (
    'MESH_BASE_ARCS_2D',
    'MESH_BASE_RINGS_3D',
    'MESH_MAX_AZIMUTH_3D',
    'MESH_MIN_AZIMUTH_3D',
    'MESH_GRADING_RATIO',
    'MESH_DEFAULT_POLE_GAP',
    'BEAKED_BASE_CELLS',
)


def mesh_settings_key():
    """The ``POTLAB`` mesh entries a schedule pass depends on, as a hashable key."""
    return tuple(get_default(key, None) for key in MESH_KEYS)


@lru_cache(maxsize=128)
def _sample_schedule(spec, x0, schedule, tol, max_level, mesh_key):
    poles = schedule.check_exterior(spec)
    origin = np.asarray(x0)

    def sample(pole):
        return boundary_mean(spec, _kuran_vector(pole - origin, origin), tol=tol, pole=pole, max_level=max_level)

    results = ordered_map(sample, list(poles))
    flags = tuple(dict.fromkeys(flag for result in results for flag in result.flags))
    means = np.array([np.asarray(result.value) for result in results])
    logger.debug('schedule toward %s on %s: means %s', schedule.z, spec.kind, means.tolist())
    return KuranSamples(
        factors=_tuple(schedule.factors),
        mean_k=_tuple(means[:, 0]),
        mean_abs_k=_tuple(means[:, 1]),
        mean_abs_h=_tuple(means[:, 2]),
        flags=flags,
    )


def _resolve_schedule(schedule):
    if schedule is None:
        return ApproachSchedule.from_settings()
    return schedule


def sample_kuran_means(spec, x0, z, schedule=None, tol=None, max_level=None):
    """
    Integrate ``(k, |k|, |h|)`` at every pole of ``schedule`` bound to ``(x0, z)``.

    Raises:
        InvalidPoleError: If a pole is not exterior to the closed domain.
        PreconditionError: If the schedule has fewer than four poles.
    """
    x0 = spec.require_inside(x0)
    bound = _resolve_schedule(schedule).toward(x0, z)
    tol = tol if tol is not None else get_default('QUAD_TOL')
    max_level = max_level if max_level is not None else level_default('LEVEL_CAP', spec.n)
    return _sample_schedule(spec, bound.x0, bound, float(tol), int(max_level), mesh_settings_key())


def _oscillating(values, threshold):
    diffs = np.diff(values[-4:])
    if len(diffs) < 3:
        return False
    return bool(np.all(diffs[1:] * diffs[:-1] < 0) and np.max(np.abs(diffs)) > threshold)


def extrapolate_tail(factors, values, step_ratio, side, gap_tol=None, floor=None, scale=1.0):
    """
    Limit of ``values`` sampled at ``t = factors`` as ``t -> 1``.

    Richardson extrapolation over the last three samples in powers of
    ``t - 1``; if the tail alternates by more than ``gap_tol * scale`` the
    conservative tail minimum (``side='min'``) or maximum (``side='max'``) is
    reported instead. The tail has converged when its last step is within
    ``gap_tol * scale``.

    Args:
        scale (float): Magnitude the tolerance is relative to. The default 1
            makes ``gap_tol`` absolute, which suits quantities of order one;
            callers tracking a small quantity pass its expected size.

    Returns:
        tuple: ``(extrapolated, converged, method)``.
    """
    gap_tol = gap_tol if gap_tol is not None else get_default('GAP_TOL')
    if not scale > 0:
        raise ParameterError(f'tail scale must be positive, got {scale}')
    threshold = gap_tol * scale
    values = np.asarray(values, dtype=float)
    tail = values[-3:]
    if _oscillating(values, threshold):
        logger.warning('schedule samples oscillate (tail %s); using tail-%s', tail.tolist(), side)
        extrapolated = float(tail.min() if side == 'min' else tail.max())
        method = f'tail-{side}'
    else:
        extrapolated = float(richardson_limit(step_ratio, list(tail)))
        method = 'richardson'
    if floor is not None:
        extrapolated = max(extrapolated, floor)
    converged = bool(abs(values[-1] - values[-2]) <= threshold) and math.isfinite(extrapolated)
    return extrapolated, converged, method


def _estimate(factors, values, schedule, side, flags, z, floor=0.0, gap_tol=None, scale=None):
    gap_tol = gap_tol if gap_tol is not None else get_default('GAP_TOL')
    scale = 1.0 if scale is None else float(scale)
    extrapolated, converged, method = extrapolate_tail(
        factors, values, schedule.step_ratio, side, gap_tol=gap_tol, floor=floor, scale=scale
    )
    flags = tuple(flags)
    if not converged:
        flags += (SCHEDULE_NOT_CONVERGED,)
    return GapEstimate(
        samples=tuple(zip(factors, (float(v) for v in values))),
        extrapolated=extrapolated,
        converged=converged and not flags,
        method=method,
        tolerance=gap_tol * scale,
        flags=tuple(dict.fromkeys(flags)),
        z=_tuple(z),
    )


def L_of_z(spec, x0, z, schedule=None, tol=None, gap_tol=None, scale=None):
    """
    ``L(z)``: the limit of ``|fint k_alpha dsigma|`` as ``alpha -> z`` radially.

    ``gap_tol`` and ``scale`` set the tail test (see ``extrapolate_tail``);
    ``GapEstimate.tolerance`` holds their product.

    Returns:
        GapEstimate: Flagged when any sample's quadrature or the tail test
        fails to converge.
    """
    schedule = _resolve_schedule(schedule)
    samples = sample_kuran_means(spec, x0, z, schedule, tol)
    return _estimate(
        samples.factors, np.abs(samples.mean_k), schedule, 'min', samples.flags, z, gap_tol=gap_tol, scale=scale
    )


def Lstar_of_z(spec, x0, z, schedule=None, tol=None, gap_tol=None, scale=None):
    """``L*(z)``: the limit of ``fint |h_alpha| dsigma`` as ``alpha -> z`` radially."""
    schedule = _resolve_schedule(schedule)
    samples = sample_kuran_means(spec, x0, z, schedule, tol)
    return _estimate(
        samples.factors, samples.mean_abs_h, schedule, 'max', samples.flags, z, gap_tol=gap_tol, scale=scale
    )


def representatives(candidates):
    """One Dini touching point per symmetry class, in input order."""
    seen, reps = set(), []
    for candidate in candidates:
        if not candidate.dini_asserted:
            continue
        key = candidate.symmetry_class or candidate.z
        if key in seen:
            continue
        seen.add(key)
        reps.append(candidate)
    return reps


def _empty_estimate(convention):
    return GapEstimate(
        samples=(),
        extrapolated=math.inf,
        converged=True,
        method=EMPTY_TOUCHING_SET,
        tolerance=get_default('GAP_TOL'),
        details={'convention': convention},
    )


def _inf_over_touching_set(estimator, spec, x0, candidates, schedule, tol, convention):
    x0 = spec.require_inside(spec.reference_point if x0 is None else x0)
    if candidates is None:
        _, candidates = inradius_touching(spec, x0)
    reps = representatives(candidates)
    if not reps:
        logger.info('%s: no Dini touching point at %s, returning +inf', spec.kind, x0.tolist())
        return _empty_estimate(convention)
    estimates = [estimator(spec, x0, candidate.point, schedule, tol) for candidate in reps]
    best = min(estimates, key=lambda e: e.extrapolated)
    flags = tuple(dict.fromkeys(flag for e in estimates for flag in e.flags))
    return replace(
        best,
        converged=all(e.converged for e in estimates),
        flags=flags,
        details={
            'classes': [c.symmetry_class for c in reps],
            'per_class': [e.extrapolated for e in estimates],
        },
    )


def kuran_gap(spec, x0=None, candidates=None, schedule=None, tol=None):
    """
    Kuran gap ``K(∂D, x0)``: the minimum of ``L(z)`` over touching representatives.

    Args:
        spec (DomainSpec): Domain.
        x0 (array_like, optional): Interior point; the domain's reference point.
        candidates (list of TouchingPoint, optional): Touching set; enumerated
            with ``inradius_touching`` when omitted.
        schedule (ApproachSchedule, optional): Template; ``POTLAB['SCHEDULE']``.
        tol (float, optional): Quadrature tolerance per sample.

    Returns:
        GapEstimate: ``extrapolated = +inf`` with method ``empty-touching-set``
        when no Dini touching point exists.
    """
    return _inf_over_touching_set(L_of_z, spec, x0, candidates, schedule, tol, 'K = +inf on an empty touching set')


def hstar(spec, x0=None, candidates=None, schedule=None, tol=None):
    """``h*(∂D, x0)``: the minimum of ``L*(z)`` over touching representatives; +inf by convention when empty."""
    return _inf_over_touching_set(
        Lstar_of_z, spec, x0, candidates, schedule, tol, 'h* = +inf on an empty touching set (convention)'
    )


# =============================================================================
# GAUSS GAP LOWER BOUND
# =============================================================================


@dataclass(frozen=True)
class GaussLowerBound:
    value: float
    maximizer: str
    ratios: dict
    converged: bool
    flags: tuple = ()


def function_label(fn):
    """Readable name of a dictionary function, including its singular point."""
    inner = fn.fn if isinstance(fn, Transformed) else fn
    if isinstance(inner, HarmonicMonomial):
        return inner.name or inner.label
    singular = fn.singular_points()
    if len(singular):
        where = ','.join(f'{v:.4g}' for v in singular[0])
        return f'{inner.label}@({where})'
    return inner.label


def _similarity(spec, x0):
    frame = getattr(spec, 'frame', None)
    frame = np.eye(spec.n) if frame is None else np.asarray(frame)
    r, _ = inradius_touching(spec, x0)
    return tuple(map(tuple, frame)), float(r)


def default_dictionary(spec, x0=None, candidates=None, schedule=None):
    """
    Dictionary moved rigidly with the domain.

    Contains harmonic monomials of degree <= 4 in body coordinates scaled by
    the inradius, fundamental solutions with poles on the sphere of radius
    ``GAMMA_POLE_FACTOR * circumradius`` along the body axes, Kuran functions
    with poles at ``t`` in ``KURAN_DICTIONARY_T`` (and the last schedule
    factor) toward every touching representative, and the cone function for
    beaked spheres.
    """
    x0 = spec.require_inside(spec.reference_point if x0 is None else x0)
    frame, r = _similarity(spec, x0)
    origin = _tuple(x0)
    dictionary = [Transformed(m, origin=origin, frame=frame, scale=r) for m in harmonic_monomials(spec.n, 4)]

    radius = get_default('GAMMA_POLE_FACTOR') * spec.circumradius(x0) / r
    for i in range(spec.n):
        for sign in (1.0, -1.0):
            pole = np.zeros(spec.n)
            pole[i] = sign * radius
            dictionary.append(Transformed(FundamentalSolution(_tuple(pole)), origin=origin, frame=frame, scale=r))

    if candidates is None:
        _, candidates = inradius_touching(spec, x0)
    factors = list(get_default('KURAN_DICTIONARY_T'))
    factors.append(float(_resolve_schedule(schedule).factors[-1]))
    body = np.asarray(frame)
    for candidate in representatives(candidates):
        direction = (candidate.point - x0) @ body / r
        for t in sorted(set(factors)):
            dictionary.append(Transformed(KuranK(_tuple(t * direction)), origin=origin, frame=frame, scale=r))

    if isinstance(spec, BeakedSphere):
        dictionary.append(ConeU(spec.n, apex=_tuple(spec.apex)))
    return dictionary


def _group_integrand(functions):
    def integrand(points):
        values = np.column_stack([f.evaluate(points) for f in functions])
        return np.hstack([values, np.abs(values)])

    return integrand


def _grading_pole(spec, fn):
    singular = fn.singular_points()
    if not len(singular):
        return None
    if spec.closure_contains(singular).any():
        raise SingularityError(f'{function_label(fn)} is singular inside the closed {spec.kind}')
    gaps = [np.linalg.norm(s - nearest_boundary_point(spec, s)) for s in singular]
    return singular[int(np.argmin(gaps))]


def gauss_gap_lower(spec, x0=None, dictionary=None, tol=None):
    """
    Lower bound ``max_u |u(x0) - fint u| / fint |u|`` for the surface Gauss gap.

    Polynomials are integrated together on ungraded meshes; every function
    with a singular point gets meshes graded toward the boundary point
    nearest to it.

    Raises:
        ParameterError: If the dictionary is empty.
        SingularityError: If a dictionary function is singular in the closed domain.
    """
    x0 = spec.require_inside(spec.reference_point if x0 is None else x0)
    dictionary = default_dictionary(spec, x0) if dictionary is None else list(dictionary)
    if not dictionary:
        raise ParameterError('Gauss gap needs a non-empty dictionary')
    poles = [_grading_pole(spec, fn) for fn in dictionary]

    smooth = [fn for fn, pole in zip(dictionary, poles) if pole is None]
    groups = [(smooth, None)] if smooth else []
    groups += [([fn], pole) for fn, pole in zip(dictionary, poles) if pole is not None]

    def run(group):
        functions, pole = group
        result = boundary_mean(spec, _group_integrand(functions), tol=tol, pole=pole)
        values = np.atleast_1d(np.asarray(result.value))
        count = len(functions)
        return [(fn, values[i], values[count + i], result.flags) for i, fn in enumerate(functions)]

    ratios, flags = {}, []
    for rows in ordered_map(run, groups):
        for fn, mean, mean_abs, row_flags in rows:
            flags.extend(row_flags)
            if mean_abs <= 0:
                continue
            centre_value = float(fn(x0))
            ratios[function_label(fn)] = abs(centre_value - mean) / mean_abs
    if not ratios:
        raise ParameterError('every dictionary function vanishes on the boundary')
    maximizer = max(ratios, key=ratios.get)
    flags = tuple(dict.fromkeys(flags))
    logger.info('Gauss lower bound on %s: %.6g from %s', spec.kind, ratios[maximizer], maximizer)
    return GaussLowerBound(
        value=float(ratios[maximizer]), maximizer=maximizer, ratios=ratios, converged=not flags, flags=flags
    )
