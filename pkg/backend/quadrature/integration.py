"""
Surface integration over boundary meshes.

Features:
    - ``integrate``: midpoint (centroid) rule over one mesh, with the error
      estimated against the neighbouring refinement level
    - ``integrate_adaptive``: level-by-level refinement with Romberg
      extrapolation until consecutive estimates agree within ``tol``
    - ``integrate_near_singular``: the adaptive rule on meshes graded toward
      the boundary point nearest to an exterior pole
    - ``boundary_mean``: the normalized average ``fint f dsigma``

Integrands are ``HarmonicFn`` objects or any callable mapping an ``(N, n)``
array of points to ``(N,)`` or ``(N, m)`` values; vector integrands are
integrated componentwise on the same meshes.

Notes:
    - Non-convergence is never raised. The result carries
      ``converged=False`` and a warning is logged; callers copy the flag into
      their reports.
    - In deterministic mode facet sums use ``math.fsum``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from common.defaults import get_default, level_default
from common.exceptions import InvalidPoleError, NonFiniteValueError, ParameterError
from geometry.measures import nearest_boundary_point, weighted_sum
from geometry.meshing import mesh_boundary

from .extrapolation import richardson_limit

logger = logging.getLogger('potlab')

NOT_CONVERGED = 'quadrature-not-converged'


@dataclass(frozen=True)
class IntegralResult:
    value: object
    error_estimate: object
    levels_used: tuple
    converged: bool = True
    facet_count: int = 0

    @property
    def flags(self):
        return () if self.converged else (NOT_CONVERGED,)

    def __getitem__(self, index):
        """Component ``index`` of a vector-valued result as a scalar result."""
        return IntegralResult(
            value=float(np.asarray(self.value)[index]),
            error_estimate=float(np.asarray(self.error_estimate)[index]),
            levels_used=self.levels_used,
            converged=self.converged,
            facet_count=self.facet_count,
        )


def _as_float(value):
    value = np.asarray(value, dtype=float)
    return float(value) if value.ndim == 0 else value


def evaluate_on_mesh(mesh, f):
    """``f`` at the facet centroids; raises ``NonFiniteValueError`` naming the first bad facet."""
    values = np.asarray(f(mesh.centroids), dtype=float)
    if values.shape[0] != mesh.size:
        raise ParameterError(f'integrand returned {values.shape[0]} values for {mesh.size} facets')
    finite = np.isfinite(values) if values.ndim == 1 else np.isfinite(values).all(axis=1)
    if not finite.all():
        facet = int(np.flatnonzero(~finite)[0])
        raise NonFiniteValueError(
            f'integrand is not finite at facet {facet} (centroid {mesh.centroids[facet].tolist()})', facet=facet
        )
    return values


def mesh_sum(mesh, f):
    values = evaluate_on_mesh(mesh, f)
    weights = mesh.areas if values.ndim == 1 else mesh.areas[:, None]
    return _as_float(weighted_sum(values, weights))


def integrate(mesh, f, tol=None):
    """
    Midpoint rule ``sum f(centroid) * area`` over ``mesh``.

    Args:
        mesh (SurfaceMesh): Boundary mesh.
        f (callable): Integrand.
        tol (float, optional): When given, ``converged`` records whether the
            level-to-level difference is below it.

    Returns:
        IntegralResult: ``error_estimate`` is the difference to the next
        coarser level (or the next finer one for a level-0 mesh).

    Raises:
        NonFiniteValueError: If ``f`` is not finite at some centroid.
    """
    value = mesh_sum(mesh, f)
    other_level = mesh.level - 1 if mesh.level > 0 else 1
    other = mesh_sum(mesh.at_level(other_level), f)
    error = _as_float(np.abs(np.asarray(value) - np.asarray(other)))
    converged = True if tol is None else bool(np.max(error) <= tol)
    return IntegralResult(
        value=value,
        error_estimate=error,
        levels_used=tuple(sorted((mesh.level, other_level))),
        converged=converged,
        facet_count=mesh.size,
    )


def integrate_adaptive(
    spec, f, tol=None, grading_center=None, pole_gap=None, mean=False, start_level=0, max_level=None, pieces=None
):
    """
    Refine level by level until Romberg estimates settle.

    The raw midpoint sums ``s_L`` carry errors in even powers of the facet
    size, so the estimate at level L is the Richardson limit (ratio 4) of the
    last three sums, and ``error_estimate`` is the change of that estimate
    between consecutive levels. At least three levels are always used.

    Args:
        spec (DomainSpec): Domain whose boundary is integrated.
        f (callable): Integrand.
        tol (float, optional): Absolute tolerance; ``POTLAB['QUAD_TOL']``.
        grading_center, pole_gap: Passed to ``mesh_boundary``.
        mean (bool): Divide by the boundary measure (``fint``).
        start_level (int): First level used.
        max_level (int, optional): Level cap; ``POTLAB['LEVEL_CAP'][n]``.
        pieces (tuple, optional): Beaked sphere piece selection.

    Returns:
        IntegralResult: Flagged with ``converged=False`` when the cap is hit.
    """
    tol = tol if tol is not None else get_default('QUAD_TOL')
    max_level = max_level if max_level is not None else level_default('LEVEL_CAP', spec.n)
    if max_level < start_level + 2:
        raise ParameterError(f'adaptive integration needs three levels, got {start_level}..{max_level}')

    raw, estimates = [], []
    error = np.inf
    converged = False
    for level in range(start_level, max_level + 1):
        mesh = mesh_boundary(spec, level, grading_center=grading_center, pole_gap=pole_gap, pieces=pieces)
        value = np.asarray(mesh_sum(mesh, f))
        if mean:
            value = value / weighted_sum(mesh.areas, np.ones_like(mesh.areas))
        raw.append(value)
        estimates.append(richardson_limit(4.0, raw[-3:]))
        if len(estimates) >= 3:
            error = np.abs(estimates[-1] - estimates[-2])
            logger.debug('level %d: estimate %s, change %s, %d facets', level, estimates[-1], error, mesh.size)
            if np.max(error) < tol:
                converged = True
                break

    if not converged:
        logger.warning(
            'adaptive quadrature on %s did not reach tol %.3g by level %d (change %s)', spec.kind, tol, level, error
        )
    return IntegralResult(
        value=_as_float(estimates[-1]),
        error_estimate=_as_float(error),
        levels_used=tuple(range(start_level, level + 1)),
        converged=converged,
        facet_count=mesh.size,
    )


def pole_grading(spec, pole):
    """Grading centre and gap for an exterior ``pole``."""
    pole = np.asarray(pole, dtype=float)
    if spec.closure_contains(pole[None, :])[0]:
        raise InvalidPoleError(f'pole {pole.tolist()} is not outside the closed {spec.kind}')
    center = nearest_boundary_point(spec, pole)
    gap = float(np.linalg.norm(pole - center))
    if gap == 0:
        raise InvalidPoleError('pole lies on the boundary')
    return center, gap


def integrate_near_singular(spec, f, pole, tol=None, mean=False, start_level=0, max_level=None, pieces=None):
    """
    Integrate ``f`` whose singularity sits at an exterior ``pole`` close to ∂D.

    Meshes are graded toward the boundary point nearest the pole with finest
    width ``dist(pole, ∂D) / 4``, then refined as in ``integrate_adaptive``.

    Raises:
        InvalidPoleError: If the pole is in the closure of D.
    """
    center, gap = pole_grading(spec, pole)
    return integrate_adaptive(
        spec,
        f,
        tol=tol,
        grading_center=center,
        pole_gap=gap,
        mean=mean,
        start_level=start_level,
        max_level=max_level,
        pieces=pieces,
    )


def boundary_mean(spec, f, tol=None, pole=None, max_level=None, pieces=None):
    """``fint_{∂D} f dsigma``, graded toward ``pole`` when one is given."""
    if pole is None:
        return integrate_adaptive(spec, f, tol=tol, mean=True, max_level=max_level, pieces=pieces)
    return integrate_near_singular(spec, f, pole, tol=tol, mean=True, max_level=max_level, pieces=pieces)
