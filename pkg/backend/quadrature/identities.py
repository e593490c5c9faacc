"""
Closed-form self-tests for the quadrature layer.

Each function returns a residual that is exactly zero in exact arithmetic:

    sphere_ratio_identity      2 s_(n-1) * int_0^inf s^(n-2) / (s^2 + 1)^(n/2) ds = s_n
    ball_mean_value_residual   fint_(∂B) f = f(centre) for f harmonic on the closed ball
    ball_poisson_mass          int_(∂B(0,R)) h_a dsigma = -s_n R^(n-1) for |a| > R
    ball_poisson_kernel_gap    sup_(∂B) | |∂B| P(x0, x) - 1 | = 0 for the Poisson
                               kernel P of B(x0, R) with pole at the centre
"""

import logging
import math

import numpy as np
from scipy import integrate as scipy_integrate

from common.defaults import get_default
from common.exceptions import InvalidPoleError, ParameterError, SingularityError
from geometry.domains import Ball
from kernels.functions import KuranH, Transformed, sphere_area

from .integration import boundary_mean, integrate_near_singular, mesh_sum

logger = logging.getLogger('potlab')


def sphere_ratio_identity(n):
    """
    Relative residual of ``2 s_(n-1) I_n = s_n``.

    ``I_n`` is integrated with ``scipy.integrate.quad`` over decades
    [0, 1], [1, 10], ..., up to ``POTLAB['IDENTITY_TAIL_CUTOFF']``; beyond
    the cutoff the integrand is below ``s**-2`` and the tail is taken as its
    bound ``1 / S``.
    """
    if n < 2:
        raise ParameterError(f'identity needs n >= 2, got {n}')
    cutoff = get_default('IDENTITY_TAIL_CUTOFF')
    integrand = lambda s: s ** (n - 2) / (s * s + 1.0) ** (n / 2.0)
    breaks = [0.0] + [10.0 ** k for k in range(0, int(round(math.log10(cutoff))) + 1)]
    total = math.fsum(
        scipy_integrate.quad(integrand, a, b, epsabs=0.0, epsrel=1e-14, limit=200)[0] for a, b in zip(breaks, breaks[1:])
    )
    total += 1.0 / cutoff
    lhs = 2.0 * sphere_area(n - 1) * total
    residual = abs(lhs - sphere_area(n)) / sphere_area(n)
    logger.debug('sphere ratio identity n=%d: residual %.3e', n, residual)
    return residual


def _require_ball(ball):
    if not isinstance(ball, Ball):
        raise ParameterError('ball identities need a Ball')
    return ball


def ball_mean_value_residual(f, ball, mesh=None, tol=1e-9):
    """
    ``|fint f dsigma - f(centre)| / (1 + |f(centre)|)``.

    With ``mesh`` the single midpoint sum over that mesh is used; otherwise
    the adaptive rule runs to ``tol`` with grading toward the singular point
    nearest to the sphere.

    Raises:
        SingularityError: If a singular point of ``f`` lies in the closed ball.
    """
    ball = _require_ball(ball)
    singular = f.singular_points()
    if len(singular) and ball.closure_contains(singular).any():
        raise SingularityError(f'{f.label} is singular inside the closed ball')
    centre_value = float(f(ball.center_array))
    if mesh is not None:
        mean = mesh_sum(mesh, f) / mesh.areas.sum()
    else:
        pole = None
        if len(singular):
            pole = singular[np.argmin(np.linalg.norm(singular - ball.center_array, axis=1))]
        result = boundary_mean(ball, f, tol=tol, pole=pole)
        if not result.converged:
            logger.warning('mean value of %s not converged (change %.3g)', f.label, result.error_estimate)
        mean = result.value
    return abs(mean - centre_value) / (1.0 + abs(centre_value))


def ball_poisson_mass(alpha, ball=None, mesh=None, tol=1e-9):
    """
    ``|int h_a dsigma + s_n R^(n-1)| / (s_n R^(n-1))`` on ``ball`` (default B(0, 1)).

    ``alpha`` is measured from the ball centre.

    Raises:
        InvalidPoleError: If ``|alpha| <= R``.
    """
    alpha = np.asarray(alpha, dtype=float)
    ball = _require_ball(ball if ball is not None else Ball(alpha.shape[0]))
    if np.linalg.norm(alpha) <= ball.radius:
        raise InvalidPoleError(f'|alpha| = {np.linalg.norm(alpha):.6g} must exceed the radius {ball.radius}')
    fn = Transformed(KuranH(tuple(alpha)), origin=ball.center)
    exact = sphere_area(ball.n) * ball.radius ** (ball.n - 1)
    if mesh is not None:
        value = mesh_sum(mesh, fn)
    else:
        result = integrate_near_singular(ball, fn, ball.center_array + alpha, tol=tol * exact)
        if not result.converged:
            logger.warning('Poisson mass for |alpha|=%.6g not converged', np.linalg.norm(alpha))
        value = result.value
    return abs(value + exact) / exact


def ball_poisson_kernel_gap(ball, mesh):
    """
    ``max over centroids of | |∂B| P(x0, x) - 1 |`` with ``x0`` the centre.

    ``P(y, x) = (R^2 - |y - c|^2) / (s_n R |x - y|^n)`` is the Poisson kernel
    of B(c, R); at the centre it is constant on the sphere, so the value is
    zero up to rounding.
    """
    ball = _require_ball(ball)
    n, radius = ball.n, ball.radius
    distance = np.linalg.norm(mesh.centroids - ball.center_array, axis=1)
    kernel = radius ** 2 / (sphere_area(n) * radius * distance ** n)
    surface = sphere_area(n) * radius ** (n - 1)
    return float(np.max(np.abs(surface * kernel - 1.0)))
