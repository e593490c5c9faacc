"""
Sweeps over the beak parameter eps.

Every quantity attached to the beaked sphere scales like a power of eps as
eps -> 0; the sweeps sample it on a geometric grid and fit the exponent.

Features:
    - ``area_deficit_sweep``: |∂D(eps)| - |∂B(eps)| ~ alpha_0 eps**(n-1)
    - ``gauss_ratio``: Gauss ratio of the cone function, bounded below in eps
    - ``I_decomposition``: the three piece integrals of the cone function
    - ``kuran_sweep``: Kuran gap of the recentred domain ~ eps**(n-1)
    - ``piece_route_limit``: the same limit from piece integrals at t = 1
    - ``exponent_fit``: least-squares and asymptotic log-log exponents
    - ``run_sweep``: the table behind the ``sweep`` command

Notes:
    - Frozen floors (``GAUSS_RATIO_FLOOR``) are regression values, not
      constants derived from theory.
    - Sweep points are independent and run through ``ordered_map``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from common.defaults import get_default
from common.exceptions import ParameterError
from common.parallel import ordered_map
from common.reports import VerificationReport, combine, compare
from gaps.estimators import L_of_z
from gaps.schedules import ApproachSchedule
from geometry.domains import Ball, BeakedSphere
from geometry.measures import deficit_quantities
from kernels.functions import ConeU, HarmonicMonomial, KuranK, ball_volume, sphere_area
from quadrature.extrapolation import loglog_slope, secant_slopes
from quadrature.integration import boundary_mean, integrate_adaptive

from .construction import build_beaked, limit_constants

logger = logging.getLogger('potlab')


def sweep_grid(lo=None, hi=None, count=None):
    """Geometric eps grid; defaults from ``POTLAB['SWEEP_EPS']``."""
    d_lo, d_hi, d_count = get_default('SWEEP_EPS')
    lo, hi, count = lo or d_lo, hi or d_hi, count or d_count
    if not 0 < lo < hi:
        raise ParameterError(f'sweep needs 0 < lo < hi, got {lo}..{hi}')
    if count < 2:
        raise ParameterError(f'sweep needs at least two points, got {count}')
    return np.geomspace(lo, hi, int(count))


def _grid(eps_list, minimum):
    eps = np.sort(np.asarray(eps_list, dtype=float))
    if eps.size < minimum:
        raise ParameterError(f'sweep needs at least {minimum} eps values, got {eps.size}')
    return eps


# =============================================================================
# EXPONENTS
# =============================================================================


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    asymptotic_slope: float
    secants: tuple
    midpoints: tuple


def exponent_fit(eps, values, degree=1):
    """
    Exponent ``p`` of ``values ~ C eps**p``.

    ``slope`` is the least-squares log-log slope over all points. The
    asymptotic slope removes the ``1 + O(eps)`` correction: the secant slopes
    nearest eps = 0 (``degree + 2`` of them) are fitted by a polynomial of
    ``degree`` in the secant midpoint and evaluated at eps = 0.
    """
    eps, values = np.asarray(eps, dtype=float), np.asarray(values, dtype=float)
    order = np.argsort(eps)
    eps, values = eps[order], values[order]
    if eps.size < 2:
        raise ParameterError('exponent fit needs at least two points')
    slope = loglog_slope(eps, values)
    secants, mids = secant_slopes(eps, values)
    used = min(secants.size, degree + 2)
    if used >= 2:
        coeffs = np.polyfit(mids[:used], secants[:used], min(degree, used - 1))
        asymptotic = float(coeffs[-1])
    else:
        asymptotic = float(secants[0])
    return ExponentFit(slope=slope, asymptotic_slope=asymptotic, secants=tuple(secants), midpoints=tuple(mids))


def exponent_report(name, fit, expected, tol):
    """
    Check the least-squares exponent of ``fit`` against ``expected``.

    The asymptotic exponent is judged with the same tolerance and reported in
    ``details`` next to it; only the least-squares verdict decides the report.
    """
    asymptotic = compare(f'{name}_asymptotic', fit.asymptotic_slope, expected, tol, relation='==')
    return compare(
        name,
        fit.slope,
        expected,
        tol,
        relation='==',
        details={
            'least_squares_slope': fit.slope,
            'asymptotic_slope': fit.asymptotic_slope,
            'asymptotic_passed': asymptotic.passed,
            'asymptotic_margin': asymptotic.margin,
        },
    )


def small_eps_intercept(eps, values, degree=2):
    """Value at eps = 0 of a polynomial of ``degree`` fitted to the ``degree + 2`` smallest eps."""
    eps, values = np.asarray(eps, dtype=float), np.asarray(values, dtype=float)
    order = np.argsort(eps)[: degree + 2]
    return float(np.polyfit(eps[order], values[order], min(degree, order.size - 1))[-1])


# =============================================================================
# AREA ASYMPTOTICS
# =============================================================================


@dataclass(frozen=True)
class AreaSweep:
    n: int
    m: int
    eps: tuple
    deficits: tuple
    mesh_deficits: tuple
    star_scaled: tuple
    fit: ExponentFit
    alpha0: float
    alpha0_analytic: float

    @property
    def alpha0_relative_error(self):
        return abs(self.alpha0 - self.alpha0_analytic) / self.alpha0_analytic

    @property
    def star_spread(self):
        """Relative spread of ``|Sigma*_eps| / eps**(m(n-1))`` across the sweep."""
        star = np.asarray(self.star_scaled)
        return float((star.max() - star.min()) / star.mean())


def area_deficit_sweep(eps_list, m=None, n=2, level=None):
    """
    Area deficit ``-|Sigma_eps| + |S_eps| + |Sigma*_eps|`` across eps.

    ``alpha_0`` is extrapolated from ``(deficit - |Sigma*|) / eps**(n-1)``
    and compared with the closed form ``|S_0| - |Sigma_0|``.

    Raises:
        ParameterError: With fewer than four eps values.
    """
    eps = _grid(eps_list, 4)

    def one(value):
        spec, pieces = build_beaked(value, m, n, level=level)
        mesh_areas = pieces.mesh_areas
        mesh_deficit = mesh_areas['cone_side'] + mesh_areas['sigma_star'] - mesh_areas['sigma']
        star = pieces.analytic_areas['sigma_star'] / value ** (spec.m * (n - 1))
        return spec.m, pieces.area_deficit, mesh_deficit, pieces.analytic_areas['sigma_star'], star

    rows = ordered_map(one, eps)
    m = rows[0][0]
    deficits = np.array([row[1] for row in rows])
    stars = np.array([row[3] for row in rows])
    reduced = (deficits - stars) / eps ** (n - 1)
    sweep = AreaSweep(
        n=n,
        m=m,
        eps=tuple(eps),
        deficits=tuple(deficits),
        mesh_deficits=tuple(row[2] for row in rows),
        star_scaled=tuple(row[4] for row in rows),
        fit=exponent_fit(eps, deficits),
        alpha0=small_eps_intercept(eps, reduced),
        alpha0_analytic=limit_constants(n)['alpha0'],
    )
    logger.info(
        'area sweep n=%d m=%d: slope %.4f (asymptotic %.4f), alpha0 %.5f vs %.5f',
        n,
        m,
        sweep.fit.slope,
        sweep.fit.asymptotic_slope,
        sweep.alpha0,
        sweep.alpha0_analytic,
    )
    return sweep


# =============================================================================
# CONE FUNCTION
# =============================================================================


def _with_abs(fn):
    def integrand(points):
        values = fn.evaluate(points)
        return np.column_stack([values, np.abs(values)])

    return integrand


def _cone_scale(spec):
    """Size of ``fint u`` on ∂D(eps): ``c_0 eps**-m / |∂D(eps)|``."""
    return limit_constants(spec.n)['c0'] * spec.eps ** (-spec.m) / spec.boundary_area()


@dataclass(frozen=True)
class GaussRatio:
    eps: float
    ratio: float
    numerator: float
    denominator: float
    scaled_numerator: float
    scaled_denominator: float
    control_ratio: float
    ball_ratio: float
    flags: tuple = ()

    @property
    def converged(self):
        return not self.flags


def _ratio(spec, fn, x0, tol, pole=None):
    result = boundary_mean(spec, _with_abs(fn), tol=tol, pole=pole)
    mean, mean_abs = np.asarray(result.value)
    numerator = abs(float(fn(x0)) - mean)
    return numerator, float(mean_abs), result.flags


def gauss_ratio(eps, m=None, n=2, tol=None):
    """
    ``|u(x(eps)) - fint u| / fint |u|`` on ∂D(eps) for the cone function u.

    Alongside the ratio the record carries the eps**m-scaled numerator and
    denominator, the same ratio for the control ``u = x_1`` (which is not
    bounded below) and the ratio over the pure sphere ∂B(eps) (zero by the
    mean value property).
    """
    spec = BeakedSphere(n, eps=eps, m=m)
    x0 = spec.x_eps
    scale = _cone_scale(spec)
    rtol = get_default('SWEEP_SAMPLE_RTOL') if tol is None else tol
    cone = ConeU(n)
    numerator, denominator, flags = _ratio(spec, cone, x0, rtol * scale)

    x1 = HarmonicMonomial(n, ((tuple(1 if i == 0 else 0 for i in range(n)), 1.0),), 'x1')
    control_num, control_den, control_flags = _ratio(spec, x1, x0, rtol * get_default('QUAD_TOL'))

    ball = Ball(n, center=tuple(x0))
    ball_num, ball_den, ball_flags = _ratio(ball, cone, x0, rtol * 1e-2 * abs(float(cone(x0))), pole=spec.apex)

    scale_m = spec.eps ** spec.m
    return GaussRatio(
        eps=spec.eps,
        ratio=numerator / denominator,
        numerator=numerator,
        denominator=denominator,
        scaled_numerator=numerator * scale_m,
        scaled_denominator=denominator * scale_m,
        control_ratio=control_num / control_den,
        ball_ratio=ball_num / ball_den,
        flags=tuple(dict.fromkeys(flags + control_flags + ball_flags)),
    )


@dataclass(frozen=True)
class IDecomposition:
    eps: float
    m: int
    n: int
    I1: float
    I2: float
    I3: float
    c0: float
    cone_max: float
    identity_residual: float = math.nan
    flags: tuple = ()

    @property
    def I3_scaled(self):
        return self.I3 * self.eps ** self.m

    @property
    def bound(self):
        """``n w_n / eps**n`` bounding |I1| and |I2|."""
        return self.n * ball_volume(self.n) / self.eps ** self.n

    @property
    def bounded(self):
        """Both |I1| and |I2| within the bound plus 5% quadrature slack."""
        return max(abs(self.I1), abs(self.I2)) <= 1.05 * self.bound


def I_decomposition(eps, m=None, n=2, tol=None):
    """
    Integrals of the cone function over ∂B(eps) minus Sigma_eps (I1), over
    Sigma_eps (I2) and over Sigma*_eps (I3).

    ``I3 eps**m`` equals ``c_0`` up to quadrature error. ``cone_max`` is the
    scale-free size ``max |u(x)| |x|**n`` over the cone side S_eps, zero up
    to rounding because every centroid lies on ∂K.
    """
    spec = BeakedSphere(n, eps=eps, m=m)
    cone = ConeU(n)
    rtol = get_default('SWEEP_SAMPLE_RTOL') if tol is None else tol
    abs_tol = 1e-2 * rtol * limit_constants(n)['c0'] * spec.eps ** (-spec.m)

    def piece(label):
        return integrate_adaptive(spec, cone, tol=abs_tol, pieces=(label,))

    labels = ('sphere_remainder', 'sigma', 'sigma_star')
    results = dict(zip(labels, ordered_map(piece, labels)))
    flags = tuple(dict.fromkeys(flag for result in results.values() for flag in result.flags))

    _, pieces = build_beaked(eps, m, n)
    side = pieces.submesh('cone_side').centroids
    cone_max = float(np.max(np.abs(cone(side)) * np.linalg.norm(side, axis=1) ** n))

    I1 = results['sphere_remainder'].value
    I2 = results['sigma'].value
    I3 = results['sigma_star'].value
    sphere_total = sphere_area(n) * float(cone(spec.x_eps))
    # I1 + I2 is the integral over the whole sphere ∂B(eps)
    residual = abs(I1 + I2 - sphere_total) / abs(I3)
    return IDecomposition(
        eps=spec.eps,
        m=spec.m,
        n=n,
        I1=I1,
        I2=I2,
        I3=I3,
        c0=limit_constants(n)['c0'],
        cone_max=cone_max,
        flags=flags,
        identity_residual=residual,
    )


# =============================================================================
# KURAN GAP OF THE RECENTRED BEAKED SPHERE
# =============================================================================


def _unit(n):
    e1 = np.zeros(n)
    e1[0] = 1.0
    return e1


@dataclass(frozen=True)
class PieceRoute:
    eps: float
    limit: float
    triangle_bound: float
    cone_integral: float
    cap_integral: float
    flags: tuple = ()


def piece_route_limit(eps, m=None, n=2, tol=None):
    """
    ``lim_{t -> 1} fint k_{t e_1}`` on the recentred beaked sphere, from pieces.

    On the unit sphere ``int k_alpha = 0`` for every |alpha| > 1 and
    ``h_{e_1}`` vanishes on the cap Sigma_eps, so the limit is
    ``(-|Sigma_eps| + int_S k_{e_1} + int_{Sigma*} k_{e_1}) / |∂D|``; both
    remaining pieces stay at distance about 2 from e_1. ``triangle_bound``
    replaces ``-|Sigma_eps|`` by ``+|Sigma_eps|`` and integrates ``|k|``.
    """
    spec = BeakedSphere(n, eps=eps, m=m, recentered=True)
    areas = spec.piece_areas()
    area = spec.boundary_area()
    rtol = get_default('SWEEP_SAMPLE_RTOL') if tol is None else tol
    abs_tol = 1e-2 * rtol * max(areas['cone_side'] - areas['sigma'] + areas['sigma_star'], areas['sigma_star'])
    kuran = KuranK(tuple(_unit(n)))
    cone = integrate_adaptive(spec, _with_abs(kuran), tol=abs_tol, pieces=('cone_side',))
    cap = integrate_adaptive(spec, _with_abs(kuran), tol=abs_tol, pieces=('sigma_star',))
    cone_value, cone_abs = np.asarray(cone.value)
    cap_value, cap_abs = np.asarray(cap.value)
    return PieceRoute(
        eps=spec.eps,
        limit=float((-areas['sigma'] + cone_value + cap_value) / area),
        triangle_bound=float((areas['sigma'] + cone_abs + cap_abs) / area),
        cone_integral=float(cone_value),
        cap_integral=float(cap_value),
        flags=tuple(dict.fromkeys(cone.flags + cap.flags)),
    )


@dataclass(frozen=True)
class KuranPoint:
    eps: float
    K_hat: float
    deficit_ratio: float
    route: PieceRoute
    converged: bool
    flags: tuple
    n: int = 2

    @property
    def alpha_star(self):
        """``K_hat / eps**(n-1)``."""
        return self.K_hat / self.eps ** (self.n - 1)


@dataclass(frozen=True)
class KuranSweep:
    n: int
    m: int
    points: tuple
    fit: ExponentFit
    report: object


def kuran_point(eps, m=None, n=2, schedule=None, rtol=None):
    """
    Kuran gap of the recentred beaked sphere at the touching point e_1.

    Both the sample quadrature and the schedule tail test are relative to
    the deficit ratio, the size K_hat is expected to have.
    """
    spec = BeakedSphere(n, eps=eps, m=m, recentered=True)
    x0 = np.zeros(n)
    rtol = get_default('SWEEP_SAMPLE_RTOL') if rtol is None else rtol
    schedule = schedule or ApproachSchedule.from_settings('SWEEP_SCHEDULE')
    deficit = deficit_quantities(spec, x0).deficit_ratio
    estimate = L_of_z(
        spec, x0, _unit(n), schedule, tol=rtol * deficit, gap_tol=get_default('SWEEP_GAP_RTOL'), scale=deficit
    )
    route = piece_route_limit(eps, m, n, rtol)
    flags = tuple(dict.fromkeys(estimate.flags + route.flags))
    logger.info('K_hat(eps=%g, n=%d) = %.6g, deficit %.6g, piece route %.6g', eps, n, estimate.extrapolated, deficit, route.limit)
    return KuranPoint(
        eps=spec.eps,
        K_hat=estimate.extrapolated,
        deficit_ratio=deficit,
        route=route,
        converged=estimate.converged and not flags,
        flags=flags,
        n=n,
    )


def kuran_sweep(eps_list, m=None, n=2, schedule=None, rtol=None, slope_tol=0.15):
    """
    ``K_hat(eps)`` across eps with the exponent fit and the per-point checks.

    The combined report holds:
        kuran_exponent   least-squares exponent == n - 1 within ``slope_tol``
        thm12 at eps     K_hat >= deficit ratio, slack ``6 rtol * deficit``
        route at eps     K_hat <= triangle bound and K_hat == piece-route limit

    The asymptotic exponent and its own verdict ride along in the details of
    ``kuran_exponent``. Flagged points are reported but excluded from the fit.
    """
    eps = _grid(eps_list, 3)
    rtol = get_default('SWEEP_SAMPLE_RTOL') if rtol is None else rtol
    points = ordered_map(lambda value: kuran_point(value, m, n, schedule, rtol), eps)
    good = [p for p in points if p.converged]
    excluded = [p.eps for p in points if not p.converged]
    if excluded:
        logger.warning('K_hat excluded from the fit at eps=%s', excluded)

    reports = []
    if len(good) >= 3:
        fit = exponent_fit([p.eps for p in good], [p.K_hat for p in good])
        reports.append(exponent_report('kuran_exponent', fit, n - 1, slope_tol))
    else:
        fit = ExponentFit(slope=math.nan, asymptotic_slope=math.nan, secants=(), midpoints=())
        reports.append(compare('kuran_exponent', math.nan, n - 1, slope_tol, relation='==', flags=('too-few-points',)))

    for p in points:
        # sample tolerance times the summed magnitudes of the three-point Richardson weights
        slack = 6.0 * rtol * p.deficit_ratio
        tag = f'{p.eps:.4g}'
        reports.append(compare(f'thm12@{tag}', p.K_hat, p.deficit_ratio, slack, flags=p.flags))
        reports.append(compare(f'upper@{tag}', p.K_hat, p.route.triangle_bound, slack, relation='<=', flags=p.flags))
        reports.append(compare(f'route@{tag}', p.K_hat, p.route.limit, slack, relation='==', flags=p.flags))

    report = combine(
        'kuran_sweep',
        reports,
        details={
            'n': n,
            'excluded_eps': excluded,
            'least_squares_slope': fit.slope,
            'asymptotic_slope': fit.asymptotic_slope,
            'asymptotic_passed': reports[0].details.get('asymptotic_passed', False),
        },
    )
    return KuranSweep(n=n, m=BeakedSphere(n, eps=float(eps[0]), m=m).m, points=tuple(points), fit=fit, report=report)


# =============================================================================
# SWEEP TABLE
# =============================================================================

SWEEP_HEADER = ('eps', 'K_hat', 'gauss_ratio', 'area_deficit', 'I1', 'I2', 'I3', 'slope_running')


@dataclass(frozen=True)
class SweepTable:
    n: int
    m: int
    rows: tuple
    summary: VerificationReport


def run_sweep(eps_list, m=None, n=2, schedule=None):
    """
    Every sweep at once, one row per eps.

    ``slope_running`` is the log-log secant slope of K_hat between the
    previous and the current eps (empty on the first row). The summary holds
    the fitted exponents, alpha_0, the Gauss-ratio floor check and the
    combined pass/fail.
    """
    eps = _grid(eps_list, 4)
    m = BeakedSphere(n, eps=float(eps[0]), m=m).m
    kuran = kuran_sweep(eps, m, n, schedule)
    area = area_deficit_sweep(eps, m, n)
    ratios = ordered_map(lambda value: gauss_ratio(value, m, n), eps)
    decompositions = ordered_map(lambda value: I_decomposition(value, m, n), eps)

    k_hat = np.array([p.K_hat for p in kuran.points])
    running = [None]
    for i in range(1, len(eps)):
        if k_hat[i] > 0 and k_hat[i - 1] > 0:
            running.append(math.log(k_hat[i] / k_hat[i - 1]) / math.log(eps[i] / eps[i - 1]))
        else:
            running.append(None)

    rows = tuple(
        (float(e), p.K_hat, g.ratio, d_area, d.I1, d.I2, d.I3, slope)
        for e, p, g, d_area, d, slope in zip(eps, kuran.points, ratios, area.deficits, decompositions, running)
    )

    floor = get_default('GAUSS_RATIO_FLOOR')
    gauss_values = [g.ratio for g in ratios]
    bound = decompositions[0].bound
    area_exponent = exponent_report('area_exponent', area.fit, n - 1, 0.1)
    reports = [
        kuran.report,
        area_exponent,
        compare('alpha0', area.alpha0, area.alpha0_analytic, 0.03 * area.alpha0_analytic, relation='=='),
        compare('gauss_floor', min(gauss_values), floor, 0.0, flags=[f for g in ratios for f in g.flags]),
        compare('gauss_non_decay', min(gauss_values), 0.5 * gauss_values[-1], 0.0),
        compare(
            'I3_scaling',
            max(abs(d.I3_scaled - d.c0) / d.c0 for d in decompositions),
            0.0,
            0.02,
            relation='<=',
            flags=[f for d in decompositions for f in d.flags],
        ),
        compare(
            'I_bounds',
            max(max(abs(d.I1), abs(d.I2)) / (1.05 * d.bound) for d in decompositions),
            1.0,
            0.0,
            relation='<=',
        ),
    ]
    summary = combine(
        'sweep',
        reports,
        details={
            'n': n,
            'm': m,
            'kuran_slope': kuran.fit.slope,
            'kuran_asymptotic_slope': kuran.fit.asymptotic_slope,
            'kuran_asymptotic_passed': kuran.report.details['asymptotic_passed'],
            'area_slope': area.fit.slope,
            'area_asymptotic_slope': area.fit.asymptotic_slope,
            'area_asymptotic_passed': area_exponent.details['asymptotic_passed'],
            'alpha0': area.alpha0,
            'alpha0_analytic': area.alpha0_analytic,
            'gauss_ratio_floor': floor,
            'I_bound_smallest_eps': bound,
        },
    )
    return SweepTable(n=n, m=m, rows=rows, summary=summary)
