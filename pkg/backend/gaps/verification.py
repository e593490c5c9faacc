"""
Stability inequalities checked as ``VerificationReport`` objects.

    thm12        K(∂D, x0) >= (|∂D| - |∂B|) / |∂D|
    cor13        K(∂D, x0) >= (n-1) w_n^(1/n) |D \\ B| / (|D|^(1/n) |∂D|)
    prop32       G >= K / (1 + h*) and G >= deficit ratio / (1 + h*), checked
                 on the sampled Kuran ratios and the Gauss lower bound
    closeness    the two bounds above read backwards from a value of K
    pseudosphere K = 0 with a touching point forces D to be the ball B(x0, r)
"""

import logging
import math

from common.defaults import get_default
from common.exceptions import PreconditionError
from common.reports import combine, compare
from common.serializers import GapEstimateSerializer
from geometry.measures import deficit_quantities, inradius_touching, solid_rhs
from kernels.functions import ball_volume

from .estimators import (
    Lstar_of_z,
    L_of_z,
    default_dictionary,
    gauss_gap_lower,
    hstar,
    kuran_gap,
    representatives,
    sample_kuran_means,
)

logger = logging.getLogger('potlab')


def _gap_details(gap):
    return GapEstimateSerializer(gap).data


def _touching(spec, x0):
    x0 = spec.require_inside(spec.reference_point if x0 is None else x0)
    _, candidates = inradius_touching(spec, x0)
    reps = representatives(candidates)
    if not reps:
        raise PreconditionError(f'{spec.kind} has no Dini touching point at {x0.tolist()}')
    return x0, candidates, reps


def verify_thm12(spec, x0=None, schedule=None, tol=None):
    """Kuran gap against the area deficit ratio."""
    x0, candidates, _ = _touching(spec, x0)
    gap = kuran_gap(spec, x0, candidates, schedule)
    quantities = deficit_quantities(spec, x0)
    report = compare(
        'thm12',
        gap.extrapolated,
        quantities.deficit_ratio,
        tol if tol is not None else get_default('VERIFY_TOL'),
        provenance={'lhs': f'kuran_gap ({gap.method})', 'rhs': 'area deficit ratio (closed form)'},
        flags=gap.flags,
        details={'gap': _gap_details(gap), 'boundary_area': quantities.boundary_area},
    )
    logger.info('thm12 on %s: %.6g >= %.6g, passed=%s', spec.kind, report.lhs, report.rhs, report.passed)
    return report


def verify_cor13(spec, x0=None, schedule=None, tol=None):
    """Kuran gap against the solid (volume) deficit."""
    x0, candidates, _ = _touching(spec, x0)
    gap = kuran_gap(spec, x0, candidates, schedule)
    quantities = deficit_quantities(spec, x0)
    report = compare(
        'cor13',
        gap.extrapolated,
        solid_rhs(spec, quantities),
        tol if tol is not None else get_default('VERIFY_TOL'),
        provenance={'lhs': f'kuran_gap ({gap.method})', 'rhs': 'solid deficit (closed form volumes)'},
        flags=gap.flags,
        details={'gap': _gap_details(gap), 'difference_volume': quantities.difference_volume},
    )
    logger.info('cor13 on %s: %.6g >= %.6g, passed=%s', spec.kind, report.lhs, report.rhs, report.passed)
    return report


def verify_prop32(spec, x0=None, z=None, schedule=None, tol=None):
    """
    Consistency of the Gauss gap with the Kuran gap and h*.

    Three links are combined:
        kuran_ratio_tail   min of the last three |fint k| / fint |k| >= L / (1 + L*)
        gauss_vs_kuran     Gauss lower bound >= K / (1 + h*)
        gauss_vs_deficit   Gauss lower bound >= deficit ratio / (1 + h*)
    plus ``hstar_finite``. The Gauss dictionary contains the Kuran functions
    of the schedule, so the ratios of the first link are dictionary members.
    """
    tol = tol if tol is not None else get_default('PROP32_TOL')
    x0, candidates, reps = _touching(spec, x0)
    z = reps[0].point if z is None else z

    samples = sample_kuran_means(spec, x0, z, schedule)
    L = L_of_z(spec, x0, z, schedule)
    L_star = Lstar_of_z(spec, x0, z, schedule)
    tail_ratio = float(min(samples.kuran_ratios[-3:]))
    pointwise = compare(
        'kuran_ratio_tail',
        tail_ratio,
        L.extrapolated / (1.0 + L_star.extrapolated),
        tol,
        provenance={'lhs': 'schedule tail of |fint k| / fint |k|', 'rhs': 'L(z) / (1 + L*(z))'},
        flags=L.flags + L_star.flags,
    )

    gap = kuran_gap(spec, x0, candidates, schedule)
    h_star = hstar(spec, x0, candidates, schedule)
    dictionary = default_dictionary(spec, x0, candidates, schedule)
    gauss = gauss_gap_lower(spec, x0, dictionary)
    deficit = deficit_quantities(spec, x0).deficit_ratio
    provenance = {'lhs': f'Gauss lower bound ({gauss.maximizer})'}
    reports = [
        pointwise,
        compare(
            'gauss_vs_kuran',
            gauss.value,
            gap.extrapolated / (1.0 + h_star.extrapolated),
            tol,
            provenance={**provenance, 'rhs': 'K / (1 + h*)'},
            flags=gauss.flags + gap.flags + h_star.flags,
        ),
        compare(
            'gauss_vs_deficit',
            gauss.value,
            deficit / (1.0 + h_star.extrapolated),
            tol,
            provenance={**provenance, 'rhs': 'deficit ratio / (1 + h*)'},
            flags=gauss.flags + h_star.flags,
        ),
        compare(
            'hstar_finite',
            1.0 if math.isfinite(h_star.extrapolated) else 0.0,
            1.0,
            0.0,
            relation='==',
            provenance={'lhs': 'h* finite', 'rhs': 'non-empty touching set'},
        ),
    ]
    return combine(
        'prop32',
        reports,
        details={
            'kuran_ratios': samples.kuran_ratios.tolist(),
            'L': L.extrapolated,
            'L_star': L_star.extrapolated,
            'K': gap.extrapolated,
            'h_star': h_star.extrapolated,
            'gauss_lower': gauss.value,
            'gauss_maximizer': gauss.maximizer,
        },
    )


def closeness_bounds(spec, x0=None, K=None, schedule=None, tol=None):
    """
    Upper bounds on the deficits implied by a Kuran-gap value ``K``.

    ``deficit ratio <= K`` and
    ``|D \\ B| <= K |D|^(1/n) |∂D| / ((n-1) w_n^(1/n))``; when ``K`` is not
    given it is estimated.
    """
    tol = tol if tol is not None else get_default('VERIFY_TOL')
    x0, candidates, _ = _touching(spec, x0)
    flags = ()
    if K is None:
        gap = kuran_gap(spec, x0, candidates, schedule)
        K, flags = gap.extrapolated, gap.flags
    n = spec.n
    q = deficit_quantities(spec, x0)
    volume_bound = K * q.domain_volume ** (1.0 / n) * q.boundary_area / ((n - 1) * ball_volume(n) ** (1.0 / n))
    return combine(
        'closeness',
        [
            compare('deficit_ratio_bound', q.deficit_ratio, K, tol, relation='<=', flags=flags),
            compare(
                'difference_volume_bound',
                q.difference_volume,
                volume_bound,
                tol * q.domain_volume,
                relation='<=',
                flags=flags,
            ),
        ],
        details={'K': K, 'difference_volume_bound': volume_bound},
    )


def pseudosphere_verdict(spec, x0=None, schedule=None, tol=None):
    """
    Rigidity check: a vanishing Kuran gap with a touching point means D is a ball.

    The report passes when ``K <= GAP_TOL``; its ``details['verdict']`` is
    ``'ball'`` or ``'not a pseudosphere'`` and carries the volume bound.
    """
    tol = tol if tol is not None else get_default('GAP_TOL')
    closeness = closeness_bounds(spec, x0, schedule=schedule)
    K = closeness.details['K']
    report = compare(
        'pseudosphere',
        K,
        0.0,
        tol,
        relation='<=',
        provenance={'lhs': 'kuran_gap', 'rhs': 'vanishing gap'},
        flags=closeness.flags,
        details={
            'verdict': 'ball' if K <= tol else 'not a pseudosphere',
            'difference_volume_bound': closeness.details['difference_volume_bound'],
        },
    )
    logger.info('pseudosphere verdict for %s: %s (K=%.3g)', spec.kind, report.details['verdict'], K)
    return report
