"""
Verification suites behind ``manage.py verify --suite``.

Each suite takes a validated run configuration and returns a list of
``VerificationReport`` objects; names carry the domain parameters so every
report can be written to its own JSON file.

    ball        stability inequalities, isoperimetric chain, characterization,
                rigidity verdict and Poisson mass on balls (n = 2, 3 by default)
    spheroid    the inequality family on Spheroid((a, 1, ...)): a in {1.05, 1.1, 1.2}
                for n = 2 and a = 1.1 for n = 3 unless --a is given
    beaked      Kuran gap against the area deficit, containment and the piece
                integrals of the cone function on beaked spheres
    identity    the sphere-ratio identity for n = 2..6
    invariance  Kuran gap, h* and the Gauss lower bound under translation,
                rotation and dilation of a spheroid
"""

import logging
from dataclasses import replace

import numpy as np

from asz.potentials import lemma51_check
from beaked.construction import containment_check
from beaked.sweeps import I_decomposition, sweep_grid
from common.defaults import get_default, level_default
from common.exceptions import ParameterError
from common.reports import compare
from common.serializers import IntegralResultSerializer
from gaps.estimators import gauss_gap_lower, hstar, kuran_gap
from gaps.verification import (
    closeness_bounds,
    pseudosphere_verdict,
    verify_cor13,
    verify_prop32,
    verify_thm12,
)
from geometry.domains import Ball, BeakedSphere, Spheroid
from geometry.measures import isoperimetric_report
from kernels.functions import KuranH, Transformed, sphere_area
from quadrature.identities import sphere_ratio_identity
from quadrature.integration import integrate_near_singular

logger = logging.getLogger('potlab')

INVARIANCE_TOL = 1e-6


def tagged(report, tag):
    return replace(report, name=f'{report.name}[{tag}]')


def _dimensions(config, default):
    return config.get('n', default)


def _grid(config, default):
    lo, hi, count = config.get('eps', default)
    if count == 1:
        return np.array([lo])
    return sweep_grid(lo, hi, count)


def _domain_or(config, factory):
    """The configured domain when one is given, otherwise ``factory()`` for each dimension."""
    if 'domain' in config:
        return [config['domain']]
    return factory()


def _inequality_reports(spec, config, tag):
    x0, tol = config.get('x0'), config.get('tol')
    return [
        tagged(verify_thm12(spec, x0, tol=tol), tag),
        tagged(verify_cor13(spec, x0, tol=tol), tag),
        tagged(verify_prop32(spec, x0), tag),
        tagged(isoperimetric_report(spec, x0), tag),
    ]


def _poisson_mass_report(ball, tag):
    """The integral of h_alpha over the sphere equals -|∂B| for a pole at distance 2R."""
    axis = 0 if ball.n == 2 else ball.n - 1
    alpha = np.zeros(ball.n)
    alpha[axis] = 2.0 * ball.radius
    exact = -sphere_area(ball.n) * ball.radius ** (ball.n - 1)
    fn = Transformed(KuranH(tuple(alpha)), origin=ball.center)
    result = integrate_near_singular(ball, fn, ball.center_array + alpha, tol=1e-6 * abs(exact))
    return compare(
        f'poisson_mass[{tag}]',
        result.value,
        exact,
        1e-4 * abs(exact),
        relation='==',
        flags=result.flags,
        details={'integral': IntegralResultSerializer(result).data},
    )


def ball_suite(config):
    specs = _domain_or(config, lambda: [Ball(n) for n in _dimensions(config, (2, 3))])
    reports = []
    for spec in specs:
        tag = f'{spec.kind},n={spec.n}'
        reports += _inequality_reports(spec, config, tag)
        reports.append(tagged(pseudosphere_verdict(spec, config.get('x0')), tag))
        if isinstance(spec, Ball):
            reports.append(tagged(lemma51_check(spec, config.get('x0')), tag))
            reports.append(_poisson_mass_report(spec, tag))
    return reports


def spheroid_family(config):
    """``--a`` for every dimension when given, otherwise ``POTLAB['SPHEROID_FAMILY']`` per dimension."""
    family = get_default('SPHEROID_FAMILY')
    specs = []
    for n in _dimensions(config, tuple(sorted(family))):
        axes = (config['a'],) if 'a' in config else level_default('SPHEROID_FAMILY', n)
        specs += [Spheroid(n, semi_axes=(a,) + (1.0,) * (n - 1)) for a in axes]
    return specs


def spheroid_suite(config):
    specs = _domain_or(config, lambda: spheroid_family(config))
    reports = []
    for spec in specs:
        tag = f'{spec.kind},n={spec.n},a={spec.semi_axes[0]:g}'
        reports += _inequality_reports(spec, config, tag)
        reports.append(tagged(closeness_bounds(spec, config.get('x0')), tag))
    return reports


def beaked_suite(config):
    m = config.get('m')
    reports = []
    for n in _dimensions(config, (2,)):
        for eps in _grid(config, (0.05, 0.2, 3)):
            spec = BeakedSphere(n, eps=float(eps), m=m)
            tag = f'n={n},m={spec.m},eps={eps:.4g}'
            reports.append(tagged(verify_thm12(spec, tol=config.get('tol')), tag))
            containment = containment_check(float(eps), spec.m, n, seed=config['seed'])
            reports.append(
                compare(
                    f'containment[{tag}]',
                    containment.inner_violations + containment.outer_violations,
                    0,
                    0.0,
                    relation='<=',
                    details={'samples': containment.samples},
                )
            )
            pieces = I_decomposition(float(eps), spec.m, n)
            reports.append(
                compare(
                    f'I3_scaling[{tag}]',
                    pieces.I3_scaled,
                    pieces.c0,
                    0.02 * pieces.c0,
                    relation='==',
                    flags=pieces.flags,
                    details={'I1': pieces.I1, 'I2': pieces.I2, 'I3': pieces.I3, 'cone_max': pieces.cone_max},
                )
            )
            reports.append(
                compare(
                    f'I_bounds[{tag}]',
                    max(abs(pieces.I1), abs(pieces.I2)),
                    1.05 * pieces.bound,
                    0.0,
                    relation='<=',
                )
            )
    return reports


def identity_suite(config):
    tol = config.get('tol', get_default('IDENTITY_TOL'))
    return [
        compare(f'sphere_ratio[n={n}]', sphere_ratio_identity(n), 0.0, tol, relation='<=')
        for n in _dimensions(config, tuple(range(2, 7)))
    ]


def plane_rotation(n, angle):
    """Rotation by ``angle`` in the (x_1, x_2) plane."""
    rotation = np.eye(n)
    c, s = np.cos(angle), np.sin(angle)
    rotation[:2, :2] = [[c, -s], [s, c]]
    return rotation


def invariance_suite(config):
    a = config.get('a', 1.2)
    reports = []
    for n in _dimensions(config, (2,)):
        spec = config.get('domain') or Spheroid(n, semi_axes=(a,) + (1.0,) * (n - 1))
        x0 = spec.reference_point
        rotation = plane_rotation(n, 0.3)
        shift = np.linspace(0.4, -1.7, n)
        moves = {
            'translate': (spec.translated(shift), x0 + shift),
            'rotate': (spec.rotated(rotation), rotation @ x0),
            'dilate': (spec.dilated(2.5), 2.5 * x0),
        }
        quantities = {
            'kuran_gap': lambda s, p: kuran_gap(s, p).extrapolated,
            'hstar': lambda s, p: hstar(s, p).extrapolated,
            'gauss_lower': lambda s, p: gauss_gap_lower(s, p).value,
        }
        for name, quantity in quantities.items():
            base = quantity(spec, x0)
            for move, (moved, moved_x0) in moves.items():
                reports.append(
                    compare(
                        f'{name}_{move}[n={n}]',
                        quantity(moved, moved_x0),
                        base,
                        config.get('tol', INVARIANCE_TOL),
                        relation='==',
                    )
                )
    return reports


SUITES = {
    'ball': ball_suite,
    'spheroid': spheroid_suite,
    'beaked': beaked_suite,
    'identity': identity_suite,
    'invariance': invariance_suite,
}


def run_suite(name, config):
    try:
        suite = SUITES[name]
    except KeyError:
        raise ParameterError(f'unknown suite {name!r}')
    logger.info('suite %s started', name)
    reports = suite(config)
    logger.info('suite %s finished: %d/%d passed', name, sum(r.passed for r in reports), len(reports))
    return reports
