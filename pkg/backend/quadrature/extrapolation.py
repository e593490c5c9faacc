"""
Sequence limits and power-law slopes.

Richardson extrapolation is used across mesh levels (errors in even powers
of the facet size, ``step_ratio=4``), along approach schedules (errors in
powers of t - 1, ``step_ratio=1/q``) and across potential radii (powers of
1/|y|). Values may be scalars or numpy arrays; the tableau works
elementwise.
"""

import numpy as np

from common.exceptions import ParameterError


def richardson_limit(step_ratio, values):
    """
    Richardson tableau limit of ``values`` sampled at steps shrinking by ``step_ratio``.

    With ``k`` values the first ``k - 1`` error terms of the expansion
    ``c_1 h**p + c_2 h**(2p) + ...`` are eliminated, where
    ``step_ratio = 2**p`` for halving steps.

    Examples:
        >>> richardson_limit(4.0, [1.0 + 1.0, 1.0 + 0.25])
        1.0
    """
    values = list(values)
    if not values:
        raise ParameterError('richardson_limit needs at least one value')
    last_level = values
    for m in range(1, len(values)):
        mult = step_ratio ** m
        factor = 1.0 / (mult - 1.0)
        last_level = [factor * (mult * last_level[i + 1] - last_level[i]) for i in range(len(last_level) - 1)]
    return last_level[0]


def local_slopes(x, y):
    """
    Point-to-point log-log slopes ``d log y / d log x``.

    Interior points average the two adjacent secants; endpoints use the single
    secant. Requires positive data.
    """
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ParameterError('log-log slopes need positive data')
    if x.size < 2:
        raise ParameterError('log-log slopes need at least two points')
    d_log_x = np.diff(np.log10(x))
    d_log_y = np.diff(np.log10(y))
    secants = d_log_y / d_log_x
    slopes = np.zeros(x.size)
    slopes[1:-1] = 0.5 * (secants[1:] + secants[:-1])
    slopes[0] = secants[0]
    slopes[-1] = secants[-1]
    return slopes


def secant_slopes(x, y):
    """Slopes between consecutive points in log-log space, with their midpoints in x."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ParameterError('log-log slopes need positive data')
    log_x, log_y = np.log(x), np.log(y)
    return np.diff(log_y) / np.diff(log_x), np.exp(0.5 * (log_x[1:] + log_x[:-1]))


def loglog_slope(x, y):
    """Least-squares exponent ``p`` of ``y ~ C x**p``."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ParameterError('log-log fit needs positive data')
    slope, _ = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope)
