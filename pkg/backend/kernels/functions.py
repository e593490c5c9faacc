"""
Harmonic functions used throughout PotLab.

This module evaluates, exactly and vectorized over point arrays, every
harmonic function the verification suites need: the fundamental solution of
the Laplacian, the Kuran functions, the cone function harmonic off the
origin, harmonic polynomials of low degree, and similarity transforms of any
of them. A central second-difference oracle measures harmonicity.

Features:
    - ``gamma``, ``kuran_h``, ``kuran_k``, ``cone_u`` as plain functions
    - ``HarmonicFn`` classes carrying their singular set
    - ``harmonic_monomials`` dictionary up to degree 4
    - ``laplacian_residual`` harmonicity oracle, dtype-aware so the h**2 rate
      can be observed in extended precision

Conventions:
    - Points are arrays of shape ``(n,)`` or ``(N, n)``; single points give
      Python scalars, arrays give ``(N,)`` arrays.
    - The fundamental solution is normalized as
      ``-log|x| / (2 pi)`` for n = 2 and ``|x|**(2-n) / ((n-2) sigma_n)`` for
      n >= 3, with ``sigma_n`` the area of the unit sphere. With this choice a
      sphere of radius r centred at the origin satisfies
      ``integral of Gamma(x - y) dsigma(x) = sigma_n r**(n-1) Gamma(y)`` for
      every exterior y, with no extra constant.

Examples:
    >>> gamma([1.0, 0.0, 0.0])
    0.07957747154594767
    >>> kuran_h([2.0, 0.0, 0.0], [1.0, 0.0, 0.0])
    -6.0
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np
from scipy import special

from common.exceptions import (
    InvalidPoleError,
    NearSingularityError,
    ParameterError,
    SingularityError,
)


@lru_cache(maxsize=None)
def sphere_area(n):
    """Surface measure sigma_n of the unit sphere in R^n."""
    if n < 1:
        raise ParameterError(f'dimension must be positive, got {n}')
    return float(2.0 * np.pi ** (n / 2.0) / special.gamma(n / 2.0))


def ball_volume(n):
    """Volume omega_n of the unit ball in R^n."""
    return sphere_area(n) / n


def _points(x):
    x = np.asarray(x)
    if x.dtype.kind not in 'f':
        x = x.astype(float)
    single = x.ndim == 1
    return np.atleast_2d(x), single


def _norm(x):
    return np.sqrt(np.sum(x * x, axis=-1))


def _out(values, single):
    return values[0].item() if single else values


def gamma(x, n=None):
    """
    Fundamental solution of the Laplacian.

    Args:
        x (array_like): Point(s), shape ``(n,)`` or ``(N, n)``.
        n (int, optional): Dimension; taken from ``x`` when omitted.

    Returns:
        float | ndarray: Gamma(x).

    Raises:
        SingularityError: If any point is the origin.
    """
    pts, single = _points(x)
    n = n or pts.shape[-1]
    r = _norm(pts)
    if np.any(r == 0):
        raise SingularityError('Gamma is singular at the origin.')
    if n == 2:
        values = -np.log(r) / (2.0 * np.pi)
    else:
        values = r ** (2 - n) / ((n - 2) * sphere_area(n))
    return _out(values, single)


def _check_pole(alpha):
    alpha = np.asarray(alpha)
    if alpha.dtype.kind not in 'f':
        alpha = alpha.astype(float)
    if not np.any(alpha):
        raise InvalidPoleError('Kuran pole must be different from the origin.')
    return alpha


def kuran_h(alpha, x):
    """
    Kuran kernel ``|a|**(n-2) (|x|**2 - |a|**2) / |x - a|**n``.

    Up to the factor sigma_n |a| it is the Poisson kernel of B(0, |a|) with
    pole a; it equals -1 at the origin and vanishes on the sphere |x| = |a|.

    Raises:
        InvalidPoleError: If ``alpha`` is the origin.
        SingularityError: If some x equals ``alpha``.
    """
    alpha = _check_pole(alpha)
    pts, single = _points(x)
    n = alpha.shape[-1]
    diff = _norm(pts - alpha)
    if np.any(diff == 0):
        raise SingularityError('Kuran kernel evaluated at its pole.')
    a2 = np.sum(alpha * alpha)
    values = np.sqrt(a2) ** (n - 2) * (np.sum(pts * pts, axis=-1) - a2) / diff ** n
    return _out(values, single)


def kuran_k(alpha, x):
    """Kuran function ``1 + kuran_h(alpha, x)``; vanishes at the origin."""
    values = kuran_h(alpha, x)
    return values + 1


def cone_u(x, n=None):
    """
    ``(x_1**2 / |x|**2 - 1/n) / |x|**n``, harmonic off the origin.

    Positive inside the cone ``x_1 / |x| > 1/sqrt(n)``, zero on its boundary
    and negative outside.
    """
    pts, single = _points(x)
    n = n or pts.shape[-1]
    r2 = np.sum(pts * pts, axis=-1)
    if np.any(r2 == 0):
        raise SingularityError('Cone function is singular at the origin.')
    values = (pts[:, 0] ** 2 / r2 - 1.0 / n) / r2 ** (n / 2.0)
    return _out(values, single)


# =============================================================================
# HARMONIC FUNCTION OBJECTS
# =============================================================================


class HarmonicFn:
    """
    Base class: a harmonic function on R^n minus a finite singular set.

    Subclasses implement ``evaluate(points)`` for an ``(N, n)`` array and
    ``singular_points()`` returning an ``(k, n)`` array (possibly empty).
    """

    label = 'harmonic'

    @property
    def n(self):
        raise NotImplementedError

    def evaluate(self, points):
        raise NotImplementedError

    def singular_points(self):
        return np.empty((0, self.n))

    def __call__(self, x):
        pts, single = _points(x)
        return _out(self.evaluate(pts), single)

    def distance_to_singular_set(self, x):
        sing = self.singular_points()
        if len(sing) == 0:
            return np.inf
        pts, _ = _points(x)
        d = np.sqrt(np.sum((pts[:, None, :] - sing[None, :, :]) ** 2, axis=-1))
        return float(d.min())

    def nearest_singular_point(self, x):
        sing = self.singular_points()
        if len(sing) == 0:
            return None
        x = np.asarray(x, dtype=float)
        return sing[np.argmin(_norm(sing - x))]


@dataclass(frozen=True)
class KuranH(HarmonicFn):
    alpha: tuple
    label = 'kuran_h'

    def __post_init__(self):
        object.__setattr__(self, 'alpha', tuple(float(a) for a in self.alpha))
        _check_pole(self.alpha)

    @property
    def n(self):
        return len(self.alpha)

    def evaluate(self, points):
        return kuran_h(np.asarray(self.alpha, dtype=points.dtype), points)

    def singular_points(self):
        return np.array([self.alpha], dtype=float)


@dataclass(frozen=True)
class KuranK(KuranH):
    label = 'kuran_k'

    def evaluate(self, points):
        return 1 + kuran_h(np.asarray(self.alpha, dtype=points.dtype), points)


@dataclass(frozen=True)
class ConeU(HarmonicFn):
    dimension: int
    apex: tuple = None
    label = 'cone_u'

    def __post_init__(self):
        if self.apex is not None:
            object.__setattr__(self, 'apex', tuple(float(a) for a in self.apex))

    @property
    def n(self):
        return self.dimension

    def evaluate(self, points):
        if self.apex is not None:
            points = points - np.asarray(self.apex, dtype=points.dtype)
        return cone_u(points, self.dimension)

    def singular_points(self):
        apex = self.apex if self.apex is not None else (0.0,) * self.dimension
        return np.array([apex], dtype=float)


@dataclass(frozen=True)
class FundamentalSolution(HarmonicFn):
    pole: tuple
    label = 'gamma'

    def __post_init__(self):
        object.__setattr__(self, 'pole', tuple(float(a) for a in self.pole))

    @property
    def n(self):
        return len(self.pole)

    def evaluate(self, points):
        return gamma(points - np.asarray(self.pole, dtype=points.dtype), self.n)

    def singular_points(self):
        return np.array([self.pole], dtype=float)


def _polynomial_laplacian(terms, n):
    lap = {}
    for exps, coeff in terms:
        for i in range(n):
            if exps[i] >= 2:
                new = list(exps)
                new[i] -= 2
                key = tuple(new)
                lap[key] = lap.get(key, 0.0) + coeff * exps[i] * (exps[i] - 1)
    return lap


@dataclass(frozen=True)
class HarmonicMonomial(HarmonicFn):
    """
    Harmonic polynomial ``sum c * prod x_i**e_i`` stored as ``((exps, c), ...)``.

    The constructor rejects non-harmonic coefficient sets.
    """

    dimension: int
    terms: tuple
    name: str = ''
    label = 'monomial'

    def __post_init__(self):
        for exps, _ in self.terms:
            if len(exps) != self.dimension:
                raise ParameterError('exponent vector does not match the dimension')
        lap = _polynomial_laplacian(self.terms, self.dimension)
        if any(abs(c) > 1e-12 for c in lap.values()):
            raise ParameterError(f'polynomial {self.name or self.terms} is not harmonic')

    @property
    def n(self):
        return self.dimension

    @property
    def degree(self):
        return max(sum(exps) for exps, _ in self.terms)

    def evaluate(self, points):
        total = np.zeros(points.shape[0], dtype=points.dtype)
        for exps, coeff in self.terms:
            term = np.full(points.shape[0], coeff, dtype=points.dtype)
            for i, e in enumerate(exps):
                if e:
                    term = term * points[:, i] ** e
            total = total + term
        return total


@dataclass(frozen=True)
class Transformed(HarmonicFn):
    """
    ``fn((x - origin) @ frame / scale)``: a harmonic function moved by a similarity.

    ``frame`` is an orthogonal matrix whose columns are the body axes in world
    coordinates; harmonicity is preserved because the Laplacian commutes with
    rotations, translations and dilations.
    """

    fn: HarmonicFn
    origin: tuple
    frame: tuple = None
    scale: float = 1.0

    @property
    def n(self):
        return self.fn.n

    @property
    def label(self):
        return self.fn.label

    def _frame(self, dtype=float):
        if self.frame is None:
            return np.eye(self.n, dtype=dtype)
        return np.asarray(self.frame, dtype=dtype)

    def evaluate(self, points):
        origin = np.asarray(self.origin, dtype=points.dtype)
        body = (points - origin) @ self._frame(points.dtype) / self.scale
        return self.fn.evaluate(body)

    def singular_points(self):
        sing = self.fn.singular_points()
        if len(sing) == 0:
            return sing
        return np.asarray(self.origin, dtype=float) + self.scale * sing @ self._frame().T


def _complex_power_terms(n, i, j, d, part):
    """Real (part=0) or imaginary (part=1) part of (x_i + i x_j)**d."""
    terms = []
    for k in range(d + 1):
        if k % 2 != part:
            continue
        sign = (-1) ** ((k - part) // 2)
        exps = [0] * n
        exps[i] = d - k
        exps[j] = k
        terms.append((tuple(exps), float(sign * comb(d, k))))
    return tuple(terms)


def harmonic_monomials(n, degree=4):
    """
    Dictionary of harmonic polynomials of degree <= ``degree`` (at most 4).

    Contains the real and imaginary parts of ``(x_i + i x_j)**d`` for every
    coordinate pair and, for n >= 3, the products ``x_i x_j x_k`` of distinct
    coordinates. Duplicates (e.g. ``x_1`` from several pairs) are dropped.
    """
    if degree > 4:
        raise ParameterError('harmonic dictionary is capped at degree 4')
    seen = {}
    for i, j in combinations(range(n), 2):
        for d in range(1, degree + 1):
            for part, tag in ((0, 'Re'), (1, 'Im')):
                terms = _complex_power_terms(n, i, j, d, part)
                key = tuple(sorted(terms))
                if key not in seen:
                    name = f'{tag}(x{i + 1}+ix{j + 1})^{d}'
                    seen[key] = HarmonicMonomial(n, terms, name)
    if degree >= 3:
        for triple in combinations(range(n), 3):
            exps = [0] * n
            for t in triple:
                exps[t] = 1
            terms = ((tuple(exps), 1.0),)
            name = 'x' + 'x'.join(str(t + 1) for t in triple)
            seen.setdefault(terms, HarmonicMonomial(n, terms, name))
    return list(seen.values())


def laplacian_residual(f, x, h, dtype=None):
    """
    Central second-difference estimate of the Laplacian of ``f`` at ``x``.

    Args:
        f (HarmonicFn): Function to test.
        x (array_like): Evaluation point, shape ``(n,)``.
        h (float): Step.
        dtype (numpy dtype, optional): Arithmetic precision, e.g.
            ``np.longdouble`` to observe the h**2 truncation rate below the
            double-precision rounding floor.

    Returns:
        float: ``sum_i (f(x + h e_i) - 2 f(x) + f(x - h e_i)) / h**2``; for a
        harmonic ``f`` this is O(h**2) times the local fourth-derivative scale.

    Raises:
        NearSingularityError: If ``x`` lies within ``10 h`` of the singular set.
    """
    dtype = dtype or float
    x = np.asarray(x, dtype=dtype)
    h = np.asarray(h, dtype=dtype)
    if f.distance_to_singular_set(np.asarray(x, dtype=float)) <= 10 * float(h):
        raise NearSingularityError(f'point within 10h of the singular set of {f.label}')
    n = x.shape[0]
    steps = np.eye(n, dtype=dtype) * h
    stencil = np.vstack([x[None, :], x + steps, x - steps])
    values = f.evaluate(stencil)
    centre = values[0]
    second = (values[1:n + 1] - 2 * centre + values[n + 1:]) / (h * h)
    return second.sum()
