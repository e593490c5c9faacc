"""
Domain descriptions.

A ``DomainSpec`` is an immutable description of a bounded domain of R^n.
Four variants are supported:

    Ball                 centre and radius
    Spheroid             semi-axes, centre and an optional rotation
    GraphPerturbedBall   a ball whose radial function is lifted by a smooth
                         bump away from a flat cap around the body axis e_1
    BeakedSphere         the unit ball B(eps) centred at x(eps) = (1 + eps) e_1
                         with a conical beak reaching back to the origin

The first three are star-shaped around their centre and share the
``StarShapedDomain`` machinery (radial function, normals, area density in
direction space, similarity transforms). The beaked sphere is a surface of
revolution around e_1 whose pieces are described exactly.

Notes:
    - Body frame: world = centre + frame @ body, where ``frame`` is the
      orthogonal ``rotation`` matrix (columns are the body axes).
    - Ball, Spheroid and GraphPerturbedBall are closed under translation,
      rotation about the origin and dilation about the origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np
from scipy import integrate

from common.defaults import get_default
from common.exceptions import DomainError, ParameterError, UnsupportedDimensionError
from kernels.functions import ball_volume, sphere_area


def _vector(values, n, name):
    if values is None:
        return (0.0,) * n
    values = tuple(float(v) for v in np.asarray(values, dtype=float).ravel())
    if len(values) != n:
        raise ParameterError(f'{name} must have {n} components, got {len(values)}')
    return values


def _matrix(values, n):
    if values is None:
        return None
    mat = np.asarray(values, dtype=float)
    if mat.shape != (n, n):
        raise ParameterError(f'rotation must be a {n}x{n} matrix')
    if not np.allclose(mat.T @ mat, np.eye(n), atol=1e-10):
        raise ParameterError('rotation must be orthogonal')
    return tuple(tuple(row) for row in mat)


def _unit_rows(x):
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


@dataclass(frozen=True)
class DomainSpec:
    n: int

    kind = 'domain'

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ParameterError(f'dimension must be an integer >= 2, got {self.n}')

    @property
    def reference_point(self):
        """Natural interior point x0 (the centre, or x(eps) for the beaked sphere)."""
        raise NotImplementedError

    def contains(self, points):
        raise NotImplementedError

    def closure_contains(self, points, tol=1e-12):
        raise NotImplementedError

    def circumradius(self, x0=None):
        raise NotImplementedError

    def require_inside(self, x0):
        x0 = np.asarray(x0, dtype=float)
        if x0.shape != (self.n,):
            raise ParameterError(f'x0 must have {self.n} components')
        if not self.contains(x0[None, :])[0]:
            raise DomainError(f'x0={x0.tolist()} is not inside the {self.kind}')
        return x0


# =============================================================================
# STAR-SHAPED DOMAINS
# =============================================================================


@dataclass(frozen=True)
class StarShapedDomain(DomainSpec):
    center: tuple = None
    rotation: tuple = None

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, 'center', _vector(self.center, self.n, 'center'))
        object.__setattr__(self, 'rotation', _matrix(self.rotation, self.n))

    @property
    def center_array(self):
        return np.asarray(self.center, dtype=float)

    @property
    def frame(self):
        if self.rotation is None:
            return np.eye(self.n)
        return np.asarray(self.rotation, dtype=float)

    @property
    def reference_point(self):
        return self.center_array

    def to_body(self, points):
        return (np.atleast_2d(points) - self.center_array) @ self.frame

    def to_world(self, body):
        return self.center_array + np.atleast_2d(body) @ self.frame.T

    # Body-frame geometry, ``omega`` are unit directions of shape (N, n).

    def radial_function(self, omega):
        raise NotImplementedError

    def normal_body(self, omega):
        raise NotImplementedError

    def area_density(self, omega):
        """d(sigma)/d(omega) = rho**(n-1) / <omega, nu> for the radial graph."""
        rho = self.radial_function(omega)
        cos_angle = np.sum(omega * self.normal_body(omega), axis=-1)
        return rho ** (self.n - 1) / cos_angle

    def boundary_point_body(self, omega):
        return self.radial_function(omega)[:, None] * omega

    def contains(self, points):
        body = self.to_body(points)
        r = np.linalg.norm(body, axis=-1)
        inside = np.ones(len(body), dtype=bool)
        mask = r > 0
        omega = body[mask] / r[mask, None]
        inside[mask] = r[mask] < self.radial_function(omega)
        return inside

    def closure_contains(self, points, tol=1e-12):
        body = self.to_body(points)
        r = np.linalg.norm(body, axis=-1)
        inside = np.ones(len(body), dtype=bool)
        mask = r > 0
        omega = body[mask] / r[mask, None]
        inside[mask] = r[mask] <= self.radial_function(omega) * (1 + tol)
        return inside

    def radial_projection(self, point):
        """Boundary point on the ray from the centre through ``point``."""
        body = self.to_body(point)[0]
        r = np.linalg.norm(body)
        if r == 0:
            raise DomainError('cannot project the centre onto the boundary')
        omega = body[None, :] / r
        return self.to_world(self.boundary_point_body(omega))[0]

    def translated(self, shift):
        shift = np.asarray(shift, dtype=float)
        return replace(self, center=tuple(self.center_array + shift))

    def rotated(self, rotation):
        rot = np.asarray(rotation, dtype=float)
        return replace(self, center=tuple(rot @ self.center_array), rotation=tuple(map(tuple, rot @ self.frame)))

    def dilated(self, factor):
        if factor <= 0:
            raise ParameterError('dilation factor must be positive')
        return self._scaled(factor)

    def _scaled(self, factor):
        raise NotImplementedError


@dataclass(frozen=True)
class Ball(StarShapedDomain):
    radius: float = 1.0

    kind = 'ball'

    def __post_init__(self):
        super().__post_init__()
        if not self.radius > 0:
            raise ParameterError('radius must be positive')
        object.__setattr__(self, 'radius', float(self.radius))

    def radial_function(self, omega):
        return np.full(len(omega), self.radius)

    def normal_body(self, omega):
        return omega

    def area_density(self, omega):
        return np.full(len(omega), self.radius ** (self.n - 1))

    def circumradius(self, x0=None):
        x0 = self.center_array if x0 is None else np.asarray(x0, dtype=float)
        return self.radius + float(np.linalg.norm(x0 - self.center_array))

    def _scaled(self, factor):
        return replace(self, center=tuple(factor * self.center_array), radius=factor * self.radius)


@dataclass(frozen=True)
class Spheroid(StarShapedDomain):
    semi_axes: tuple = None

    kind = 'spheroid'

    def __post_init__(self):
        super().__post_init__()
        if self.semi_axes is None:
            raise ParameterError('spheroid needs semi_axes')
        axes = _vector(self.semi_axes, self.n, 'semi_axes')
        if min(axes) <= 0:
            raise ParameterError('semi-axes must be positive')
        object.__setattr__(self, 'semi_axes', axes)

    @property
    def axes_array(self):
        return np.asarray(self.semi_axes, dtype=float)

    def radial_function(self, omega):
        return 1.0 / np.sqrt(np.sum((omega / self.axes_array) ** 2, axis=-1))

    def normal_body(self, omega):
        return _unit_rows(omega / self.axes_array ** 2)

    def area_density(self, omega):
        rho = self.radial_function(omega)
        return rho ** (self.n + 1) * np.linalg.norm(omega / self.axes_array ** 2, axis=-1)

    def circumradius(self, x0=None):
        x0 = self.center_array if x0 is None else np.asarray(x0, dtype=float)
        return float(self.axes_array.max()) + float(np.linalg.norm(x0 - self.center_array))

    def _scaled(self, factor):
        return replace(self, center=tuple(factor * self.center_array), semi_axes=tuple(factor * self.axes_array))


def smoothstep(t):
    """Quintic 6t^5 - 15t^4 + 10t^3: 0 at t=0, 1 at t=1, first two derivatives vanish at both ends."""
    t = np.clip(t, 0.0, 1.0)
    return t ** 3 * (10.0 - 15.0 * t + 6.0 * t * t)


def smoothstep_derivative(t):
    t = np.clip(t, 0.0, 1.0)
    return 30.0 * t * t * (1.0 - t) ** 2


@dataclass(frozen=True)
class GraphPerturbedBall(StarShapedDomain):
    """
    Radial graph ``rho = R (1 + amplitude * S((psi - flat_angle) / (pi - flat_angle)))``.

    ``psi`` is the angle from the body axis e_1 and S the quintic smoothstep,
    so the profile is C^2, equals R on the open cap psi < flat_angle and
    keeps that cap exactly on the inscribed sphere of radius R.
    """

    radius: float = 1.0
    amplitude: float = 0.1
    flat_angle: float = math.pi / 4

    kind = 'graph_perturbed_ball'

    def __post_init__(self):
        super().__post_init__()
        if not self.radius > 0:
            raise ParameterError('radius must be positive')
        if self.amplitude < 0:
            raise ParameterError('amplitude must be non-negative')
        if not 0 < self.flat_angle < math.pi:
            raise ParameterError('flat_angle must lie in (0, pi)')
        for name in ('radius', 'amplitude', 'flat_angle'):
            object.__setattr__(self, name, float(getattr(self, name)))

    def _profile_t(self, omega):
        psi = np.arccos(np.clip(omega[:, 0], -1.0, 1.0))
        return psi, (psi - self.flat_angle) / (math.pi - self.flat_angle)

    def radial_function(self, omega):
        _, t = self._profile_t(omega)
        return self.radius * (1.0 + self.amplitude * smoothstep(t))

    def normal_body(self, omega):
        psi, t = self._profile_t(omega)
        rho = self.radius * (1.0 + self.amplitude * smoothstep(t))
        drho = self.radius * self.amplitude * smoothstep_derivative(t) / (math.pi - self.flat_angle)
        sin_psi = np.sin(psi)
        axis = np.zeros(self.n)
        axis[0] = 1.0
        safe = np.where(sin_psi > 0, sin_psi, 1.0)
        e_psi = (np.cos(psi)[:, None] * omega - axis) / safe[:, None]
        slope = np.where(sin_psi > 0, drho / rho, 0.0)
        return _unit_rows(omega - slope[:, None] * e_psi)

    def circumradius(self, x0=None):
        x0 = self.center_array if x0 is None else np.asarray(x0, dtype=float)
        return self.radius * (1.0 + self.amplitude) + float(np.linalg.norm(x0 - self.center_array))

    def _scaled(self, factor):
        return replace(self, center=tuple(factor * self.center_array), radius=factor * self.radius)


# =============================================================================
# BEAKED SPHERE
# =============================================================================


@dataclass(frozen=True)
class BeakedSphere(DomainSpec):
    """
    D(eps) = B(eps) U K(eps): the unit ball centred at x(eps) = (1 + eps) e_1
    plus the part of the cone ``x_1/|x| > 1/sqrt(n)`` between the sphere
    ``|x| = eps**m`` and the first crossing of ∂B(eps) along each ray.

    With ``recentered`` the whole picture is translated by -x(eps), so B(eps)
    becomes the unit ball at the origin and e_1 is a touching point.

    Boundary pieces (all surfaces of revolution around e_1):
        sphere_remainder   ∂B(eps) minus the cap Sigma_eps
        cone_side          S_eps, the lateral cone surface
        sigma_star         Sigma*_eps, the cone cap on |x| = eps**m
    The cap ``sigma`` (Sigma_eps) is not part of ∂D(eps) and is meshed on request.
    """

    eps: float = 0.1
    m: int = None
    recentered: bool = False

    kind = 'beaked_sphere'

    def __post_init__(self):
        super().__post_init__()
        if self.n not in (2, 3):
            raise UnsupportedDimensionError(f'beaked sphere is built for n in {{2, 3}}, got {self.n}')
        m = self.n + 1 if self.m is None else self.m
        if int(m) != m or m <= self.n:
            raise ParameterError(f'm must be an integer greater than n={self.n}, got {m}')
        object.__setattr__(self, 'm', int(m))
        eps_max = get_default('BEAKED_EPS_MAX')
        if not 0 < self.eps < eps_max:
            raise ParameterError(f'eps must lie in (0, {eps_max}), got {self.eps}')
        object.__setattr__(self, 'eps', float(self.eps))
        if (1.0 + self.eps) * self.sin_theta >= 1.0:
            raise ParameterError(
                f'eps={self.eps} too large for n={self.n}: boundary rays of the cone miss ∂B(eps)'
            )

    # Geometry in original coordinates (apex at the origin).

    @property
    def shift(self):
        return 1.0 + self.eps

    @property
    def cos_theta(self):
        return 1.0 / math.sqrt(self.n)

    @property
    def sin_theta(self):
        return math.sqrt(1.0 - 1.0 / self.n)

    @property
    def theta(self):
        return math.acos(self.cos_theta)

    @property
    def rho_star(self):
        return self.eps ** self.m

    def ray_exit(self, cos_phi):
        """Distance from the apex to ∂B(eps) along a cone ray with direction cosine ``cos_phi``."""
        c = self.shift
        cos_phi = np.asarray(cos_phi, dtype=float)
        return c * cos_phi - np.sqrt(c * c * cos_phi * cos_phi - self.eps * (2.0 + self.eps))

    @cached_property
    def r_eps(self):
        return float(self.ray_exit(self.cos_theta))

    @cached_property
    def cos_psi_sigma(self):
        """Cosine of the polar half-angle of Sigma_eps seen from x(eps), measured from -e_1."""
        return self.shift - self.r_eps * self.cos_theta

    @cached_property
    def psi_sigma(self):
        return math.acos(self.cos_psi_sigma)

    @property
    def offset(self):
        vec = np.zeros(self.n)
        if self.recentered:
            vec[0] = -self.shift
        return vec

    @property
    def x_eps(self):
        vec = np.zeros(self.n)
        vec[0] = self.shift
        return vec + self.offset

    @property
    def apex(self):
        return self.offset.copy()

    @property
    def reference_point(self):
        return self.x_eps

    def to_original(self, points):
        return np.atleast_2d(points) - self.offset

    def _in_beak(self, p, closed=False, tol=0.0):
        r = np.linalg.norm(p, axis=-1)
        out = np.zeros(len(p), dtype=bool)
        mask = r > 0
        cos_phi = np.zeros(len(p))
        cos_phi[mask] = p[mask, 0] / r[mask]
        if closed:
            cone = mask & (cos_phi >= self.cos_theta - tol)
        else:
            cone = mask & (cos_phi > self.cos_theta)
        if not np.any(cone):
            return out
        exit_r = self.ray_exit(np.maximum(cos_phi[cone], self.cos_theta))
        rc = r[cone]
        if closed:
            out[cone] = (rc >= self.rho_star * (1 - tol)) & (rc <= exit_r * (1 + tol) + tol)
        else:
            out[cone] = (rc > self.rho_star) & (rc < exit_r)
        return out

    def contains(self, points):
        p = self.to_original(points)
        centre = np.zeros(self.n)
        centre[0] = self.shift
        in_ball = np.linalg.norm(p - centre, axis=-1) < 1.0
        return in_ball | self._in_beak(p)

    def closure_contains(self, points, tol=1e-12):
        p = self.to_original(points)
        centre = np.zeros(self.n)
        centre[0] = self.shift
        in_ball = np.linalg.norm(p - centre, axis=-1) <= 1.0 + tol
        return in_ball | self._in_beak(p, closed=True, tol=tol)

    def circumradius(self, x0=None):
        x0 = self.x_eps if x0 is None else np.asarray(x0, dtype=float)
        apex_distance = float(np.linalg.norm(self.apex - x0))
        return max(1.0 + float(np.linalg.norm(self.x_eps - x0)), apex_distance)

    def radial_projection(self, point):
        """Projection onto ∂B(eps) from x(eps); ``None`` when it lands inside Sigma_eps."""
        v = np.asarray(point, dtype=float) - self.x_eps
        norm = np.linalg.norm(v)
        if norm == 0:
            raise DomainError('cannot project x(eps) onto the boundary')
        unit = v / norm
        # angle measured from -e_1 at x(eps)
        if -unit[0] > self.cos_psi_sigma:
            return None
        return self.x_eps + unit

    # Exact measures.

    def piece_areas(self):
        """Analytic (n-1)-measures of the pieces, plus the full sphere and Sigma_eps."""
        theta, rho, r_eps = self.theta, self.rho_star, self.r_eps
        if self.n == 2:
            sigma = 2.0 * self.psi_sigma
            cone = 2.0 * (r_eps - rho)
            star = 2.0 * theta * rho
        else:
            sigma = 2.0 * math.pi * (1.0 - self.cos_psi_sigma)
            cone = math.pi * self.sin_theta * (r_eps ** 2 - rho ** 2)
            star = 2.0 * math.pi * rho ** 2 * (1.0 - self.cos_theta)
        sphere = sphere_area(self.n)
        return {
            'sphere': sphere,
            'sphere_remainder': sphere - sigma,
            'sigma': sigma,
            'cone_side': cone,
            'sigma_star': star,
        }

    def boundary_area(self):
        areas = self.piece_areas()
        return areas['sphere_remainder'] + areas['cone_side'] + areas['sigma_star']

    def beak_volume(self):
        """|K(eps)| by one-dimensional quadrature over cone directions."""
        rho = self.rho_star
        if self.n == 2:
            integrand = lambda phi: self.ray_exit(math.cos(phi)) ** 2 - rho ** 2
            value, _ = integrate.quad(integrand, 0.0, self.theta, epsabs=0.0, epsrel=1e-13, limit=200)
            return float(value)
        integrand = lambda phi: (self.ray_exit(math.cos(phi)) ** 3 - rho ** 3) / 3.0 * math.sin(phi)
        value, _ = integrate.quad(integrand, 0.0, self.theta, epsabs=0.0, epsrel=1e-13, limit=200)
        return float(2.0 * math.pi * value)

    def volume(self):
        return ball_volume(self.n) + self.beak_volume()
