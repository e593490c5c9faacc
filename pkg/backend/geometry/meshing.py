"""
Boundary meshes.

``mesh_boundary`` discretizes ∂D into facets carrying a centroid, an area
weight, an outward unit normal and a piece label. Facets are never flat
polygons: centroids and normals are exact surface points/normals and the
area of each facet is the exact (or Gauss-integrated) measure of the
parameter cell it covers, so the midpoint rule sees no geometric error.

Features:
    - Star-shaped domains: polar cells about a pole direction (arcs in 2-D,
      latitude rings split into azimuthal sectors in 3-D)
    - Grading: cell width <= max(h_min, ratio * distance to the grading
      centre), built by recursive bisection of the level-0 cells
    - Beaked sphere: surface-of-revolution pieces (sphere remainder, cone
      side, beak cap and optionally the removed cap Sigma_eps), graded
      geometrically toward the beak tip and the sphere/cone junction
    - Level L splits every level-0 cell into 2**L pieces per parameter, so
      the facet count grows by 2**(n-1) per level

Examples:
    >>> mesh = mesh_boundary(Ball(2, radius=1.0), level=2)
    >>> mesh.size
    256
    >>> graded = mesh_boundary(Ball(3), 1, grading_center=(1.0, 0.0, 0.0), pole_gap=1e-2)

Notes:
    - Only n in {2, 3} is meshed; other dimensions raise
      ``UnsupportedDimensionError``.
    - Meshes are immutable (read-only numpy arrays) and safe to share
      between threads.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from common.defaults import get_default
from common.exceptions import ParameterError, UnsupportedDimensionError

from .domains import BeakedSphere, StarShapedDomain

logger = logging.getLogger('potlab')

BEAKED_PIECES = ('sphere_remainder', 'cone_side', 'sigma_star')
BEAKED_ALL_PIECES = BEAKED_PIECES + ('sigma',)


@dataclass(frozen=True, eq=False)
class SurfaceMesh:
    """Facet arrays of a boundary discretization; see module docstring."""

    spec: object
    level: int
    centroids: np.ndarray
    areas: np.ndarray
    normals: np.ndarray
    pieces: np.ndarray
    diameters: np.ndarray
    grading_center: tuple = None
    pole_gap: float = None
    selection: tuple = None

    def __post_init__(self):
        for name in ('centroids', 'areas', 'normals', 'pieces', 'diameters'):
            getattr(self, name).setflags(write=False)

    @property
    def n(self):
        return self.centroids.shape[1]

    @property
    def size(self):
        return len(self.areas)

    @property
    def total_area(self):
        return float(self.areas.sum())

    @property
    def max_diameter(self):
        return float(self.diameters.max())

    @property
    def labels(self):
        return tuple(dict.fromkeys(self.pieces.tolist()))

    def piece(self, label):
        """Facets of one labelled piece as a mesh of its own."""
        mask = self.pieces == label
        if not mask.any():
            raise ParameterError(f'mesh has no piece {label!r}')
        return SurfaceMesh(
            spec=self.spec,
            level=self.level,
            centroids=self.centroids[mask],
            areas=self.areas[mask],
            normals=self.normals[mask],
            pieces=self.pieces[mask],
            diameters=self.diameters[mask],
            grading_center=self.grading_center,
            pole_gap=self.pole_gap,
            selection=(label,),
        )

    def at_level(self, level):
        """Same spec, grading and piece selection at another refinement level."""
        return mesh_boundary(
            self.spec, level, grading_center=self.grading_center, pole_gap=self.pole_gap, pieces=self.selection
        )

    def coarsen(self):
        if self.level == 0:
            raise ParameterError('level-0 mesh cannot be coarsened')
        return self.at_level(self.level - 1)

    def refine(self):
        return self.at_level(self.level + 1)


# =============================================================================
# ONE-DIMENSIONAL PARTITIONS
# =============================================================================


def _interval_distance(a, b, c):
    if a <= c <= b:
        return 0.0
    return min(abs(a - c), abs(b - c))


def graded_edges(lo, hi, base_cells, centers=(), ratio=None):
    """
    Edges of a partition of [lo, hi] graded toward ``centers``.

    Each level-0 cell is bisected until its width is at most
    ``max(h_min, ratio * dist(cell, c))`` for every ``(c, h_min)`` in
    ``centers``.
    """
    ratio = ratio or get_default('MESH_GRADING_RATIO')
    edges = np.linspace(lo, hi, int(base_cells) + 1)
    if not centers:
        return edges
    out = [edges[0]]
    stack = [(edges[i], edges[i + 1], 0) for i in reversed(range(int(base_cells)))]
    while stack:
        a, b, depth = stack.pop()
        allowed = min(max(h_min, ratio * _interval_distance(a, b, c)) for c, h_min in centers)
        if b - a > allowed and depth < 60:
            mid = 0.5 * (a + b)
            stack.append((mid, b, depth + 1))
            stack.append((a, mid, depth + 1))
        else:
            out.append(b)
    return np.asarray(out)


def subdivide(edges, level):
    """Split every cell into ``2**level`` equal cells; returns (edges, parent index per cell)."""
    k = 2 ** level
    widths = np.diff(edges)
    frac = np.arange(k) / k
    starts = (edges[:-1, None] + widths[:, None] * frac[None, :]).ravel()
    parent = np.repeat(np.arange(len(widths)), k)
    return np.append(starts, edges[-1]), parent


def _pow2_ceil(x):
    return 2 ** np.ceil(np.log2(np.maximum(x, 1.0))).astype(int)


def azimuth_counts(circumference, width):
    """Level-0 sector count per ring: a power of two near circumference / width."""
    lo = get_default('MESH_MIN_AZIMUTH_3D')
    hi = get_default('MESH_MAX_AZIMUTH_3D')
    return np.clip(_pow2_ceil(circumference / width), lo, hi)


def _ring_cells(az):
    """Ring index and in-ring sector index for rings with ``az`` sectors each."""
    ring = np.repeat(np.arange(len(az)), az)
    starts = np.cumsum(az) - az
    sector = np.arange(az.sum()) - np.repeat(starts, az)
    return ring, sector


def orthonormal_frame(d):
    """``(d, e_a, e_b)`` completing the unit vector ``d`` to a right-handed basis of R^3."""
    d = np.asarray(d, dtype=float)
    helper = np.array([1.0, 0.0, 0.0]) if abs(d[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e_a = helper - helper.dot(d) * d
    e_a /= np.linalg.norm(e_a)
    return d, e_a, np.cross(d, e_a)


# =============================================================================
# STAR-SHAPED DOMAINS
# =============================================================================


def _pole_direction(spec, grading_center):
    if grading_center is None:
        d = np.zeros(spec.n)
        d[0] = 1.0
        return d
    body = spec.to_body(np.asarray(grading_center, dtype=float))[0]
    norm = np.linalg.norm(body)
    if norm == 0:
        raise ParameterError('grading centre coincides with the domain centre')
    return body / norm


def _mesh_star_2d(spec, level, grading_center, pole_gap):
    d = _pole_direction(spec, grading_center)
    d_perp = np.array([-d[1], d[0]])

    def omega(phi):
        phi = np.asarray(phi, dtype=float).ravel()
        return np.cos(phi)[:, None] * d + np.sin(phi)[:, None] * d_perp

    centers = ()
    if grading_center is not None:
        speed = float(spec.area_density(d[None, :])[0])
        centers = ((0.0, pole_gap / 4.0 / speed),)
    edges = graded_edges(-math.pi, math.pi, get_default('MESH_BASE_ARCS_2D'), centers)
    edges, _ = subdivide(edges, level)

    a, b = edges[:-1], edges[1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    nodes, weights = leggauss(3)
    phis = mid[:, None] + half[:, None] * nodes[None, :]
    density = spec.area_density(omega(phis)).reshape(phis.shape)
    areas = half * (density @ weights)

    om = omega(mid)
    centroids = spec.to_world(spec.boundary_point_body(om))
    normals = spec.normal_body(om) @ spec.frame.T
    chord = spec.boundary_point_body(omega(b)) - spec.boundary_point_body(omega(a))
    diameters = np.linalg.norm(chord, axis=-1)
    return centroids, areas, normals, diameters


def _mesh_star_3d(spec, level, grading_center, pole_gap):
    d, e_a, e_b = orthonormal_frame(_pole_direction(spec, grading_center))

    def omega(mu, beta):
        mu, beta = np.ravel(mu), np.ravel(beta)
        s = np.sqrt(np.clip(1.0 - mu * mu, 0.0, None))
        return (
            mu[:, None] * d
            + (s * np.cos(beta))[:, None] * e_a
            + (s * np.sin(beta))[:, None] * e_b
        )

    centers = ()
    if grading_center is not None:
        speed = math.sqrt(float(spec.area_density(d[None, :])[0]))
        centers = ((0.0, pole_gap / 4.0 / speed),)
    base = graded_edges(0.0, math.pi, get_default('MESH_BASE_RINGS_3D'), centers)
    base_width = np.diff(base)
    base_az = azimuth_counts(2.0 * math.pi * np.sin(0.5 * (base[:-1] + base[1:])), base_width)

    edges, parent = subdivide(base, level)
    az = base_az[parent] * 2 ** level
    ring, sector = _ring_cells(az)

    mu_a, mu_b = np.cos(edges[:-1])[ring], np.cos(edges[1:])[ring]
    mu_mid, mu_half = 0.5 * (mu_a + mu_b), 0.5 * (mu_a - mu_b)
    d_beta = 2.0 * math.pi / az[ring]
    beta_mid = (sector + 0.5) * d_beta

    g = 1.0 / math.sqrt(3.0)
    areas = np.zeros(len(ring))
    for gm in (-g, g):
        for gb in (-g, g):
            om = omega(mu_mid + gm * mu_half, beta_mid + 0.5 * gb * d_beta)
            areas += spec.area_density(om)
    areas *= mu_half * 0.5 * d_beta

    om = omega(mu_mid, beta_mid)
    centroids = spec.to_world(spec.boundary_point_body(om))
    normals = spec.normal_body(om) @ spec.frame.T

    beta_a, beta_b = sector * d_beta, (sector + 1) * d_beta
    corner = lambda mu, beta: spec.boundary_point_body(omega(mu, beta))
    diag1 = np.linalg.norm(corner(mu_a, beta_a) - corner(mu_b, beta_b), axis=-1)
    diag2 = np.linalg.norm(corner(mu_a, beta_b) - corner(mu_b, beta_a), axis=-1)
    return centroids, areas, normals, np.maximum(diag1, diag2)


# =============================================================================
# BEAKED SPHERE
# =============================================================================


class _SphereArc:
    """Profile of ∂B(eps): psi measured at x(eps) from -e_1."""

    def __init__(self, shift):
        self.shift = shift

    def point(self, s):
        return self.shift - np.cos(s), np.sin(s)

    def normal(self, s):
        return -np.cos(s), np.sin(s)

    def length(self, a, b):
        return b - a

    def ring_measure(self, a, b):
        return np.cos(a) - np.cos(b)

    def centre_3d(self, a, b):
        return np.arccos(0.5 * (np.cos(a) + np.cos(b)))


class _ConeSide:
    """Profile of S_eps: distance r from the apex along the boundary ray."""

    def __init__(self, cos_theta, sin_theta):
        self.c, self.s = cos_theta, sin_theta

    def point(self, r):
        return r * self.c, r * self.s

    def normal(self, r):
        return np.full_like(r, -self.s), np.full_like(r, self.c)

    def length(self, a, b):
        return b - a

    def ring_measure(self, a, b):
        return 0.5 * self.s * (b * b - a * a)

    def centre_3d(self, a, b):
        return np.sqrt(0.5 * (a * a + b * b))


class _CapArc:
    """Profile of Sigma*_eps on |x| = rho, angle from e_1; normal points to the apex."""

    def __init__(self, rho):
        self.rho = rho

    def point(self, s):
        return self.rho * np.cos(s), self.rho * np.sin(s)

    def normal(self, s):
        return -np.cos(s), -np.sin(s)

    def length(self, a, b):
        return self.rho * (b - a)

    def ring_measure(self, a, b):
        return self.rho ** 2 * (np.cos(a) - np.cos(b))

    def centre_3d(self, a, b):
        return np.arccos(0.5 * (np.cos(a) + np.cos(b)))


def _beaked_profiles(spec, grading_center, pole_gap):
    """(label, profile, level-0 edges) for every piece of the beaked sphere."""
    ratio = get_default('MESH_GRADING_RATIO')
    base_cells = get_default('BEAKED_BASE_CELLS')
    psi_sigma = spec.psi_sigma
    sphere = _SphereArc(spec.shift)

    centers = [(psi_sigma, ratio * spec.r_eps)]
    if grading_center is not None:
        p = spec.to_original(np.asarray(grading_center, dtype=float))[0]
        v = p.copy()
        v[0] -= spec.shift
        psi_g = math.acos(max(-1.0, min(1.0, -v[0] / np.linalg.norm(v))))
        if psi_g >= psi_sigma:
            centers.append((psi_g, pole_gap / 4.0))
    remainder_cells = max(base_cells, math.ceil(get_default('MESH_BASE_RINGS_3D') * (math.pi - psi_sigma) / math.pi))

    return [
        ('sphere_remainder', sphere, graded_edges(psi_sigma, math.pi, remainder_cells, centers)),
        ('sigma', sphere, np.linspace(0.0, psi_sigma, base_cells + 1)),
        (
            'cone_side',
            _ConeSide(spec.cos_theta, spec.sin_theta),
            graded_edges(spec.rho_star, spec.r_eps, base_cells, [(0.0, ratio * spec.rho_star)]),
        ),
        ('sigma_star', _CapArc(spec.rho_star), np.linspace(0.0, spec.theta, base_cells + 1)),
    ]


def _embed(axial, radial, n, cos_b=None, sin_b=None):
    if n == 2:
        return np.column_stack([axial, radial])
    return np.column_stack([axial, radial * cos_b, radial * sin_b])


def _mesh_beaked_piece(spec, label, profile, base, level):
    n = spec.n
    edges, parent = subdivide(base, level)
    a, b = edges[:-1], edges[1:]
    if n == 2:
        mid = 0.5 * (a + b)
        pa, pr = profile.point(mid)
        na, nr = profile.normal(mid)
        length = profile.length(a, b)
        (xa, ra), (xb, rb) = profile.point(a), profile.point(b)
        chord = np.hypot(xb - xa, rb - ra)
        centroids = np.vstack([_embed(pa, pr, 2), _embed(pa, -pr, 2)])
        normals = np.vstack([_embed(na, nr, 2), _embed(na, -nr, 2)])
        areas = np.concatenate([length, length])
        diameters = np.concatenate([chord, chord])
    else:
        (xa0, ra0), (xb0, rb0) = profile.point(base[:-1]), profile.point(base[1:])
        base_width = np.hypot(xb0 - xa0, rb0 - ra0)
        base_radial = np.maximum(ra0, rb0)
        az = azimuth_counts(2.0 * math.pi * base_radial, base_width)[parent] * 2 ** level
        ring, sector = _ring_cells(az)
        d_beta = 2.0 * math.pi / az[ring]
        beta = (sector + 0.5) * d_beta
        cos_b, sin_b = np.cos(beta), np.sin(beta)
        ra_, rb_ = a[ring], b[ring]
        centre = profile.centre_3d(ra_, rb_)
        pa, pr = profile.point(centre)
        na, nr = profile.normal(centre)
        centroids = _embed(pa, pr, 3, cos_b, sin_b)
        normals = _embed(na, nr, 3, cos_b, sin_b)
        areas = profile.ring_measure(ra_, rb_) * d_beta
        (xa, rra), (xb, rrb) = profile.point(ra_), profile.point(rb_)
        beta_a, beta_b = sector * d_beta, (sector + 1) * d_beta
        diag1 = np.linalg.norm(
            _embed(xa, rra, 3, np.cos(beta_a), np.sin(beta_a)) - _embed(xb, rrb, 3, np.cos(beta_b), np.sin(beta_b)),
            axis=-1,
        )
        diag2 = np.linalg.norm(
            _embed(xa, rra, 3, np.cos(beta_b), np.sin(beta_b)) - _embed(xb, rrb, 3, np.cos(beta_a), np.sin(beta_a)),
            axis=-1,
        )
        diameters = np.maximum(diag1, diag2)
    centroids = centroids + spec.offset
    labels = np.full(len(areas), label, dtype='<U16')
    return centroids, areas, normals, labels, diameters


# =============================================================================
# ENTRY POINT
# =============================================================================


def mesh_boundary(spec, level, grading_center=None, pole_gap=None, pieces=None):
    """
    Mesh the boundary of ``spec``.

    Args:
        spec (DomainSpec): Domain to mesh.
        level (int): Refinement level >= 0.
        grading_center (array_like, optional): Boundary point the facets are
            graded toward.
        pole_gap (float, optional): Distance of the pole being resolved from
            ``grading_center``; sets the finest width ``pole_gap / 4``.
            Defaults to ``POTLAB['MESH_DEFAULT_POLE_GAP']``.
        pieces (tuple of str, optional): Beaked sphere only. Pieces to mesh;
            by default the three pieces of ∂D(eps). ``'sigma'`` selects the
            removed cap Sigma_eps, which is not part of ∂D(eps).

    Returns:
        SurfaceMesh

    Raises:
        UnsupportedDimensionError: If ``spec.n`` is not 2 or 3.
        ParameterError: If ``level`` is negative or a piece is unknown.
    """
    if spec.n not in (2, 3):
        raise UnsupportedDimensionError(f'meshing is implemented for n in {{2, 3}}, got n={spec.n}')
    if int(level) != level or level < 0:
        raise ParameterError(f'level must be a non-negative integer, got {level}')
    level = int(level)
    if grading_center is not None:
        grading_center = tuple(float(v) for v in np.asarray(grading_center, dtype=float).ravel())
        if pole_gap is None:
            pole_gap = get_default('MESH_DEFAULT_POLE_GAP')
        if not pole_gap > 0:
            raise ParameterError('pole_gap must be positive')
        pole_gap = float(pole_gap)

    if isinstance(spec, StarShapedDomain):
        if pieces not in (None, ('boundary',)):
            raise ParameterError(f'{spec.kind} has a single boundary piece')
        build = _mesh_star_2d if spec.n == 2 else _mesh_star_3d
        centroids, areas, normals, diameters = build(spec, level, grading_center, pole_gap)
        labels = np.full(len(areas), 'boundary', dtype='<U16')
    elif isinstance(spec, BeakedSphere):
        wanted = BEAKED_PIECES if pieces is None else tuple(pieces)
        unknown = set(wanted) - set(BEAKED_ALL_PIECES)
        if unknown:
            raise ParameterError(f'unknown beaked pieces: {sorted(unknown)}')
        parts = [
            _mesh_beaked_piece(spec, label, profile, base, level)
            for label, profile, base in _beaked_profiles(spec, grading_center, pole_gap)
            if label in wanted
        ]
        centroids, areas, normals, labels, diameters = (np.concatenate(arrays) for arrays in zip(*parts))
    else:
        raise ParameterError(f'cannot mesh {type(spec).__name__}')

    logger.debug('meshed %s n=%d level=%d: %d facets', spec.kind, spec.n, level, len(areas))
    return SurfaceMesh(
        spec=spec,
        level=level,
        centroids=np.ascontiguousarray(centroids, dtype=float),
        areas=np.ascontiguousarray(areas, dtype=float),
        normals=np.ascontiguousarray(normals, dtype=float),
        pieces=labels,
        diameters=np.ascontiguousarray(diameters, dtype=float),
        grading_center=grading_center,
        pole_gap=pole_gap,
        selection=None if pieces is None else tuple(pieces),
    )
