"""
Deterministic quadrature grids on the Euclidean unit sphere S^{d-1}.

Every grid is closed under x -> -x with equal weights, and the weights sum
to the surface area of the sphere up to rounding.

* d = 2: uniform angles.
* d = 3: subdivided icosahedron, vertex weights = 1/3 of adjacent spherical
  triangle areas.
* d = 4: Hopf coordinates, Gauss-Legendre in sin^2(eta) times two uniform
  angular grids.
"""
from dataclasses import dataclass
from functools import lru_cache
from math import gamma, pi

import numpy as np
from scipy.spatial import cKDTree

from .errors import InvalidArgument


def sphere_area(d):
    """Surface area of S^{d-1} in R^d."""
    return 2 * pi ** (d / 2) / gamma(d / 2)


def ball_volume(k):
    """Lebesgue volume of the unit ball in R^k (kappa_k)."""
    return pi ** (k / 2) / gamma(k / 2 + 1)


@dataclass(frozen=True, eq=False)
class SphereQuadrature:
    """Points on S^{d-1} with positive surface-measure weights.

    Attributes
    ----------
    points : ndarray, shape (N, d)
    weights : ndarray, shape (N,)
    resolution : int
        Angular count (d = 2, 4) or subdivision level (d = 3).
    antipode : ndarray of int, shape (N,)
        Index of -points[i].
    """

    points: np.ndarray
    weights: np.ndarray
    resolution: int
    antipode: np.ndarray

    @property
    def dim(self):
        return self.points.shape[1]

    def __len__(self):
        return len(self.weights)

    def integrate(self, values):
        return float(np.dot(self.weights, values))


def _antipodes(points):
    _, idx = cKDTree(points).query(-points)
    if not np.allclose(points[idx], -points, atol=1e-9):
        raise AssertionError("grid is not antipodally closed")
    return idx


def circle_grid(n):
    """Uniform grid of ``n`` angles on S^1 (``n`` even)."""
    if n < 4 or n % 2:
        raise InvalidArgument(f"circle grid needs an even count >= 4, got {n}")
    theta = 2 * pi * np.arange(n) / n
    pts = np.column_stack([np.cos(theta), np.sin(theta)])
    w = np.full(n, 2 * pi / n)
    anti = (np.arange(n) + n // 2) % n
    return SphereQuadrature(pts, w, n, anti)


_ICO_FACES = np.array([
    [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
    [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
    [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
    [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
])


@lru_cache(maxsize=8)
def icosphere_mesh(level):
    """Vertices and faces of the icosahedron subdivided ``level`` times.

    Vertices of coarser levels form a prefix of the vertex array.
    """
    g = (1 + 5 ** 0.5) / 2
    verts = [np.array(v, float) for v in (
        [-1, g, 0], [1, g, 0], [-1, -g, 0], [1, -g, 0],
        [0, -1, g], [0, 1, g], [0, -1, -g], [0, 1, -g],
        [g, 0, -1], [g, 0, 1], [-g, 0, -1], [-g, 0, 1])]
    verts = [v / np.linalg.norm(v) for v in verts]
    faces = _ICO_FACES
    for _ in range(level):
        cache = {}

        def mid(a, b):
            key = (a, b) if a < b else (b, a)
            if key not in cache:
                m = verts[a] + verts[b]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        faces = np.array(new)
    pts = np.array(verts)
    pts.setflags(write=False)
    faces.setflags(write=False)
    return pts, faces


def spherical_triangle_area(a, b, c):
    # Van Oosterom & Strackee
    num = np.abs(np.einsum("ij,ij->i", a, np.cross(b, c)))
    den = (1 + np.einsum("ij,ij->i", a, b) + np.einsum("ij,ij->i", b, c)
           + np.einsum("ij,ij->i", c, a))
    return 2 * np.arctan2(num, den)


def icosphere_grid(level):
    pts, faces = icosphere_mesh(level)
    area = spherical_triangle_area(pts[faces[:, 0]], pts[faces[:, 1]], pts[faces[:, 2]])
    w = np.zeros(len(pts))
    for k in range(3):
        np.add.at(w, faces[:, k], area / 3)
    # remove rounding drift so constants integrate exactly
    w *= 4 * pi / w.sum()
    return SphereQuadrature(pts.copy(), w, level, _antipodes(pts))


def s3_grid(n):
    """Product grid on S^3 with ``n`` nodes per Hopf angle."""
    if n < 4 or n % 2:
        raise InvalidArgument(f"S^3 grid needs an even count >= 4, got {n}")
    nu = max(n // 2, 2)
    u, gw = np.polynomial.legendre.leggauss(nu)
    u = (u + 1) / 2  # u = sin^2 eta
    gw = gw / 2
    a = 2 * pi * np.arange(n) / n
    U, A1, A2 = np.meshgrid(u, a, a, indexing="ij")
    W = np.broadcast_to(gw[:, None, None], U.shape) * (2 * pi / n) ** 2 / 2
    c, s = np.sqrt(1 - U), np.sqrt(U)
    pts = np.column_stack([
        (c * np.cos(A1)).ravel(), (c * np.sin(A1)).ravel(),
        (s * np.cos(A2)).ravel(), (s * np.sin(A2)).ravel()])
    return SphereQuadrature(pts, W.ravel().copy(), n, _antipodes(pts))


_DEFAULT_RES = {2: 2048, 3: 5, 4: 24}


@lru_cache(maxsize=32)
def sphere_grid(dim, resolution=None):
    """Default antipodal quadrature of S^{dim-1}; cached, treat as read-only."""
    if resolution is None:
        resolution = _DEFAULT_RES.get(dim)
    if dim == 2:
        return circle_grid(resolution)
    if dim == 3:
        return icosphere_grid(resolution)
    if dim == 4:
        return s3_grid(resolution)
    raise InvalidArgument(f"sphere grids exist for dim 2..4, got {dim}")


def refined(grid):
    """Next finer grid of the same family."""
    if grid.dim == 3:
        return sphere_grid(3, grid.resolution + 1)
    return sphere_grid(grid.dim, 2 * grid.resolution)


def uniform_directions(rng, n, d):
    """``n`` i.i.d. uniform points on S^{d-1}."""
    g = rng.standard_normal((n, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def fibonacci_directions(n):
    """Near-uniform deterministic directions on S^2 (not antipodal)."""
    i = np.arange(n) + 0.5
    z = 1 - 2 * i / n
    r = np.sqrt(1 - z * z)
    phi = pi * (1 + 5 ** 0.5) * i
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
