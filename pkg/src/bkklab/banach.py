"""
Finite-dimensional normed spaces and the constructions built on their unit
spheres.

Every norm lives on R^d with the standard inner product as a bookkeeping
reference.  Three kinds are supported:

``euclidean``
    ||v|| = sqrt(v^T A v) for a positive-definite matrix A.
``lp``
    ||v|| = (sum |v_i|^p)^(1/p), 1 < p < inf.
``support``
    The unit ball is the polytope {v : <u_k, v> <= h_k} cut out by sampled
    support values h_k = h_B(u_k) on an antipodal direction grid.

The unit sphere S of a norm carries the volume density dl that gives every
tangent unit ball mass one.  Integrating |<x, y>| against dl/2 yields the
support function of a zonoid (``symmetrize``), and dl/2 times Lebesgue
measure on offsets is the natural measure on affine hyperplanes of the dual
space (``NaturalSampler``).
"""
import csv
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.spatial import HalfspaceIntersection, cKDTree

from . import harmonics
from .errors import InvalidArgument, PreconditionError
from .grassmann import GrassmannDensity
from .sphere import ball_volume, sphere_area, sphere_grid, uniform_directions

KINDS = ("euclidean", "lp", "support")
SPHERE_TOL = 1e-9
_SECTION_ANGLES = 256
_SECTION_LEVEL_S2 = 3
_CHUNK = 4096
_SYMM_DEGREE = 24


@dataclass(frozen=True, eq=False)
class NormSpec:
    """A norm on R^dim.  Build with the classmethods, not directly."""

    kind: str
    dim: int
    matrix: np.ndarray = None
    p: float = None
    directions: np.ndarray = None
    support_values: np.ndarray = None
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgument(f"unknown norm kind {self.kind!r}")
        if not 2 <= self.dim <= 4:
            raise InvalidArgument(f"dimension must be 2..4, got {self.dim}")
        if not (np.isfinite(self.scale) and self.scale > 0):
            raise InvalidArgument("scale must be positive")
        if self.kind == "euclidean":
            A = np.asarray(self.matrix, dtype=float)
            if A.shape != (self.dim, self.dim) or not np.allclose(A, A.T):
                raise InvalidArgument("euclidean norm needs a symmetric dim x dim matrix")
            if np.linalg.eigvalsh(A).min() <= 0:
                raise InvalidArgument("matrix is not positive definite")
        elif self.kind == "lp":
            if self.p is None or not 1 < self.p < np.inf:
                raise InvalidArgument(f"lp exponent must lie in (1, inf), got {self.p}")
        else:
            self._check_support_grid()

    # -- constructors -----------------------------------------------------
    @classmethod
    def euclidean(cls, dim=None, matrix=None):
        if matrix is None:
            matrix = np.eye(dim)
        matrix = np.array(matrix, dtype=float)
        return cls("euclidean", matrix.shape[0], matrix=matrix)

    @classmethod
    def lp(cls, p, dim):
        return cls("lp", dim, p=float(p))

    @classmethod
    def support_sampled(cls, directions, values):
        directions = np.array(directions, dtype=float)
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        return cls("support", directions.shape[1], directions=directions,
                   support_values=np.array(values, dtype=float))

    @classmethod
    def from_support_function(cls, h, dim, resolution=None):
        """Sample a support function ``h`` on the default direction grid."""
        grid = sphere_grid(dim, resolution)
        return cls.support_sampled(grid.points, h(grid.points))

    @classmethod
    def linf(cls, dim, smoothing=0.0, resolution=None):
        """Cube [-1, 1]^dim, optionally Minkowski-added to a ``smoothing`` ball."""
        return cls.from_support_function(
            lambda u: np.abs(u).sum(axis=1) + smoothing * np.linalg.norm(u, axis=1),
            dim, resolution)

    @classmethod
    def from_csv(cls, path):
        """Read rows ``u_1, ..., u_d, h`` (a header row is skipped)."""
        rows = []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                try:
                    rows.append([float(c) for c in row])
                except ValueError:
                    if rows:
                        raise InvalidArgument(f"bad row in {path}: {row}")
        arr = np.array(rows)
        return cls.support_sampled(arr[:, :-1], arr[:, -1])

    @classmethod
    def from_config(cls, cfg):
        """Build from a config table (``kind``, ``dim``, ``matrix`` / ``p`` / ``file``)."""
        kind = cfg.get("kind")
        try:
            if kind == "euclidean":
                return cls.euclidean(cfg.get("dim"), cfg.get("matrix"))
            if kind == "lp":
                return cls.lp(cfg["p"], cfg["dim"])
            if kind == "linf":
                return cls.linf(cfg["dim"], cfg.get("smoothing", 0.0), cfg.get("resolution"))
            if kind == "support":
                return cls.from_csv(cfg["file"])
        except KeyError as exc:
            raise InvalidArgument(f"norm table of kind {kind!r} lacks {exc}") from exc
        raise InvalidArgument(f"unknown norm kind {kind!r}")

    @classmethod
    def parse(cls, text):
        """Parse the short forms ``euclidean:3``, ``lp:1.5:3``, ``linf:2``,
        ``linf:2:0.05`` (smoothing) and ``support:path.csv``."""
        parts = text.split(":")
        try:
            if parts[0] == "euclidean":
                return cls.euclidean(int(parts[1]))
            if parts[0] == "lp":
                return cls.lp(float(parts[1]), int(parts[2]))
            if parts[0] == "linf":
                eps = float(parts[2]) if len(parts) > 2 else 0.0
                return cls.linf(int(parts[1]), eps)
            if parts[0] == "support":
                return cls.from_csv(":".join(parts[1:]))
        except (IndexError, ValueError) as exc:
            raise InvalidArgument(f"cannot parse norm {text!r}: {exc}") from exc
        raise InvalidArgument(f"unknown norm {text!r}")

    def scaled(self, c):
        """The norm c * ||.||; its unit ball is B / c."""
        return NormSpec(self.kind, self.dim, self.matrix, self.p, self.directions,
                        self.support_values, self.scale * c)

    def describe(self):
        out = {"kind": self.kind, "dim": self.dim, "scale": self.scale}
        if self.kind == "euclidean":
            out["matrix"] = np.asarray(self.matrix).tolist()
        elif self.kind == "lp":
            out["p"] = self.p
        else:
            out["support_points"] = len(self.support_values)
        return out

    # -- support-sampled internals ---------------------------------------
    def _check_support_grid(self):
        U, h = self.directions, self.support_values
        if U.ndim != 2 or U.shape[1] != self.dim or h.shape != (len(U),):
            raise InvalidArgument("support grid shape mismatch")
        if not np.all(np.isfinite(h)) or h.min() <= 0:
            raise InvalidArgument("support values must be positive and finite")
        dist, anti = cKDTree(U).query(-U)
        if dist.max() > 1e-9 or np.abs(h - h[anti]).max() > 1e-9 * h.max():
            raise InvalidArgument("support grid must be antipodal with even values")
        # every sampled value must be attained by the polytope it defines
        attained = (U @ self._unit_vertices.T).max(axis=1)
        if np.any(attained < h - 1e-7 * h.max()):
            raise InvalidArgument("support values are not those of a convex body")

    @cached_property
    def _unit_vertices(self):
        hs = np.column_stack([self.directions, -self.support_values])
        return HalfspaceIntersection(hs, np.zeros(self.dim)).intersections

    @property
    def vertices(self):
        """Vertices of the unit ball (support-sampled kind only)."""
        if self.kind != "support":
            raise AttributeError("only support-sampled norms carry vertices")
        return self._unit_vertices / self.scale

    # -- evaluation --------------------------------------------------------
    def gauge(self, v):
        """||v||, vectorised over leading axes."""
        v = np.asarray(v, dtype=float)
        if self.kind == "euclidean":
            q = np.einsum("...i,ij,...j->...", v, self.matrix, v)
            return self.scale * np.sqrt(np.maximum(q, 0.0))
        if self.kind == "lp":
            m = np.abs(v).max(axis=-1)
            safe = np.where(m > 0, m, 1.0)
            r = np.sum((np.abs(v) / safe[..., None]) ** self.p, axis=-1) ** (1 / self.p)
            return self.scale * m * r
        return self.scale * _chunked_max(v, self.directions.T / self.support_values)

    def gauge_grad(self, v):
        """Gradient of the gauge (0-homogeneous; a subgradient on polytope edges)."""
        v = np.asarray(v, dtype=float)
        if self.kind == "euclidean":
            Av = v @ self.matrix
            return self.scale * Av / np.sqrt(np.einsum("...i,...i->...", v, Av))[..., None]
        if self.kind == "lp":
            n = self.gauge(v)[..., None] / self.scale
            return self.scale * np.sign(v) * (np.abs(v) / n) ** (self.p - 1)
        A = self.directions / self.support_values[:, None]
        flat = v.reshape(-1, self.dim)
        k = np.concatenate([np.argmax(c @ A.T, axis=1) for c in _chunks(flat)])
        return self.scale * A[k].reshape(v.shape)

    def dual(self, xi):
        """Dual norm sup{<xi, v> : ||v|| <= 1}, vectorised over leading axes."""
        xi = np.asarray(xi, dtype=float)
        if self.kind == "euclidean":
            q = np.einsum("...i,ij,...j->...", xi, np.linalg.inv(self.matrix), xi)
            return np.sqrt(np.maximum(q, 0.0)) / self.scale
        if self.kind == "lp":
            q = self.p / (self.p - 1)
            m = np.abs(xi).max(axis=-1)
            safe = np.where(m > 0, m, 1.0)
            return m * np.sum((np.abs(xi) / safe[..., None]) ** q, axis=-1) ** (1 / q) / self.scale
        return _chunked_max(xi, self.vertices.T)

    def section_volume(self, normal):
        """(dim-1)-volume of {v in normal^perp : ||v|| <= 1}; ``normal`` unit."""
        n = np.asarray(normal, dtype=float)
        d = self.dim
        if d == 2:
            tangent = np.stack([-n[..., 1], n[..., 0]], axis=-1)
            return 2.0 / self.gauge(tangent)
        P = orthonormal_complement(n.reshape(-1, d))
        if self.kind == "euclidean":
            G = np.einsum("nik,ij,njl->nkl", P, self.matrix, P)
            vol = ball_volume(d - 1) / np.sqrt(np.linalg.det(G)) / self.scale ** (d - 1)
            return vol.reshape(n.shape[:-1])
        if d == 3:
            a = 2 * np.pi * np.arange(_SECTION_ANGLES) / _SECTION_ANGLES
            dirs = np.column_stack([np.cos(a), np.sin(a)])
            w = np.full(len(a), 2 * np.pi / len(a))
        else:
            g = sphere_grid(3, _SECTION_LEVEL_S2)
            dirs, w = g.points, g.weights
        out = np.empty(len(P))
        for sl in _slices(len(P), max(1, _CHUNK * 16 // len(dirs))):
            vecs = np.einsum("nik,mk->nmi", P[sl], dirs)
            rho = 1.0 / self.gauge(vecs)
            out[sl] = (rho ** (d - 1)) @ w / (d - 1)
        return out.reshape(n.shape[:-1])


def _chunks(a, size=_CHUNK):
    for i in range(0, len(a), size):
        yield a[i:i + size]


def _slices(n, size):
    for i in range(0, n, size):
        yield slice(i, min(n, i + size))


def _chunked_max(v, M):
    flat = v.reshape(-1, v.shape[-1])
    out = np.concatenate([(c @ M).max(axis=1) for c in _chunks(flat)]) if len(flat) else np.empty(0)
    return out.reshape(v.shape[:-1])


def orthonormal_complement(n):
    """Rows n (N, d) -> (N, d, d-1) orthonormal bases of n^perp (Householder)."""
    N, d = n.shape
    s = np.where(n[:, 0] >= 0, 1.0, -1.0)
    v = n.copy()
    v[:, 0] += s
    H = np.eye(d)[None] - 2 * v[:, :, None] * v[:, None, :] / np.einsum("ni,ni->n", v, v)[:, None, None]
    return H[:, :, 1:]


def dual_norm(space, xi):
    """Dual norm of the covector ``xi`` (vectorised over leading axes)."""
    xi = np.asarray(xi, dtype=float)
    if xi.shape[-1] != space.dim:
        raise InvalidArgument("covector dimension mismatch")
    if not np.all(np.isfinite(xi)):
        raise InvalidArgument("non-finite covector")
    return space.dual(xi)


def dl_density(space, omega):
    """Density of dl with respect to Euclidean surface measure d(omega).

    The Banach sphere is parametrised radially, x = omega / ||omega||.  The
    surface Jacobian of that map is |grad| * ||omega||^(-d) and dl itself has
    density 1 / vol(tangent unit ball) against surface measure.
    """
    omega = np.asarray(omega, dtype=float)
    d = space.dim
    g = space.gauge_grad(omega)
    gn = np.linalg.norm(g, axis=-1)
    jac = gn * space.gauge(omega) ** (-d)
    return jac / space.section_volume(g / gn[..., None])


def sphere_density(space, x):
    """Density of dl at a point ``x`` with ||x|| = 1, against surface measure of S."""
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(space.gauge(x) - 1) > SPHERE_TOL):
        raise PreconditionError("point is not on the unit sphere of the norm")
    g = space.gauge_grad(x)
    return 1.0 / space.section_volume(g / np.linalg.norm(g, axis=-1, keepdims=True))


@dataclass(frozen=True, eq=False)
class BanachSphere:
    """Quadrature of dl on the unit sphere S of ``space``.

    ``points`` are the Euclidean grid directions rescaled onto S and
    ``weights`` are their dl masses.
    """

    space: NormSpec
    directions: object
    points: np.ndarray
    weights: np.ndarray

    @property
    def mass(self):
        return float(self.weights.sum())

    @property
    def resolution(self):
        return self.directions.resolution


def banach_sphere(space, resolution=None):
    grid = sphere_grid(space.dim, resolution)
    gauge = space.gauge(grid.points)
    if np.any(~(gauge > 0)):
        raise InvalidArgument("degenerate norm: zero gauge on a ray")
    w = grid.weights * dl_density(space, grid.points)
    return BanachSphere(space, grid, grid.points / gauge[:, None], w)


@dataclass(frozen=True, eq=False)
class SymmetrizedNorm:
    """Support function h_symm(y) = 1/2 * sum_x |<x, y>| dl(x).

    h_symm is the dual norm of the symmetrized space, i.e. the support
    function of its unit ball, a zonoid.  Off-grid values come from the
    1-homogeneous extension of: the exact support function of the
    quadrature zonotope (dim 2, piecewise linear hence convex), an even
    spherical-harmonic fit (dim 3), the quadrature sum itself (dim 4).
    """

    base: NormSpec
    sphere: BanachSphere
    h_symm: GrassmannDensity
    arcs: tuple = None

    @property
    def dim(self):
        return self.base.dim

    @property
    def resolution(self):
        return self.sphere.resolution

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        if self.arcs is not None:
            return _arc_support(self.arcs, y)
        if self.dim == 3:
            r = np.linalg.norm(y, axis=-1)
            safe = np.where(r > 0, r, 1.0)[..., None]
            return r * self.h_symm(np.where(r[..., None] > 0, y / safe, 1.0))
        return _quadrature_support(self.sphere, y)

    def exact(self, y):
        """Quadrature sum without interpolation."""
        return _quadrature_support(self.sphere, np.asarray(y, dtype=float))

    def as_norm(self):
        """Support-sampled norm whose dual norm is h_symm (unit ball B_symm)."""
        return NormSpec.support_sampled(self.h_symm.grid.points, self.h_symm.values)


def _quadrature_support(sphere, y):
    flat = y.reshape(-1, y.shape[-1])
    out = np.concatenate(
        [0.5 * np.abs(c @ sphere.points.T) @ sphere.weights for c in _chunks(flat, 1024)]
    ) if len(flat) else np.empty(0)
    return out.reshape(y.shape[:-1])


def _zonotope_arcs(sphere):
    """Breakpoint angles and per-arc gradients of y -> 1/2 sum w |<x, y>|.

    Between consecutive angles where some <x_i, y> changes sign the
    function is linear, <c_arc, y>.
    """
    v = 0.5 * sphere.weights[:, None] * sphere.points
    a = np.arctan2(v[:, 1], v[:, 0])
    br = np.unique(np.mod(np.concatenate([a + np.pi / 2, a - np.pi / 2]), 2 * np.pi))
    mid = 0.5 * (br + np.append(br[1:], br[0] + 2 * np.pi))
    m = np.stack([np.cos(mid), np.sin(mid)], -1)
    grads = np.concatenate([np.sign(c @ v.T) @ v for c in _chunks(m, 1024)])
    return br, grads


def _arc_support(arcs, y):
    br, grads = arcs
    phi = np.mod(np.arctan2(y[..., 1], y[..., 0]), 2 * np.pi)
    k = (np.searchsorted(br, phi, side="right") - 1) % len(br)
    return np.einsum("...i,...i->...", grads[k], y)


def symmetrize(space, resolution=None):
    """Zonoid symmetrization of ``space`` on a sphere grid of ``resolution``."""
    sphere = banach_sphere(space, resolution)
    grid = sphere.directions
    values = _quadrature_support(sphere, grid.points)
    coef = degs = None
    if space.dim == 3:
        coef, degs = harmonics.fit_even(grid, values, _SYMM_DEGREE)
    arcs = _zonotope_arcs(sphere) if space.dim == 2 else None
    return SymmetrizedNorm(space, sphere, GrassmannDensity(grid, values, coef, degs), arcs)


class NaturalSampler:
    """Draws hyperplanes {v* : <x, v*> = t} of the dual space.

    x lies on the unit sphere of ``space`` and t is uniform on ``t_range``.
    Weighted averages of an integrand estimate its integral against the
    natural measure 1/2 * dl(x) dt.

    ``method="importance"`` draws the Euclidean direction of x uniformly and
    carries the dl density in the weight; ``method="quadrature"`` draws x
    from the discrete dl quadrature with constant weight 1/2 * mass * |t_range|.
    """

    def __init__(self, space, t_range, seed=None, method="importance", resolution=None):
        lo, hi = (float(t) for t in t_range)
        if not (np.isfinite(lo) and np.isfinite(hi)) or not hi > lo:
            raise InvalidArgument(f"empty or infinite t_range {t_range}")
        if method not in ("importance", "quadrature"):
            raise InvalidArgument(f"unknown sampling method {method!r}")
        self.space = space
        self.t_range = (lo, hi)
        self.method = method
        self.rng = np.random.default_rng(seed)
        self.sphere = banach_sphere(space, resolution)

    @property
    def mass(self):
        return self.sphere.mass

    @property
    def length(self):
        return self.t_range[1] - self.t_range[0]

    def draw(self, n):
        """Return ``(x, t, weight)`` arrays for ``n`` draws."""
        x, w = draw_sphere(self.space, self.rng, n, self.method, self.sphere)
        t = self.rng.uniform(*self.t_range, size=n)
        return x, t, w * self.length

    def __iter__(self):
        while True:
            yield self.draw(_CHUNK)


def draw_sphere(space, rng, n, method="importance", sphere=None):
    """``n`` points x of the unit sphere of ``space`` with weights such that
    the weighted mean of g(x) estimates 1/2 * integral of g against dl."""
    if method == "quadrature":
        sphere = sphere or banach_sphere(space)
        idx = rng.choice(len(sphere.weights), size=n, p=sphere.weights / sphere.mass)
        return sphere.points[idx], np.full(n, 0.5 * sphere.mass)
    omega = uniform_directions(rng, n, space.dim)
    x = omega / space.gauge(omega)[:, None]
    return x, 0.5 * sphere_area(space.dim) * dl_density(space, omega)


def natural_sampler(space, t_range, rng_seed=None, method="importance"):
    return NaturalSampler(space, t_range, rng_seed, method)
