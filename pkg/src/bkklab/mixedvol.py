"""
Volumes and mixed volumes of convex bodies given by support functions, the
chart integral of fiberwise mixed volumes, and a Monte-Carlo check of the
product Crofton measure on parallelotopes.

Support functions are callables mapping directions (K, m) to values (K,).
"""
from dataclasses import dataclass
from itertools import combinations
from math import factorial
from typing import Callable, Sequence

import numpy as np
from scipy.spatial import ConvexHull, HalfspaceIntersection
from scipy.spatial import QhullError

from .banach import orthonormal_complement
from .crofton import crofton_density_for
from .errors import InvalidArgument, InvalidBody, NonConvergence, UnsupportedMode
from .parallel import map_blocks, map_chunks
from .sphere import fibonacci_directions, sphere_area, uniform_directions

DIRECTIONS = {2: 256, 3: 1024}
MAX_DIRECTIONS = {2: 1 << 16, 3: 1 << 14}
# error order in the direction count, used for Richardson extrapolation
_ORDER = {2: 2, 3: 1}
RTOL = 1e-3
_FD = 1e-6
_CONVEX_TOL = 1e-9
_NODE_BLOCK = 512


# -- single bodies ------------------------------------------------------------

def _angles(K):
    return 2 * np.pi * np.arange(K) / K


def _circle_dirs(theta):
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


def _support_triplet_dirs(K):
    """Directions at theta_k and theta_k +- _FD, stacked (3K, 2)."""
    th = _angles(K)
    return _circle_dirs(np.concatenate([th, th + _FD, th - _FD])), th


def _check_convex_2d(h0, K):
    # each supporting line must touch the intersection of all the others
    dth = 2 * np.pi / K
    edge = np.roll(h0, 1, -1) + np.roll(h0, -1, -1) - 2 * np.cos(dth) * h0
    scale = np.abs(h0).max(axis=-1, keepdims=True)
    if np.any(edge < -_CONVEX_TOL * np.maximum(scale, 1e-300)):
        raise InvalidBody("support values are not those of a convex body")


def _area_inscribed(H, K):
    """Areas from stacked support values H (..., 3K): support-point polygon."""
    h0, hp, hm = H[..., :K], H[..., K:2 * K], H[..., 2 * K:]
    _check_convex_2d(h0, K)
    th = _angles(K)
    c, s = np.cos(th), np.sin(th)
    dh = (hp - hm) / (2 * _FD)
    px = h0 * c - dh * s
    py = h0 * s + dh * c
    cross = px * np.roll(py, -1, -1) - py * np.roll(px, -1, -1)
    return 0.5 * cross.sum(axis=-1)


def _area_halfspace(H, K):
    """Areas of the intersection of the K half-planes {<u_k, p> <= h_k}."""
    h0 = H[..., :K]
    _check_convex_2d(h0, K)
    th = _angles(K)
    h1 = np.roll(h0, -1, -1)
    t1 = np.roll(th, -1)
    sd = np.sin(2 * np.pi / K)
    px = (h0 * np.sin(t1) - h1 * np.sin(th)) / sd
    py = (h1 * np.cos(th) - h0 * np.cos(t1)) / sd
    cross = px * np.roll(py, -1, -1) - py * np.roll(px, -1, -1)
    return 0.5 * cross.sum(axis=-1)


_AREA = {"inscribed": _area_inscribed, "halfspace": _area_halfspace}


def _volume_2d(h, K, method):
    dirs, _ = _support_triplet_dirs(K)
    H = np.asarray(h(dirs), dtype=float)
    if not np.all(np.isfinite(H)):
        raise InvalidBody("non-finite support values")
    return float(_AREA[method](H, K))


def _support_points_3d(h, U):
    T = orthonormal_complement(U)
    h0 = h(U)
    p = h0[:, None] * U
    for j in range(2):
        t = T[:, :, j]
        p += ((h(U + _FD * t) - h(U - _FD * t)) / (2 * _FD))[:, None] * t
    return p, h0


def _volume_3d(h, K, method):
    U = fibonacci_directions(K)
    p, h0 = _support_points_3d(h, U)
    if not (np.all(np.isfinite(p)) and np.all(np.isfinite(h0))):
        raise InvalidBody("non-finite support values")
    scale = max(np.abs(h0).max(), 1e-300)
    for i in range(0, len(U), 2048):
        if np.any(U[i:i + 2048] @ p.T > h0[i:i + 2048, None] + 1e-6 * scale):
            raise InvalidBody("support values are not those of a convex body")
    centred = p - p.mean(axis=0)
    sv = np.linalg.svd(centred, compute_uv=False)
    if sv[-1] <= 1e-9 * max(sv[0], 1e-300):
        return 0.0
    if method == "inscribed":
        return float(ConvexHull(p).volume)
    c = p.mean(axis=0)
    if np.min(h0 - U @ c) <= 1e-9 * scale:
        return 0.0
    try:
        hs = HalfspaceIntersection(np.column_stack([U, -h0]), c)
        return float(ConvexHull(hs.intersections).volume)
    except QhullError as exc:
        raise InvalidBody(f"half-space intersection failed: {exc}") from exc


def body_volume(h, m, method="inscribed", directions=None, rtol=RTOL):
    """Lebesgue volume of the convex body with support function ``h``.

    Parameters
    ----------
    h : callable
        Support function, directions (K, m) -> values (K,).
    m : {1, 2, 3}
    method : {"inscribed", "halfspace"}
        ``inscribed`` uses the polygon / hull of support points grad h(u),
        exact on polytopes and segments; ``halfspace`` intersects the
        supporting half-spaces.  Both converge to the same value.
    directions : int, optional
        Starting direction count, doubled until the relative change is
        below ``rtol``.  The last two values are Richardson-extrapolated
        (the error is O(K^-2) in the plane, O(K^-1) in space).

    Raises
    ------
    InvalidBody
        If ``h`` fails the discrete convexity test.
    NonConvergence
        If the direction count cap is reached first.
    """
    if m == 1:
        v = float(np.sum(h(np.array([[1.0], [-1.0]]))))
        if not np.isfinite(v) or v < -_CONVEX_TOL * max(1.0, abs(v)):
            raise InvalidBody("support values are not those of a segment")
        return max(v, 0.0)
    if m not in (2, 3):
        raise InvalidArgument(f"body volume needs m in 1..3, got {m}")
    if method not in _AREA:
        raise InvalidArgument(f"unknown volume method {method!r}")
    vol = _volume_2d if m == 2 else _volume_3d
    K = directions or DIRECTIONS[m]
    prev = vol(h, K, method)
    # absolute floor for lower-dimensional bodies, whose volume is 0
    scale = float(np.abs(h(np.vstack([np.eye(m), -np.eye(m)]))).max()) ** m
    r = 2 ** _ORDER[m]
    while K < MAX_DIRECTIONS[m]:
        K *= 2
        cur = vol(h, K, method)
        if abs(cur - prev) <= rtol * max(abs(cur), 1e-6 * scale):
            return max((r * cur - prev) / (r - 1), 0.0)
        prev = cur
    raise NonConvergence(f"volume not stable at {K} directions", residual=abs(cur - prev))


@dataclass(frozen=True)
class FiberBodySet:
    """m support functions in one m-dimensional fiber."""

    supports: Sequence[Callable]
    m: int

    def __post_init__(self):
        if len(self.supports) != self.m:
            raise InvalidArgument("need exactly m bodies in dimension m")


def mixed_volume(bodies, m=None, **kw):
    """Mixed volume V(A_1, ..., A_m) by polarization of Minkowski-sum volumes.

    ``bodies`` is a FiberBodySet or a list of support functions.
    """
    if isinstance(bodies, FiberBodySet):
        supports, m = list(bodies.supports), bodies.m
    else:
        supports = list(bodies)
        m = m or len(supports)
        FiberBodySet(supports, m)
    total = 0.0
    for r in range(1, m + 1):
        for S in combinations(range(m), r):
            hs = [supports[i] for i in S]
            vol = body_volume(lambda u, hs=hs: sum(f(u) for f in hs), m, **kw)
            total += (-1) ** (m - r) * vol
    return total / factorial(m)


# -- chart integral -------------------------------------------------------------

def _axis_rule(a, b, full_period, n):
    if full_period:
        return a + (np.arange(n) + 0.5) * (b - a) / n, np.full(n, (b - a) / n)
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


def chart_rule(chart, U, grid):
    """Tensor quadrature on the box U: midpoint along full periodic axes,
    Gauss-Legendre otherwise."""
    U = chart.check_box(U)
    rules = []
    for (a, b), (lo, hi), per in zip(U, chart.domain, chart.periodic):
        full = per and np.isclose(a, lo) and np.isclose(b, hi)
        rules.append(_axis_rule(a, b, full, grid))
    if chart.n == 1:
        return rules[0][0][:, None], rules[0][1]
    X = np.stack(np.meshgrid(rules[0][0], rules[1][0], indexing="ij"), -1).reshape(-1, 2)
    W = np.outer(rules[0][1], rules[1][1]).ravel()
    return X, W


def _coframes(chart, X):
    g = chart.metric_at(X)
    L = np.linalg.cholesky(g)
    E = np.swapaxes(np.linalg.inv(L), 1, 2)  # columns are g-orthonormal vectors
    return E, np.prod(np.diagonal(L, axis1=1, axis2=2), axis=1)


def _fiber_mixed_volumes(fields, chart, X, K, method):
    """Mixed volume of the fiber bodies at nodes X, in g-orthonormal coframes,
    times sqrt(det g)."""
    E, vol_g = _coframes(chart, X)
    n = chart.n
    if n == 1:
        e = E[:, :, 0]
        return vol_g * (fields[0].support(X, e) + fields[0].support(X, -e))
    dirs, _ = _support_triplet_dirs(K)
    xi = np.einsum("nij,kj->nki", E, dirs)
    H = [f.support(X, xi) for f in fields]
    area = _AREA[method]
    mv = 0.5 * (area(H[0] + H[1], K) - area(H[0], K) - area(H[1], K))
    return vol_g * mv


@dataclass(frozen=True)
class FinslerVolume:
    """Chart integral of fiber mixed volumes at ``grid`` and ``grid // 2``."""

    value: float
    coarse: float
    grid: int
    directions: int
    rtol: float

    @property
    def change(self):
        return abs(self.value - self.coarse)

    @property
    def converged(self):
        return self.change <= self.rtol * max(abs(self.value), 1e-12)

    def __float__(self):
        return self.value


def _integrate(fields, chart, U, grid, K, method):
    X, W = chart_rule(chart, U, grid)
    parts = map_blocks(lambda idx: _fiber_mixed_volumes(fields, chart, X[idx], K, method),
                       np.arange(len(X)), _NODE_BLOCK)
    return float(np.sum(W * np.concatenate(parts)))


def finsler_mixed_volume(fields, chart=None, U=None, grid=256, method="inscribed",
                         rtol=RTOL, directions=None):
    """Integral over U of the mixed volume of the fiber bodies of ``fields``.

    The fiber bodies are expressed in a coframe orthonormal for the chart
    metric and weighted by sqrt(det g), so the result does not depend on
    the metric.  Returns a FinslerVolume carrying the values at ``grid``
    and ``grid // 2`` nodes per axis.
    """
    fields = list(fields)
    chart = chart or fields[0].chart
    if len(fields) != chart.n:
        raise InvalidArgument(f"need {chart.n} fields on a {chart.n}-dimensional chart")
    if grid < 2:
        raise InvalidArgument("grid must be at least 2")
    K = directions or DIRECTIONS[2]
    if chart.n == 2 and directions is None:
        # direction count: double until the fiber areas settle at a probe grid
        probe = max(4, min(grid, 16))
        prev = _integrate(fields, chart, U, probe, K, method)
        while True:
            cur = _integrate(fields, chart, U, probe, 2 * K, method)
            if abs(cur - prev) <= 0.1 * rtol * max(abs(cur), 1e-12) or 2 * K >= MAX_DIRECTIONS[2]:
                break
            K, prev = 2 * K, cur
    fine = _integrate(fields, chart, U, grid, K, method)
    coarse = _integrate(fields, chart, U, max(2, grid // 2), K, method)
    return FinslerVolume(fine, coarse, grid, K, rtol)


# -- product Crofton ----------------------------------------------------------

@dataclass(frozen=True)
class ProductCroftonResult:
    estimate: float
    stderr: float
    prediction: float
    samples: int

    @property
    def rel_error(self):
        return abs(self.estimate - self.prediction) / max(abs(self.prediction), 1e-300)


def parallelotope_prediction(spaces, edges):
    """(n!/2^n) times the mixed volume of the bodies s -> ||sum_k s_k xi_k^i||*_i."""
    n = len(spaces)
    hs = []
    for i, sp in enumerate(spaces):
        Xi = np.array([e[i] for e in edges])  # (n, d_i)
        hs.append(lambda s, sp=sp, Xi=Xi: sp.dual(np.asarray(s) @ Xi))
    if n == 1:
        return 0.5 * body_volume(hs[0], 1)
    return factorial(n) / 2 ** n * mixed_volume(hs)


def product_crofton_density(spaces, parallelotope, samples, seed=0, resolution=None):
    """Monte-Carlo product-measure mass of hyperplane tuples meeting a parallelotope.

    Parameters
    ----------
    spaces : list of NormSpec
        Preduals V_i; the i-th hyperplane lives in V_i* and is drawn from the
        Crofton measure of ||.||*_i.
    parallelotope : list of n edges, edge k = (xi_k^1, ..., xi_k^n), xi_k^i in V_i*.
    """
    n = len(spaces)
    if n not in (1, 2):
        raise InvalidArgument("product Crofton check supports n = 1, 2")
    edges = [[np.asarray(c, dtype=float) for c in e] for e in parallelotope]
    if len(edges) != n or any(len(e) != n for e in edges):
        raise InvalidArgument("parallelotope needs n edges with n components each")
    for i, sp in enumerate(spaces):
        if any(e[i].shape != (sp.dim,) for e in edges):
            raise InvalidArgument(f"edge components of factor {i} must have dim {sp.dim}")
    phis = []
    for sp in spaces:
        phi = crofton_density_for(sp, resolution)
        if phi.values.min() < -1e-4 * abs(phi.mean()):
            raise UnsupportedMode("signed Crofton density: factor is not a zonoid")
        phis.append(phi)
    R = [sum(np.linalg.norm(e[i]) for e in edges) for i in range(n)]
    prediction = parallelotope_prediction(spaces, edges)
    if min(R) == 0:
        return ProductCroftonResult(0.0, 0.0, prediction, samples)

    def chunk(rng, size):
        w = np.ones(size)
        M = np.empty((size, n, n))
        t = np.empty((size, n))
        for i, (sp, phi) in enumerate(zip(spaces, phis)):
            u = uniform_directions(rng, size, sp.dim)
            t[:, i] = rng.uniform(-R[i], R[i], size)
            w *= 0.5 * sphere_area(sp.dim) * 2 * R[i] * phi(u)
            for k, e in enumerate(edges):
                M[:, i, k] = u @ e[i]
        if n == 1:
            a = M[:, 0, 0]
            with np.errstate(divide="ignore", invalid="ignore"):
                s = t[:, :1] / a[:, None]
        else:
            det = M[:, 0, 0] * M[:, 1, 1] - M[:, 0, 1] * M[:, 1, 0]
            with np.errstate(divide="ignore", invalid="ignore"):
                s = np.stack([(M[:, 1, 1] * t[:, 0] - M[:, 0, 1] * t[:, 1]) / det,
                              (M[:, 0, 0] * t[:, 1] - M[:, 1, 0] * t[:, 0]) / det], 1)
        hit = np.all(np.isfinite(s) & (s >= 0) & (s <= 1), axis=1)
        v = w * hit
        return v.sum(), (v * v).sum()

    parts = map_chunks(chunk, samples, seed)
    s1 = float(np.sum([p[0] for p in parts]))
    s2 = float(np.sum([p[1] for p in parts]))
    mean = s1 / samples
    var = max(s2 / samples - mean * mean, 0.0) * samples / max(samples - 1, 1)
    return ProductCroftonResult(mean, float(np.sqrt(var / samples)), float(prediction), samples)
