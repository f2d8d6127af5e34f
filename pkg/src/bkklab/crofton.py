"""
Cosine transform on lines through the origin, its inversion, and Crofton
densities of normed spaces.

A density phi on directions defines a translation-invariant measure on
affine hyperplanes: pick the normal line u with weight phi(u) dnu(u), then an
offset with Lebesgue measure.  Here nu is half the Euclidean surface measure,
so a constant phi gives total line mass pi (dim 2) or 2 pi (dim 3).  The
measure of hyperplanes crossing a segment [0, xi] equals
|xi| * cosine_transform(phi, xi / |xi|), so a density whose transform equals
a dual norm is a Crofton density for that norm.
"""
from dataclasses import dataclass

import numpy as np

from . import harmonics
from .errors import InvalidArgument, NonConvergence, PreconditionError, UnsupportedMode
from .grassmann import GrassmannDensity
from .sphere import ball_volume, sphere_area, sphere_grid, uniform_directions

DEFAULT_REGULARIZATION = 1e-5
DEFAULT_TOL = 1e-2
SMOOTHNESS_GROWTH = 1.8
SMOOTHNESS_DECAY = 1.1
SMOOTH_FLOOR = 1e-3
_SCHEDULE = {2: (8, 16, 32, 64, 128, 256), 3: (8, 16, 24, 32, 40)}


def cosine_transform(f, g):
    """Sum of |<x, g>| f(x) over the grid of ``f`` against half the surface measure.

    ``g`` may be a single direction or an array of them; it is normalised.
    """
    g = np.asarray(g, dtype=float)
    flat = g.reshape(-1, f.dim)
    flat = flat / np.linalg.norm(flat, axis=1, keepdims=True)
    fw = 0.5 * f.grid.weights * f.values
    out = np.concatenate([np.abs(c @ f.grid.points.T) @ fw for c in np.array_split(flat, max(1, len(flat) // 1024))])
    return out.reshape(g.shape[:-1]) if g.ndim > 1 else float(out[0])


# -- smoothness precondition ----------------------------------------------

def _roughness_circle(values, stride):
    d2 = np.roll(values, -stride) - 2 * values + np.roll(values, stride)
    return np.abs(d2[::stride]).max() / stride ** 2


def _fit_error(f, degree):
    a, _ = harmonics.fit_even(f.grid, f.values, degree)
    Y, _ = harmonics.even_basis(f.grid.points, degree)
    return float(np.abs(Y @ a - f.values).max())


def smoothness_index(f):
    """Scale-comparison statistic used to reject kinked targets.

    dim 2: ratio of scaled second differences at spacings h and 2h; near 1
    for C^2 fields, near 2 across a kink.  dim 3: decay exponent of the
    harmonic fit error from degree 16 to 32; near 1 for a kink, larger for
    smoother fields.  A dim-3 field fitted at degree 16 to within
    SMOOTH_FLOOR of its maximum counts as smooth.  Both are returned so that larger means rougher.
    """
    scale = np.abs(f.values).max()
    if scale == 0:
        return 0.0
    if f.dim == 2:
        fine, coarse = _roughness_circle(f.values, 1), _roughness_circle(f.values, 2)
        if fine < 1e-10 * scale:
            return 0.0
        return fine / coarse
    e16 = _fit_error(f, 16)
    if e16 <= SMOOTH_FLOOR * scale:
        # resolved far below the inversion tolerance; decay is noise there
        return 0.0
    e32 = _fit_error(f, 32)
    # map decay exponent onto the same "rougher is larger" axis
    return 2.0 ** (1.0 - np.log2(e16 / e32))


def is_smooth(f):
    """True unless ``f`` shows a kink at grid scale."""
    limit = SMOOTHNESS_GROWTH if f.dim == 2 else 2.0 ** (1.0 - SMOOTHNESS_DECAY)
    return smoothness_index(f) <= limit


# -- inversion ----------------------------------------------------------------

def invert_cosine_transform(target, regularization=DEFAULT_REGULARIZATION,
                            tol=DEFAULT_TOL, max_degree=None, degree=None,
                            check_smooth=True):
    """Solve cosine_transform(phi) = target in even harmonics.

    Degrees are raised along a fixed schedule until the harmonic fit of the
    target is within ``tol * max|target|`` on the grid (or ``degree`` is used
    as given).  Coefficients of degree >= 2 are divided by the transform
    eigenvalue with a Tikhonov term ``regularization * lambda_0**2``.

    The returned density carries ``residual`` (sup-norm of
    cosine_transform(phi) - target on the grid, regularisation included),
    ``fit_residual`` and ``degree``.

    Raises
    ------
    InvalidArgument
        For dim outside {2, 3} or an odd target.
    PreconditionError
        If the target has a kink at grid scale.
    NonConvergence
        If the fit residual still exceeds ``tol`` at the largest degree.
    """
    d = target.dim
    if d not in (2, 3):
        raise InvalidArgument("cosine transform inversion is implemented for dim 2 and 3")
    scale = np.abs(target.values).max()
    if target.evenness_defect() > 1e-9 * max(scale, 1e-300):
        raise InvalidArgument("target is not even")
    if check_smooth and not is_smooth(target):
        raise PreconditionError("target is not smooth at grid scale")
    if degree is not None:
        schedule = (degree,)
    else:
        cap = max_degree or _SCHEDULE[d][-1]
        schedule = tuple(L for L in _SCHEDULE[d] if L <= cap) or (cap,)
    lam0 = harmonics.cosine_eigenvalue(d, 0)
    alpha = regularization * lam0 ** 2
    for L in schedule:
        Y, degs = harmonics.even_basis(target.grid.points, L)
        sw = np.sqrt(target.grid.weights)
        a, *_ = np.linalg.lstsq(Y * sw[:, None], target.values * sw, rcond=None)
        fit_residual = float(np.abs(Y @ a - target.values).max())
        if fit_residual <= tol * max(scale, 1e-300) or L == schedule[-1]:
            break
    lam = np.array([harmonics.cosine_eigenvalue(d, int(l)) for l in degs])
    damp = np.where(degs == 0, 0.0, alpha)
    coef = lam * a / (lam ** 2 + damp)
    phi = GrassmannDensity(target.grid, Y @ coef, coefficients=coef, degrees=degs)
    phi.residual = float(np.abs(Y @ (lam * coef) - target.values).max())
    phi.fit_residual = fit_residual
    phi.degree = L
    if fit_residual > tol * max(scale, 1e-300):
        raise NonConvergence(
            f"harmonic fit residual {fit_residual:.3g} above tolerance at degree {L}",
            residual=fit_residual)
    return phi


def crofton_density_for(space, resolution=None, **kw):
    """Density phi on lines of the dual space with cosine_transform(phi) = dual norm.

    ``space`` is the predual V; the returned density lives on directions of
    V* (identified with R^d through the reference inner product).  In dim 4
    only multiples of the standard Euclidean norm are supported, through
    the known constant 1 / kappa_3.
    """
    if space.dim == 4:
        A = np.asarray(space.matrix) if space.kind == "euclidean" else None
        if A is None or not np.allclose(A, A[0, 0] * np.eye(4)):
            raise UnsupportedMode("dim 4 Crofton densities only for isotropic Euclidean norms")
        grid = sphere_grid(4, resolution)
        c = 1.0 / (ball_volume(3) * space.scale * np.sqrt(A[0, 0]))
        phi = GrassmannDensity(grid, np.full(len(grid), c))
        phi.residual = 0.0
        phi.fit_residual = 0.0
        phi.degree = 0
        return phi
    grid = sphere_grid(space.dim, resolution)
    target = GrassmannDensity(grid, space.dual(grid.points))
    return invert_cosine_transform(target, **kw)


@dataclass(frozen=True)
class ZonoidReport:
    is_zonoid: bool
    min_density: float
    mean_density: float
    degree: int
    residual: float


def zonoid_check(space, resolution=None, **kw):
    """Decide whether the unit ball of ``space`` is a zonoid.

    The Crofton density of the dual norm is non-negative exactly for
    zonoids; the test accepts a minimum down to -1e-4 times its mean.
    The density is resolved at the top harmonic degree unless ``degree``
    is passed.
    """
    if space.dim > 3:
        raise PreconditionError("zonoid check needs dim <= 3")
    kw.setdefault("degree", _SCHEDULE[space.dim][-1])
    phi = crofton_density_for(space, resolution, **kw)
    mn, mean = float(phi.values.min()), float(phi.mean())
    return ZonoidReport(mn >= -1e-4 * abs(mean), mn, mean, phi.degree, phi.residual)


# -- sampling ----------------------------------------------------------------

class CroftonSampler:
    """Hyperplanes {v : <u, v> = t}, u Euclidean-unit, weighted by a density.

    Weighted averages estimate integrals against the measure
    phi(u) dnu(u) dt, nu being half the surface measure.  u is drawn
    uniformly, so the weight is 1/2 * area * |t_range| * phi(u).
    """

    def __init__(self, density, t_range, seed=None):
        lo, hi = (float(t) for t in t_range)
        if not hi > lo:
            raise InvalidArgument(f"empty t_range {t_range}")
        self.density = density
        self.t_range = (lo, hi)
        self.rng = np.random.default_rng(seed)

    def draw(self, n):
        d = self.density.dim
        u = uniform_directions(self.rng, n, d)
        t = self.rng.uniform(*self.t_range, size=n)
        length = self.t_range[1] - self.t_range[0]
        return u, t, 0.5 * sphere_area(d) * length * self.density(u)


def segment_crossing_mass(density, xi, samples, seed=None):
    """Monte-Carlo mass of hyperplanes meeting [0, xi] under ``density``.

    Returns ``(estimate, standard_error)``.
    """
    xi = np.asarray(xi, dtype=float)
    R = float(np.linalg.norm(xi))
    if R == 0:
        return 0.0, 0.0
    u, t, w = CroftonSampler(density, (-R, R), seed).draw(samples)
    s = u @ xi
    hit = (t * s >= 0) & (np.abs(t) <= np.abs(s))
    vals = w * hit
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(samples))
