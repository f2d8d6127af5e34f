"""
Counting solutions of random systems f_i(x) = t_i on a chart, Monte-Carlo
averages of the count, and the comparison with mixed volumes of fiber-body
fields.

A system draws, per factor i, a coefficient vector x_i (a function
f_i = <x_i, theta_i>) and an offset t_i.  ``theorem-2`` draws x_i from the
Banach volume density of the unit sphere of the factor's norm;
``theorem-1`` draws it from the Crofton density of the dual norm, which
needs that density to be non-negative.

Offsets are drawn per sample, uniformly on the range of f_i over U (grid
min/max padded by 1% plus a Hessian bound of the grid error), so weights
carry that length.
"""
from dataclasses import asdict, dataclass, field
from math import factorial

import numpy as np
from scipy.optimize import brentq

from .banach import NormSpec, banach_sphere, draw_sphere
from .crofton import crofton_density_for
from .errors import InvalidArgument, UnsupportedMode
from .fspace import bbody_field
from .mixedvol import finsler_mixed_volume
from .parallel import map_chunks
from .sphere import sphere_area, uniform_directions

MODES = ("theorem-1", "theorem-2")
CELLS_1D = 4096
COARSE_2D = 8
FINE_2D = 256
RANGE_NODES_2D = 33
MERGE = 1e-6
PAD = 0.01
_CHUNK = {1: 1024, 2: 2048}
_NEWTON_STEPS = 12


@dataclass(frozen=True)
class SystemSample:
    """One system: coefficient vectors ``x``, offsets ``t``, weight."""

    x: tuple
    t: tuple
    weight: float = 1.0
    uncertain: bool = False

    def __post_init__(self):
        if len(self.x) != len(self.t):
            raise InvalidArgument("one offset per factor")
        if not self.weight > 0:
            raise InvalidArgument("sample weight must be positive")


@dataclass
class EstimateReport:
    estimate: float
    stderr: float
    samples: int
    t_ranges: list
    mode: str
    seed: int
    uncertain: int = 0
    comparison: float = None
    z_score: float = None
    per_sample: dict = field(default=None, repr=False)

    def to_dict(self):
        d = asdict(self)
        d.pop("per_sample")
        return d


# -- counting ---------------------------------------------------------------

def _box(spaces, U):
    chart = spaces[0].chart
    return chart, chart.check_box(U)


def _full_periodic(chart, U):
    return [per and np.isclose(a, lo) and np.isclose(b, hi)
            for (a, b), (lo, hi), per in zip(U, chart.domain, chart.periodic)]


def _nodes_1d(chart, U, cells):
    (a, b), = U
    if _full_periodic(chart, U)[0]:
        x = a + (b - a) * np.arange(cells + 1) / cells
        x[-1] = x[0]  # close the loop exactly
        return x
    return np.linspace(a, b, cells + 1)


def _count_1d(space, U, X, t, cells=CELLS_1D):
    nodes = _nodes_1d(space.chart, U, cells)
    F = space.theta(nodes[:, None])
    g = X @ F.T - t[:, None]
    pos = g > 0
    return np.count_nonzero(pos[:, 1:] != pos[:, :-1], axis=1)


def _roots_1d(space, U, x, t, cells=CELLS_1D):
    """Root locations of <x, theta> - t on U (sign-change cells + brentq)."""
    nodes = _nodes_1d(space.chart, U, cells)
    f = lambda s: float((space.theta(np.array([[s]])) @ x)[0]) - t
    vals = space.theta(nodes[:, None]) @ x - t
    pos = vals > 0
    roots = []
    for k in np.flatnonzero(pos[1:] != pos[:-1]):
        a, b = nodes[k], nodes[k + 1]
        if b < a:  # wrapped last cell of a periodic grid
            b = a + (nodes[1] - nodes[0])
        roots.append(brentq(f, a, b, xtol=1e-14, rtol=1e-14) if vals[k] * vals[k + 1] < 0 else a)
    return _dedupe_1d(np.array(roots), space.chart, U)


def _dedupe_1d(r, chart, U):
    if len(r) == 0:
        return r
    rad = MERGE * chart.diameter
    r = np.sort(r)
    keep = np.concatenate([[True], np.diff(r) > rad])
    return r[keep]


def _residuals(spaces, X, t, S, C):
    g = np.empty((len(S), 2))
    for i, sp in enumerate(spaces):
        g[:, i] = np.einsum("nd,nd->n", sp.theta(C), X[i][S]) - t[S, i]
    return g


def _residual_jac(spaces, X, S, C):
    Jg = np.empty((len(S), 2, 2))
    for i, sp in enumerate(spaces):
        Jg[:, i, :] = np.einsum("ndk,nd->nk", sp.jacobian(C), X[i][S])
    return Jg


def _newton(spaces, X, t, S, C, scale):
    x = C.copy()
    for _ in range(_NEWTON_STEPS):
        g = _residuals(spaces, X, t, S, x)
        J = _residual_jac(spaces, X, S, x)
        det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
        with np.errstate(divide="ignore", invalid="ignore"):
            dx = np.stack([(J[:, 1, 1] * g[:, 0] - J[:, 0, 1] * g[:, 1]) / det,
                           (J[:, 0, 0] * g[:, 1] - J[:, 1, 0] * g[:, 0]) / det], 1)
        x = x - np.where(np.isfinite(dx), dx, 0.0)
        bad = ~np.all(np.isfinite(dx), axis=1)
        x[bad] = np.nan
    g = _residuals(spaces, X, t, S, x)
    ok = np.all(np.isfinite(x), axis=1) & np.all(np.abs(g) <= 1e-10 * scale[S][:, None], axis=1)
    return x, ok


def _excluded_linear(spaces, X, t, S, C, hw, Hb):
    """True where the linear model at the cell centre, widened by the
    Hessian remainder, puts every zero outside the cell."""
    g = _residuals(spaces, X, t, S, C)
    J = _residual_jac(spaces, X, S, C)
    r = float(np.linalg.norm(hw))
    with np.errstate(divide="ignore", invalid="ignore"):
        Jinv = np.linalg.inv(J)
        step = np.einsum("nij,nj->ni", Jinv, g)
        rem = np.abs(Jinv).sum(axis=2) * 0.5 * np.maximum(Hb[0][S], Hb[1][S])[:, None] * r * r
        out = np.any(np.abs(step) > hw + rem, axis=1)
    return np.where(np.all(np.isfinite(step), axis=1), out, False)


def _wrap(chart, U, r):
    r = r.copy()
    full = _full_periodic(chart, U)
    for i, (lo, hi) in enumerate(chart.domain):
        if chart.periodic[i]:
            per = hi - lo
            r[:, i] = lo + np.mod(r[:, i] - lo, per)
            if full[i]:
                # identify points just below hi with lo
                r[:, i] = np.where(hi - r[:, i] < MERGE * per, lo, r[:, i])
    return r


def _count_2d(spaces, U, X, t, coarse=COARSE_2D, fine=FINE_2D):
    """Batched exclusion subdivision + Newton.  Returns (counts, uncertain)."""
    chart = spaces[0].chart
    N = len(t)
    (a1, b1), (a2, b2) = U
    hw = np.array([(b1 - a1), (b2 - a2)]) / (2 * coarse)
    cx = a1 + (2 * np.arange(coarse) + 1) * hw[0]
    cy = a2 + (2 * np.arange(coarse) + 1) * hw[1]
    cells = np.stack(np.meshgrid(cx, cy, indexing="ij"), -1).reshape(-1, 2)
    S = np.repeat(np.arange(N), len(cells))
    C = np.tile(cells, (N, 1))
    Hb = [np.abs(X[i]) @ sp.basis.hessian_bounds(U) for i, sp in enumerate(spaces)]
    scale = 1.0 + np.abs(t).max(axis=1) + sum(np.abs(x).sum(axis=1) for x in X)
    level = coarse
    while True:
        r = float(np.linalg.norm(hw))
        g = _residuals(spaces, X, t, S, C)
        J = _residual_jac(spaces, X, S, C)
        keep = np.ones(len(S), dtype=bool)
        for i in range(2):
            bound = np.linalg.norm(J[:, i, :], axis=1) * r + 0.5 * Hb[i][S] * r * r
            keep &= np.abs(g[:, i]) <= bound
        S, C = S[keep], C[keep]
        if level >= fine or len(S) == 0:
            break
        hw = hw / 2
        offs = np.array([[-1, -1], [-1, 1], [1, -1], [1, 1]]) * hw
        C = (C[:, None, :] + offs[None]).reshape(-1, 2)
        S = np.repeat(S, 4)
        level *= 2
    roots, ok = _newton(spaces, X, t, S, C, scale)
    # cells where both residuals change sign at the corners must yield a root
    corners = np.array([[-1, -1], [-1, 1], [1, -1], [1, 1]]) * hw
    sg = np.stack([np.sign(_residuals(spaces, X, t, S, C + c)) for c in corners], 1)
    flagged = np.all(sg.max(axis=1) >= 0, axis=1) & np.all(sg.min(axis=1) <= 0, axis=1)
    retry = flagged & ~ok
    uncertain = np.zeros(N, dtype=bool)
    if np.any(retry):
        Sr = np.repeat(S[retry], 4)
        Cr = (C[retry][:, None, :] + 0.5 * corners[None]).reshape(-1, 2)
        rr, okr = _newton(spaces, X, t, Sr, Cr, scale)
        hit = np.zeros(len(Sr) // 4, dtype=bool)
        np.logical_or.at(hit, np.repeat(np.arange(len(hit)), 4), okr)
        Sf, Cf = S[retry][~hit], C[retry][~hit]
        maybe = ~_excluded_linear(spaces, X, t, Sf, Cf, hw, Hb)
        uncertain[Sf[maybe]] = True
        S = np.concatenate([S[ok], Sr[okr]])
        roots = np.concatenate([roots[ok], rr[okr]])
    else:
        S, roots = S[ok], roots[ok]
    roots = _wrap(chart, U, roots)
    lo = np.array([a1, a2])
    hi = np.array([b1, b2])
    tol = 1e-12 * (hi - lo)
    inside = np.all((roots >= lo - tol) & (roots <= hi + tol), axis=1)
    S, roots = S[inside], roots[inside]
    q = np.round(roots / (MERGE * chart.diameter)).astype(np.int64)
    keys = np.unique(np.column_stack([S, q]), axis=0)
    counts = np.bincount(keys[:, 0], minlength=N) if len(keys) else np.zeros(N, dtype=int)
    return counts, uncertain, (S, roots)


def count_solutions(sample, spaces, chart=None, U=None, return_roots=False):
    """Number of isolated solutions in U of the system described by ``sample``.

    n = 1 scans 4096 cells for sign changes and refines each root with
    brentq; n = 2 prunes a 16^2 cell grid down to 256^2 with gradient and
    Hessian bounds, polishes survivors by Newton and merges roots closer
    than 1e-6 times the domain diameter.
    """
    spaces = list(spaces)
    chart, U = _box(spaces, U) if chart is None else (chart, chart.check_box(U))
    n = chart.n
    if len(spaces) != n or len(sample.x) != n:
        raise InvalidArgument(f"need {n} factors on a {n}-dimensional chart")
    X = [np.atleast_2d(np.asarray(x, dtype=float)) for x in sample.x]
    t = np.atleast_2d(np.asarray(sample.t, dtype=float))
    if n == 1:
        roots = _roots_1d(spaces[0], U, X[0][0], float(t[0, 0]))
        return (len(roots), roots) if return_roots else len(roots)
    counts, uncertain, (_, roots) = _count_2d(spaces, U, X, t)
    if uncertain[0]:
        object.__setattr__(sample, "uncertain", True)
    return (int(counts[0]), roots) if return_roots else int(counts[0])


# -- sampling ---------------------------------------------------------------

def _factor_draw(space, mode, resolution=None):
    """Returns draw(rng, n) -> (x, w) with w the weight per unit offset length."""
    norm = space.norm
    if space.dim == 1:
        c = 1.0 / float(norm.dual(np.array([1.0])))

        def draw1(rng, n):
            # unit sphere {-1/c, 1/c}; counting measure of mass 2
            return rng.choice([-1.0, 1.0], size=(n, 1)) / c, np.ones(n)
        return draw1
    if not isinstance(norm, NormSpec):
        raise InvalidArgument("sampling needs a NormSpec coefficient norm")
    if mode == "theorem-2":
        sphere = banach_sphere(norm, resolution)
        return lambda rng, n: draw_sphere(norm, rng, n, "importance", sphere)
    phi = crofton_density_for(norm, resolution)
    if phi.values.min() < -1e-4 * abs(phi.mean()):
        raise UnsupportedMode("theorem-1 sampling needs a zonoid factor norm")
    area = sphere_area(norm.dim)

    def draw(rng, n):
        u = uniform_directions(rng, n, norm.dim)
        return u, 0.5 * area * phi(u)
    return draw


def _range_nodes(chart, U):
    if chart.n == 1:
        nodes = _nodes_1d(chart, U, CELLS_1D)[:, None]
        return nodes, np.array([(U[0][1] - U[0][0]) / (2 * CELLS_1D)])
    axes = [np.linspace(a, b, RANGE_NODES_2D) for a, b in U]
    nodes = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, 2)
    return nodes, np.array([(b - a) / (2 * (RANGE_NODES_2D - 1)) for a, b in U])


def offset_ranges(space, U, X):
    """Per-sample [lo, hi] containing <x, theta(U)>, with grid padding."""
    chart = space.chart
    nodes, half = _range_nodes(chart, U)
    vals = X @ space.theta(nodes).T
    lo, hi = vals.min(axis=1), vals.max(axis=1)
    H = np.abs(X) @ space.basis.hessian_bounds(U)
    pad = PAD * (hi - lo) + 0.5 * H * float(half @ half) + 1e-12
    return lo - pad, hi + pad


def _resolve(scenario, U):
    spaces = list(scenario.factors)
    chart = spaces[0].chart
    U = chart.check_box(U if U is not None else scenario.U)
    if len(spaces) != chart.n:
        raise InvalidArgument("factor count must equal chart dimension")
    if scenario.mode not in MODES:
        raise InvalidArgument(f"unknown mode {scenario.mode!r}")
    return spaces, chart, U


def estimate_average(scenario, samples=None, seed=None, U=None, keep_samples=False,
                     resolution=None):
    """Monte-Carlo average number of solutions in U, with standard error."""
    spaces, chart, U = _resolve(scenario, U)
    samples = int(samples or scenario.samples)
    seed = scenario.seed if seed is None else seed
    if samples < 2:
        raise InvalidArgument("need at least two samples")
    n = chart.n
    draws = [_factor_draw(sp, scenario.mode, resolution) for sp in spaces]

    def chunk(rng, size):
        X, T, w = [], [], np.ones(size)
        env = []
        for sp, draw in zip(spaces, draws):
            x, wx = draw(rng, size)
            lo, hi = offset_ranges(sp, U, x)
            T.append(rng.uniform(lo, hi))
            w *= wx * (hi - lo)
            X.append(x)
            env.append((lo.min(), hi.max()))
        t = np.column_stack(T)
        if n == 1:
            counts, unc = _count_1d(spaces[0], U, X[0], t[:, 0]), np.zeros(size, bool)
        else:
            counts, unc, _ = _count_2d(spaces, U, X, t)
        v = w * counts
        extra = (w, counts) if keep_samples else None
        return v.sum(), (v * v).sum(), int(unc.sum()), env, extra

    parts = map_chunks(chunk, samples, seed, _CHUNK[n])
    s1 = float(np.sum([p[0] for p in parts]))
    s2 = float(np.sum([p[1] for p in parts]))
    mean = s1 / samples
    var = max(s2 / samples - mean * mean, 0.0) * samples / (samples - 1)
    env = [[float(min(p[3][i][0] for p in parts)), float(max(p[3][i][1] for p in parts))]
           for i in range(n)]
    per = None
    if keep_samples:
        per = {"weight": np.concatenate([p[4][0] for p in parts]),
               "count": np.concatenate([p[4][1] for p in parts])}
    return EstimateReport(mean, float(np.sqrt(var / samples)), samples, env,
                          scenario.mode, int(seed), sum(p[2] for p in parts), per_sample=per)


# -- verification --------------------------------------------------------------

def mixed_volume_side(scenario, grid=None, U=None, chart=None, resolution=None):
    """(n!/2^n) times the chart integral of fiber mixed volumes; returns
    (value, quadrature tolerance, FinslerVolume)."""
    spaces, chart0, U = _resolve(scenario, U)
    chart = chart or chart0
    sym = scenario.mode == "theorem-2"
    fields = []
    for sp in spaces:
        if chart is not chart0:
            sp = sp.__class__(chart, sp.basis, sp.norm, sp.label)
        fields.append(bbody_field(sp, symmetrize_norm=sym, resolution=resolution))
    n = chart.n
    fv = finsler_mixed_volume(fields, chart, U, grid or scenario.grid)
    c = factorial(n) / 2 ** n
    return c * fv.value, c * fv.change, fv


@dataclass
class VerificationRecord:
    scenario: str
    mode: str
    lhs: float
    stderr: float
    rhs: float
    rhs_coarse: float
    rhs_tolerance: float
    z_score: float
    passed: bool
    samples: int
    grid: int
    seed: int
    t_ranges: list
    uncertain: int
    expected: float = None
    per_sample: dict = field(default=None, repr=False)

    def to_dict(self):
        d = asdict(self)
        d.pop("per_sample")
        return d


def verify_bkk(scenario, samples=None, grid=None, seed=None, U=None, sigma=3.0,
               keep_samples=False):
    """Compare the Monte-Carlo average count with the mixed-volume side.

    Passes when |LHS - RHS| <= sigma * stderr + RHS quadrature tolerance.
    """
    rep = estimate_average(scenario, samples, seed, U, keep_samples=keep_samples)
    rhs, rtol, fv = mixed_volume_side(scenario, grid, U)
    diff = rep.estimate - rhs
    z = diff / rep.stderr if rep.stderr > 0 else (0.0 if diff == 0 else np.inf)
    rep.comparison, rep.z_score = rhs, float(z)
    ok = abs(diff) <= sigma * rep.stderr + rtol
    return VerificationRecord(scenario.name, scenario.mode, rep.estimate, rep.stderr, rhs,
                              0.5 ** chart_dim(scenario) * factorial(chart_dim(scenario)) * fv.coarse,
                              rtol, float(z), bool(ok), rep.samples, fv.grid, rep.seed,
                              rep.t_ranges, rep.uncertain, getattr(scenario, "expected", None),
                              rep.per_sample)


def chart_dim(scenario):
    return scenario.factors[0].chart.n
