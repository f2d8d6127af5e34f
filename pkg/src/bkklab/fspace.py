"""
Spaces of smooth functions on a one-chart manifold and the convex-body
fields they induce on the cotangent bundle.

A space V = span{f_1, ..., f_d} with a norm on its coefficients gives

* the evaluation map theta(x) = (f_1(x), ..., f_d(x)), a point of V*;
* at each x, the image of the unit ball of V under the transposed
  differential, a centrally symmetric body in T*_x with support function
  h_x(xi) = ||J(x) xi||_*, J the Jacobian of theta.
"""
from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

import numpy as np

from .banach import NormSpec, SymmetrizedNorm, symmetrize
from .errors import InvalidArgument

_GRAM_SAMPLES = 64


@dataclass(frozen=True, eq=False)
class ManifoldChart:
    """A box (or circle / torus, along periodic coordinates) in R^n.

    Parameters
    ----------
    domain : sequence of (lo, hi)
    periodic : sequence of bool
        Periodic coordinates identify lo with hi.
    metric : None, (n, n) array or callable
        Riemannian metric; a callable maps points (N, n) to (N, n, n).
    """

    domain: tuple
    periodic: tuple = None
    metric: object = None

    def __post_init__(self):
        dom = tuple((float(a), float(b)) for a, b in self.domain)
        object.__setattr__(self, "domain", dom)
        if self.n not in (1, 2):
            raise InvalidArgument(f"chart dimension must be 1 or 2, got {self.n}")
        if any(not (np.isfinite(a) and np.isfinite(b) and b > a) for a, b in dom):
            raise InvalidArgument(f"degenerate domain {dom}")
        per = self.periodic if self.periodic is not None else (False,) * self.n
        per = tuple(bool(p) for p in per)
        if len(per) != self.n:
            raise InvalidArgument("one periodicity flag per coordinate")
        object.__setattr__(self, "periodic", per)
        if self.metric is not None and not callable(self.metric):
            G = np.asarray(self.metric, dtype=float)
            if G.shape != (self.n, self.n):
                raise InvalidArgument("metric must be n x n")
            object.__setattr__(self, "metric", G)
        # sampled SPD check
        G = self.metric_at(self.sample_points(5))
        if not np.allclose(G, np.swapaxes(G, 1, 2)) or np.linalg.eigvalsh(G).min() <= 0:
            raise InvalidArgument("metric is not symmetric positive definite")

    @classmethod
    def circle(cls, metric=None):
        return cls(((0.0, 2 * np.pi),), (True,), metric)

    @classmethod
    def torus(cls, metric=None):
        return cls(((0.0, 2 * np.pi),) * 2, (True, True), metric)

    @classmethod
    def interval(cls, lo, hi, metric=None):
        return cls(((lo, hi),), (False,), metric)

    @property
    def n(self):
        return len(self.domain)

    @property
    def diameter(self):
        return float(np.linalg.norm([b - a for a, b in self.domain]))

    def with_metric(self, metric):
        return ManifoldChart(self.domain, self.periodic, metric)

    def metric_at(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.metric is None:
            return np.broadcast_to(np.eye(self.n), (len(x), self.n, self.n))
        if callable(self.metric):
            return np.asarray(self.metric(x), dtype=float).reshape(len(x), self.n, self.n)
        return np.broadcast_to(self.metric, (len(x), self.n, self.n))

    def contains(self, x, slack=1e-12):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        ok = np.ones(len(x), dtype=bool)
        for i, (a, b) in enumerate(self.domain):
            tol = slack * (b - a)
            ok &= (x[:, i] >= a - tol) & (x[:, i] <= b + tol)
        return ok

    def check(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.n:
            raise InvalidArgument(f"chart points need {self.n} coordinates")
        if not np.all(np.isfinite(x)) or not np.all(self.contains(x.reshape(-1, self.n))):
            raise InvalidArgument("point outside the chart domain")
        return x

    def sample_points(self, per_axis, box=None):
        """Tensor grid of cell midpoints over ``box`` (default: the domain)."""
        box = box or self.domain
        axes = [a + (np.arange(per_axis) + 0.5) * (b - a) / per_axis for a, b in box]
        return np.array(list(product(*axes))) if self.n > 1 else axes[0][:, None]

    def check_box(self, U):
        """Validate a sub-box ``U`` (sequence of (lo, hi)) of the domain."""
        if U is None:
            return self.domain
        U = tuple((float(a), float(b)) for a, b in U)
        if len(U) != self.n or any(not b > a for a, b in U):
            raise InvalidArgument(f"bad sub-domain {U}")
        for (a, b), (lo, hi) in zip(U, self.domain):
            tol = 1e-12 * (hi - lo)
            if a < lo - tol or b > hi + tol:
                raise InvalidArgument(f"sub-domain {U} leaves the chart")
        return U


# -- basis families ---------------------------------------------------------

@dataclass(frozen=True)
class Term:
    """One basis function: ``cos(k.x)``, ``sin(k.x)`` or ``prod x_i^k_i``."""

    kind: str
    k: tuple

    def label(self):
        if self.kind == "poly":
            return "*".join(f"x{i + 1}^{e}" for i, e in enumerate(self.k) if e) or "1"
        return f"{self.kind}({','.join(map(str, self.k))}.x)"


def trig_terms(frequencies, n=1, kinds=("cos", "sin")):
    """cos/sin pairs for each integer frequency (vector) in ``frequencies``."""
    out = []
    for k in frequencies:
        k = tuple(int(c) for c in np.atleast_1d(k))
        if len(k) != n:
            raise InvalidArgument(f"frequency {k} does not match chart dimension {n}")
        out += [Term(kind, k) for kind in kinds]
    return out


def poly_terms(exponents, n=1):
    out = []
    for e in exponents:
        e = tuple(int(c) for c in np.atleast_1d(e))
        if len(e) != n or min(e) < 0:
            raise InvalidArgument(f"bad exponent {e}")
        out.append(Term("poly", e))
    return out


def family_terms(family, values, n):
    """Terms from a config family name: trig, cos, sin or poly."""
    if family == "trig":
        return trig_terms(values, n)
    if family in ("cos", "sin"):
        return trig_terms(values, n, kinds=(family,))
    if family == "poly":
        return poly_terms(values, n)
    raise InvalidArgument(f"unknown basis family {family!r}")


class Basis:
    """Vectorised evaluation of a list of terms with analytic gradients."""

    def __init__(self, terms: Sequence[Term]):
        if not terms:
            raise InvalidArgument("empty basis")
        self.terms = tuple(terms)
        self.n = len(terms[0].k)
        if any(len(t.k) != self.n for t in terms):
            raise InvalidArgument("mixed term dimensions")
        for t in terms:
            if t.kind not in ("cos", "sin", "poly"):
                raise InvalidArgument(f"unknown term kind {t.kind!r}")
        self.K = np.array([t.k for t in terms], dtype=float)
        self.kind = np.array([t.kind for t in terms])

    def __len__(self):
        return len(self.terms)

    def values(self, x):
        """(N, n) -> (N, d)."""
        x = np.atleast_2d(x)
        out = np.empty((len(x), len(self)))
        ph = x @ self.K.T
        for j, kd in enumerate(self.kind):
            if kd == "cos":
                out[:, j] = np.cos(ph[:, j])
            elif kd == "sin":
                out[:, j] = np.sin(ph[:, j])
            else:
                out[:, j] = np.prod(x ** self.K[j], axis=1)
        return out

    def jacobian(self, x):
        """(N, n) -> (N, d, n), rows are gradients of the basis functions."""
        x = np.atleast_2d(x)
        out = np.empty((len(x), len(self), self.n))
        ph = x @ self.K.T
        for j, kd in enumerate(self.kind):
            if kd == "cos":
                out[:, j] = -np.sin(ph[:, j])[:, None] * self.K[j]
            elif kd == "sin":
                out[:, j] = np.cos(ph[:, j])[:, None] * self.K[j]
            else:
                e = self.K[j]
                for i in range(self.n):
                    if e[i] == 0:
                        out[:, j, i] = 0.0
                        continue
                    ei = e.copy()
                    ei[i] -= 1
                    out[:, j, i] = e[i] * np.prod(x ** ei, axis=1)
        return out

    def gradient_bounds(self, box):
        """Upper bounds of |grad f_j| over ``box``."""
        M = np.array([max(abs(a), abs(b)) for a, b in box])
        G = np.empty(len(self))
        for j, kd in enumerate(self.kind):
            e = self.K[j]
            if kd != "poly":
                G[j] = np.linalg.norm(e)
                continue
            parts = []
            for i in range(self.n):
                if e[i] == 0:
                    continue
                ei = e.copy()
                ei[i] -= 1
                parts.append(e[i] * np.prod(M ** ei))
            G[j] = np.linalg.norm(parts) if parts else 0.0
        return G

    def hessian_bounds(self, box):
        """Upper bounds of the spectral norm of Hess f_j over ``box``."""
        M = np.array([max(abs(a), abs(b)) for a, b in box])
        G = np.empty(len(self))
        for j, kd in enumerate(self.kind):
            e = self.K[j]
            if kd != "poly":
                G[j] = e @ e
                continue
            total = 0.0
            for a in range(self.n):
                for b in range(self.n):
                    ea = e.copy()
                    c = ea[a]
                    ea[a] -= 1
                    c *= ea[b]
                    ea[b] -= 1
                    if c > 0:
                        total += (c * np.prod(M ** ea)) ** 2
            G[j] = np.sqrt(total)  # Frobenius bound
        return G


# -- function space ---------------------------------------------------------

class _EuclideanR1:
    """Absolute value on R^1, for one-function spaces (no NormSpec below dim 2)."""

    dim = 1

    def dual(self, xi):
        return np.abs(np.asarray(xi)[..., 0])

    def scaled(self, c):
        return _ScaledR1(c)


class _ScaledR1(_EuclideanR1):
    def __init__(self, c):
        self.c = float(c)

    def dual(self, xi):
        return np.abs(np.asarray(xi)[..., 0]) / self.c


@dataclass(frozen=True, eq=False)
class FunctionSpaceOnX:
    """V = span(basis) on ``chart`` with ``norm`` on coefficient vectors.

    ``norm`` may be a NormSpec, a SymmetrizedNorm (read as the dual norm it
    carries) or None for the standard Euclidean norm.
    """

    chart: ManifoldChart
    basis: Basis
    norm: object = None
    label: str = ""

    def __post_init__(self):
        d = len(self.basis)
        if self.basis.n != self.chart.n:
            raise InvalidArgument("basis and chart dimensions differ")
        if self.norm is None:
            norm = _EuclideanR1() if d == 1 else NormSpec.euclidean(d)
            object.__setattr__(self, "norm", norm)
        if self.norm.dim != d:
            raise InvalidArgument(f"norm dimension {self.norm.dim} != basis size {d}")
        X = self.chart.sample_points(_GRAM_SAMPLES if self.chart.n == 1 else 16)
        F = self.basis.values(X)
        if np.linalg.matrix_rank(F.T @ F / len(X), tol=1e-10 * max(1.0, np.abs(F).max() ** 2)) < d:
            raise InvalidArgument("basis functions are linearly dependent on the chart")

    @classmethod
    def build(cls, chart, family, values, norm=None, label=""):
        return cls(chart, Basis(family_terms(family, values, chart.n)), norm, label)

    @property
    def dim(self):
        return len(self.basis)

    def with_norm(self, norm):
        return FunctionSpaceOnX(self.chart, self.basis, norm, self.label)

    def dual(self, covectors):
        """Dual norm on V*, or h_symm for a symmetrized norm."""
        if isinstance(self.norm, SymmetrizedNorm):
            return self.norm(covectors)
        return self.norm.dual(covectors)

    def theta(self, x):
        return self.basis.values(x)

    def jacobian(self, x):
        return self.basis.jacobian(x)


def theta_map(space, x):
    """Evaluation covector (f_1(x), ..., f_d(x)) in V*."""
    x = space.chart.check(x)
    vals = space.theta(x.reshape(-1, space.chart.n))
    return vals[0] if x.ndim == 1 else vals.reshape(x.shape[:-1] + (space.dim,))


def pullback_body_support(space, x, xi):
    """Support function of the fiber body at ``x`` evaluated on tangent ``xi``.

    Broadcasts: x (..., n) with xi (..., n).
    """
    x = space.chart.check(x)
    xi = np.asarray(xi, dtype=float)
    x, xi = np.broadcast_arrays(x, xi)
    J = space.jacobian(x.reshape(-1, space.chart.n))
    cov = np.einsum("ndk,nk->nd", J, xi.reshape(-1, space.chart.n))
    out = space.dual(cov).reshape(x.shape[:-1])
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class BBodyField:
    """x -> support function of the fiber body over x.

    ``support(x, xi)`` accepts nodes x (N, n) and directions xi of shape
    (N, n) or (N, K, n) and skips the domain check, for inner loops.
    """

    space: FunctionSpaceOnX
    symmetrized: bool = False
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def chart(self):
        return self.space.chart

    def __call__(self, x, xi):
        return pullback_body_support(self.space, x, xi)

    def support(self, x, xi):
        x = np.atleast_2d(x)
        J = self.space.jacobian(x)
        xi = np.asarray(xi, dtype=float)
        if xi.ndim == 2:
            return self.space.dual(np.einsum("ndk,nk->nd", J, xi))
        return self.space.dual(np.einsum("ndk,nmk->nmd", J, xi))

    def rank(self, x, tol=1e-9):
        """Rank of the Jacobian of theta at each node."""
        J = self.space.jacobian(np.atleast_2d(x))
        s = np.linalg.svd(J, compute_uv=False)
        return (s > tol * max(1.0, s.max())).sum(axis=1)

    def scaled_norm(self, c):
        """Field for the norm c * ||.||; every fiber shrinks by 1/c."""
        return BBodyField(self.space.with_norm(self.space.norm.scaled(c)), self.symmetrized)


def bbody_field(space, symmetrize_norm=False, resolution=None):
    """Fiber-body field of ``space``; with ``symmetrize_norm`` the coefficient
    norm is first replaced by its zonoid symmetrization."""
    if symmetrize_norm:
        norm = space.norm
        if isinstance(norm, _EuclideanR1):
            # dl on {-1, 1} has unit masses, so h_symm(y) = |y|
            return BBodyField(space, True)
        if not isinstance(norm, SymmetrizedNorm):
            norm = symmetrize(norm, resolution)
        return BBodyField(space.with_norm(norm), True)
    return BBodyField(space, False)
