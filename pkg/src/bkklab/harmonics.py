"""
Even harmonic bases on S^1 and S^2 and the eigenvalues of the cosine
transform on them.

The cosine transform here is

    T f(g) = 1/2 * integral over S^{d-1} of |<x, g>| f(x) ds(x),

i.e. integration against half the surface measure, so each line through the
origin is counted once.  By Funk-Hecke every harmonic of degree l is an
eigenfunction.  Eigenvalues are obtained by Gauss-Legendre quadrature of a
one-dimensional integral whose integrand is smooth on the integration range.
"""
from functools import lru_cache
from math import pi

import numpy as np
from scipy.special import eval_legendre, sph_harm_y

_GL_NODES = 256


@lru_cache(maxsize=None)
def cosine_eigenvalue(dim, degree):
    """Eigenvalue of the cosine transform on even harmonics of ``degree``."""
    if degree % 2:
        return 0.0
    x, w = np.polynomial.legendre.leggauss(_GL_NODES)
    if dim == 2:
        # |cos| and cos(l*theta) are both pi-periodic for even l, so the
        # half-measure over S^1 equals the integral over (-pi/2, pi/2).
        theta = x * pi / 2
        return float(np.sum(w * np.cos(theta) * np.cos(degree * theta)) * pi / 2)
    if dim == 3:
        # pi * int_{-1}^{1} |t| P_l(t) dt = 2 pi * int_0^1 t P_l(t) dt
        t = (x + 1) / 2
        return float(2 * pi * np.sum(w / 2 * t * eval_legendre(degree, t)))
    raise ValueError(f"no harmonic machinery for dim {dim}")


def cosine_eigenvalue_closed_form(dim, degree):
    """Closed forms kept for cross-checking :func:`cosine_eigenvalue`."""
    if degree % 2:
        return 0.0
    if dim == 2:
        k = degree // 2
        return 2.0 * (-1) ** (k + 1) / (4 * k * k - 1)
    if dim == 3:
        if degree == 0:
            return pi
        # 2 pi * int_0^1 t P_l dt, l even >= 2
        from math import comb
        l = degree
        j = l // 2
        return 2 * pi * (-1) ** (j + 1) * comb(l, j) / (2 ** l * (l - 1) * (l + 2))
    raise ValueError(dim)


def even_basis(points, degree):
    """Real orthonormal even harmonics up to ``degree`` evaluated at ``points``.

    Returns
    -------
    basis : ndarray, shape (N, K)
    degrees : ndarray of int, shape (K,)
    """
    points = np.asarray(points, dtype=float)
    d = points.shape[-1]
    if d == 2:
        theta = np.arctan2(points[:, 1], points[:, 0])
        cols = [np.full(len(points), 1 / np.sqrt(2 * pi))]
        degs = [0]
        for l in range(2, degree + 1, 2):
            cols += [np.cos(l * theta) / np.sqrt(pi), np.sin(l * theta) / np.sqrt(pi)]
            degs += [l, l]
        return np.column_stack(cols), np.array(degs)
    if d == 3:
        polar = np.arccos(np.clip(points[:, 2], -1, 1))
        azim = np.arctan2(points[:, 1], points[:, 0])
        cols, degs = [], []
        for l in range(0, degree + 1, 2):
            cols.append(sph_harm_y(l, 0, polar, azim).real)
            degs.append(l)
            for m in range(1, l + 1):
                y = sph_harm_y(l, m, polar, azim)
                cols += [np.sqrt(2) * y.real, np.sqrt(2) * y.imag]
                degs += [l, l]
        return np.column_stack(cols), np.array(degs)
    raise ValueError(f"no harmonic machinery for dim {d}")


def fit_even(grid, values, degree):
    """Weighted least-squares coefficients of ``values`` in the even basis."""
    Y, degs = even_basis(grid.points, degree)
    sw = np.sqrt(grid.weights)
    coef, *_ = np.linalg.lstsq(Y * sw[:, None], values * sw, rcond=None)
    return coef, degs
