"""Even scalar fields on the sphere, read as functions on lines through 0."""
import csv

import numpy as np

from . import harmonics
from .errors import InvalidArgument


class GrassmannDensity:
    """A scalar field sampled on an antipodally closed sphere grid.

    Parameters
    ----------
    grid : SphereQuadrature
    values : array_like, shape (len(grid),)
    coefficients, degrees : optional
        Even-harmonic expansion; when present, off-grid evaluation uses it.

    Off-grid evaluation otherwise falls back to periodic linear interpolation
    (dim 2), a degree-16 harmonic fit (dim 3) or the nearest node (dim 4).
    """

    def __init__(self, grid, values, coefficients=None, degrees=None):
        values = np.asarray(values, dtype=float)
        if values.shape != (len(grid),):
            raise InvalidArgument("values must match the grid")
        if not np.all(np.isfinite(values)):
            raise InvalidArgument("non-finite density values")
        self.grid = grid
        self.values = values
        self.coefficients = coefficients
        self.degrees = degrees
        self._tree = None

    @property
    def dim(self):
        return self.grid.dim

    @classmethod
    def from_function(cls, grid, fn):
        return cls(grid, fn(grid.points))

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        flat = u.reshape(-1, self.dim)
        flat = flat / np.linalg.norm(flat, axis=1, keepdims=True)
        return self._eval(flat).reshape(u.shape[:-1])

    def _eval(self, u):
        if self.coefficients is None and self.dim == 3:
            self.coefficients, self.degrees = harmonics.fit_even(self.grid, self.values, 16)
        if self.coefficients is not None:
            Y, _ = harmonics.even_basis(u, int(self.degrees.max()))
            return Y @ self.coefficients
        if self.dim == 2:
            n = len(self.grid)
            s = np.mod(np.arctan2(u[:, 1], u[:, 0]), 2 * np.pi) * n / (2 * np.pi)
            i = np.floor(s).astype(int) % n
            frac = s - np.floor(s)
            return (1 - frac) * self.values[i] + frac * self.values[(i + 1) % n]
        if self._tree is None:
            from scipy.spatial import cKDTree
            self._tree = cKDTree(self.grid.points)
        return self.values[self._tree.query(u)[1]]

    def evenness_defect(self):
        return float(np.max(np.abs(self.values - self.values[self.grid.antipode])))

    def mean(self):
        return self.grid.integrate(self.values) / self.grid.weights.sum()

    def _same_grid(self, other):
        if other.grid is not self.grid:
            raise InvalidArgument("densities live on different grids")

    def __add__(self, other):
        self._same_grid(other)
        return GrassmannDensity(self.grid, self.values + other.values)

    def __mul__(self, c):
        return GrassmannDensity(self.grid, c * self.values)

    __rmul__ = __mul__

    def to_csv(self, path):
        """Write rows ``u_1, ..., u_d, value``."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"u{i + 1}" for i in range(self.dim)] + ["value"])
            for p, v in zip(self.grid.points, self.values):
                w.writerow([repr(float(c)) for c in p] + [repr(float(v))])
