"""Cosine transform, its inversion, zonoid recognition, Crofton sampling."""
from math import pi

import numpy as np
import pytest

from bkklab import (GrassmannDensity, NormSpec, cosine_transform, crofton_density_for,
                    invert_cosine_transform, zonoid_check)
from bkklab.crofton import is_smooth, segment_crossing_mass, smoothness_index
from bkklab.errors import NonConvergence, PreconditionError, UnsupportedMode
from bkklab.sphere import sphere_grid


def _const(dim, c=1.0):
    g = sphere_grid(dim, 512 if dim == 2 else 4)
    return GrassmannDensity(g, np.full(len(g.points), c))


def test_cosine_transform_of_constants():
    assert cosine_transform(_const(2), [1.0, 0.0]) == pytest.approx(2.0, rel=1e-4)
    assert cosine_transform(_const(3), [0.0, 0.0, 1.0]) == pytest.approx(pi, rel=1e-3)


def test_cosine_transform_is_linear(rng):
    g = sphere_grid(2, 256)
    f1 = GrassmannDensity(g, 1 + 0.3 * g.points[:, 0] ** 2)
    f2 = GrassmannDensity(g, g.points[:, 1] ** 4)
    dirs = rng.normal(size=(10, 2))
    np.testing.assert_allclose(cosine_transform(f1 + f2 * 2.0, dirs),
                               cosine_transform(f1, dirs) + 2 * cosine_transform(f2, dirs),
                               rtol=1e-12)


@pytest.mark.parametrize("dim,c", [(2, 0.5), (3, 1 / pi)])
def test_euclidean_crofton_constants(dim, c):
    phi = crofton_density_for(NormSpec.euclidean(dim))
    np.testing.assert_allclose(phi.values, c, atol=1e-3)


def test_reported_residual_matches_direct_quadrature():
    sp = NormSpec.lp(4, 3)
    phi = crofton_density_for(sp)
    g = phi.grid.points
    direct = np.abs(cosine_transform(phi, g) - sp.dual(g)).max()
    assert phi.residual == pytest.approx(direct, rel=0.05)
    assert phi.fit_residual <= 1e-2 * sp.dual(g).max()


@pytest.mark.parametrize("dim", [2, 3])
def test_roundtrip_of_bandlimited_density(rng, dim):
    g = sphere_grid(dim, 1024 if dim == 2 else 4)
    x = g.points
    A = rng.normal(size=(dim, dim))
    q = np.einsum("ni,ij,nj->n", x, A + A.T, x)
    phi0 = GrassmannDensity(g, 2 + 0.3 * q + 0.05 * q ** 2)
    target = GrassmannDensity(g, cosine_transform(phi0, x))
    phi = invert_cosine_transform(target, degree=8)
    np.testing.assert_allclose(phi.values, phi0.values, atol=1e-2 * phi0.values.max())


def test_fit_residual_decreases_with_degree():
    g = sphere_grid(3)
    t = GrassmannDensity(g, NormSpec.lp(3, 3).dual(g.points))
    res = [invert_cosine_transform(t, degree=L, tol=1.0) for L in (8, 16, 24, 32)]
    fits = [r.fit_residual for r in res]
    fwd = [r.residual for r in res]
    assert all(a > b for a, b in zip(fits, fits[1:]))
    assert all(b <= a * (1 + 1e-6) for a, b in zip(fwd, fwd[1:]))


def test_dim4_only_isotropic_euclidean():
    phi = crofton_density_for(NormSpec.euclidean(4))
    assert phi.values[0] == pytest.approx(3 / (4 * pi))
    with pytest.raises(UnsupportedMode):
        crofton_density_for(NormSpec.lp(3, 4))


def test_kinked_target_is_rejected():
    with pytest.raises(PreconditionError):
        crofton_density_for(NormSpec.linf(3))


def test_smoothness_index_separates_kinks():
    g = sphere_grid(2)
    smooth = GrassmannDensity(g, NormSpec.lp(3, 2).dual(g.points))
    kinked = GrassmannDensity(g, np.abs(g.points).max(1))
    assert is_smooth(smooth)
    assert not is_smooth(kinked)
    assert smoothness_index(kinked) > smoothness_index(smooth)


def test_unreachable_tolerance_raises_nonconvergence():
    target = GrassmannDensity(sphere_grid(2), NormSpec.lp(1.2, 2).dual(sphere_grid(2).points))
    with pytest.raises(NonConvergence) as info:
        invert_cosine_transform(target, tol=1e-14, max_degree=16)
    assert info.value.residual > 0


@pytest.mark.parametrize("p,expect", [(1.5, False), (4, True)])
def test_zonoid_check_lp(p, expect):
    r = zonoid_check(NormSpec.lp(p, 3))
    assert r.is_zonoid is expect


def test_euclidean_ball_is_zonoid():
    r = zonoid_check(NormSpec.euclidean(3))
    assert r.is_zonoid
    assert r.min_density == pytest.approx(1 / pi, abs=1e-3)


def _smoothed_zonotope(dim, gens, eps):
    """Sum of thin ellipsoids around each generator: a smooth zonoid."""
    gens = np.asarray(gens, float)

    def h(u):
        out = 0.0
        for z in gens:
            M = np.outer(z, z) + eps ** 2 * np.eye(dim)
            out = out + np.sqrt(np.einsum("ni,ij,nj->n", u, M, u))
        return out
    return NormSpec.from_support_function(h, dim)


@pytest.mark.parametrize("dim,gens", [(2, [[1, 0], [0.3, 1], [-0.6, 0.5]]),
                                      (3, [[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]])])
def test_smoothed_zonotope_is_zonoid(dim, gens):
    # the norm's unit ball is the polar of the body; its dual (support) is the body
    sp = _smoothed_zonotope(dim, gens, 0.4)
    # zonoid_check tests the unit ball of the space: build the space whose dual norm is h
    assert zonoid_check(sp).is_zonoid


def test_segment_crossing_mass_is_dual_norm():
    sp = NormSpec.lp(4, 2)
    phi = crofton_density_for(sp)
    xi = np.array([0.8, 0.3])
    est, se = segment_crossing_mass(phi, xi, 200_000, seed=4)
    assert abs(est - sp.dual(xi)) < 4 * se + 1e-2 * sp.dual(xi)


def test_density_csv_export(tmp_path):
    phi = crofton_density_for(NormSpec.euclidean(2), 64)
    phi.to_csv(tmp_path / "phi.csv")
    rows = np.loadtxt(tmp_path / "phi.csv", delimiter=",", skiprows=1)
    assert rows.shape == (64, 3)
    np.testing.assert_allclose(rows[:, 2], 0.5, atol=1e-3)
