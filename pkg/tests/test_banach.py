"""Norms, dual norms, the natural measure on the unit sphere and its
zonoid symmetrization."""
from math import pi

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bkklab import NormSpec, dual_norm, natural_sampler, sphere_density, symmetrize
from bkklab.banach import banach_sphere, dl_density
from bkklab.errors import InvalidArgument, PreconditionError

vec = st.lists(st.floats(-10, 10, allow_nan=False), min_size=3, max_size=3)
exps = st.floats(1.05, 12)


def test_euclidean_dual_of_3_4_is_5():
    assert dual_norm(NormSpec.euclidean(2), [3.0, 4.0]) == pytest.approx(5.0)


def test_lp_dual_is_conjugate_exponent(rng):
    p = 3.0
    q = p / (p - 1)
    xi = rng.normal(size=(50, 3))
    np.testing.assert_allclose(dual_norm(NormSpec.lp(p, 3), xi),
                               (np.abs(xi) ** q).sum(1) ** (1 / q), rtol=1e-9)


def test_matrix_euclidean_dual_uses_inverse(rng):
    A = np.array([[2.0, 0.5], [0.5, 1.0]])
    sp = NormSpec.euclidean(matrix=A)
    xi = rng.normal(size=(20, 2))
    np.testing.assert_allclose(sp.dual(xi),
                               np.sqrt(np.einsum("ni,ij,nj->n", xi, np.linalg.inv(A), xi)))


def test_square_dual_is_l1(rng):
    xi = rng.normal(size=(100, 2))
    np.testing.assert_allclose(NormSpec.linf(2).dual(xi), np.abs(xi).sum(1), rtol=2e-3)


@pytest.mark.parametrize("p", [1.5, 3.0])
def test_double_dual_recovers_norm(rng, p):
    """max over the dual unit sphere of <xi, v> equals ||v||."""
    sp = NormSpec.lp(p, 2)
    th = np.linspace(0, 2 * pi, 20000, endpoint=False)
    u = np.stack([np.cos(th), np.sin(th)], 1)
    xi = u / sp.dual(u)[:, None]
    v = rng.normal(size=(20, 2))
    np.testing.assert_allclose((v @ xi.T).max(1), sp.gauge(v), rtol=1e-5)


@settings(max_examples=60, deadline=None)
@given(exps, vec, vec, st.floats(-5, 5))
def test_gauge_and_dual_are_norms(p, a, b, c):
    sp = NormSpec.lp(p, 3)
    a, b = np.array(a), np.array(b)
    for f in (sp.gauge, sp.dual):
        assert f(a + b) <= f(a) + f(b) + 1e-9 * (1 + f(a) + f(b))
        assert f(c * a) == pytest.approx(abs(c) * f(a), rel=1e-9, abs=1e-12)
        assert f(-a) == pytest.approx(f(a))
        assert f(a) >= 0


def test_invalid_norms_raise():
    with pytest.raises(InvalidArgument):
        NormSpec.lp(1.0, 2)
    with pytest.raises(InvalidArgument):
        NormSpec.lp(2, 5)
    with pytest.raises(InvalidArgument):
        NormSpec.euclidean(matrix=[[1, 0], [0, -1]])
    with pytest.raises(InvalidArgument):
        NormSpec.parse("banana:2")
    with pytest.raises(InvalidArgument):
        dual_norm(NormSpec.euclidean(2), [1.0, 2.0, 3.0])
    with pytest.raises(InvalidArgument):
        NormSpec.from_config({"kind": "lp", "dim": 3})


def test_parse_forms():
    assert NormSpec.parse("lp:1.5:3").p == 1.5
    assert NormSpec.parse("euclidean:3").dim == 3
    assert NormSpec.parse("linf:2:0.05").kind == "support"


def test_support_csv_roundtrip(tmp_path):
    th = np.linspace(0, 2 * pi, 512, endpoint=False)
    u = np.stack([np.cos(th), np.sin(th)], 1)
    path = tmp_path / "h.csv"
    np.savetxt(path, np.column_stack([u, 2 * np.ones(len(u))]), delimiter=",",
               header="u1,u2,h", comments="")
    sp = NormSpec.from_csv(path)
    assert sp.dual(np.array([0.3, -0.4])) == pytest.approx(1.0, rel=1e-3)


# -- natural measure ------------------------------------------------------------------

def test_sphere_density_constants(rng):
    x = rng.normal(size=(10, 2))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    np.testing.assert_allclose(sphere_density(NormSpec.euclidean(2), x), 0.5)
    y = rng.normal(size=(10, 3))
    y /= np.linalg.norm(y, axis=1, keepdims=True)
    np.testing.assert_allclose(sphere_density(NormSpec.euclidean(3), y), 1 / pi)


def test_square_edge_density_is_half():
    sq = NormSpec.lp(40, 2)  # tangent segment of an almost-flat edge
    x = np.array([[1.0, 0.1]])
    x = x / sq.gauge(x)[:, None]
    assert sphere_density(sq, x)[0] == pytest.approx(0.5, abs=1e-3)


def test_sphere_density_requires_unit_point():
    with pytest.raises(PreconditionError):
        sphere_density(NormSpec.euclidean(2), np.array([[2.0, 0.0]]))


def test_masses():
    assert banach_sphere(NormSpec.euclidean(2)).mass == pytest.approx(pi, rel=1e-9)
    # square: perimeter 8, density 1/2
    assert banach_sphere(NormSpec.linf(2)).mass == pytest.approx(4, rel=1e-3)
    # sphere area 4 pi at density 1/pi
    assert banach_sphere(NormSpec.euclidean(3)).mass == pytest.approx(4, rel=1e-3)


def test_dl_density_is_surface_jacobian_for_scaled_euclidean(rng):
    # ||v|| = 2|v|: sphere of radius 1/2, tangent disc of radius 1/2
    sp = NormSpec.euclidean(matrix=4 * np.eye(3))
    om = rng.normal(size=(5, 3))
    om /= np.linalg.norm(om, axis=1, keepdims=True)
    # surface Jacobian 1/4, tangent disc area pi/4 -> density 1/pi
    np.testing.assert_allclose(dl_density(sp, om), 1 / pi)


@pytest.mark.parametrize("method", ["importance", "quadrature"])
def test_natural_sampler_segment_mass_is_symmetrized_norm(method):
    """Hyperplane mass of a segment [0, xi] equals h_symm(xi)."""
    sp = NormSpec.lp(3, 2)
    xi = np.array([0.7, -0.4])
    R = float(np.abs(xi).sum())
    x, t, w = natural_sampler(sp, (-R, R), 5, method).draw(200_000)
    s = x @ xi
    vals = w * ((t * s >= 0) & (np.abs(t) <= np.abs(s)))
    est, se = vals.mean(), vals.std() / np.sqrt(len(vals))
    assert abs(est - symmetrize(sp)(xi)) < 4 * se


def test_natural_sampler_is_deterministic():
    a = natural_sampler(NormSpec.lp(3, 2), (-1, 1), 9).draw(10)
    b = natural_sampler(NormSpec.lp(3, 2), (-1, 1), 9).draw(10)
    for u, v in zip(a, b):
        np.testing.assert_array_equal(u, v)


def test_natural_sampler_rejects_bad_range():
    with pytest.raises(InvalidArgument):
        natural_sampler(NormSpec.euclidean(2), (1, 1))


# -- symmetrization --------------------------------------------------------------------

@pytest.mark.parametrize("dim,res", [(2, 2048), (3, 5)])
def test_euclidean_symmetrization_is_identity(rng, dim, res):
    s = symmetrize(NormSpec.euclidean(dim), res)
    y = rng.normal(size=(500, dim))
    np.testing.assert_allclose(s(y), np.linalg.norm(y, axis=1), rtol=1e-3)


def test_symmetrization_converges_with_resolution(rng):
    y = rng.normal(size=(200, 2))
    errs = [np.abs(symmetrize(NormSpec.euclidean(2), r)(y) - np.linalg.norm(y, axis=1)).max()
            for r in (64, 256, 1024)]
    assert errs[0] > errs[1] > errs[2]


def test_square_symmetrization_values():
    s = symmetrize(NormSpec.linf(2))
    assert s(np.array([1.0, 0.0])) == pytest.approx(1.5, abs=1e-3)
    assert s(np.array([1.0, 1.0])) == pytest.approx(2.0, abs=1e-3)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-3, 3, allow_nan=False), min_size=2, max_size=2),
       st.lists(st.floats(-3, 3, allow_nan=False), min_size=2, max_size=2),
       st.floats(0, 4))
def test_symmetrized_norm_is_even_and_sublinear(a, b, c):
    s = _SYM
    a, b = np.array(a), np.array(b)
    assert s(-a) == pytest.approx(s(a), abs=1e-9)
    assert s(a + b) <= s(a) + s(b) + 1e-9
    assert s(c * a) == pytest.approx(c * s(a), rel=1e-9, abs=1e-12)


_SYM = symmetrize(NormSpec.lp(1.3, 2), 512)


def test_dim3_symmetrization_matches_quadrature(rng):
    s = symmetrize(NormSpec.lp(3, 3), 4)
    y = rng.normal(size=(100, 3))
    np.testing.assert_allclose(s(y), s.exact(y), rtol=1e-3)


def test_dim4_symmetrization_of_euclidean_ball(rng):
    s = symmetrize(NormSpec.euclidean(4))
    y = rng.normal(size=(20, 4))
    np.testing.assert_allclose(s(y), np.linalg.norm(y, axis=1), rtol=5e-3)
