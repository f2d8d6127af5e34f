"""Charts, function spaces and their cotangent fiber bodies."""
from math import pi

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bkklab import FunctionSpaceOnX, ManifoldChart, NormSpec, bbody_field, theta_map
from bkklab.errors import InvalidArgument
from bkklab.fspace import Basis, poly_terms, pullback_body_support, trig_terms

CIRCLE = ManifoldChart.circle()
TORUS = ManifoldChart.torus()


def test_theta_is_evaluation_covector():
    sp = FunctionSpaceOnX.build(CIRCLE, "trig", [1])
    np.testing.assert_allclose(theta_map(sp, [0.3]), [np.cos(0.3), np.sin(0.3)])


@pytest.mark.parametrize("k", [1, 2, 3])
def test_circle_fiber_half_length_is_frequency(rng, k):
    sp = FunctionSpaceOnX.build(CIRCLE, "trig", [k])
    t = rng.uniform(0, 2 * pi, (50, 1))
    np.testing.assert_allclose(pullback_body_support(sp, t, np.ones_like(t)), k)


def test_cos_only_space_has_degenerate_fibers():
    sp = FunctionSpaceOnX.build(CIRCLE, "cos", [1])
    assert sp.dim == 1
    f = bbody_field(sp)
    # d/dt cos t vanishes at t = 0 and pi
    assert f([[0.0]], [[1.0]]) == pytest.approx(0.0, abs=1e-12)
    assert f([[pi / 2]], [[1.0]]) == pytest.approx(1.0)


def test_polynomial_space_on_interval():
    sp = FunctionSpaceOnX.build(ManifoldChart.interval(-1, 1), "poly", [0, 1, 2])
    # theta'(x) = (0, 1, 2x)
    assert pullback_body_support(sp, [0.5], [1.0]) == pytest.approx(np.sqrt(2))


def test_torus_fibers_of_decoupled_factors():
    sp = FunctionSpaceOnX.build(TORUS, "trig", [[1, 0]])
    f = bbody_field(sp)
    x = np.array([[0.3, 1.2]])
    assert f.support(x, np.array([[1.0, 0.0]]))[0] == pytest.approx(1.0)
    assert f.support(x, np.array([[0.0, 1.0]]))[0] == pytest.approx(0.0, abs=1e-12)
    assert f.rank(x)[0] == 1


def test_symmetrized_euclidean_field_equals_plain(rng):
    sp = FunctionSpaceOnX.build(TORUS, "trig", [[1, 1]])
    x = rng.uniform(0, 2 * pi, (30, 2))
    xi = rng.normal(size=(30, 2))
    np.testing.assert_allclose(bbody_field(sp, True).support(x, xi),
                               bbody_field(sp).support(x, xi), rtol=1e-5)


def test_scaled_norm_shrinks_fibers(rng):
    sp = FunctionSpaceOnX.build(CIRCLE, "trig", [1, 2], NormSpec.lp(3, 4))
    f = bbody_field(sp)
    x = rng.uniform(0, 2 * pi, (10, 1))
    xi = np.ones((10, 1))
    np.testing.assert_allclose(f.scaled_norm(2.0).support(x, xi), f.support(x, xi) / 2)


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 2 * pi), st.floats(-3, 3), st.floats(-3, 3), st.floats(0, 5))
def test_fiber_support_is_even_and_homogeneous(t, a, b, c):
    sp = _LP_TORUS
    x = np.array([[t, 0.5 * t]])
    xi = np.array([[a, b]])
    f = sp.support
    assert f(x, -xi)[0] == pytest.approx(f(x, xi)[0], abs=1e-12)
    assert f(x, c * xi)[0] == pytest.approx(c * f(x, xi)[0], rel=1e-9, abs=1e-12)


_LP_TORUS = bbody_field(FunctionSpaceOnX(TORUS, Basis(trig_terms([[1, 0], [0, 1]], 2)),
                                         NormSpec.lp(3, 4)))


def test_dependent_basis_is_rejected():
    with pytest.raises(InvalidArgument):
        FunctionSpaceOnX(CIRCLE, Basis(trig_terms([1]) + trig_terms([1], kinds=("cos",))))


def test_norm_dimension_must_match():
    with pytest.raises(InvalidArgument):
        FunctionSpaceOnX.build(CIRCLE, "trig", [1], NormSpec.euclidean(3))


def test_chart_validation():
    with pytest.raises(InvalidArgument):
        ManifoldChart(((0, 1), (0, 1), (0, 1)))
    with pytest.raises(InvalidArgument):
        ManifoldChart(((1, 0),))
    with pytest.raises(InvalidArgument):
        ManifoldChart.circle(metric=[[-1.0]])
    with pytest.raises(InvalidArgument):
        CIRCLE.check_box(((0, 7),))
    with pytest.raises(InvalidArgument):
        theta_map(FunctionSpaceOnX.build(CIRCLE, "trig", [1]), [7.0])


def test_affine_space_basis():
    sp = FunctionSpaceOnX(CIRCLE, Basis(poly_terms([0]) + trig_terms([1])))
    assert sp.dim == 3
    assert pullback_body_support(sp, [0.7], [1.0]) == pytest.approx(1.0)
