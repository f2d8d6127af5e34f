"""Volumes from support functions, mixed volumes, chart integrals and the
product Crofton check."""
from math import pi

import numpy as np
import pytest

from bkklab import (FunctionSpaceOnX, ManifoldChart, NormSpec, bbody_field, body_volume,
                    finsler_mixed_volume, mixed_volume, product_crofton_density)
from bkklab.errors import InvalidArgument, InvalidBody, UnsupportedMode
from bkklab.mixedvol import FiberBodySet


def disk(r=1.0):
    return lambda u: r * np.linalg.norm(u, axis=-1)


def box(*half):
    half = np.asarray(half, float)
    return lambda u: np.abs(u) @ half


def segment(v):
    v = np.asarray(v, float)
    return lambda u: np.abs(u @ v)


@pytest.mark.parametrize("method", ["inscribed", "halfspace"])
def test_disk_area(method):
    assert body_volume(disk(), 2, method) == pytest.approx(pi, rel=1e-4)


@pytest.mark.parametrize("method", ["inscribed", "halfspace"])
def test_rectangle_area(method):
    assert body_volume(box(1, 0.5), 2, method) == pytest.approx(2.0, rel=1e-4)


def test_ball_and_cube_volume():
    assert body_volume(disk(), 3) == pytest.approx(4 * pi / 3, rel=1e-3)
    assert body_volume(box(1, 1, 1), 3) == pytest.approx(8, rel=1e-3)


def test_ellipse_area():
    A = np.diag([4.0, 1.0])  # semi-axes 2 and 1
    h = lambda u: np.sqrt(np.einsum("ni,ij,nj->n", u, A, u))
    assert body_volume(h, 2) == pytest.approx(2 * pi, rel=1e-4)


def test_interval_length():
    assert body_volume(lambda u: 2 * np.abs(u[:, 0]), 1) == pytest.approx(4.0)


def test_segment_has_zero_area():
    assert body_volume(segment([1, 2]), 2) == pytest.approx(0.0, abs=1e-9)


def test_non_convex_support_is_rejected():
    # a support function must be convex; |u1| - 0.5|u2| is not
    with pytest.raises(InvalidBody):
        body_volume(lambda u: np.abs(u[:, 0]) + 0.2 - 0.5 * np.abs(u[:, 1]), 2)


def test_mixed_volume_of_orthogonal_segments():
    # V(S1, S2) = |det| / 2 for segments [-a, a], [-b, b]: vol(S1+S2) = 4 |det|
    assert mixed_volume([segment([1, 0]), segment([0, 1])]) == pytest.approx(2.0, rel=1e-6)


def test_mixed_volume_diagonal_is_volume():
    assert mixed_volume([disk(), disk()]) == pytest.approx(pi, rel=1e-4)
    assert mixed_volume(FiberBodySet([disk()] * 3, 3)) == pytest.approx(4 * pi / 3, rel=1e-3)


def test_mixed_volume_multilinear():
    a, b, c = box(1, 0.5), disk(0.7), segment([0.3, 1.0])
    ab = lambda u: a(u) + 2 * b(u)
    lhs = mixed_volume([ab, c])
    rhs = mixed_volume([a, c]) + 2 * mixed_volume([b, c])
    assert lhs == pytest.approx(rhs, rel=1e-4)


def test_mixed_volume_needs_m_bodies():
    with pytest.raises(InvalidArgument):
        FiberBodySet([disk()], 2)


# -- chart integrals ---------------------------------------------------------------------

CIRCLE = ManifoldChart.circle()
TORUS = ManifoldChart.torus()


def _circle_field(k=1, chart=CIRCLE):
    return bbody_field(FunctionSpaceOnX.build(chart, "trig", [k]))


def test_circle_volume_is_4pi():
    fv = finsler_mixed_volume([_circle_field()], CIRCLE, grid=64)
    assert fv.value == pytest.approx(4 * pi, rel=1e-9)
    assert fv.converged


def test_torus_decoupled_volume():
    f1 = bbody_field(FunctionSpaceOnX.build(TORUS, "trig", [[1, 0]]))
    f2 = bbody_field(FunctionSpaceOnX.build(TORUS, "trig", [[0, 1]]))
    # fibers are orthogonal segments of half-length 1: mixed volume 2
    assert finsler_mixed_volume([f1, f2], TORUS, grid=32).value == pytest.approx(
        8 * pi ** 2, rel=1e-6)


def test_metric_independence_nonconstant_metric():
    def g(x):
        a = 1.5 + np.sin(x[:, 0])
        out = np.zeros((len(x), 2, 2))
        out[:, 0, 0], out[:, 1, 1] = a, 1 / a + 0.3 * np.cos(x[:, 1]) ** 2
        out[:, 0, 1] = out[:, 1, 0] = 0.2
        return out
    sp1 = FunctionSpaceOnX.build(TORUS, "trig", [[1, 1]], NormSpec.lp(3, 2))
    sp2 = FunctionSpaceOnX.build(TORUS, "trig", [[1, -1]])
    base = finsler_mixed_volume([bbody_field(sp1), bbody_field(sp2)], TORUS, grid=32)
    chart = TORUS.with_metric(g)
    fields = [bbody_field(FunctionSpaceOnX(chart, s.basis, s.norm)) for s in (sp1, sp2)]
    other = finsler_mixed_volume(fields, chart, grid=32)
    assert other.value == pytest.approx(base.value, rel=1e-3)


def test_circle_metric_independence():
    base = finsler_mixed_volume([_circle_field()], CIRCLE, grid=64).value
    chart = CIRCLE.with_metric(lambda x: (2 + np.cos(x))[:, None, None])
    assert finsler_mixed_volume([_circle_field(chart=chart)], chart, grid=64).value == \
        pytest.approx(base, rel=1e-3)


def test_domain_additivity_with_overlap():
    f = [_circle_field(2)]
    whole = finsler_mixed_volume(f, CIRCLE, grid=128).value
    parts = [finsler_mixed_volume(f, CIRCLE, U, grid=128).value
             for U in (((0, 4.0),), ((3.0, 2 * pi),), ((3.0, 4.0),))]
    assert parts[0] + parts[1] - parts[2] == pytest.approx(whole, rel=1e-8)


def test_scaling_norm_scales_volume():
    sp = FunctionSpaceOnX.build(CIRCLE, "trig", [1], NormSpec.lp(3, 2))
    v1 = finsler_mixed_volume([bbody_field(sp)], CIRCLE, grid=64).value
    v2 = finsler_mixed_volume([bbody_field(sp).scaled_norm(2.0)], CIRCLE, grid=64).value
    assert v2 == pytest.approx(v1 / 2, rel=1e-9)


def test_field_count_must_match_chart():
    with pytest.raises(InvalidArgument):
        finsler_mixed_volume([_circle_field(), _circle_field()], CIRCLE)


# -- product Crofton ---------------------------------------------------------------------

def test_product_crofton_segment_is_dual_norm():
    sp = NormSpec.lp(4, 2)
    xi = np.array([1.0, 0.5])
    res = product_crofton_density([sp], [[xi]], 200_000, seed=2)
    assert res.prediction == pytest.approx(float(sp.dual(xi)), rel=1e-6)
    assert abs(res.estimate - res.prediction) < 4 * res.stderr


def test_product_crofton_unit_square_factorizes():
    e1, e2, z = np.eye(2)[0], np.eye(2)[1], np.zeros(2)
    res = product_crofton_density([NormSpec.euclidean(2)] * 2, [[e1, z], [z, e2]],
                                  200_000, seed=5)
    assert res.prediction == pytest.approx(1.0, rel=1e-6)
    assert abs(res.estimate - 1.0) < 4 * res.stderr


def test_product_crofton_rejects_non_zonoid():
    with pytest.raises(UnsupportedMode):
        product_crofton_density([NormSpec.lp(1.5, 3)], [[np.ones(3)]], 1000)


def test_product_crofton_shape_checks():
    with pytest.raises(InvalidArgument):
        product_crofton_density([NormSpec.euclidean(2)] * 2, [[np.ones(2)]], 100)
