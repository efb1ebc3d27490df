from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hycomp.exprlang import expr_fn
from hycomp.geometry import (Box, Interval, SmoothFn, Tangent, box_contains, compose, default_tol,
                             differential, fd_jacobian, pushforward)


def test_box_contains_interior_and_tolerance():
    b = Box([(0.0, 1.0)])
    assert box_contains(b, [0.5], 1e-9)
    assert box_contains(b, [1.0 + 1e-12], 1e-9)
    assert not box_contains(b, [1.0 + 1e-6], 1e-9)


def test_point_box_contains_empty_point():
    assert box_contains(Box.point(), [], 0.0)
    assert Box.point().dim == 0


def test_box_contains_dimension_mismatch():
    with pytest.raises(ValueError):
        box_contains(Box.unit(2), [0.5], 1e-9)


def test_interval_rejects_reversed_bounds():
    with pytest.raises(ValueError):
        Interval(1.0, 0.0)


def test_unbounded_box_samples_are_finite(rng):
    pts = Box.real(3).sample(rng, 10)
    assert len(pts) == 10
    assert all(np.all(np.isfinite(p)) for p in pts)


def test_differential_of_identity():
    f = SmoothFn.identity(Box.real(2))
    assert np.array_equal(differential(f, [0.3, -2.0]), np.eye(2))


def test_differential_of_square_by_finite_differences():
    f = SmoothFn(Box([(0.0, 2.0)]), Box.real(1), lambda x: x ** 2)
    assert differential(f, [1.0]) == pytest.approx(np.array([[2.0]]), abs=1e-6)


def test_one_sided_difference_at_boundary():
    f = SmoothFn(Box([(0.0, 2.0)]), Box.real(1), lambda x: x ** 2)
    assert fd_jacobian(f, [0.0]) == pytest.approx(np.array([[0.0]]), abs=1e-5)
    assert fd_jacobian(f, [2.0]) == pytest.approx(np.array([[4.0]]), abs=1e-5)


def test_projection_differential():
    p = SmoothFn.projection(Box.real(2), [0])
    assert np.array_equal(differential(p, [1.0, 5.0]), np.array([[1.0, 0.0]]))


def test_differential_outside_domain():
    f = SmoothFn.identity(Box.unit(1))
    with pytest.raises(ValueError):
        differential(f, [3.0])


def test_pushforward_examples():
    v = Tangent([1.0], [3.0])
    assert pushforward(SmoothFn.identity(Box.real(1)), v).vec.tolist() == [3.0]
    dbl = SmoothFn.linear([[2.0]], [0.0], Box.real(1))
    w = pushforward(dbl, v)
    assert w.base.tolist() == [2.0] and w.vec.tolist() == [6.0]
    p = SmoothFn.projection(Box.real(2), [0])
    w = pushforward(p, Tangent([1.0, 5.0], [2.0, 7.0]))
    assert w.base.tolist() == [1.0] and w.vec.tolist() == [2.0]


def test_default_tolerance():
    assert default_tol() == pytest.approx(1e-9)


@settings(max_examples=40, deadline=None)
@given(st.floats(-1.0, 1.0), st.floats(-1.0, 1.0), st.floats(-2.0, 2.0), st.floats(-2.0, 2.0))
def test_chain_rule(x, y, vx, vy):
    dom = Box.real(2)
    f = expr_fn(["x", "y"], ["sin(x) * y", "x + y^2"], dom)
    g = expr_fn(["a", "b"], ["exp(a) - b", "a * b"], Box.real(2))
    v = Tangent([x, y], [vx, vy])
    lhs = pushforward(compose(g, f), v)
    rhs = pushforward(g, pushforward(f, v))
    assert np.allclose(lhs.base, rhs.base, atol=1e-12)
    assert np.allclose(lhs.vec, rhs.vec, atol=1e-6)


@settings(max_examples=60, deadline=None)
@given(st.floats(-5, 5), st.floats(0, 1e-3), st.floats(0, 1e-3))
def test_box_contains_monotone_in_tolerance(x, t1, t2):
    b = Box([(-1.0, 1.0)])
    lo, hi = sorted((t1, t2))
    if box_contains(b, [x], lo):
        assert box_contains(b, [x], hi)


def test_analytic_jacobian_agrees_with_fd(rng):
    f = expr_fn(["x", "y"], ["x * y + tanh(x)", "cos(y) / (2 + x^2)"], Box([(-2, 2), (-2, 2)]))
    for x in Box([(-1.9, 1.9), (-1.9, 1.9)]).sample(rng, 20, structured=False):
        fd = fd_jacobian(f, x)
        assert np.max(np.abs(f.jac(x) - fd)) <= 1e-5 * (1 + np.max(np.abs(fd)))
