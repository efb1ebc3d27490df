from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gen import random_expr
from hycomp.exprlang import (Add, Call, ExprMap, Mul, Neg, Num, ParseError, Pow, Sub, UnboundVariable, Var,
                             deriv, evaluate, expr_fn, gradient, parse, substitute, to_source, variables)
from hycomp.geometry import Box


def test_parse_examples():
    assert parse("u - x") == Sub(Var("u"), Var("x"))
    assert parse("-x^2") == Neg(Pow(Var("x"), Num(2.0)))
    assert parse("min(1, exp(x))") == Call("min", (Num(1.0), Call("exp", (Var("x"),))))


def test_precedence_and_associativity():
    assert parse("a - b - c") == Sub(Sub(Var("a"), Var("b")), Var("c"))
    assert parse("a / b * c") == Mul(parse("a / b"), Var("c"))
    assert parse("a ^ b ^ c") == Pow(Var("a"), Pow(Var("b"), Var("c")))
    assert parse("1 + 2 * 3") == Add(Num(1.0), Mul(Num(2.0), Num(3.0)))
    assert parse("2^-1") == Pow(Num(2.0), Neg(Num(1.0)))


def test_evaluate_examples():
    assert evaluate(parse("u - x"), {"u": 2, "x": 0.5}) == 1.5
    assert evaluate(parse("x^3"), {"x": 2}) == 8
    assert evaluate(parse("abs(-3)+max(1,2)"), {}) == 5
    assert evaluate(parse("-x^2"), {"x": 3}) == -9


def test_deriv_examples():
    assert deriv(parse("x^2"), {"x": 3}, "x") == pytest.approx(6.0)
    assert deriv(parse("u - x"), {"u": 1.0, "x": 2.0}, "u") == 1.0
    assert deriv(parse("sin(x)"), {"x": 0.0}, "x") == 1.0


@pytest.mark.parametrize("src, offset", [("1 +", 3), ("(x", 2), ("x $ y", 2), ("sin()", 4), ("2 3", 2)])
def test_parse_errors_carry_offsets(src, offset):
    with pytest.raises(ParseError) as info:
        parse(src)
    assert info.value.offset == offset
    assert info.value.expected or "unexpected" in str(info.value)


def test_unknown_function_is_a_parse_error():
    with pytest.raises(ParseError):
        parse("foo(x)")


def test_unbound_variable():
    with pytest.raises(UnboundVariable):
        evaluate(parse("x + y"), {"x": 1})
    with pytest.raises(UnboundVariable):
        ExprMap.of(["x"], ["x + y"])


def test_domain_errors_flagged():
    flags = []
    assert math.isnan(evaluate(parse("log(x)"), {"x": -1.0}, flags))
    assert flags
    flags = []
    v = evaluate(parse("1 / x"), {"x": 0.0}, flags)
    assert not math.isfinite(v) and flags


def test_kink_convention_takes_left_branch():
    assert deriv(parse("abs(x)"), {"x": 0.0}, "x") == -1.0
    g = gradient(parse("min(x, y)"), {"x": 1.0, "y": 1.0}, ["x", "y"])
    assert g.tolist() == [1.0, 0.0]
    g = gradient(parse("max(x, y)"), {"x": 1.0, "y": 1.0}, ["x", "y"])
    assert g.tolist() == [1.0, 0.0]


def test_variables_and_substitute():
    e = parse("x * y + sin(z)")
    assert variables(e) == {"x", "y", "z"}
    f = substitute(e, {"z": parse("x - 1")})
    assert variables(f) == {"x", "y"}
    assert evaluate(f, {"x": 1.0, "y": 2.0}) == 2.0


def test_affine_detection():
    f = expr_fn(["x", "v"], ["-1 + 0.1*v", "2*x - v/4"], Box.real(2))
    A, b = f.affine
    assert A.tolist() == [[0.0, 0.1], [2.0, -0.25]]
    assert b.tolist() == [-1.0, 0.0]
    assert expr_fn(["x"], ["x*x"], Box.real(1)).affine is None


def test_compiled_matches_interpreted(rng):
    names = ["x", "y"]
    for _ in range(30):
        src = random_expr(rng, names)
        f = expr_fn(names, [src], Box([(-2, 2), (-2, 2)]))
        for x in rng.uniform(-2, 2, size=(5, 2)):
            assert f(x)[0] == pytest.approx(evaluate(parse(src), dict(zip(names, x))), rel=1e-12, abs=1e-12)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_print_parse_round_trip(seed):
    rng = np.random.default_rng(seed)
    e = parse(random_expr(rng, ["x", "y", "z"], kinks=True))
    assert parse(to_source(e)) == e
    assert parse(to_source(parse(to_source(e)))) == e


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_dual_derivative_matches_central_difference(seed):
    rng = np.random.default_rng(seed)
    e = parse(random_expr(rng, ["x", "y"]))
    env = {"x": float(rng.uniform(-1.5, 1.5)), "y": float(rng.uniform(-1.5, 1.5))}
    for name in ("x", "y"):
        h = 1e-6 * (1 + abs(env[name]))
        up, dn = dict(env), dict(env)
        up[name] += h
        dn[name] -= h
        fd = (evaluate(e, up) - evaluate(e, dn)) / (2 * h)
        assert abs(deriv(e, env, name) - fd) <= 1e-6 * (1 + abs(fd))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_evaluation_is_pure(seed):
    rng = np.random.default_rng(seed)
    e = parse(random_expr(rng, ["x"], kinks=True))
    env = {"x": float(rng.uniform(-2, 2))}
    a, b = evaluate(e, env), evaluate(e, env)
    assert (a == b) or (math.isnan(a) and math.isnan(b))
