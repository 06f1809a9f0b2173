import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bubblelab.expr import ExprError, parse_expr


@pytest.mark.parametrize("text,f", [
    ("1 + 0.3*x1", lambda a, b: 1 + 0.3 * a),
    ("exp(x1 - x2^2)", lambda a, b: np.exp(a - b**2)),
    ("2*cos(pi*x2)/(1 + x1**2)", lambda a, b: 2 * np.cos(np.pi * b) / (1 + a**2)),
    ("-log(3 + sin(x1))", lambda a, b: -np.log(3 + np.sin(a))),
    ("e", lambda a, b: np.e + 0 * a),
])
def test_evaluation(text, f):
    a, b = np.array([0.1, -0.7, 1.3]), np.array([0.4, 0.2, -1.1])
    np.testing.assert_allclose(parse_expr(text)(a, b), f(a, b), rtol=1e-14)


@pytest.mark.parametrize("text", ["1 + 0.3*x1*x2", "exp(x1)*sin(x2)", "log(2 + x1^2)/(1 + x2)",
                                  "cos(x1 - 2*x2)**3"])
def test_symbolic_derivatives(text):
    e = parse_expr(text)
    a, b = np.array([0.3, -0.2]), np.array([0.1, 0.5])
    h = 1e-6
    d1 = (e(a + h, b) - e(a - h, b)) / (2 * h)
    d2 = (e(a, b + h) - e(a, b - h)) / (2 * h)
    np.testing.assert_allclose(e.diff("x1")(a, b), d1, atol=1e-8)
    np.testing.assert_allclose(e.diff("x2")(a, b), d2, atol=1e-8)


@pytest.mark.parametrize("text,col", [("1 + y", 5), ("abs(x1)", 1), ("x1 ** x2", 1),
                                      ("x1 % 2", 1), ("1 +", None)])
def test_errors(text, col):
    with pytest.raises(ExprError) as exc:
        parse_expr(text)
    if col is not None:
        assert exc.value.col == col


def test_empty_is_error():
    with pytest.raises(ExprError):
        parse_expr("  ")


def test_uses():
    assert parse_expr("1 + 2*pi").uses() == set()
    assert parse_expr("x2 * exp(x1)").uses() == {"x1", "x2"}


leaf = st.one_of(st.sampled_from(["x1", "x2"]),
                 st.floats(0.1, 5.0).map(lambda v: repr(round(v, 3))))
exprs = st.recursive(leaf, lambda sub: st.one_of(
    st.tuples(sub, st.sampled_from(["+", "-", "*"]), sub).map(lambda t: f"({t[0]} {t[1]} {t[2]})"),
    sub.map(lambda s: f"sin({s})"),
    sub.map(lambda s: f"exp(-({s})**2)"),
), max_leaves=8)


@settings(max_examples=60, deadline=None)
@given(exprs)
def test_printing_round_trip(text):
    e = parse_expr(text)
    again = parse_expr(str(e))
    a, b = np.array([0.3, -1.1]), np.array([0.7, 0.2])
    np.testing.assert_allclose(again(a, b), e(a, b), rtol=1e-12, atol=1e-12)
    assert str(again) == str(e)
