import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from walkerbreadth.exceptions import ExpressionSyntaxError, UnknownIdentifier
from walkerbreadth.expression import parse_expression, parse_field


def test_product_partials():
    f = parse_field("y*z")
    assert str(f.f_y) == "z"
    assert str(f.f_z) == "y"


def test_zero_field():
    f = parse_field("0")
    assert f.f_y.is_constant and f.f_z.is_constant
    assert float(f.f_y(1.3, -2.0)) == 0.0
    assert float(f.f_z(1.3, -2.0)) == 0.0


def test_textbook_derivatives():
    f = parse_field("sinh(y) + z^2")
    assert str(f.f_y) == "cosh(y)"
    assert str(f.f_z) == "2*z"


@pytest.mark.parametrize(
    "text, offset",
    [("y*", 2), ("(y", 2), ("y + * z", 4), ("3 $ y", 2)],
)
def test_syntax_error_offsets(text, offset):
    with pytest.raises(ExpressionSyntaxError) as info:
        parse_field(text)
    assert info.value.offset == offset


def test_implicit_multiplication_rejected():
    with pytest.raises(ExpressionSyntaxError):
        parse_field("2y")


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifier) as info:
        parse_field("y + w")
    assert info.value.name == "w"
    assert info.value.offset == 4


def test_power_is_right_associative():
    e = parse_expression("2^3^2", ("t",))
    assert float(e(0.0)) == 512.0


def test_vectorised_evaluation():
    e = parse_expression("sin(t) + t^2", ("t",))
    t = np.linspace(0.0, 1.0, 7)
    np.testing.assert_allclose(e(t), np.sin(t) + t**2, rtol=0, atol=1e-15)


def test_compose():
    f = parse_expression("y*z", ("y", "z"))
    g = f.compose({"y": parse_expression("2*t", ("t",)), "z": parse_expression("t+1", ("t",))}, ("t",))
    assert float(g(3.0)) == pytest.approx(24.0)
    assert float(g.diff("t")(3.0)) == pytest.approx(4 * 3.0 + 2.0)


_leaves = st.sampled_from(["y", "z", "1.5", "2", "pi"])


def _combine(children):
    unary = st.builds(lambda fn, a: f"{fn}({a})", st.sampled_from(["sin", "cos", "tanh"]), children)
    binary = st.builds(
        lambda a, op, b: f"({a}) {op} ({b})", children, st.sampled_from(["+", "-", "*"]), children
    )
    return unary | binary


expressions = st.recursive(_leaves, _combine, max_leaves=6)


@settings(max_examples=60, deadline=None)
@given(expressions, st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
def test_symbolic_partials_match_differences(text, y, z):
    f = parse_field(text)
    h = 1e-5
    fd_y = (f(y + h, z) - f(y - h, z)) / (2 * h)
    fd_z = (f(y, z + h) - f(y, z - h)) / (2 * h)
    scale = 1.0 + abs(float(f.f_y(y, z))) + abs(float(f.f_z(y, z)))
    assert abs(float(f.f_y(y, z)) - fd_y) <= 1e-5 * scale
    assert abs(float(f.f_z(y, z)) - fd_z) <= 1e-5 * scale


@settings(max_examples=60, deadline=None)
@given(expressions, st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
def test_render_round_trip(text, y, z):
    f = parse_field(text)
    again = parse_field(f.ast.render())
    a, b = float(f(y, z)), float(again(y, z))
    assert math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-12)
