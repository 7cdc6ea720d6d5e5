import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from walkerbreadth.curves import (
    AnalyticCurve,
    SampledCurve,
    curve_from_json,
    frenet_apparatus,
    frenet_residuals,
    initial_frame,
    integrate_curve_from_frenet_data,
    kinematics,
    reparametrize_by_arclength,
)
from walkerbreadth.exceptions import ConfigError, DegenerateCurvature, NullSegment, NullTangent
from walkerbreadth.metric import WalkerMetric
from walkerbreadth.numerics import Profile

SIGNS = [(-1, 1, 1), (1, 1, -1), (1, -1, 1)]
FLAT = WalkerMetric("0")


def circle(r):
    """Circle of radius r in the spacelike plane spanned by dy and (dx + dz)/sqrt(2)."""
    return AnalyticCurve(
        f"{r}*sin(t)/sqrt(2)", f"{r}*cos(t)", f"{r}*sin(t)/sqrt(2)", (0.0, 2 * math.pi)
    )


def test_unit_speed_reparametrisation():
    c = reparametrize_by_arclength(FLAT, AnalyticCurve("0", "2*t", "0", (0.0, 1.0)))
    assert c.length == pytest.approx(2.0, abs=1e-12)
    p, d1 = c.derivatives(0.7, 1)
    np.testing.assert_allclose(p, [0.0, 0.7, 0.0], atol=1e-10)
    np.testing.assert_allclose(d1, [0.0, 1.0, 0.0], atol=1e-10)


def test_null_segment():
    with pytest.raises(NullSegment):
        reparametrize_by_arclength(FLAT, AnalyticCurve("t", "0", "0"))


def test_timelike_diagonal_length():
    c = reparametrize_by_arclength(FLAT, AnalyticCurve("t", "0", "t"))
    assert c.length == pytest.approx(math.sqrt(2.0), abs=1e-12)


def test_straight_line_is_degenerate():
    with pytest.raises(DegenerateCurvature):
        frenet_apparatus(FLAT, AnalyticCurve("0", "t", "0"), 0.3)


def test_null_tangent():
    with pytest.raises(NullTangent):
        frenet_apparatus(FLAT, AnalyticCurve("t", "t^2", "0"), 0.0)


@pytest.mark.parametrize("r", [0.5, 2.0])
def test_flat_circle(r):
    c = reparametrize_by_arclength(FLAT, circle(r))
    assert c.length == pytest.approx(2 * math.pi * r, rel=1e-10)
    for s in np.linspace(0.1, c.length - 0.1, 7):
        a = frenet_apparatus(FLAT, c, s)
        assert a.kappa == pytest.approx(1.0 / r, abs=1e-8)
        assert abs(a.tau) <= 1e-8
        assert abs(FLAT.inner(a.point, a.T, a.N)) <= 1e-8
        assert (a.eps1, a.eps2, a.eps3) == (1, 1, -1)


def test_non_unit_speed_invariants():
    # the same circle traversed at speed 3 has the same curvature per arc length
    c = AnalyticCurve("2*sin(3*t)/sqrt(2)", "2*cos(3*t)", "2*sin(3*t)/sqrt(2)")
    a = frenet_apparatus(FLAT, c, 0.2)
    assert a.speed == pytest.approx(6.0)
    assert a.kappa == pytest.approx(0.5)


def test_callable_coordinates_use_differences():
    c = AnalyticCurve(lambda t: 0.0 * t, lambda t: np.cos(t), lambda t: np.sin(t))
    exact = AnalyticCurve("0", "cos(t)", "sin(t)")
    for a, b in zip(kinematics(FLAT, c, 0.4).__dict__.values(), kinematics(FLAT, exact, 0.4).__dict__.values()):
        np.testing.assert_allclose(a, b, atol=1e-5)


def test_sampled_curve_round_trip():
    t = np.linspace(0.0, 1.0, 41)
    pts = np.stack([t, t**2, np.sin(t)], axis=1)
    c = SampledCurve(t, pts)
    data = c.to_json()
    again = curve_from_json(data)
    np.testing.assert_allclose(again.derivatives(0.5, 1)[1], [1.0, 1.0, math.cos(0.5)], atol=1e-9)
    with pytest.raises(ValueError):
        SampledCurve([0, 1, 2], np.zeros((3, 3)))


def test_straight_line_from_frenet_data():
    p0 = np.array([0.1, 0.2, 0.3])
    frame = initial_frame(FLAT, p0, (1, 1, -1))
    sol = integrate_curve_from_frenet_data(FLAT, 0.0, 0.0, (1, 1, -1), frame, 1.0, 0.01)
    np.testing.assert_allclose(sol.points, p0 + sol.s[:, None] * frame[1], atol=1e-13)


def test_circle_closes():
    r = 0.8
    frame = initial_frame(FLAT, [0.0, 0.0, 0.0], (1, 1, -1))
    L = 2 * math.pi * r
    sol = integrate_curve_from_frenet_data(FLAT, 1.0 / r, 0.0, (1, 1, -1), frame, L, L / 2000)
    assert np.linalg.norm(sol.points[-1] - sol.points[0]) <= 1e-4


def test_bad_sign_pattern():
    with pytest.raises(ConfigError):
        initial_frame(FLAT, [0, 0, 0], (1, 1, 1))


@settings(max_examples=25, deadline=None)
@given(
    st.sampled_from(SIGNS),
    st.sampled_from(["0", "y*z", "0.3*y^2", "sin(z)"]),
    st.tuples(*[st.floats(-0.5, 0.5)] * 3),
    st.floats(-1.0, 1.0),
)
def test_initial_frame_is_orthonormal(signs, f, angles, y0):
    g = WalkerMetric(f)
    p = np.array([0.0, y0, 0.3])
    _, T, N, B = initial_frame(g, p, signs, *angles)
    gram = np.array([[g.inner(p, a, b) for b in (T, N, B)] for a in (T, N, B)])
    np.testing.assert_allclose(gram, np.diag(signs), atol=1e-12)
    # orientation: B = -eps1 T x N
    np.testing.assert_allclose(B, -signs[0] * g.cross(p, T, N), atol=1e-12)


@pytest.mark.parametrize("signs", SIGNS)
@pytest.mark.parametrize("f", ["0", "0.3*y^2", "y*z"])
def test_frenet_round_trip(signs, f):
    g = WalkerMetric(f)
    kappa = Profile(1.2, [(0.3, 2.0, 0.1)])
    tau = Profile(0.4, [(0.2, 1.0, 0.5)])
    frame = initial_frame(g, [0.0, 0.1, 0.2], signs, 0.2, 0.1, -0.1)
    sol = integrate_curve_from_frenet_data(g, kappa, tau, signs, frame, 1.0, 0.002)
    assert frenet_residuals(g, sol)["max"] <= 1e-6
    c = sol.to_curve()
    for i in (100, 250, 400):
        a = frenet_apparatus(g, c, sol.s[i])
        assert (a.eps1, a.eps2, a.eps3) == tuple(signs)
        assert a.kappa == pytest.approx(kappa(sol.s[i]), abs=1e-6)
        assert a.tau == pytest.approx(tau(sol.s[i]), abs=1e-5)
        np.testing.assert_allclose(a.T, sol.T[i], atol=1e-6 * max(1.0, np.abs(sol.T[i]).max()))


def test_solution_accessors():
    sol = integrate_curve_from_frenet_data(
        FLAT, 1.0, 0.5, (-1, 1, 1), initial_frame(FLAT, [0, 0, 0], (-1, 1, 1)), 0.5, 0.05
    )
    assert sol.step == pytest.approx(0.05)
    a = sol.apparatus(3)
    assert a.kappa == 1.0 and a.tau == 0.5 and a.eps1 == -1
