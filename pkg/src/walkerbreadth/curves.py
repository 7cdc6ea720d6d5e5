"""Curves in the Walker chart and their Frenet apparatus.

Conventions (kept in one place because every downstream sign depends on them):

* ``eps1 = g(T,T)``, ``eps2 = g(N,N)``, ``eps3 = g(B,B)`` and ``eps1*eps2*eps3 = -1``.
* ``kappa >= 0`` with ``nabla_T T = eps2 * kappa * N``.
* ``B = -eps1 * (T x N)`` using the metric cross product.
* ``nabla_T N = -eps1 kappa T - eps3 tau B`` and ``nabla_T B = eps2 tau N``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .exceptions import (
    ConfigError,
    DegenerateCurvature,
    FrameDriftExceeded,
    NullSegment,
    NullTangent,
)
from .expression import Expression, parse_expression
from .metric import WalkerMetric
from .numerics import fd_derivative, gauss_integral, local_poly_derivatives, rk4_solve

KAPPA_MIN = 1e-7


def _as_function(spec, var="s") -> Callable:
    if callable(spec):
        return spec
    if isinstance(spec, (int, float)):
        value = float(spec)
        return lambda s: value + 0.0 * np.asarray(s, dtype=float)
    return parse_expression(spec, (var,))


class Curve:
    """Base class: a map from a parameter interval into the chart."""

    kind = "abstract"
    t_range: tuple[float, float]

    def position(self, t):
        return self.derivatives(t, 0)[0]

    def derivatives(self, t: float, order: int = 3) -> list[np.ndarray]:
        raise NotImplementedError

    def positions(self, ts) -> np.ndarray:
        return np.array([self.position(t) for t in np.asarray(ts, dtype=float)])


class AnalyticCurve(Curve):
    """Curve given by coordinate functions of ``t``.

    Coordinates may be expression strings (exact symbolic derivatives) or
    plain callables (derivatives by 5-point central differences).
    """

    kind = "analytic"

    def __init__(self, x, y, z, t_range=(0.0, 1.0), var: str = "t", fd_step: float = 1e-5):
        self.t_range = (float(t_range[0]), float(t_range[1]))
        self.var = var
        self.fd_step = fd_step
        coords = (x, y, z)
        if all(isinstance(c, (str, int, float, Expression)) for c in coords):
            self.exprs = tuple(
                c if isinstance(c, Expression) else parse_expression(str(c), (var,)) for c in coords
            )
            self.derivative_scheme = "exact"
            self._table = [self.exprs]
            for _ in range(3):
                self._table.append(tuple(e.diff(var) for e in self._table[-1]))
        else:
            self.exprs = None
            self.derivative_scheme = "central-5pt"
            self._funcs = tuple(_as_function(c, var) for c in coords)

    @classmethod
    def from_json(cls, data: dict) -> "AnalyticCurve":
        return cls(data["x"], data["y"], data["z"], tuple(data.get("t_range", (0.0, 1.0))))

    def to_json(self) -> dict:
        if self.exprs is None:
            raise ValueError("callable-based curves are not serialisable")
        return {
            "kind": "analytic",
            "x": self.exprs[0].source_text,
            "y": self.exprs[1].source_text,
            "z": self.exprs[2].source_text,
            "t_range": list(self.t_range),
        }

    def _eval(self, funcs, t):
        return np.array([float(fn(t)) for fn in funcs])

    def positions(self, ts):
        ts = np.asarray(ts, dtype=float)
        if self.exprs is not None:
            return np.stack([np.broadcast_to(e(ts), ts.shape) for e in self.exprs], axis=-1)
        return super().positions(ts)

    def derivatives(self, t, order=3):
        t = float(t)
        if self.exprs is not None:
            return [self._eval(self._table[k], t) for k in range(order + 1)]
        out = [self._eval(self._funcs, t)]
        if order == 0:
            return out
        h = self.fd_step
        c = lambda k: self._eval(self._funcs, t + k * h)  # noqa: E731
        m2, m1, p1, p2 = c(-2), c(-1), c(1), c(2)
        out.append((m2 - 8 * m1 + 8 * p1 - p2) / (12 * h))
        if order >= 2:
            # higher derivatives need a larger step to keep round-off bounded
            H = 2e-3
            C = lambda k: self._eval(self._funcs, t + k * H)  # noqa: E731
            M3, M2, M1, P1, P2, P3 = C(-3), C(-2), C(-1), C(1), C(2), C(3)
            c0 = out[0]
            out.append((-M2 + 16 * M1 - 30 * c0 + 16 * P1 - P2) / (12 * H * H))
            if order >= 3:
                out.append((M3 - 8 * M2 + 13 * M1 - 13 * P1 + 8 * P2 - P3) / (8 * H**3))
        return out


class SampledCurve(Curve):
    """Ordered samples ``(t_k, p_k)``; derivatives from local degree-6 interpolation."""

    kind = "sampled"

    def __init__(self, t: Sequence[float], points: np.ndarray):
        t = np.asarray(t, dtype=float)
        points = np.asarray(points, dtype=float)
        if t.ndim != 1 or len(t) < 4:
            raise ValueError("sampled curves need at least 4 samples")
        if np.any(np.diff(t) <= 0):
            raise ValueError("sample parameters must be strictly increasing")
        if points.shape != (len(t), 3):
            raise ValueError("points must have shape (n, 3)")
        self.t = t
        self.points = points
        self.t_range = (float(t[0]), float(t[-1]))

    @classmethod
    def from_json(cls, data: dict) -> "SampledCurve":
        pts = np.asarray(data["points"], dtype=float)
        t0 = float(data.get("t0", 0.0))
        return cls(t0 + float(data["dt"]) * np.arange(len(pts)), pts)

    def to_json(self) -> dict:
        dt = float(self.t[1] - self.t[0])
        return {"kind": "sampled", "t0": float(self.t[0]), "dt": dt, "points": self.points.tolist()}

    def positions(self, ts):
        ts = np.asarray(ts, dtype=float)
        return np.array([self.derivatives(t, 0)[0] for t in ts])

    def derivatives(self, t, order=3):
        return local_poly_derivatives(self.t, self.points, float(t), order=order)


def curve_from_json(data: dict) -> Curve:
    kind = data.get("kind")
    if kind == "analytic":
        return AnalyticCurve.from_json(data)
    if kind == "sampled":
        return SampledCurve.from_json(data)
    raise ConfigError(f"unknown curve kind {kind!r}")


# ---------------------------------------------------------------------------
# kinematics along an arbitrary parameter


@dataclass
class Kinematics:
    """Position and the first three covariant derivatives along a curve parameter."""

    point: np.ndarray
    V: np.ndarray  # c'
    W: np.ndarray  # nabla_t c'
    X: np.ndarray  # nabla_t nabla_t c'


def kinematics(g: WalkerMetric, c: Curve, t: float) -> Kinematics:
    p, c1, c2, c3 = c.derivatives(t, 3)
    W = c2 + g.gamma(p, c1, c1)
    dW = c3 + g.dgamma(p, c1, c1, c1) + 2.0 * g.gamma(p, c1, c2)
    X = dW + g.gamma(p, c1, W)
    return Kinematics(p, c1, W, X)


@dataclass
class FrenetApparatus:
    s: float
    point: np.ndarray
    T: np.ndarray
    N: np.ndarray
    B: np.ndarray
    kappa: float
    tau: float
    eps1: int
    eps2: int
    eps3: int
    speed: float = 1.0


def _sign_of(q, tol, what):
    if q > tol:
        return 1
    if q < -tol:
        return -1
    raise what


def frenet_apparatus(
    g: WalkerMetric, c: Curve, s: float, kappa_min: float = KAPPA_MIN
) -> FrenetApparatus:
    """Frenet frame, curvature and torsion of ``c`` at parameter ``s``.

    The curve need not be unit speed; ``kappa`` and ``tau`` are always per unit
    arc length and ``speed`` records |c'|.
    """
    k = kinematics(g, c, s)
    p, V, W, X = k.point, k.V, k.W, k.X
    G = float(g.inner(p, V, V))
    eps1 = _sign_of(G, g.null_tolerance(p, V), NullTangent(f"null tangent at s={s}"))
    v2 = abs(G)
    v = math.sqrt(v2)
    T = V / v
    acc = (W - (float(g.inner(p, W, V)) / G) * V) / v2
    K = float(g.inner(p, acc, acc))
    kappa = math.sqrt(abs(K))
    if kappa <= kappa_min:
        raise DegenerateCurvature(f"kappa={kappa:.3e} at s={s}")
    eps2 = 1 if K > 0 else -1
    eps3 = -eps1 * eps2
    N = eps2 * acc / kappa
    B = -eps1 * g.cross(p, T, N)
    det = float(np.linalg.det(np.stack([V, W, X], axis=1)))
    tau = eps1 * det / (v2**3 * kappa**2)
    return FrenetApparatus(float(s), p, T, N, B, kappa, tau, eps1, eps2, eps3, v)


# ---------------------------------------------------------------------------
# arc length


class ArcLengthCurve(Curve):
    """``base`` reparametrised by g-arc length, starting at s = 0."""

    kind = "analytic"

    def __init__(self, g: WalkerMetric, base: Curve, table_points: int = 2000, null_tol: float = 1e-9):
        self.g = g
        self.base = base
        a, b = base.t_range
        self.derivative_scheme = getattr(base, "derivative_scheme", "sampled")
        tk = np.linspace(a, b, table_points + 1)
        speeds = np.array([self._speed(t, null_tol) for t in tk])
        sk = np.zeros_like(tk)
        for i in range(table_points):
            sk[i + 1] = sk[i] + gauss_integral(self._speed_vec, tk[i], tk[i + 1])
        self._tk, self._sk = tk, sk
        self._t_of_s = CubicHermiteSpline(sk, tk, 1.0 / speeds)
        self.t_range = (0.0, float(sk[-1]))
        self.length = float(sk[-1])

    def _speed(self, t, null_tol):
        p, c1 = self.base.derivatives(t, 1)
        G = float(self.g.inner(p, c1, c1))
        if abs(G) < null_tol * max(1.0, float(np.dot(c1, c1))):
            raise NullSegment(f"|g(c',c')| = {abs(G):.3e} at t={t}")
        return math.sqrt(abs(G))

    def _speed_vec(self, ts):
        return np.array([self._speed(t, 0.0) for t in np.atleast_1d(ts)])

    def parameter(self, s: float) -> float:
        """Base-curve parameter t at arc length s (Newton-polished)."""
        t = float(self._t_of_s(s))
        i = int(np.clip(np.searchsorted(self._tk, t) - 1, 0, len(self._tk) - 2))
        for _ in range(2):
            s_t = self._sk[i] + gauss_integral(self._speed_vec, self._tk[i], t)
            t -= (s_t - s) / self._speed(t, 0.0)
        return t

    def derivatives(self, s, order=3):
        t = self.parameter(float(s))
        base = self.base.derivatives(t, order)
        if order == 0:
            return base
        k = kinematics(self.g, self.base, t)
        p = k.point
        G = float(self.g.inner(p, k.V, k.V))
        e = 1.0 if G > 0 else -1.0
        v = math.sqrt(abs(G))
        G_t = 2.0 * float(self.g.inner(p, k.W, k.V))
        G_tt = 2.0 * float(self.g.inner(p, k.X, k.V)) + 2.0 * float(self.g.inner(p, k.W, k.W))
        v_t = e * G_t / (2.0 * v)
        v_tt = e * G_tt / (2.0 * v) - v_t**2 / v
        t1 = 1.0 / v
        t2 = -v_t / v**3
        t3 = (-v_tt / v**3 + 3.0 * v_t**2 / v**4) / v
        c = base
        out = [c[0], c[1] * t1]
        if order >= 2:
            out.append(c[2] * t1**2 + c[1] * t2)
        if order >= 3:
            out.append(c[3] * t1**3 + 3.0 * c[2] * t1 * t2 + c[1] * t3)
        return out


def reparametrize_by_arclength(g: WalkerMetric, c: Curve, **kwargs) -> ArcLengthCurve:
    return ArcLengthCurve(g, c, **kwargs)


# ---------------------------------------------------------------------------
# Frenet data -> curve


@dataclass
class FrenetSolution:
    """Samples of a curve together with its propagated Frenet frame."""

    s: np.ndarray
    points: np.ndarray
    T: np.ndarray
    N: np.ndarray
    B: np.ndarray
    kappa: np.ndarray
    tau: np.ndarray
    signs: tuple[int, int, int]
    max_correction: float = 0.0

    @property
    def step(self) -> float:
        return float(self.s[1] - self.s[0])

    def to_curve(self) -> SampledCurve:
        return SampledCurve(self.s, self.points)

    def apparatus(self, i: int) -> FrenetApparatus:
        e1, e2, e3 = self.signs
        return FrenetApparatus(
            float(self.s[i]), self.points[i], self.T[i], self.N[i], self.B[i],
            float(self.kappa[i]), float(self.tau[i]), e1, e2, e3,
        )


def _check_signs(signs):
    e1, e2, e3 = (int(x) for x in signs)
    if {e1, e2, e3} - {-1, 1} or e1 * e2 * e3 != -1:
        raise ConfigError(f"sign pattern {signs} must be +-1 with product -1")
    return e1, e2, e3


def _lorentz_frame(g, p, eta_matrix):
    """Columns of ``eta_matrix`` (in the e1, e2, e3 basis) mapped to coordinates."""
    E = np.stack(g.frame(p), axis=1)
    return E @ eta_matrix


def initial_frame(g: WalkerMetric, p, signs, rotation: float = 0.0, boost1: float = 0.0, boost2: float = 0.0):
    """A g-orthonormal, correctly oriented (T, N, B) at ``p`` with the given signs.

    The optional angles apply a rotation in the spacelike (e1, e2) plane and
    boosts mixing e1 / e2 with the timelike e3, so generic frames can be made.
    """
    e1, e2, e3 = _check_signs(signs)
    p = np.asarray(p, dtype=float)
    cr, sr = math.cos(rotation), math.sin(rotation)
    R = np.array([[cr, -sr, 0.0], [sr, cr, 0.0], [0.0, 0.0, 1.0]])
    c1, s1 = math.cosh(boost1), math.sinh(boost1)
    L1 = np.array([[c1, 0.0, s1], [0.0, 1.0, 0.0], [s1, 0.0, c1]])
    c2, s2 = math.cosh(boost2), math.sinh(boost2)
    L2 = np.array([[1.0, 0.0, 0.0], [0.0, c2, s2], [0.0, s2, c2]])
    M = _lorentz_frame(g, p, R @ L1 @ L2)
    space_a, space_b, time = M[:, 0], M[:, 1], M[:, 2]
    if e1 == -1:
        T, N = time, space_a
    elif e2 == 1:
        T, N = space_a, space_b
    else:
        T, N = space_a, time
    B = -e1 * g.cross(p, T, N)
    return p, T, N, B


def _gram_schmidt(g, p, T, N, B, signs):
    e1, e2, e3 = signs
    f = float(g.f(float(p[1]), float(p[2])))

    def ip(u, v):
        return u[0] * v[2] + u[2] * v[0] + u[1] * v[1] + f * u[2] * v[2]

    T = T / math.sqrt(abs(ip(T, T)))
    N = N - e1 * ip(N, T) * T
    N = N / math.sqrt(abs(ip(N, N)))
    B = B - e1 * ip(B, T) * T - e2 * ip(B, N) * N
    B = B / math.sqrt(abs(ip(B, B)))
    return T, N, B


def integrate_curve_from_frenet_data(
    g: WalkerMetric,
    kappa,
    tau,
    signs,
    initial,
    s_max: float,
    step: float,
    drift_tol: float = 1e-6,
    frame_tol: float = 1e-8,
) -> FrenetSolution:
    """Solve the Frenet system together with dx/ds = T by RK4.

    ``kappa`` and ``tau`` are callables, numbers or expressions in ``s``.
    After every step the frame is re-orthonormalised against g; a correction
    larger than ``drift_tol`` aborts the run.
    """
    e1, e2, e3 = _check_signs(signs)
    kappa_fn = _as_function(kappa)
    tau_fn = _as_function(tau)
    p0, T0, N0, B0 = (np.asarray(v, dtype=float) for v in initial)
    for vec, eps, name in ((T0, e1, "T0"), (N0, e2, "N0"), (B0, e3, "B0")):
        if abs(g.inner(p0, vec, vec) - eps) > frame_tol:
            raise ConfigError(f"{name} does not have g-norm {eps}")
    for a, b, name in ((T0, N0, "T0,N0"), (T0, B0, "T0,B0"), (N0, B0, "N0,B0")):
        if abs(g.inner(p0, a, b)) > frame_tol:
            raise ConfigError(f"{name} are not g-orthogonal")

    def rhs(s, y):
        p, T, N, B = y[0:3], y[3:6], y[6:9], y[9:12]
        k = float(kappa_fn(s))
        t = float(tau_fn(s))
        out = np.empty(12)
        out[0:3] = T
        out[3:6] = e2 * k * N
        out[6:9] = -e1 * k * T - e3 * t * B
        out[9:12] = e2 * t * N
        if not g.is_flat:
            fy = float(g.f.f_y(float(p[1]), float(p[2])))
            fz = float(g.f.f_z(float(p[1]), float(p[2])))
            # Gamma(T, V) for V = T, N, B at once
            V = y[3:12].reshape(3, 3)
            out[3::3] -= 0.5 * fy * (T[1] * V[:, 2] + T[2] * V[:, 1]) + 0.5 * fz * T[2] * V[:, 2]
            out[4::3] += 0.5 * fy * T[2] * V[:, 2]
        return out

    worst = [0.0]

    def post(y):
        p = y[0:3]
        T, N, B = _gram_schmidt(g, p, y[3:6], y[6:9], y[9:12], (e1, e2, e3))
        # relative to the component size: boosted frames can have large entries
        corr = max(
            np.max(np.abs(new - old)) / max(1.0, np.max(np.abs(old)))
            for new, old in ((T, y[3:6]), (N, y[6:9]), (B, y[9:12]))
        )
        worst[0] = max(worst[0], corr)
        if corr > drift_tol:
            raise FrameDriftExceeded(f"re-orthonormalisation correction {corr:.3e}")
        return np.concatenate([p, T, N, B])

    y0 = np.concatenate([p0, T0, N0, B0])
    s, Y = rk4_solve(rhs, y0, s_max, step, post=post)
    kap = np.broadcast_to(np.asarray(kappa_fn(s), dtype=float), s.shape).copy()
    ta = np.broadcast_to(np.asarray(tau_fn(s), dtype=float), s.shape).copy()
    return FrenetSolution(
        s, Y[:, 0:3], Y[:, 3:6], Y[:, 6:9], Y[:, 9:12], kap, ta, (e1, e2, e3), worst[0]
    )


def covariant_derivative_samples(g: WalkerMetric, s_step: float, points, T, V) -> np.ndarray:
    """nabla_T V along uniformly sampled data (sixth-order differences)."""
    return fd_derivative(V, s_step, order=6) + g.gamma(points, T, V)


def frenet_residuals(g: WalkerMetric, sol: FrenetSolution, trim: int = 2) -> dict:
    """Max coordinate-norm residual of each Frenet equation over the samples."""
    e1, e2, e3 = sol.signs
    h = sol.step
    k = sol.kappa[:, None]
    t = sol.tau[:, None]
    dT = covariant_derivative_samples(g, h, sol.points, sol.T, sol.T)
    dN = covariant_derivative_samples(g, h, sol.points, sol.T, sol.N)
    dB = covariant_derivative_samples(g, h, sol.points, sol.T, sol.B)
    r1 = dT - e2 * k * sol.N
    r2 = dN + e1 * k * sol.T + e3 * t * sol.B
    r3 = dB - e2 * t * sol.N
    sl = slice(trim, len(sol.s) - trim) if trim else slice(None)
    norms = [float(np.max(np.linalg.norm(r[sl], axis=1))) for r in (r1, r2, r3)]
    return {"tangent": norms[0], "normal": norms[1], "binormal": norms[2], "max": max(norms)}
