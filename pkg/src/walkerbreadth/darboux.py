"""Timelike surfaces and the Darboux frame {T, Y, U} of a curve lying on one.

The three causal cases are tagged by :class:`CaseTag`.  With U the unit
(spacelike) surface normal and ``Y = U x T`` the structure equations read

* Case 1 (timelike T):  T' = kg Y + kn U,  Y' = kg T + tg U,  U' = kn T - tg Y
* Case 2i / 2ii (spacelike T):  T' = -kg Y + kn U,  Y' = -kg T + tg U,  U' = -kn T + tg Y

where ``'`` is the covariant derivative along T.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .curves import (
    KAPPA_MIN,
    AnalyticCurve,
    Curve,
    FrenetSolution,
    covariant_derivative_samples,
    frenet_apparatus,
    kinematics,
)
from .exceptions import (
    ConfigError,
    CurveOffSurface,
    DegenerateCurvature,
    DegeneratePatch,
    HyperbolicDomain,
    NotTimelikeSurface,
    NullTangent,
)
from .expression import Expression, parse_expression
from .metric import Tangent, Point, WalkerMetric


class CaseTag(enum.Enum):
    CASE1 = "case1"  # timelike curve
    CASE2I = "case2i"  # spacelike curve, eps2 = +1, eps3 = -1
    CASE2II = "case2ii"  # spacelike curve, eps2 = -1, eps3 = +1

    @classmethod
    def parse(cls, text) -> "CaseTag":
        if isinstance(text, CaseTag):
            return text
        try:
            return cls(str(text).lower())
        except ValueError:
            raise ConfigError(f"unknown case tag {text!r}") from None

    @property
    def signs(self) -> tuple[int, int, int]:
        """Frenet sign pattern (eps1, eps2, eps3)."""
        return {"case1": (-1, 1, 1), "case2i": (1, 1, -1), "case2ii": (1, -1, 1)}[self.value]

    @property
    def y_sign(self) -> int:
        return 1 if self is CaseTag.CASE1 else -1


def case_for_signs(eps1: int, eps2: int) -> CaseTag:
    if eps1 == -1:
        return CaseTag.CASE1
    return CaseTag.CASE2I if eps2 == 1 else CaseTag.CASE2II


# ---------------------------------------------------------------------------
# surfaces


class SurfacePatch:
    """Analytic patch ``r(u, v)`` with exact partial derivatives."""

    def __init__(self, x, y, z, u_range=(-10.0, 10.0), v_range=(-10.0, 10.0)):
        self.exprs = tuple(
            c if isinstance(c, Expression) else parse_expression(str(c), ("u", "v")) for c in (x, y, z)
        )
        self.u_range = tuple(map(float, u_range))
        self.v_range = tuple(map(float, v_range))

    @classmethod
    def from_json(cls, data: dict) -> "SurfacePatch":
        return cls(data["x"], data["y"], data["z"], data.get("u_range", (-10, 10)), data.get("v_range", (-10, 10)))

    def to_json(self) -> dict:
        return {
            "x": self.exprs[0].source_text,
            "y": self.exprs[1].source_text,
            "z": self.exprs[2].source_text,
            "u_range": list(self.u_range),
            "v_range": list(self.v_range),
        }

    def _partial(self, var_seq: str):
        out = []
        for e in self.exprs:
            for v in var_seq:
                e = e.diff(v)
            out.append(e)
        return out

    def _eval(self, exprs, u, v):
        return np.array([float(e(u, v)) for e in exprs])

    def r(self, u, v):
        return self._eval(self.exprs, u, v)

    def r_u(self, u, v):
        return self._eval(self._partial("u"), u, v)

    def r_v(self, u, v):
        return self._eval(self._partial("v"), u, v)

    def second(self, u, v):
        """(r_uu, r_uv, r_vv)."""
        return tuple(self._eval(self._partial(k), u, v) for k in ("uu", "uv", "vv"))

    def project(self, p, guess=(0.0, 0.0), iterations: int = 30):
        """Gauss-Newton foot point of ``p``; returns (u, v, chart distance)."""
        p = np.asarray(p, dtype=float)
        u, v = map(float, guess)
        for _ in range(iterations):
            J = np.stack([self.r_u(u, v), self.r_v(u, v)], axis=1)
            res = self.r(u, v) - p
            step, *_ = np.linalg.lstsq(J, -res, rcond=None)
            u += step[0]
            v += step[1]
            if np.max(np.abs(step)) < 1e-15 * max(1.0, abs(u), abs(v)):
                break
        return u, v, float(np.linalg.norm(self.r(u, v) - p))

    def curve(self, u_of_t, v_of_t, t_range=(0.0, 1.0)) -> "SurfaceCurve":
        return SurfaceCurve(self, u_of_t, v_of_t, t_range)


class SurfaceCurve(AnalyticCurve):
    """Curve ``r(u(t), v(t))`` on a patch, composed symbolically."""

    def __init__(self, patch: SurfacePatch, u_of_t, v_of_t, t_range=(0.0, 1.0)):
        u = u_of_t if isinstance(u_of_t, Expression) else parse_expression(str(u_of_t), ("t",))
        v = v_of_t if isinstance(v_of_t, Expression) else parse_expression(str(v_of_t), ("t",))
        self.patch = patch
        self.uv = (u, v)
        coords = [e.compose({"u": u, "v": v}, ("t",)) for e in patch.exprs]
        super().__init__(*coords, t_range=t_range)

    def uv_at(self, t):
        return float(self.uv[0](t)), float(self.uv[1](t))


def _normal_parts(g: WalkerMetric, S: SurfacePatch, u, v, tol=1e-12):
    ru, rv = S.r_u(u, v), S.r_v(u, v)
    p = S.r(u, v)
    n = g.cross(p, ru, rv)
    if np.linalg.norm(np.cross(ru, rv)) <= tol * max(1.0, np.linalg.norm(ru) * np.linalg.norm(rv)):
        raise DegeneratePatch(f"r_u and r_v are dependent at (u, v) = ({u}, {v})")
    Q = float(g.inner(p, n, n))
    if Q <= 1e-9 * max(1.0, float(np.dot(n, n))):
        raise NotTimelikeSurface(f"g(n, n) = {Q:.3e} at (u, v) = ({u}, {v})")
    return p, ru, rv, n, Q


def normal_vector(g: WalkerMetric, S: SurfacePatch, u, v) -> np.ndarray:
    _, _, _, n, Q = _normal_parts(g, S, u, v)
    return n / math.sqrt(Q)


def surface_normal(g: WalkerMetric, S: SurfacePatch, u, v) -> Tangent:
    """Unit normal ``U = (r_u x r_v) / |r_u x r_v|`` at ``r(u, v)``."""
    return Tangent(normal_vector(g, S, u, v), Point.of(S.r(u, v)))


def _normal_derivative(g: WalkerMetric, S: SurfacePatch, u, v, du, dv):
    """Ordinary derivative of the unit normal along (du, dv)."""
    p, ru, rv, n, Q = _normal_parts(g, S, u, v)
    ruu, ruv, rvv = S.second(u, v)
    dru = ruu * du + ruv * dv
    drv = ruv * du + rvv * dv
    dp = ru * du + rv * dv
    fy, fz = g._fy_fz(p)
    df = float(fy * dp[1] + fz * dp[2])
    d23 = ru[1] * rv[2] - ru[2] * rv[1]
    dn = g.cross(p, dru, rv) + g.cross(p, ru, drv) + np.array([-df * d23, 0.0, 0.0])
    f = float(g.fval(p))
    dQ = 2.0 * (dn[0] * n[2] + n[0] * dn[2]) + 2.0 * n[1] * dn[1] + df * n[2] ** 2 + 2.0 * f * n[2] * dn[2]
    return dn / math.sqrt(Q) - n * dQ / (2.0 * Q**1.5)


# ---------------------------------------------------------------------------
# apparatus


@dataclass
class DarbouxApparatus:
    s: float
    point: np.ndarray
    T: np.ndarray
    Y: np.ndarray
    U: np.ndarray
    kappa_g: float
    kappa_n: float
    tau_g: float
    theta: float  # nan when undefined
    case_tag: CaseTag
    kappa: float = float("nan")
    tau: float = float("nan")


def recover_theta(app_or_case, kappa_g: float | None = None, kappa_n: float | None = None) -> float:
    """Darboux angle from (kappa_g, kappa_n).

    Accepts an apparatus, or ``(case_tag, kappa_g, kappa_n)``.
    """
    if isinstance(app_or_case, DarbouxApparatus):
        case, kg, kn = app_or_case.case_tag, app_or_case.kappa_g, app_or_case.kappa_n
    else:
        case, kg, kn = CaseTag.parse(app_or_case), float(kappa_g), float(kappa_n)
    if math.hypot(kg, kn) <= KAPPA_MIN:
        return float("nan")
    if case is CaseTag.CASE1:
        return math.atan2(-kn, kg)
    arg = kg / kn if case is CaseTag.CASE2I else kn / kg
    if not abs(arg) < 1.0:
        raise HyperbolicDomain(f"artanh argument {arg} for {case.value}")
    return math.atanh(arg)


def darboux_apparatus(
    g: WalkerMetric, S: SurfacePatch, c: Curve, s: float, uv_guess=None, on_surface_tol: float = 1e-8
) -> DarbouxApparatus:
    """Darboux frame and scalars of a unit-speed curve ``c`` on ``S`` at ``s``."""
    k = kinematics(g, c, s)
    p, T, acc = k.point, k.V, k.W
    q = float(g.inner(p, T, T))
    if abs(q) <= g.null_tolerance(p, T):
        raise NullTangent(f"null tangent at s={s}")
    if uv_guess is None:
        uv_guess = c.base.uv_at(c.parameter(s)) if hasattr(c, "base") and hasattr(c.base, "uv_at") else (0.0, 0.0)
    u, v, dist = S.project(p, uv_guess)
    if dist > on_surface_tol:
        raise CurveOffSurface(f"curve is {dist:.3e} from the surface at s={s}")
    U = normal_vector(g, S, u, v)
    Y = g.cross(p, U, T)
    # (du, dv) with T = r_u du + r_v dv
    J = np.stack([S.r_u(u, v), S.r_v(u, v)], axis=1)
    (du, dv), *_ = np.linalg.lstsq(J, T, rcond=None)
    dU = _normal_derivative(g, S, u, v, du, dv) + g.gamma(p, T, U)
    dY = g.cross(p, dU, T) + g.cross(p, U, acc)
    kg = float(g.inner(p, acc, Y))
    kn = float(g.inner(p, acc, U))
    tg = float(g.inner(p, dY, U))
    eps1 = 1 if q > 0 else -1
    K = float(g.inner(p, acc, acc))
    kappa = math.sqrt(abs(K))
    if eps1 == -1:
        case = CaseTag.CASE1
    else:
        if kappa <= KAPPA_MIN:
            raise DegenerateCurvature(f"cannot separate case 2i / 2ii at kappa={kappa:.3e}")
        case = case_for_signs(eps1, 1 if K > 0 else -1)
    try:
        tau = frenet_apparatus(g, c, s).tau
    except DegenerateCurvature:
        tau = float("nan")
    app = DarbouxApparatus(float(s), p, T, Y, U, kg, kn, tg, float("nan"), case, kappa, tau)
    app.theta = recover_theta(app)
    return app


# ---------------------------------------------------------------------------
# sampled Darboux data


@dataclass
class DarbouxSeries:
    """Darboux frames on a uniform arc-length grid."""

    s: np.ndarray
    points: np.ndarray
    T: np.ndarray
    Y: np.ndarray
    U: np.ndarray
    kappa_g: np.ndarray
    kappa_n: np.ndarray
    tau_g: np.ndarray
    theta: np.ndarray
    case_tag: CaseTag
    kappa: np.ndarray | None = None
    tau: np.ndarray | None = None

    @property
    def step(self) -> float:
        return float(self.s[1] - self.s[0])

    @classmethod
    def from_apparatus(cls, apps) -> "DarbouxSeries":
        apps = list(apps)
        col = lambda name: np.array([getattr(a, name) for a in apps])  # noqa: E731
        return cls(
            col("s"), col("point"), col("T"), col("Y"), col("U"), col("kappa_g"), col("kappa_n"),
            col("tau_g"), col("theta"), apps[0].case_tag, col("kappa"), col("tau"),
        )

    def apparatus(self, i: int) -> DarbouxApparatus:
        return DarbouxApparatus(
            float(self.s[i]), self.points[i], self.T[i], self.Y[i], self.U[i],
            float(self.kappa_g[i]), float(self.kappa_n[i]), float(self.tau_g[i]),
            float(self.theta[i]), self.case_tag,
            float(self.kappa[i]) if self.kappa is not None else float("nan"),
            float(self.tau[i]) if self.tau is not None else float("nan"),
        )


def rotate_frenet(case: CaseTag, theta, N, B):
    """(Y, U) from (N, B) and the Darboux angle."""
    th = np.asarray(theta, dtype=float)[..., None]
    if case is CaseTag.CASE1:
        c, s = np.cos(th), np.sin(th)
        return c * N + s * B, -s * N + c * B
    ch, sh = np.cosh(th), np.sinh(th)
    if case is CaseTag.CASE2I:
        return sh * N + ch * B, ch * N + sh * B
    return ch * N + sh * B, sh * N + ch * B


def darboux_from_frenet(g: WalkerMetric, sol: FrenetSolution, theta) -> DarbouxSeries:
    """Darboux frames manufactured from a Frenet solution and an angle function.

    The scalars are measured from the sampled frames (covariant finite
    differences), not copied from the formulas, so they can serve as an
    independent check of the structure equations.
    """
    case = case_for_signs(sol.signs[0], sol.signs[1])
    th = np.asarray(theta(sol.s) if callable(theta) else theta, dtype=float)
    th = np.broadcast_to(th, sol.s.shape)
    Y, U = rotate_frenet(case, th, sol.N, sol.B)
    h = sol.step
    dT = covariant_derivative_samples(g, h, sol.points, sol.T, sol.T)
    dY = covariant_derivative_samples(g, h, sol.points, sol.T, Y)
    kg = g.inner(sol.points, dT, Y)
    kn = g.inner(sol.points, dT, U)
    tg = g.inner(sol.points, dY, U)
    return DarbouxSeries(sol.s, sol.points, sol.T, Y, U, kg, kn, tg, th.copy(), case, sol.kappa, sol.tau)


def darboux_series(g: WalkerMetric, S: SurfacePatch, c: Curve, s_grid) -> DarbouxSeries:
    apps = []
    guess = None
    for s in s_grid:
        app = darboux_apparatus(g, S, c, float(s), uv_guess=guess)
        apps.append(app)
    return DarbouxSeries.from_apparatus(apps)


def verify_structure_equations(g: WalkerMetric, series: DarbouxSeries, trim: int = 2) -> dict:
    """Max coordinate-norm residual of the case's three structure equations."""
    h = series.step
    P = series.points
    dT = covariant_derivative_samples(g, h, P, series.T, series.T)
    dY = covariant_derivative_samples(g, h, P, series.T, series.Y)
    dU = covariant_derivative_samples(g, h, P, series.T, series.U)
    kg, kn, tg = (a[:, None] for a in (series.kappa_g, series.kappa_n, series.tau_g))
    T, Y, U = series.T, series.Y, series.U
    if series.case_tag is CaseTag.CASE1:
        r = (dT - kg * Y - kn * U, dY - kg * T - tg * U, dU - kn * T + tg * Y)
    else:
        r = (dT + kg * Y - kn * U, dY + kg * T - tg * U, dU + kn * T - tg * Y)
    sl = slice(trim, len(series.s) - trim) if trim else slice(None)
    norms = [float(np.max(np.linalg.norm(x[sl], axis=1))) for x in r]
    return {"T": norms[0], "Y": norms[1], "U": norms[2], "max": max(norms)}


def frame_checks(g: WalkerMetric, series: DarbouxSeries) -> dict:
    """Signature and orthogonality bookkeeping of a Darboux series."""
    P = series.points
    return {
        "gUU": float(np.max(np.abs(g.inner(P, series.U, series.U) - 1.0))),
        "gYY": float(np.max(np.abs(g.inner(P, series.Y, series.Y) - series.case_tag.y_sign))),
        "orth": float(
            max(
                np.max(np.abs(g.inner(P, series.T, series.Y))),
                np.max(np.abs(g.inner(P, series.T, series.U))),
                np.max(np.abs(g.inner(P, series.Y, series.U))),
            )
        ),
        "Y_eq_UxT": float(np.max(np.abs(series.Y - g.cross(P, series.U, series.T)))),
    }
