"""Constant-breadth curve pairs.

A partner of ``alpha`` is written ``beta(s*) = alpha(s) + m1 T + m2 Y + m3 U``
in the Darboux frame, with ``h = ds*/ds + 1``.  Requiring opposite tangents
gives a linear ODE for (m1, m2, m3) forced by h; requiring a constant
frame-coefficient distance restricts h.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .curves import KAPPA_MIN, SampledCurve
from .darboux import CaseTag, DarbouxSeries
from .exceptions import (
    BranchAmbiguous,
    ConfigError,
    GridMismatch,
    StepTooLarge,
    UnsupportedCombination,
)
from .numerics import cumulative_integral, fd_derivative, rk4_solve

BRANCH_TIE = 1e-9
BRANCH_BAND = 1e-7


class Kind(enum.Enum):
    GEODESIC = "geodesic"
    ASYMPTOTIC = "asymptotic"
    PRINCIPAL = "principal"
    GENERAL = "general"

    @classmethod
    def parse(cls, text) -> "Kind":
        if isinstance(text, Kind):
            return text
        key = str(text).lower().replace("_", "").replace("-", "")
        if key == "principalline":
            key = "principal"
        try:
            return cls(key)
        except ValueError:
            raise ConfigError(f"unknown curve kind {text!r}") from None


SUPPORTED = {
    CaseTag.CASE1: {Kind.GEODESIC, Kind.ASYMPTOTIC, Kind.PRINCIPAL, Kind.GENERAL},
    CaseTag.CASE2I: {Kind.GEODESIC, Kind.PRINCIPAL, Kind.GENERAL},
    CaseTag.CASE2II: {Kind.ASYMPTOTIC, Kind.PRINCIPAL, Kind.GENERAL},
}

BREADTH_SIGNS = {
    CaseTag.CASE1: (-1, 1, 1),
    CaseTag.CASE2I: (1, 1, -1),
    CaseTag.CASE2II: (1, -1, 1),
}

# Darboux angle fixed by the kind (principal lines carry their own)
FIXED_THETA = {
    (CaseTag.CASE1, Kind.GEODESIC): math.pi / 2,
    (CaseTag.CASE1, Kind.ASYMPTOTIC): 0.0,
    (CaseTag.CASE2I, Kind.GEODESIC): 0.0,
    (CaseTag.CASE2II, Kind.ASYMPTOTIC): 0.0,
}


def check_supported(case_tag, kind) -> tuple[CaseTag, Kind]:
    case_tag, kind = CaseTag.parse(case_tag), Kind.parse(kind)
    if kind not in SUPPORTED[case_tag]:
        raise UnsupportedCombination(f"{case_tag.value} / {kind.value} is not a treated combination")
    return case_tag, kind


# ---------------------------------------------------------------------------
# forcing


@dataclass(frozen=True)
class HMode:
    """How h(s) = ds*/ds + 1 is fixed: ``zero``, ``minus_two_m1_prime`` or ``explicit``."""

    mode: str = "zero"
    func: Callable | None = None

    @classmethod
    def parse(cls, spec) -> "HMode":
        if isinstance(spec, HMode):
            return spec
        if callable(spec):
            return cls("explicit", spec)
        key = str(spec).lower()
        if key not in ("zero", "minus_two_m1_prime"):
            raise ConfigError(f"unknown h mode {spec!r}")
        return cls(key)

    @classmethod
    def admissible(cls, case_tag: CaseTag) -> "HMode":
        """The h that keeps the breadth constant when m1 does not vanish."""
        return cls("minus_two_m1_prime" if case_tag is CaseTag.CASE2I else "zero")


def _fn(spec):
    if spec is None or callable(spec):
        return spec
    value = float(spec)
    return lambda s: value + 0.0 * np.asarray(s, dtype=float)


@dataclass(frozen=True)
class CoefficientSystem:
    """Right-hand side of the coefficient ODE for one (case, kind).

    Geodesic and asymptotic kinds take ``kappa`` and ``tau``; principal lines
    take ``kappa`` and the Darboux angle ``theta``; the general kind takes
    ``kappa_g``, ``kappa_n`` and ``tau_g`` directly.
    """

    case_tag: CaseTag
    kind: Kind
    kappa: Callable | None = None
    tau: Callable | None = None
    theta: Callable | None = None
    kappa_g: Callable | None = None
    kappa_n: Callable | None = None
    tau_g: Callable | None = None

    def scalars(self, s):
        """(kappa_g, kappa_n, tau_g) at s."""
        case, kind = self.case_tag, self.kind
        if kind is Kind.GENERAL:
            return self.kappa_g(s), self.kappa_n(s), self.tau_g(s)
        k = self.kappa(s)
        if kind is Kind.PRINCIPAL:
            th = self.theta(s)
            if case is CaseTag.CASE1:
                return k * np.cos(th), -k * np.sin(th), 0.0 * k
            if case is CaseTag.CASE2I:
                return k * np.sinh(th), k * np.cosh(th), 0.0 * k
            return k * np.cosh(th), k * np.sinh(th), 0.0 * k
        t = self.tau(s)
        if case is CaseTag.CASE1:
            return (0.0 * k, -k, -t) if kind is Kind.GEODESIC else (k, 0.0 * k, -t)
        if case is CaseTag.CASE2I:
            return 0.0 * k, k, t
        return k, 0.0 * k, -t

    def drive(self, s, m):
        """The h-free part A of m1' = A - h, and the m2', m3' components."""
        kg, kn, tg = self.scalars(s)
        m1, m2, m3 = m
        if self.case_tag is CaseTag.CASE1:
            return -m2 * kg - m3 * kn, -m1 * kg + m3 * tg, -m2 * tg - m1 * kn
        return m2 * kg + m3 * kn, m1 * kg - m3 * tg, -m1 * kn - m2 * tg

    def derivative(self, s, m, h_mode: HMode):
        """(m', h) at s."""
        A, d2, d3 = self.drive(s, m)
        if h_mode.mode == "zero":
            h = 0.0
        elif h_mode.mode == "explicit":
            h = float(h_mode.func(s))
        else:
            # h = -2 m1' together with m1' = A - h
            h = 2.0 * A
        return np.array([A - h, d2, d3]), h

    def __call__(self, s, m, h=0.0):
        A, d2, d3 = self.drive(s, m)
        return np.array([A - h, d2, d3])


def coefficient_rhs(case_tag, kind, **profiles) -> CoefficientSystem:
    """Coefficient ODE for a supported (case, kind) combination."""
    case_tag, kind = check_supported(case_tag, kind)
    fns = {k: _fn(v) for k, v in profiles.items()}
    need = {
        Kind.GENERAL: ("kappa_g", "kappa_n", "tau_g"),
        Kind.PRINCIPAL: ("kappa", "theta"),
        Kind.GEODESIC: ("kappa", "tau"),
        Kind.ASYMPTOTIC: ("kappa", "tau"),
    }[kind]
    missing = [k for k in need if fns.get(k) is None]
    if missing:
        raise ConfigError(f"{kind.value} system needs {', '.join(missing)}")
    if kind is not Kind.GENERAL:
        probe = np.abs(np.asarray(fns["kappa"](np.linspace(0.0, 1.0, 11)), dtype=float))
        if np.all(probe <= KAPPA_MIN):
            raise UnsupportedCombination("kappa vanishes: straight lines are excluded")
    if kind is Kind.PRINCIPAL and fns.get("tau") is None:
        fns["tau"] = None
    return CoefficientSystem(case_tag, kind, **{k: fns.get(k) for k in
                                                ("kappa", "tau", "theta", "kappa_g", "kappa_n", "tau_g")})


# ---------------------------------------------------------------------------
# integration


@dataclass
class BreadthCoefficients:
    s: np.ndarray
    m1: np.ndarray
    m2: np.ndarray
    m3: np.ndarray
    h: np.ndarray
    signs: tuple[int, int, int]
    richardson: float = float("nan")

    @property
    def step(self) -> float:
        return float(self.s[1] - self.s[0])

    @property
    def breadth(self) -> np.ndarray:
        a, b, c = self.signs
        return a * self.m1**2 + b * self.m2**2 + c * self.m3**2

    def as_array(self) -> np.ndarray:
        return np.stack([self.m1, self.m2, self.m3], axis=1)

    def perturbed(self, d1=0.0, d2=0.0, d3=0.0) -> "BreadthCoefficients":
        return BreadthCoefficients(
            self.s, self.m1 + d1, self.m2 + d2, self.m3 + d3, self.h, self.signs, self.richardson
        )


def _solve(system: CoefficientSystem, h_mode: HMode, m0, s_max, step):
    def rhs(s, m):
        return system.derivative(s, m, h_mode)[0]

    s, M = rk4_solve(rhs, np.asarray(m0, dtype=float), s_max, step)
    h = np.array([system.derivative(si, mi, h_mode)[1] for si, mi in zip(s, M)])
    return s, M, h


def integrate_coefficients(
    system: CoefficientSystem,
    h_mode="zero",
    initial=(0.0, 0.0, 0.0),
    s_max: float = 1.0,
    step: float = 1e-3,
    richardson: bool = True,
    richardson_tol: float = 1e-4,
) -> BreadthCoefficients:
    """RK4 solution of the coefficient system on [0, s_max].

    With ``richardson`` the run is repeated at half the step; the largest
    change at shared grid points is attached and must stay below
    ``richardson_tol``.
    """
    h_mode = HMode.parse(h_mode)
    if step <= 0:
        raise ValueError("step must be positive")
    s, M, h = _solve(system, h_mode, initial, s_max, step)
    change = float("nan")
    if richardson:
        _, M2, _ = _solve(system, h_mode, initial, s_max, step / 2)
        change = float(np.max(np.abs(M2[::2] - M)))
        if change > richardson_tol:
            raise StepTooLarge(f"halving the step changed m by {change:.3e}")
    return BreadthCoefficients(
        s, M[:, 0], M[:, 1], M[:, 2], h, BREADTH_SIGNS[system.case_tag], change
    )


# ---------------------------------------------------------------------------
# closed forms


def discriminant(case_tag, kind, c0: float) -> float:
    """D in the reduced equation m1''' + D m1' = 0."""
    case_tag, kind = check_supported(case_tag, kind)
    if kind is Kind.GENERAL:
        raise UnsupportedCombination("no closed form for the general system")
    if case_tag is CaseTag.CASE1:
        return c0 * c0 - 1.0 if kind is not Kind.PRINCIPAL else 1.0 - c0 * c0
    return -(1.0 + c0 * c0)


def closed_form_branch(case_tag, kind, c0: float) -> str:
    """``trig``, ``poly``, ``hyperbolic`` or ``exp``."""
    D = discriminant(case_tag, kind, c0)
    if CaseTag.parse(case_tag) is not CaseTag.CASE1:
        return "exp"
    if abs(D) <= BRANCH_TIE:
        return "poly"
    if abs(D) < BRANCH_BAND:
        raise BranchAmbiguous(f"discriminant {D:.3e} is too close to 0 to pick a branch")
    return "trig" if D > 0 else "hyperbolic"


def closed_form_m1(case_tag, kind, c0, a1, a2, a3, z, order: int = 0):
    """The helix solution for m1 (or its ``order``-th derivative) at z.

    ``z`` is the integrated curvature for geodesics and asymptotic lines and
    the Darboux angle for principal lines.
    """
    branch = closed_form_branch(case_tag, kind, c0)
    z = np.asarray(z, dtype=float)
    D = discriminant(case_tag, kind, c0)
    w = math.sqrt(abs(D))
    const = a3 if order == 0 else 0.0
    if branch == "poly":
        return [a1 * z**2 / 2 + a2 * z + a3, a1 * z + a2, a1 + 0.0 * z, 0.0 * z][order] if order < 4 else 0.0 * z
    if branch == "trig":
        # d^n/dz^n of (a1 sin wz - a2 cos wz)/w
        ph = order * math.pi / 2
        return w ** (order - 1) * (a1 * np.sin(w * z + ph) - a2 * np.cos(w * z + ph)) + const
    if branch == "hyperbolic":
        even = order % 2 == 0
        s_, c_ = np.sinh(w * z), np.cosh(w * z)
        part = a1 * s_ + a2 * c_ if even else a1 * c_ + a2 * s_
        return w ** (order - 1) * part + const
    sign = (-1) ** order
    return w ** (order - 1) * (a1 * np.exp(w * z) - sign * a2 * np.exp(-w * z)) + const


def reduced_ode_residual(case_tag, kind, c0, a1, a2, a3, z):
    D = discriminant(case_tag, kind, c0)
    return closed_form_m1(case_tag, kind, c0, a1, a2, a3, z, 3) + D * closed_form_m1(
        case_tag, kind, c0, a1, a2, a3, z, 1
    )


def closed_form_coefficients(case_tag, kind, c0, a1, a2, a3, z):
    """(m1, m2, m3) of the helix solution at z (companions from the system)."""
    case_tag, kind = check_supported(case_tag, kind)
    d = [closed_form_m1(case_tag, kind, c0, a1, a2, a3, z, k) for k in range(3)]
    m1, dm1, ddm1 = d
    if kind is Kind.PRINCIPAL:
        p = dm1 / c0
        q = (ddm1 - c0 * c0 * m1) / c0
        th = np.asarray(z, dtype=float)
        if case_tag is CaseTag.CASE1:
            S, C = np.sin(th), np.cos(th)
            return m1, -C * p + S * q, S * p + C * q
        S, C = np.sinh(th), np.cosh(th)
        if case_tag is CaseTag.CASE2I:
            # with h = -2 m1' the first equation flips sign
            return m1, S * p - C * q, S * q - C * p
        return m1, C * p - S * q, C * q - S * p
    q = (ddm1 - m1) / c0
    if case_tag is CaseTag.CASE1:
        return (m1, q, dm1) if kind is Kind.GEODESIC else (m1, -dm1, q)
    if case_tag is CaseTag.CASE2I:
        return m1, q, -dm1
    return m1, dm1, q


def geodesic_m23_closed_form(b1, b2, Theta, kind="geodesic"):
    """(m2, m3) exactly as printed for m1 = 0 on a timelike geodesic.

    ``kind="asymptotic"`` flips the sign of m2.  These formulas are kept
    verbatim; :func:`m1_zero_coefficients` gives the pair that actually
    solves the system.
    """
    Theta = np.asarray(Theta, dtype=float)
    P = b1 * np.cos(Theta) + b2 * np.sin(Theta)
    Q = -b1 * np.sin(Theta) + b2 * np.cos(Theta)
    if Kind.parse(kind) is Kind.ASYMPTOTIC:
        return -P, Q
    return P, Q


def m1_zero_coefficients(case_tag, kind, b1, b2, w, kappa):
    """(m2, m3, h) solving the system with m1 = 0 on geodesics and asymptotic lines.

    ``w`` is the integrated torsion and ``kappa`` the curvature at the same s.
    """
    case_tag, kind = check_supported(case_tag, kind)
    w = np.asarray(w, dtype=float)
    P = b1 * np.cos(w) + b2 * np.sin(w)
    Q = -b1 * np.sin(w) + b2 * np.cos(w)
    if case_tag is CaseTag.CASE1 and kind is Kind.GEODESIC:
        return Q, P, kappa * P
    if case_tag is CaseTag.CASE1 and kind is Kind.ASYMPTOTIC:
        return -P, Q, kappa * P
    if case_tag is CaseTag.CASE2II and kind is Kind.ASYMPTOTIC:
        m2 = b1 * np.cosh(w) + b2 * np.sinh(w)
        m3 = b1 * np.sinh(w) + b2 * np.cosh(w)
        return m2, m3, kappa * m2
    if case_tag is CaseTag.CASE2I and kind is Kind.GEODESIC:
        # h = -2 m1' = 0 forces m3 = 0 and m2 constant (only with tau = 0)
        return b1 + 0.0 * w, 0.0 * w, 0.0 * w
    raise UnsupportedCombination(f"no m1 = 0 closed form for {case_tag.value} / {kind.value}")


# ---------------------------------------------------------------------------
# pairs


def helix_check(kappa, tau, tol: float = 1e-5):
    """(is_helix, max |tau/kappa - median(tau/kappa)|)."""
    kappa = np.asarray(kappa, dtype=float)
    tau = np.asarray(tau, dtype=float)
    if np.any(np.abs(kappa) <= KAPPA_MIN):
        raise ValueError("helix check needs kappa > kappa_min")
    ratio = tau / kappa
    med = float(np.median(ratio))
    dev = float(np.max(np.abs(ratio - med)))
    return dev <= tol * max(1.0, abs(med)), dev


@dataclass
class CurvePair:
    alpha: SampledCurve
    beta: SampledCurve
    s: np.ndarray
    s_star: np.ndarray
    frames: DarbouxSeries
    coeffs: BreadthCoefficients
    report: dict = field(default_factory=dict)

    @property
    def beta_points(self) -> np.ndarray:
        return self.beta.points


def build_partner(g, frames: DarbouxSeries, coeffs: BreadthCoefficients, c: float = 0.0) -> CurvePair:
    """Assemble beta = alpha + m1 T + m2 Y + m3 U on the shared grid.

    The sum is taken in chart coordinates, which is the exact affine sum only
    when the Christoffel symbols vanish.
    """
    if len(frames.s) != len(coeffs.s) or np.max(np.abs(frames.s - coeffs.s)) > 1e-12 * max(
        1.0, float(np.max(np.abs(frames.s)))
    ):
        raise GridMismatch("frames and coefficients are not sampled on the same grid")
    beta = (
        frames.points
        + coeffs.m1[:, None] * frames.T
        + coeffs.m2[:, None] * frames.Y
        + coeffs.m3[:, None] * frames.U
    )
    s_star = c - frames.s + cumulative_integral(coeffs.h, frames.step)
    return CurvePair(
        SampledCurve(frames.s, frames.points), SampledCurve(frames.s, beta), frames.s, s_star, frames, coeffs
    )


def verify_pair(g, pair: CurvePair, trim: int = 3, h_zero_tol: float = 1e-12) -> dict:
    """Breadth, tangent opposition, s* linearity and helix metrics of a pair."""
    co = pair.coeffs
    b = co.breadth
    step = pair.frames.step
    dbeta = fd_derivative(pair.beta.points, step, order=6)
    ds_star = co.h - 1.0
    sl = slice(trim, len(pair.s) - trim)
    # T* = -T written as dbeta/ds = -(ds*/ds) T, so a near-stationary s*
    # (a cusp of beta) does not amplify the difference error
    opposition = float(np.max(np.linalg.norm((dbeta + ds_star[:, None] * pair.frames.T)[sl], axis=1)))
    h_zero = bool(np.max(np.abs(co.h)) <= h_zero_tol)
    lin = float(np.max(np.abs(pair.s_star - (pair.s_star[0] - pair.s))))
    report = {
        "breadth": float(b[0]),
        "breadth_variation": float(np.max(np.abs(b - b[0]))),
        "tangent_opposition": opposition,
        "h_identically_zero": h_zero,
        "s_star_linearity": lin,
        # constant nonzero coefficients with h = 0: beta is alpha shifted by a fixed frame combination
        "translation": bool(
            h_zero
            and np.max(np.ptp(co.as_array(), axis=0)) <= h_zero_tol
            and np.max(np.abs(co.as_array())) > 0.0
        ),
    }
    kappa = pair.frames.kappa
    tau = pair.frames.tau
    if kappa is not None and tau is not None and np.all(np.abs(kappa) > KAPPA_MIN):
        is_helix, dev = helix_check(kappa, tau)
        report["helix"] = is_helix
        report["helix_deviation"] = dev
    pair.report = report
    return report


# ---------------------------------------------------------------------------
# configuration


@dataclass
class PairConfig:
    case_tag: CaseTag
    kind: Kind
    subcase: str = "m1_nonzero"
    constants: dict = field(default_factory=dict)
    h_mode: HMode = field(default_factory=HMode)

    def __post_init__(self):
        self.case_tag, self.kind = check_supported(self.case_tag, self.kind)
        if self.subcase not in ("m1_nonzero", "m1_zero"):
            raise ConfigError(f"unknown subcase {self.subcase!r}")
        for k, v in self.constants.items():
            if not math.isfinite(float(v)):
                raise ConfigError(f"constant {k} is not finite")
        self.h_mode = HMode.parse(self.h_mode)

    @classmethod
    def from_json(cls, data: dict) -> "PairConfig":
        return cls(
            CaseTag.parse(data["case"]),
            Kind.parse(data["kind"]),
            data.get("subcase", "m1_nonzero"),
            {k: float(v) for k, v in data.get("constants", {}).items()},
            data.get("h_mode", "zero"),
        )

    def constant(self, name: str, default: float = 0.0) -> float:
        return float(self.constants.get(name, default))
