"""Randomised checks of the constant-breadth theorems.

Each theorem is a (case, kind, subcase) statement "hypothesis => conclusion".
A sample draws curvature data and constants, builds the coefficient solution
the hypothesis asks for, checks numerically that the hypothesis really holds
(otherwise the sample is *unsatisfiable* and excluded), and then measures the
conclusion.  Every third sample perturbs the torsion away from a helix so
that conclusions about helices are actually exercised.
"""

from __future__ import annotations

import math
import os
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .breadth import (
    HMode,
    Kind,
    build_partner,
    closed_form_branch,
    closed_form_coefficients,
    coefficient_rhs,
    geodesic_m23_closed_form,
    helix_check,
    integrate_coefficients,
    m1_zero_coefficients,
    verify_pair,
)
from .curves import initial_frame, integrate_curve_from_frenet_data
from .darboux import CaseTag, darboux_from_frenet
from .exceptions import BranchAmbiguous, HypothesisUnsatisfiable, WalkerError
from .metric import WalkerMetric
from .numerics import Profile

C1, C2I, C2II = CaseTag.CASE1, CaseTag.CASE2I, CaseTag.CASE2II
GEO, ASY, PRI = Kind.GEODESIC, Kind.ASYMPTOTIC, Kind.PRINCIPAL


@dataclass(frozen=True)
class Theorem:
    key: str
    case_tag: CaseTag
    kind: Kind
    form: str  # m1_constant, helix_closed_form or m1_zero
    statement: str


THEOREMS = {
    t.key: t
    for t in [
        Theorem("case1-geodesic-m1-constant", C1, GEO, "m1_constant",
                "m1 nonzero constant => helix, m3 = 0, m2 constant"),
        Theorem("case1-geodesic-helix", C1, GEO, "helix_closed_form",
                "helix => m1 is the trig/poly/hyperbolic closed form in z"),
        Theorem("case1-geodesic-m1-zero", C1, GEO, "m1_zero",
                "m1 = 0 => (m2, m3) rotate with the integrated torsion"),
        Theorem("case1-asymptotic-m1-constant", C1, ASY, "m1_constant",
                "m1 nonzero constant => helix, m2 = 0, m3 constant"),
        Theorem("case1-asymptotic-helix", C1, ASY, "helix_closed_form",
                "helix => m1 is the trig/poly/hyperbolic closed form in z"),
        Theorem("case1-asymptotic-m1-zero", C1, ASY, "m1_zero",
                "m1 = 0 => (m2, m3) rotate with the integrated torsion"),
        Theorem("case1-principal-helix", C1, PRI, "helix_closed_form",
                "helix => m1 is the trig/poly/hyperbolic closed form in theta"),
        Theorem("case1-principal-m1-zero", C1, PRI, "m1_zero",
                "m1 = 0 => helix, m2 and m3 constant"),
        Theorem("case2i-geodesic-m1-constant", C2I, GEO, "m1_constant",
                "m1 nonzero constant => helix, m3 = 0, m2 constant"),
        Theorem("case2i-geodesic-helix", C2I, GEO, "helix_closed_form",
                "helix => m1 is the exponential closed form in z"),
        Theorem("case2i-geodesic-m1-zero", C2I, GEO, "m1_zero",
                "m1 = 0 => m3 = 0 and m2 constant"),
        Theorem("case2i-principal-helix", C2I, PRI, "helix_closed_form",
                "helix => m1 is the exponential closed form in theta"),
        Theorem("case2i-principal-m1-zero", C2I, PRI, "m1_zero",
                "m1 = 0 => planar, m2 and m3 constant"),
        Theorem("case2ii-asymptotic-m1-constant", C2II, ASY, "m1_constant",
                "m1 nonzero constant => helix, m2 = 0, m3 constant"),
        Theorem("case2ii-asymptotic-helix", C2II, ASY, "helix_closed_form",
                "helix => m1 is the exponential closed form in z"),
        Theorem("case2ii-asymptotic-m1-zero", C2II, ASY, "m1_zero",
                "m1 = 0 => (m2, m3) move hyperbolically with the integrated torsion"),
        Theorem("case2ii-principal-helix", C2II, PRI, "helix_closed_form",
                "helix => m1 is the exponential closed form in theta"),
        Theorem("case2ii-principal-m1-zero", C2II, PRI, "m1_zero",
                "m1 = 0 => helix or planar, m2 and m3 constant"),
    ]
}


@dataclass
class SampleResult:
    key: str
    index: int
    outcome: str  # pass, fail, unsatisfiable, error
    metrics: dict = field(default_factory=dict)
    message: str = ""


@dataclass
class SuiteSettings:
    s_max: float = 1.0
    step: float = 0.01
    f: str = "0"
    hypothesis_tol: float = 1e-7
    conclusion_tol: float = 1e-6
    breadth_tol: float = 1e-6
    opposition_tol: float = 1e-5
    helix_tol: float = 1e-5


def _rng(seed: int, key: str, index: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), zlib.crc32(key.encode()), int(index)])


def _signed(rng, lo, hi):
    return float(rng.uniform(lo, hi)) * (1.0 if rng.random() < 0.5 else -1.0)


def _profile(rng, base=(0.8, 1.5), amp=(0.0, 0.3)) -> Profile:
    return Profile(rng.uniform(*base), [(rng.uniform(*amp), rng.uniform(0.5, 2.0), rng.uniform(0, 2 * math.pi))])


def _perturbation(rng) -> Profile:
    return Profile(0.0, [(rng.uniform(0.05, 0.2), rng.uniform(1.0, 3.0), rng.uniform(0, 2 * math.pi))])


@dataclass
class _Instance:
    kappa: Profile
    tau: Profile
    theta: object  # callable or float
    h_mode: HMode
    m0: tuple
    expect: dict = field(default_factory=dict)


def _theta_of(case, kind, tau, theta0=0.0):
    """Darboux angle along the curve: fixed by the kind, or integrated for principal lines."""
    if kind is GEO:
        return math.pi / 2 if case is C1 else 0.0
    if kind is ASY:
        return 0.0
    sign = -1.0 if case is C2I else 1.0
    return lambda s: theta0 + sign * tau.integral(s)


def _draw(th: Theorem, rng, index: int) -> _Instance:
    perturb = index % 3 == 2
    case, kind = th.case_tag, th.kind
    kappa = _profile(rng)
    if th.form == "m1_constant":
        a, b = _signed(rng, 0.3, 1.5), _signed(rng, 0.3, 1.5)
        tau = kappa.scaled(-a / b)
        if perturb:
            tau = tau.plus(_perturbation(rng))
        m0 = (a, b, 0.0) if kind is GEO else (a, 0.0, b)
        return _Instance(kappa, tau, _theta_of(case, kind, tau), HMode.admissible(case), m0, {"a": a, "b": b})
    if th.form == "helix_closed_form":
        c0 = float(rng.uniform(0.2, 2.0))
        consts = tuple(float(x) for x in rng.uniform(-1.0, 1.0, 3))
        if kind is PRI:
            tau = _profile(rng, base=(0.6, 1.2), amp=(0.0, 0.2))
            kappa = tau.scaled(c0)
            if perturb:
                kappa = kappa.plus(_perturbation(rng))
            theta = _theta_of(case, kind, tau, float(rng.uniform(-0.5, 0.5)))
            c = c0 if case is not C2I else -c0  # kappa / theta'
            z0 = theta(0.0)
        else:
            tau = kappa.scaled(c0)
            if perturb:
                tau = tau.plus(_perturbation(rng))
            theta = _theta_of(case, kind, tau)
            c, z0 = c0, 0.0
        m0 = tuple(float(x) for x in closed_form_coefficients(case, kind, c, *consts, z0))
        return _Instance(kappa, tau, theta, HMode.admissible(case), m0, {"c": c, "consts": consts})
    # m1 = 0
    b1, b2 = _signed(rng, 0.3, 1.5), _signed(rng, 0.3, 1.5)
    tau = kappa.scaled(float(rng.uniform(0.2, 1.5)))
    if perturb:
        tau = tau.plus(_perturbation(rng))
    if kind is PRI:
        if case is C2I:
            # m1 = 0 with h = -2 m1' pins tanh(theta) = -m3/m2, hence theta constant
            c2 = _signed(rng, 1.0, 1.5)
            c3 = -c2 * float(rng.uniform(-0.8, 0.8))
            theta0 = math.atanh(-c3 / c2)
            tau = Profile(0.0) if not perturb else _perturbation(rng)
            theta = _theta_of(case, kind, tau, theta0)
            return _Instance(kappa, tau, theta, HMode.admissible(case), (0.0, c2, c3), {"c2": c2, "c3": c3})
        theta = _theta_of(case, kind, tau, float(rng.uniform(-0.5, 0.5)))
        if case is C1:
            h = lambda s: kappa(s) * (b2 * np.sin(theta(s)) - b1 * np.cos(theta(s)))  # noqa: E731
        else:
            h = lambda s: kappa(s) * (b1 * np.cosh(theta(s)) + b2 * np.sinh(theta(s)))  # noqa: E731
        return _Instance(kappa, tau, theta, HMode("explicit", h), (0.0, b1, b2), {"c2": b1, "c3": b2})
    if case is C2I:
        tau = Profile(0.0) if not perturb else _perturbation(rng)
        return _Instance(kappa, tau, _theta_of(case, kind, tau), HMode.admissible(case), (0.0, b1, 0.0),
                         {"b1": b1, "b2": b2})
    m2, m3, _ = m1_zero_coefficients(case, kind, b1, b2, 0.0, 1.0)

    def h(s, kappa=kappa, tau=tau):
        return m1_zero_coefficients(case, kind, b1, b2, tau.integral(s), kappa(s))[2]

    return _Instance(kappa, tau, _theta_of(case, kind, tau), HMode("explicit", h), (0.0, float(m2), float(m3)),
                     {"b1": b1, "b2": b2})


def _system(th: Theorem, inst: _Instance):
    if th.kind is PRI:
        return coefficient_rhs(th.case_tag, th.kind, kappa=inst.kappa, theta=inst.theta)
    return coefficient_rhs(th.case_tag, th.kind, kappa=inst.kappa, tau=inst.tau)


def _hypothesis(th: Theorem, inst: _Instance, co, s, cfg: SuiteSettings):
    """Raise HypothesisUnsatisfiable unless the theorem's hypothesis holds numerically."""
    if th.form == "m1_constant":
        drift = float(np.max(np.abs(co.m1 - co.m1[0])))
        if drift > cfg.hypothesis_tol * max(1.0, abs(co.m1[0])):
            raise HypothesisUnsatisfiable(f"m1 is not constant (drift {drift:.2e})")
    elif th.form == "m1_zero":
        drift = float(np.max(np.abs(co.m1)))
        if drift > cfg.hypothesis_tol:
            raise HypothesisUnsatisfiable(f"m1 does not stay 0 (max {drift:.2e})")
    else:
        ok, dev = helix_check(inst.kappa(s), inst.tau(s), cfg.helix_tol)
        if not ok:
            raise HypothesisUnsatisfiable(f"curve is not a general helix (deviation {dev:.2e})")
        if np.max(np.abs(co.m1)) <= cfg.hypothesis_tol:
            raise HypothesisUnsatisfiable("m1 vanishes identically")


def _conclusion(th: Theorem, inst: _Instance, co, s, cfg: SuiteSettings) -> dict:
    case, kind = th.case_tag, th.kind
    kap, tau = inst.kappa(s), inst.tau(s)
    out = {}
    if th.form == "m1_constant":
        is_helix, dev = helix_check(kap, tau, cfg.helix_tol)
        zero = co.m3 if kind is GEO else co.m2
        const = co.m2 if kind is GEO else co.m3
        out["helix"] = (is_helix, dev)
        out["zero_component"] = (float(np.max(np.abs(zero))) <= cfg.conclusion_tol, float(np.max(np.abs(zero))))
        out["constant_component"] = (float(np.ptp(const)) <= cfg.conclusion_tol, float(np.ptp(const)))
    elif th.form == "helix_closed_form":
        z = inst.theta(s) if kind is PRI else inst.kappa.integral(s)
        ref = closed_form_coefficients(case, kind, inst.expect["c"], *inst.expect["consts"], z)
        err = float(np.max(np.abs(co.m1 - ref[0])) / max(1.0, float(np.max(np.abs(ref[0])))))
        out["closed_form_m1"] = (err <= cfg.conclusion_tol, err)
        out["branch"] = (True, closed_form_branch(case, kind, inst.expect["c"]))
    else:
        if kind is PRI:
            spread = max(float(np.ptp(co.m2)), float(np.ptp(co.m3)))
            out["m2_m3_constant"] = (spread <= cfg.conclusion_tol, spread)
            is_helix, dev = helix_check(kap, tau, cfg.helix_tol)
            planar = float(np.max(np.abs(tau)))
            if case is C1:
                out["helix"] = (is_helix, dev)
            elif case is C2I:
                out["planar"] = (planar <= cfg.conclusion_tol, planar)
            else:
                out["helix_or_planar"] = (is_helix or planar <= cfg.conclusion_tol, min(dev, planar))
        elif case is C2I:
            out["m3_zero"] = (float(np.max(np.abs(co.m3))) <= cfg.conclusion_tol, float(np.max(np.abs(co.m3))))
            out["m2_constant"] = (float(np.ptp(co.m2)) <= cfg.conclusion_tol, float(np.ptp(co.m2)))
        else:
            w = inst.tau.integral(s)
            m2, m3, _ = m1_zero_coefficients(case, kind, inst.expect["b1"], inst.expect["b2"], w, kap)
            err = max(float(np.max(np.abs(co.m2 - m2))), float(np.max(np.abs(co.m3 - m3))))
            out["m2_m3_closed_form"] = (err <= cfg.conclusion_tol, err)
            if case is C1:
                P, Q = geodesic_m23_closed_form(inst.expect["b1"], inst.expect["b2"], w, kind)
                printed = max(float(np.max(np.abs(co.m2 - P))), float(np.max(np.abs(co.m3 - Q))))
                out["printed_form_deviation"] = (True, printed)
    return out


def run_sample(key: str, index: int, seed: int = 0, cfg: SuiteSettings | None = None) -> SampleResult:
    cfg = cfg or SuiteSettings()
    th = THEOREMS[key]
    rng = _rng(seed, key, index)
    try:
        inst = _draw(th, rng, index)
        system = _system(th, inst)
        co = integrate_coefficients(system, inst.h_mode, inst.m0, cfg.s_max, cfg.step)
        s = co.s
        _hypothesis(th, inst, co, s, cfg)
        checks = _conclusion(th, inst, co, s, cfg)
        # the pair itself, assembled in the chart
        g = WalkerMetric(cfg.f)
        signs = th.case_tag.signs
        frame0 = initial_frame(g, [0.0, 0.0, 0.0], signs, *rng.uniform(-0.3, 0.3, 3))
        sol = integrate_curve_from_frenet_data(g, inst.kappa, inst.tau, signs, frame0, cfg.s_max, cfg.step)
        frames = darboux_from_frenet(g, sol, inst.theta)
        report = verify_pair(g, build_partner(g, frames, co))
        checks["breadth"] = (report["breadth_variation"] <= cfg.breadth_tol, report["breadth_variation"])
        checks["tangent_opposition"] = (
            report["tangent_opposition"] <= cfg.opposition_tol, report["tangent_opposition"]
        )
    except HypothesisUnsatisfiable as exc:
        return SampleResult(key, index, "unsatisfiable", message=str(exc))
    except (BranchAmbiguous, WalkerError) as exc:
        return SampleResult(key, index, "error", message=f"{type(exc).__name__}: {exc}")
    ok = all(passed for passed, _ in checks.values())
    metrics = {name: value for name, (_, value) in checks.items()}
    failed = [name for name, (passed, _) in checks.items() if not passed]
    return SampleResult(key, index, "pass" if ok else "fail", metrics, ", ".join(failed))


@dataclass
class TheoremRow:
    key: str
    statement: str
    samples: int
    passed: int
    failed: int
    unsatisfiable: int
    errors: int
    results: list = field(default_factory=list, repr=False)

    @property
    def considered(self) -> int:
        return self.samples - self.unsatisfiable

    @property
    def unsatisfiable_fraction(self) -> float:
        return self.unsatisfiable / self.samples if self.samples else 0.0

    @property
    def status(self) -> str:
        if self.unsatisfiable_fraction >= 0.5 or self.considered == 0:
            return "unrealisable"
        return "pass" if self.failed == 0 and self.errors == 0 else "fail"


def _threads(limit: int | None) -> int:
    if limit is None:
        env = os.environ.get("WALKER_THREADS")
        limit = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(limit))


def theorem_suite(keys=None, samples: int = 100, seed: int = 0, cfg: SuiteSettings | None = None,
                  threads: int | None = None) -> list[TheoremRow]:
    """Run ``samples`` draws per theorem; rows come back in ``keys`` order."""
    keys = list(THEOREMS) if keys is None else list(keys)
    for k in keys:
        if k not in THEOREMS:
            raise KeyError(f"unknown theorem {k!r}")
    jobs = [(k, i) for k in keys for i in range(samples)]
    n = _threads(threads)
    if n == 1:
        results = [run_sample(k, i, seed, cfg) for k, i in jobs]
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(lambda job: run_sample(job[0], job[1], seed, cfg), jobs))
    rows = []
    for k in keys:
        rs = [r for r in results if r.key == k]
        count = lambda what: sum(r.outcome == what for r in rs)  # noqa: E731
        rows.append(TheoremRow(k, THEOREMS[k].statement, len(rs), count("pass"), count("fail"),
                               count("unsatisfiable"), count("error"), rs))
    return rows
