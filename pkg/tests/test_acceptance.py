"""Acceptance criteria, one test and one printed PASS/FAIL line each.

Tolerances and sample counts are fixed here and must not be loosened to make
a line pass.  Run alone with ``pytest tests/test_acceptance.py -v``; the lines
are repeated in the terminal summary.
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest

from walkerbreadth import cli
from walkerbreadth.breadth import (
    HMode,
    closed_form_branch,
    closed_form_coefficients,
    coefficient_rhs,
    integrate_coefficients,
)
from walkerbreadth.curves import frenet_residuals, initial_frame, integrate_curve_from_frenet_data
from walkerbreadth.darboux import CaseTag, darboux_from_frenet
from walkerbreadth.io import load_config
from walkerbreadth.metric import WalkerMetric
from walkerbreadth.numerics import Profile
from walkerbreadth.theorems import theorem_suite

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
FIELDS = ["0", "y*z", "y^2", "sin(y)*cosh(z)", "exp(0.3*y) + z^3"]
RESULTS: dict[int, str] = {}


def report(n: int, ok: bool, text: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {text}"
    RESULTS[n] = line
    print(line)
    assert ok, line


def _random_profile(rng, lo, hi):
    return Profile(rng.uniform(lo, hi), [(rng.uniform(-0.3, 0.3), rng.uniform(0.5, 3.0), rng.uniform(-3, 3))])


def test_criterion_1_cross_product_identity():
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst = 0.0
    for f in FIELDS:
        g = WalkerMetric(f)
        p, u, v, w = (rng.uniform(-2, 2, (200, 3)) for _ in range(4))
        lhs = g.inner(p, g.cross(p, u, v), w)
        rhs = np.linalg.det(np.stack([u, v, w], axis=1))
        scale = 1.0 + np.prod([np.abs(a).max(axis=1) for a in (u, v, w)], axis=0) * (1.0 + np.abs(g.fval(p)))
        worst = max(worst, float(np.max(np.abs(lhs - rhs) / scale)))
    elapsed = time.perf_counter() - t0
    report(1, worst <= 1e-12 and elapsed < 1.0,
           f"g(u x v, w) = det(u, v, w) on 1000 samples: max scaled error {worst:.2e} (tol 1e-12), {elapsed:.2f} s (limit 1 s)")


def _christoffel_oracle(g, p, h=1e-5):
    dg = np.empty((3, 3, 3))
    for l in range(3):
        e = np.zeros(3)
        e[l] = h
        dg[l] = (g.matrix(p + e) - g.matrix(p - e)) / (2 * h)
    ginv = g.inverse(p)
    # Gamma^i_jk = 1/2 g^il (d_j g_lk + d_k g_lj - d_l g_jk)
    return 0.5 * (
        np.einsum("il,jlk->ijk", ginv, dg) + np.einsum("il,klj->ijk", ginv, dg) - np.einsum("il,ljk->ijk", ginv, dg)
    )


def test_criterion_2_christoffel_oracle():
    rng = np.random.default_rng(102)
    t0 = time.perf_counter()
    worst = 0.0
    for f in FIELDS:
        g = WalkerMetric(f)
        for p in rng.uniform(-1, 1, (100, 3)):
            worst = max(worst, float(np.max(np.abs(g.christoffel_array(p) - _christoffel_oracle(g, p)))))
    elapsed = time.perf_counter() - t0
    report(2, worst <= 1e-6 and elapsed < 1.0,
           f"closed-form Christoffel symbols vs finite-difference Levi-Civita oracle, 5 fields x 100 points: max error {worst:.2e} (tol 1e-6), {elapsed:.2f} s (limit 1 s)")


def test_criterion_3_frenet_residuals():
    t0 = time.perf_counter()
    worst = 0.0
    g = WalkerMetric("0.3*y^2 + 0.1*y*z")
    kappa = Profile(1.2, [(0.3, 2.0, 0.1)])
    tau = Profile(0.4, [(0.2, 1.0, 0.5)])
    for case in CaseTag:
        frame = initial_frame(g, [0.0, 0.1, 0.2], case.signs, 0.2, 0.1, -0.1)
        sol = integrate_curve_from_frenet_data(g, kappa, tau, case.signs, frame, 1.0, 1e-4)
        worst = max(worst, frenet_residuals(g, sol)["max"])
    elapsed = time.perf_counter() - t0
    report(3, worst <= 1e-6 and elapsed < 10.0,
           f"Frenet equations on s in [0, 1], step 1e-4, three sign patterns: max residual {worst:.2e} (tol 1e-6), {elapsed:.2f} s (limit 10 s)")


def test_criterion_4_darboux_identities():
    rng = np.random.default_rng(104)
    t0 = time.perf_counter()
    g = WalkerMetric("0.2*y*z")
    tg_err = {CaseTag.CASE1: 0.0, CaseTag.CASE2I: 0.0}
    kappa_err = 0.0
    for case in tg_err:
        for _ in range(5):
            kappa = _random_profile(rng, 0.8, 1.5)
            tau = _random_profile(rng, -1.0, 1.0)
            theta = _random_profile(rng, -0.7, 0.7)
            frame = initial_frame(g, [0.0, 0.1, 0.0], case.signs, *rng.uniform(-0.3, 0.3, 3))
            sol = integrate_curve_from_frenet_data(g, kappa, tau, case.signs, frame, 1.0, 1e-3)
            series = darboux_from_frenet(g, sol, theta)
            s = sol.s
            sl = slice(3, -3)
            sign = -1.0 if case is CaseTag.CASE1 else 1.0
            expected = theta.derivative(s) + sign * tau(s)
            tg_err[case] = max(tg_err[case], float(np.max(np.abs(series.tau_g - expected)[sl])))
            if case is CaseTag.CASE1:
                k2 = kappa(s) ** 2
                rel = np.abs(series.kappa_g**2 + series.kappa_n**2 - k2) / k2
                kappa_err = max(kappa_err, float(np.max(rel[sl])))
    elapsed = time.perf_counter() - t0
    ok = tg_err[CaseTag.CASE1] <= 1e-5 and tg_err[CaseTag.CASE2I] <= 1e-5 and kappa_err <= 1e-6 and elapsed < 10.0
    report(4, ok,
           f"timelike |tau_g - (theta' - tau)| {tg_err[CaseTag.CASE1]:.2e}, spacelike (eps2 = +1) |tau_g - (theta' + tau)| "
           f"{tg_err[CaseTag.CASE2I]:.2e} (tol 1e-5); |kg^2 + kn^2 - k^2| / k^2 {kappa_err:.2e} (tol 1e-6); {elapsed:.2f} s (limit 10 s)")


def test_criterion_5_breadth_conservation():
    rng = np.random.default_rng(105)
    t0 = time.perf_counter()
    worst = {}
    for case in CaseTag:
        worst[case] = 0.0
        for _ in range(50):
            system = coefficient_rhs(
                case, "general",
                kappa_g=_random_profile(rng, -1.5, 1.5),
                kappa_n=_random_profile(rng, -1.5, 1.5),
                tau_g=_random_profile(rng, -1.5, 1.5),
            )
            co = integrate_coefficients(system, HMode.admissible(case), rng.uniform(-1, 1, 3), 1.0, 0.01)
            worst[case] = max(worst[case], float(np.max(np.abs(co.breadth - co.breadth[0]))))
    elapsed = time.perf_counter() - t0
    ok = max(worst.values()) <= 1e-8 and elapsed < 5.0
    detail = ", ".join(f"{c.value} {v:.2e}" for c, v in worst.items())
    report(5, ok, f"breadth drift over unit s, 50 integrations per sign pattern: {detail} (tol 1e-8), {elapsed:.2f} s (limit 5 s)")


CLOSED_FORM_CASES = [
    ("case1", "geodesic", (2.0, 1.0, 0.5)),
    ("case1", "asymptotic", (2.0, 1.0, 0.5)),
    ("case1", "principal", (0.5, 1.0, 2.0)),
    ("case2i", "geodesic", (0.7,)),
    ("case2i", "principal", (0.7,)),
    ("case2ii", "asymptotic", (0.7,)),
]


def test_criterion_6_closed_forms_match_rk4():
    t0 = time.perf_counter()
    worst = 0.0
    branches = set()
    consts = (0.4, -0.3, 0.2)
    kappa = 1.3
    for case, kind, cs in CLOSED_FORM_CASES:
        for c0 in cs:
            branches.add(f"{case}/{kind}/{closed_form_branch(case, kind, c0)}")
            if kind == "principal":
                # theta(s) = rate * s with c = kappa / theta'
                rate = kappa / c0
                system = coefficient_rhs(case, kind, kappa=kappa, theta=lambda s, r=rate: r * np.asarray(s))
            else:
                rate = kappa
                system = coefficient_rhs(case, kind, kappa=kappa, tau=c0 * kappa)
            s_max = 2.0 / rate
            m0 = closed_form_coefficients(case, kind, c0, *consts, 0.0)
            co = integrate_coefficients(system, HMode.admissible(CaseTag.parse(case)), m0, s_max, s_max / 1000)
            ref = closed_form_coefficients(case, kind, c0, *consts, rate * co.s)[0]
            worst = max(worst, float(np.max(np.abs(co.m1 - ref)) / max(1.0, float(np.max(np.abs(ref))))))
    elapsed = time.perf_counter() - t0
    report(6, worst <= 1e-6 and elapsed < 5.0,
           f"closed-form m1 vs RK4 over a window of length 2, {len(branches)} (case, kind, branch) combinations: max error {worst:.2e} (tol 1e-6), {elapsed:.2f} s (limit 5 s)")


SUITE_KEYS = [
    "case1-geodesic-m1-constant",
    "case1-geodesic-m1-zero",
    "case1-asymptotic-m1-zero",
    "case1-principal-m1-zero",
    "case2i-geodesic-m1-constant",
    "case2i-geodesic-m1-zero",
    "case2ii-asymptotic-m1-constant",
    "case2ii-principal-m1-zero",
]


def test_criterion_7_theorem_suite():
    t0 = time.perf_counter()
    rows = theorem_suite(SUITE_KEYS, samples=100, seed=1)
    elapsed = time.perf_counter() - t0
    bad = [
        f"{r.key} ({r.passed}/{r.considered} pass, {r.unsatisfiable} unsatisfiable)"
        for r in rows
        if r.failed or r.errors or r.unsatisfiable_fraction >= 0.5
    ]
    ok = not bad and elapsed < 60.0
    summary = "all rows 100% pass" if not bad else "failing rows: " + "; ".join(bad)
    report(7, ok, f"8 theorem sweeps x 100 samples: {summary}; {elapsed:.1f} s (limit 60 s)")


def test_criterion_8_end_to_end_pair():
    cfg = load_config(CONFIGS / "geodesic_pair.json")
    _, _, _, pair, rep, _ = cli._pair_pipeline(cfg)
    ok = rep["breadth_variation"] <= 1e-6 and rep["tangent_opposition"] <= 1e-5 and rep["s_star_linearity"] <= 1e-6
    report(8, ok,
           f"timelike geodesic pair with m1 = 0: breadth variation {rep['breadth_variation']:.2e} (tol 1e-6), "
           f"tangent opposition {rep['tangent_opposition']:.2e} (tol 1e-5), "
           f"s* = -s + c deviation {rep['s_star_linearity']:.2e} (tol 1e-6)")


def test_criterion_9_cli_determinism(tmp_path):
    outs = []
    for run in ("first", "second"):
        out = tmp_path / run
        code = cli.main(["sweep", "--config", str(CONFIGS / "sweep_small.json"), "--out", str(out), "--seed", "42"])
        assert code == 0
        outs.append(b"".join((out / name).read_bytes() for name in ("sweep.csv", "samples.csv")))
    ok = outs[0] == outs[1] and len(outs[0]) > 0
    report(9, ok, f"two sweeps with seed 42: {'byte-identical' if ok else 'outputs differ'} ({len(outs[0])} bytes)")
