"""Command line front end: ``walkerbreadth {frames,pair,verify,sweep,parse-check}``.

Exit codes: 0 success, 2 configuration or parse error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .breadth import (
    FIXED_THETA,
    HMode,
    Kind,
    PairConfig,
    build_partner,
    closed_form_coefficients,
    coefficient_rhs,
    integrate_coefficients,
    m1_zero_coefficients,
    verify_pair,
)
from .curves import (
    AnalyticCurve,
    SampledCurve,
    frenet_apparatus,
    frenet_residuals,
    initial_frame,
    integrate_curve_from_frenet_data,
    reparametrize_by_arclength,
)
from .darboux import (
    CaseTag,
    SurfacePatch,
    darboux_apparatus,
    darboux_from_frenet,
    verify_structure_equations,
)
from .exceptions import ConfigError, DegenerateCurvature, ExpressionSyntaxError, WalkerError
from .expression import parse_expression, parse_field
from .io import RunConfig, check_expressions, fmt, load_config, write_csv, write_json
from .metric import WalkerMetric
from .numerics import antiderivative
from .theorems import THEOREMS, SuiteSettings, theorem_suite

NAN = float("nan")
FRAME_HEADER = [
    "s", "x", "y", "z",
    "T1", "T2", "T3", "N1", "N2", "N3", "B1", "B2", "B3",
    "kappa", "tau", "kappa_g", "kappa_n", "tau_g", "theta",
]


def _expr(text, var="s"):
    return parse_expression(str(text), (var,))


def _profile_case(cfg: RunConfig) -> CaseTag:
    prof = cfg.profile
    if "case" in prof:
        return CaseTag.parse(prof["case"])
    if "signs" in prof:
        e1, e2, _ = (int(v) for v in prof["signs"])
        return CaseTag.CASE1 if e1 == -1 else (CaseTag.CASE2I if e2 == 1 else CaseTag.CASE2II)
    raise ConfigError("profile needs 'case' or 'signs'")


def _solve_profile(g: WalkerMetric, cfg: RunConfig):
    case = _profile_case(cfg)
    init = cfg.profile.get("initial", {})
    frame0 = initial_frame(
        g,
        init.get("point", [0.0, 0.0, 0.0]),
        case.signs,
        float(init.get("rotation", 0.0)),
        float(init.get("boost1", 0.0)),
        float(init.get("boost2", 0.0)),
    )
    kappa = _expr(cfg.profile["kappa"])
    tau = _expr(cfg.profile["tau"])
    sol = integrate_curve_from_frenet_data(g, kappa, tau, case.signs, frame0, cfg.s_max, cfg.step)
    return case, kappa, tau, sol


def _surface(cfg: RunConfig):
    if not cfg.surface:
        return None, None
    S = SurfacePatch.from_json(cfg.surface)
    uv = cfg.surface.get("curve")
    curve = S.curve(uv["u"], uv["v"], tuple(uv.get("t_range", (0.0, 1.0)))) if uv else None
    return S, curve


def _frames_from_profile(g, cfg):
    case, kappa, tau, sol = _solve_profile(g, cfg)
    rows = []
    if cfg.theta is not None:
        series = darboux_from_frenet(g, sol, _expr(cfg.theta))
        extra = np.stack([series.kappa_g, series.kappa_n, series.tau_g, series.theta], axis=1)
    else:
        extra = np.full((len(sol.s), 4), NAN)
    for i, s in enumerate(sol.s):
        rows.append([s, *sol.points[i], *sol.T[i], *sol.N[i], *sol.B[i], sol.kappa[i], sol.tau[i], *extra[i]])
    return rows


def _frames_from_curve(g, cfg):
    S, on_surface = _surface(cfg)
    if on_surface is not None:
        base = on_surface
    elif cfg.curve is not None:
        base = AnalyticCurve.from_json(cfg.curve) if cfg.curve["kind"] == "analytic" else SampledCurve.from_json(cfg.curve)
    else:
        raise ConfigError("frames needs 'curve', 'profile' or 'surface.curve'")
    c = reparametrize_by_arclength(g, base)
    n = int(math.floor(c.length / cfg.step + 1e-9))
    rows = []
    for s in cfg.step * np.arange(n + 1):
        try:
            a = frenet_apparatus(g, c, s)
            frenet = [*a.point, *a.T, *a.N, *a.B, a.kappa, a.tau]
        except DegenerateCurvature:
            p, d1 = c.derivatives(s, 1)
            frenet = [*p, *d1, *[NAN] * 6, 0.0, NAN]
        if S is not None:
            d = darboux_apparatus(g, S, c, s)
            darb = [d.kappa_g, d.kappa_n, d.tau_g, d.theta]
        else:
            darb = [NAN] * 4
        rows.append([s, *frenet, *darb])
    return rows


def cmd_frames(cfg: RunConfig, out: Path) -> dict:
    g = WalkerMetric(cfg.f)
    rows = _frames_from_profile(g, cfg) if cfg.profile is not None else _frames_from_curve(g, cfg)
    write_csv(out / "frames.csv", FRAME_HEADER, rows)
    return {"frames": len(rows)}


# ---------------------------------------------------------------------------
# pairs


def _pair_pipeline(cfg: RunConfig):
    if cfg.profile is None:
        raise ConfigError("pair needs a 'profile' (curvature and torsion data)")
    if not cfg.pair:
        raise ConfigError("missing 'pair' section")
    g = WalkerMetric(cfg.f)
    case, kappa, tau, sol = _solve_profile(g, cfg)
    data = dict(cfg.pair)
    data.setdefault("case", case.value)
    if "h" in data and "h_mode" not in data:
        data["h_mode"] = "explicit"
    h_spec = data.pop("h", None)
    h_mode = data.get("h_mode", "zero")
    if h_mode == "explicit":
        if h_spec is None:
            raise ConfigError("h_mode 'explicit' needs 'pair.h'")
        data["h_mode"] = HMode("explicit", _expr(h_spec))
    pc = PairConfig.from_json(data)
    if pc.case_tag is not case:
        raise ConfigError(f"pair case {pc.case_tag.value} does not match the profile ({case.value})")
    tau_int = antiderivative(tau, cfg.s_max, cfg.step)
    kappa_int = antiderivative(kappa, cfg.s_max, cfg.step)
    if pc.kind is Kind.PRINCIPAL:
        sign = -1.0 if case is CaseTag.CASE2I else 1.0
        theta0 = pc.constant("theta0")
        theta = lambda s: theta0 + sign * tau_int(s)  # noqa: E731
    elif pc.kind is Kind.GENERAL:
        raise ConfigError("pairs are built for geodesic, asymptotic or principal kinds")
    else:
        value = FIXED_THETA[(case, pc.kind)]
        theta = lambda s: value + 0.0 * np.asarray(s, dtype=float)  # noqa: E731
    system = (
        coefficient_rhs(case, pc.kind, kappa=kappa, theta=theta)
        if pc.kind is Kind.PRINCIPAL
        else coefficient_rhs(case, pc.kind, kappa=kappa, tau=tau)
    )
    h_mode = pc.h_mode
    if "initial" in data:
        m0 = [float(v) for v in data["initial"]]
        if len(m0) != 3:
            raise ConfigError("pair.initial needs three numbers")
        if "h_mode" not in data:
            h_mode = HMode.admissible(case)
    elif pc.subcase == "m1_zero":
        b1, b2 = pc.constant("b1"), pc.constant("b2")
        if pc.kind is Kind.PRINCIPAL:
            m0 = [0.0, b1, b2]
            if case is CaseTag.CASE1:
                h_mode = HMode("explicit", lambda s: kappa(s) * (b2 * np.sin(theta(s)) - b1 * np.cos(theta(s))))
            elif case is CaseTag.CASE2II:
                h_mode = HMode("explicit", lambda s: kappa(s) * (b1 * np.cosh(theta(s)) + b2 * np.sinh(theta(s))))
            else:
                h_mode = HMode.admissible(case)
        else:
            m2, m3, _ = m1_zero_coefficients(case, pc.kind, b1, b2, 0.0, 1.0)
            m0 = [0.0, float(m2), float(m3)]
            if case is CaseTag.CASE2I:
                h_mode = HMode.admissible(case)
            else:
                h_mode = HMode(
                    "explicit",
                    lambda s: m1_zero_coefficients(case, pc.kind, b1, b2, tau_int(s), kappa(s))[2],
                )
    elif "c0" in pc.constants:
        c = pc.constant("c0")
        z0 = float(theta(0.0)) if pc.kind is Kind.PRINCIPAL else 0.0
        a = (pc.constant("a1"), pc.constant("a2"), pc.constant("a3"))
        m0 = [float(v) for v in closed_form_coefficients(case, pc.kind, c, *a, z0)]
        if "h_mode" not in data:
            h_mode = HMode.admissible(case)
    else:
        raise ConfigError("pair needs 'initial', subcase 'm1_zero' with b1/b2, or closed-form constants c0/a1/a2/a3")
    coeffs = integrate_coefficients(system, h_mode, m0, cfg.s_max, cfg.step)
    frames = darboux_from_frenet(g, sol, theta)
    pair = build_partner(g, frames, coeffs, c=pc.constant("c"))
    report = verify_pair(g, pair)
    report["richardson_change"] = coeffs.richardson
    return g, sol, frames, pair, report, pc


def cmd_pair(cfg: RunConfig, out: Path) -> dict:
    g, sol, frames, pair, report, pc = _pair_pipeline(cfg)
    co = pair.coeffs
    header = ["s", "s_star", "alpha_x", "alpha_y", "alpha_z", "beta_x", "beta_y", "beta_z",
              "m1", "m2", "m3", "h", "breadth"]
    rows = [
        [pair.s[i], pair.s_star[i], *pair.alpha.points[i], *pair.beta.points[i],
         co.m1[i], co.m2[i], co.m3[i], co.h[i], co.breadth[i]]
        for i in range(len(pair.s))
    ]
    write_csv(out / "pair.csv", header, rows)
    summary = {"case": pc.case_tag.value, "kind": pc.kind.value, "subcase": pc.subcase, "report": report}
    write_json(out / "report.json", summary)
    return report


DEFAULT_TOLERANCES = {
    "breadth_variation": 1e-6,
    "tangent_opposition": 1e-5,
    "frenet_residual": 1e-6,
    "structure_residual": 1e-6,
}


def cmd_verify(cfg: RunConfig, out: Path) -> dict:
    tol = {**DEFAULT_TOLERANCES, **cfg.tolerances}
    g, sol, frames, pair, report, pc = _pair_pipeline(cfg)
    metrics = {
        "breadth_variation": report["breadth_variation"],
        "tangent_opposition": report["tangent_opposition"],
        "frenet_residual": frenet_residuals(g, sol)["max"],
        "structure_residual": verify_structure_equations(g, frames)["max"],
    }
    checks = {k: {"value": v, "tolerance": tol[k], "ok": bool(v <= tol[k])} for k, v in metrics.items()}
    if "s_star_linearity" in tol:
        v = report["s_star_linearity"]
        checks["s_star_linearity"] = {"value": v, "tolerance": tol["s_star_linearity"], "ok": bool(v <= tol["s_star_linearity"])}
    result = {"checks": checks, "ok": all(c["ok"] for c in checks.values()), "report": report}
    write_json(out / "verify.json", result)
    return result


# ---------------------------------------------------------------------------
# sweep


def cmd_sweep(cfg: RunConfig, out: Path, seed: int | None, step: float | None, threads=None) -> list:
    sw = cfg.sweep
    keys = sw.get("theorems") or list(THEOREMS)
    for k in keys:
        if k not in THEOREMS:
            raise ConfigError(f"unknown theorem {k!r}; known: {', '.join(THEOREMS)}")
    samples = int(sw.get("samples", 100))
    if samples < 1:
        raise ConfigError("sweep.samples must be positive")
    seed = int(seed if seed is not None else sw.get("seed", 0))
    settings = SuiteSettings(
        s_max=float(sw.get("s_max", 1.0)),
        step=float(step if step is not None else sw.get("step", 0.01)),
        f=cfg.f,
    )
    rows = theorem_suite(keys, samples, seed, settings, threads)
    write_csv(
        out / "sweep.csv",
        ["theorem", "samples", "passed", "failed", "unsatisfiable", "errors", "status"],
        [[r.key, r.samples, r.passed, r.failed, r.unsatisfiable, r.errors, r.status] for r in rows],
    )
    detail = []
    for r in rows:
        for x in r.results:
            metrics = ";".join(f"{k}={fmt(v) if not isinstance(v, str) else v}" for k, v in sorted(x.metrics.items()))
            detail.append([x.key, x.index, x.outcome, x.message, metrics])
    write_csv(out / "samples.csv", ["theorem", "index", "outcome", "message", "metrics"], detail)
    return rows


def cmd_parse_check(cfg: RunConfig | None, expr: str | None) -> list[str]:
    lines = []
    if expr is not None:
        f = parse_field(expr)
        lines.append(f"f = {f.ast.render()}")
        lines.append(f"f_y = {f.f_y}")
        lines.append(f"f_z = {f.f_z}")
    if cfg is not None:
        for where, e in check_expressions(cfg):
            parts = ", ".join(f"d/d{v} = {e.diff(v)}" for v in e.variables)
            lines.append(f"{where}: {e}  ({parts})")
    return lines


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="walkerbreadth", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, helptext in [
        ("frames", "Frenet (and Darboux) frames along a curve"),
        ("pair", "build a constant-breadth partner and its report"),
        ("verify", "check a pair and its frames against tolerances"),
        ("sweep", "run the randomised theorem suite"),
        ("parse-check", "parse expressions and print their partial derivatives"),
    ]:
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("--config", type=Path, required=name not in ("parse-check",))
        sp.add_argument("--out", type=Path, default=Path("."))
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--step", type=float, default=None)
        if name == "parse-check":
            sp.add_argument("expr", nargs="?", help="expression in y, z to check as the field f")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "parse-check":
            cfg = load_config(args.config) if args.config else None
            if cfg is None and args.expr is None:
                raise ConfigError("give an expression or --config")
            for line in cmd_parse_check(cfg, args.expr):
                print(line)
            return 0
        overrides = {"step": args.step} if args.command != "sweep" else {}
        cfg = load_config(args.config, overrides)
        if args.command == "frames":
            info = cmd_frames(cfg, args.out)
            print(f"wrote {info['frames']} frames to {args.out / 'frames.csv'}")
        elif args.command == "pair":
            rep = cmd_pair(cfg, args.out)
            print(
                f"breadth variation {fmt(rep['breadth_variation'])}, "
                f"tangent opposition {fmt(rep['tangent_opposition'])}"
            )
        elif args.command == "verify":
            res = cmd_verify(cfg, args.out)
            for k, c in res["checks"].items():
                print(f"{'ok  ' if c['ok'] else 'FAIL'} {k} = {fmt(c['value'])} (tolerance {fmt(c['tolerance'])})")
            if not res["ok"]:
                return 3
        elif args.command == "sweep":
            rows = cmd_sweep(cfg, args.out, args.seed, args.step)
            for r in rows:
                print(f"{r.status:12s} {r.key}: {r.passed} pass, {r.failed} fail, "
                      f"{r.unsatisfiable} unsatisfiable, {r.errors} errors")
            if any(r.unsatisfiable_fraction >= 0.5 for r in rows):
                print("error: hypotheses unsatisfiable for at least half of the samples", file=sys.stderr)
                return 3
        return 0
    except ConfigError as exc:
        print(f"config error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except WalkerError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
