"""JSON run configurations and CSV/JSON output."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import ConfigError, ExpressionSyntaxError, UnknownIdentifier
from .expression import parse_expression


def fmt(x) -> str:
    """17 significant digits, '.' decimal, no locale."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def read_csv(path: Path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def write_json(path: Path, data) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(data), fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    """Validated contents of a JSON run configuration."""

    f: str = "0"
    curve: dict | None = None
    profile: dict | None = None
    surface: dict | None = None
    theta: str | None = None
    pair: dict | None = None
    sweep: dict = field(default_factory=dict)
    step: float = 1e-3
    s_max: float = 1.0
    tolerances: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict, repr=False)

    def expressions(self):
        """(location, text, variables) of every expression in the config."""
        yield "f", self.f, ("y", "z")
        if self.curve and self.curve.get("kind") == "analytic":
            for k in ("x", "y", "z"):
                yield f"curve.{k}", self.curve[k], ("t",)
        if self.profile:
            for k in ("kappa", "tau"):
                yield f"profile.{k}", self.profile[k], ("s",)
        if self.surface:
            for k in ("x", "y", "z"):
                yield f"surface.{k}", self.surface[k], ("u", "v")
            for k in ("u", "v"):
                if k in self.surface.get("curve", {}):
                    yield f"surface.curve.{k}", self.surface["curve"][k], ("t",)
        if self.theta is not None:
            yield "theta", self.theta, ("s",)
        if self.pair and isinstance(self.pair.get("h"), str):
            yield "pair.h", self.pair["h"], ("s",)


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


def load_config(path, overrides: dict | None = None) -> RunConfig:
    """Parse and validate a configuration file; raise ConfigError on any problem."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ExpressionSyntaxError(
            f"invalid JSON: {exc.msg} (line {exc.lineno})", _byte_offset(text, exc.pos)
        ) from None
    return config_from_dict(data, overrides)


def config_from_dict(data: dict, overrides: dict | None = None) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    known = {"f", "epsilon", "curve", "profile", "surface", "theta", "pair", "sweep", "numerics", "tolerances"}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    if data.get("epsilon", 1) != 1:
        raise ConfigError("only epsilon = +1 is supported")
    num = dict(data.get("numerics", {}))
    num.update({k: v for k, v in (overrides or {}).items() if v is not None})
    cfg = RunConfig(
        f=str(data.get("f", "0")),
        curve=data.get("curve"),
        profile=data.get("profile"),
        surface=data.get("surface"),
        theta=None if data.get("theta") is None else str(data["theta"]),
        pair=data.get("pair"),
        sweep=dict(data.get("sweep", {})),
        step=float(num.get("step", 1e-3)),
        s_max=float(num.get("s_max", 1.0)),
        tolerances=dict(data.get("tolerances", {})),
        raw=data,
    )
    if not (cfg.step > 0 and math.isfinite(cfg.step)):
        raise ConfigError("numerics.step must be a positive number")
    if not (cfg.s_max > 0 and math.isfinite(cfg.s_max)):
        raise ConfigError("numerics.s_max must be a positive number")
    if cfg.curve is not None and cfg.profile is not None:
        raise ConfigError("give either 'curve' or 'profile', not both")
    if cfg.profile is not None:
        for k in ("kappa", "tau"):
            if k not in cfg.profile:
                raise ConfigError(f"profile.{k} is required")
    if cfg.curve is not None and cfg.curve.get("kind") not in ("analytic", "sampled"):
        raise ConfigError("curve.kind must be 'analytic' or 'sampled'")
    check_expressions(cfg)
    return cfg


def check_expressions(cfg: RunConfig) -> list[tuple[str, object]]:
    """Parse every expression; errors name the config key and the byte offset."""
    out = []
    for where, text, variables in cfg.expressions():
        try:
            out.append((where, parse_expression(str(text), variables)))
        except ExpressionSyntaxError as exc:
            raise ExpressionSyntaxError(f"{where}: {exc.message}", exc.offset) from None
        except UnknownIdentifier as exc:
            raise UnknownIdentifier(exc.name, exc.offset, where=where) from None
    return out
