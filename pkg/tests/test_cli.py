import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from walkerbreadth import cli
from walkerbreadth.io import read_csv

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def write(tmp_path, data, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return path


def column(path, name):
    header, data = read_csv(path)
    return data[:, header.index(name)]


def test_flat_circle_frames(tmp_path):
    assert cli.main(["frames", "--config", str(CONFIGS / "flat_circle.json"), "--out", str(tmp_path)]) == 0
    kappa = column(tmp_path / "frames.csv", "kappa")
    assert np.max(np.abs(kappa - 0.5)) <= 1e-4
    assert np.nanmax(np.abs(column(tmp_path / "frames.csv", "tau"))) <= 1e-6


def test_geodesic_frames(tmp_path):
    assert cli.main(["frames", "--config", str(CONFIGS / "geodesic.json"), "--out", str(tmp_path)]) == 0
    assert np.max(np.abs(column(tmp_path / "frames.csv", "kappa_g"))) <= 1e-6


def test_frames_on_surface(tmp_path):
    cfg = {
        "f": "0",
        "surface": {"x": "u", "y": "0", "z": "v", "curve": {"u": "-t + 0.3*t^2", "v": "t"}},
        "numerics": {"step": 0.05},
    }
    assert cli.main(["frames", "--config", str(write(tmp_path, cfg)), "--out", str(tmp_path)]) == 0
    kg = column(tmp_path / "frames.csv", "kappa_g")
    kappa = column(tmp_path / "frames.csv", "kappa")
    np.testing.assert_allclose(np.abs(kg), kappa, rtol=1e-6)


def test_malformed_field(tmp_path, capsys):
    assert cli.main(["frames", "--config", str(CONFIGS / "bad_f.json")]) == 2
    assert "byte offset 2" in capsys.readouterr().err


def test_null_curve_is_numeric_failure(tmp_path, capsys):
    cfg = {"curve": {"kind": "analytic", "x": "t", "y": "0", "z": "0"}}
    assert cli.main(["frames", "--config", str(write(tmp_path, cfg)), "--out", str(tmp_path)]) == 3
    assert "NullSegment" in capsys.readouterr().err


def test_geodesic_m1_zero_pair(tmp_path):
    assert cli.main(["pair", "--config", str(CONFIGS / "geodesic_pair.json"), "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "report.json").read_text())["report"]
    assert report["breadth_variation"] <= 1e-6
    assert report["tangent_opposition"] <= 1e-5
    header, _ = read_csv(tmp_path / "pair.csv")
    assert {"s", "m1", "m2", "m3", "h", "breadth"} <= set(header)


def test_zero_coefficient_pair(tmp_path):
    assert cli.main(["pair", "--config", str(CONFIGS / "zero_pair.json"), "--out", str(tmp_path)]) == 0
    for axis in "xyz":
        np.testing.assert_array_equal(
            column(tmp_path / "pair.csv", f"alpha_{axis}"), column(tmp_path / "pair.csv", f"beta_{axis}")
        )


def test_unsupported_pair(tmp_path, capsys):
    assert cli.main(["pair", "--config", str(CONFIGS / "unsupported.json"), "--out", str(tmp_path)]) == 2
    assert "UnsupportedCombination" in capsys.readouterr().err


def test_pair_case_mismatch(tmp_path):
    cfg = {
        "profile": {"case": "case1", "kappa": "1", "tau": "0.5"},
        "pair": {"case": "case2ii", "kind": "asymptotic", "initial": [0, 0, 0]},
    }
    assert cli.main(["pair", "--config", str(write(tmp_path, cfg)), "--out", str(tmp_path)]) == 2


@pytest.mark.parametrize(
    "pair",
    [
        {"kind": "principal", "constants": {"c0": 0.5, "a1": 0.2, "a2": 0.1, "a3": -0.1, "theta0": 0.0}},
        {"kind": "principal", "subcase": "m1_zero", "constants": {"b1": 0.2, "b2": 0.3}},
        {"kind": "asymptotic", "subcase": "m1_zero", "constants": {"b1": 0.2, "b2": 0.3}},
        {"kind": "geodesic", "initial": [0.1, 0.2, 0.3], "h": "0"},
    ],
)
def test_pair_variants(tmp_path, pair):
    cfg = {"profile": {"case": "case1", "kappa": "1.2", "tau": "2.4"}, "pair": pair, "numerics": {"step": 0.005}}
    assert cli.main(["pair", "--config", str(write(tmp_path, cfg)), "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "report.json").read_text())["report"]
    assert report["breadth_variation"] <= 1e-8 and report["tangent_opposition"] <= 1e-5


def test_verify(tmp_path, capsys):
    assert cli.main(["verify", "--config", str(CONFIGS / "geodesic_pair.json"), "--out", str(tmp_path)]) == 0
    result = json.loads((tmp_path / "verify.json").read_text())
    assert result["ok"] and set(result["checks"]) >= {"breadth_variation", "frenet_residual"}
    capsys.readouterr()
    strict = json.loads((CONFIGS / "geodesic_pair.json").read_text())
    strict["tolerances"] = {"s_star_linearity": 1e-6}
    assert cli.main(["verify", "--config", str(write(tmp_path, strict)), "--out", str(tmp_path)]) == 3
    assert "FAIL s_star_linearity" in capsys.readouterr().out


def sweep_config(tmp_path, samples=6, theorems=("case1-geodesic-m1-constant", "case2i-principal-helix")):
    return write(tmp_path, {"sweep": {"samples": samples, "theorems": list(theorems)}}, "sweep.json")


def test_sweep_is_byte_identical(tmp_path, monkeypatch):
    cfg = sweep_config(tmp_path)
    assert cli.main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "a"), "--seed", "7"]) == 0
    monkeypatch.setenv("WALKER_THREADS", "1")
    assert cli.main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "b"), "--seed", "7"]) == 0
    for name in ("sweep.csv", "samples.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert cli.main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "c"), "--seed", "8"]) == 0
    assert (tmp_path / "a" / "samples.csv").read_bytes() != (tmp_path / "c" / "samples.csv").read_bytes()


def test_constant_m1_geodesic_sweep(tmp_path):
    cfg = sweep_config(tmp_path, 100, ["case1-geodesic-m1-constant"])
    assert cli.main(["sweep", "--config", str(cfg), "--out", str(tmp_path), "--seed", "1"]) == 0
    text = (tmp_path / "sweep.csv").read_text().splitlines()
    fields = dict(zip(text[0].split(","), text[1].split(",")))
    assert fields["failed"] == "0" and fields["errors"] == "0" and fields["status"] == "pass"
    assert int(fields["passed"]) + int(fields["unsatisfiable"]) == 100


def test_sweep_unrealisable_exit(tmp_path, monkeypatch):
    from walkerbreadth.theorems import TheoremRow

    def fake_suite(keys, samples, seed, settings, threads):
        return [TheoremRow(keys[0], "", samples, 0, 0, samples, 0)]

    monkeypatch.setattr(cli, "theorem_suite", fake_suite)
    assert cli.main(["sweep", "--config", str(sweep_config(tmp_path)), "--out", str(tmp_path)]) == 3


def test_sweep_unknown_theorem(tmp_path):
    cfg = sweep_config(tmp_path, theorems=["case7-nothing"])
    assert cli.main(["sweep", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_parse_check(capsys):
    assert cli.main(["parse-check", "y*z + sinh(y)"]) == 0
    out = capsys.readouterr().out
    assert "f_y = z + cosh(y)" in out and "f_z = y" in out
    assert cli.main(["parse-check", "y + + "]) == 2
    assert cli.main(["parse-check", "--config", str(CONFIGS / "geodesic_pair.json")]) == 0
    assert "profile.tau" in capsys.readouterr().out


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "walkerbreadth", "parse-check", "y*"], capture_output=True, text=True
    )
    assert proc.returncode == 2 and "byte offset 2" in proc.stderr
