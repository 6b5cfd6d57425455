import json
from pathlib import Path

import pytest

from plurilab.cli import SCHEMA, build_parser, main


def run_cli(argv):
    return main(argv)


def load_report(out):
    return json.loads((Path(out) / "report.json").read_text())


def test_unknown_domain_exits_2(tmp_path):
    code = run_cli(
        ["kobayashi-bounds", "--domain", "banana", "--out", str(tmp_path), "--budget", "2"]
    )
    assert code == 2


def test_unknown_subcommand_exits_2(tmp_path):
    assert run_cli(["frobnicate", "--out", str(tmp_path)]) == 2


def test_kobayashi_bounds_report(tmp_path):
    code = run_cli(
        ["kobayashi-bounds", "--domain", "ball", "--n", "1", "--budget", "3", "--out", str(tmp_path)]
    )
    assert code == 0
    rep = load_report(tmp_path)
    assert rep["schema"] == SCHEMA
    assert rep["subcommand"] == "kobayashi-bounds"
    assert "tolerances" in rep and "seed" in rep["tolerances"]
    assert (tmp_path / "kobayashi_bounds.csv").exists()
    for row in rep["results"]:
        assert row["lower"] <= row["upper"]


def test_holder_failure_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        code = run_cli(
            [
                "holder-failure",
                "--domain",
                "omega_phi",
                "--n",
                "2",
                "--alphas",
                "0.25,0.5,1",
                "--budget",
                "6",
                "--seed",
                "11",
                "--out",
                str(out),
            ]
        )
        assert code == 0
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
    assert (a / "divergence.csv").read_bytes() == (b / "divergence.csv").read_bytes()


def test_holder_failure_svg(tmp_path):
    code = run_cli(
        [
            "holder-failure",
            "--domain",
            "omega_phi",
            "--n",
            "2",
            "--budget",
            "5",
            "--svg",
            "--out",
            str(tmp_path),
        ]
    )
    assert code == 0
    svg = (tmp_path / "divergence.svg").read_text()
    assert svg.startswith("<svg") and "polyline" in svg


def test_ma_pullback_report(tmp_path):
    code = run_cli(["ma-pullback", "--map", "example25", "--budget", "40", "--out", str(tmp_path)])
    assert code == 0
    rep = load_report(tmp_path)
    assert rep["results"]["min_density"] >= -1e-10
    assert (tmp_path / "pullback.csv").exists()


def test_ma_pullback_unknown_map(tmp_path):
    assert run_cli(["ma-pullback", "--map", "mystery", "--out", str(tmp_path)]) == 2


def test_canonical_report(tmp_path):
    code = run_cli(
        ["canonical", "--domain", "polydisc", "--n", "2", "--grid", "65", "--out", str(tmp_path)]
    )
    assert code == 0
    rep = load_report(tmp_path)
    assert rep["results"]["residual"] < 1e-8
    assert (tmp_path / "envelope_moduli.csv").exists()
    assert len(rep["results"]["modulus_radii"]) == 10


def test_config_file_overrides(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("budget = 4\nseed = 3\n")
    out = tmp_path / "out"
    code = run_cli(
        [
            "holder-failure",
            "--domain",
            "omega_phi",
            "--n",
            "2",
            "--budget",
            "99",
            "--config",
            str(cfg),
            "--out",
            str(out),
        ]
    )
    assert code == 0
    rep = load_report(out)
    assert rep["tolerances"]["budget"] == 4
    assert rep["tolerances"]["seed"] == 3


def test_parser_flags_exist():
    ap = build_parser()
    args = ap.parse_args(
        ["canonical", "--domain", "ball", "--seed", "5", "--budget", "7", "--tol", "1e-6", "--out", "x"]
    )
    assert args.seed == 5 and args.budget == 7 and args.tol == 1e-6
