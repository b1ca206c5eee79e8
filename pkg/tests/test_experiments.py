"""Experiment drivers, config parsing, persistence, and the CLI."""

import json

import numpy as np
import pytest

from chstep.cli import main
from chstep.experiments import (
    ExperimentConfig,
    load_config,
    load_snapshot,
    random_initial,
    run_adaptive_simulation,
    save_snapshot,
    total_variation,
)
from chstep.meshing import AdaptiveConfig
from chstep.schemes import FixedPointConfig, ModelParams


def test_load_config(tmp_path):
    path = tmp_path / "cfg.txt"
    path.write_text(
        "# comment line\n"
        "M = 64\n"
        "T = 2.5          # trailing comment\n"
        'mesh = "uniform"\n'
        "betas = [10, 100]\n"
        "energy_safe = true\n"
    )
    cfg = load_config(path)
    assert cfg.M == 64
    assert cfg.T == 2.5
    assert cfg.mesh == "uniform"
    assert cfg.betas == [10, 100]
    assert cfg.energy_safe is True


def test_load_config_rejects_unknown_key(tmp_path):
    path = tmp_path / "cfg.txt"
    path.write_text("no_such_key = 1\n")
    with pytest.raises(ValueError):
        load_config(path)


def test_random_initial_seeded_and_bounded():
    p = ModelParams(kappa=0.01, epsilon=0.05, L=2 * np.pi, M=16)
    a = random_initial(p, 7)
    b = random_initial(p, 7)
    assert np.array_equal(a, b)
    assert np.max(np.abs(a)) < 0.001
    assert not np.array_equal(a, random_initial(p, 8))


def test_snapshot_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    phi = rng.standard_normal((16, 16))
    path = tmp_path / "snap.bin"
    save_snapshot(path, phi, 2 * np.pi, 1.25)
    back, L, t = load_snapshot(path)
    assert np.array_equal(back, phi)
    assert L == 2 * np.pi
    assert t == 1.25


def test_total_variation():
    assert total_variation(np.array([0.0, 1.0, 0.0, 1.0])) == pytest.approx(3.0)
    assert total_variation(np.linspace(0, 1, 11)) == pytest.approx(1.0)


def test_adaptive_simulation_contract():
    p = ModelParams(kappa=0.01, epsilon=0.05, L=2 * np.pi, M=16)
    acfg = AdaptiveConfig(tau_min=1e-3, tau_max=5e-2, beta=100.0)
    phi0 = random_initial(p, 3)
    run = run_adaptive_simulation(p, acfg, 1.0, FixedPointConfig(), phi0,
                                  snapshot_times=[0.5, 1.0])
    t = run.record.column("t")
    tau = run.record.column("tau")
    assert t[-1] == pytest.approx(1.0)
    assert np.all(np.diff(t) > 0)
    assert np.all(tau <= acfg.tau_max + 1e-14)
    assert sorted(run.snapshots) == [0.5, 1.0]
    r = run.record.column("r")
    assert np.nanmax(r) <= acfg.r_user + 1e-12


def test_cli_certify_and_reproducibility(tmp_path, capsys):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text('N = 80\nmesh = "random-clamped"\n')
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    assert main(["certify", "--config", str(cfg), "--seed", "5", "--out", str(out1)]) == 0
    assert main(["certify", "--config", str(cfg), "--seed", "5", "--out", str(out2)]) == 0
    capsys.readouterr()
    for name in ("certify.json", "manifest.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
    report = json.loads((out1 / "certify.json").read_text())
    for key in ("n", "lambda_min", "lambda_max", "m1", "m2", "pass"):
        assert key in report
    assert report["pass"] is True


def test_cli_certify_fails_nonzero(tmp_path, capsys):
    cfg = tmp_path / "cfg.txt"
    # ratios clamped above r_user: certification must fail with exit code 1
    cfg.write_text('N = 80\nmesh = "random-clamped"\nratio_clamp = 4.8\nseed = 1\n')
    assert main(["certify", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    capsys.readouterr()


def test_cli_adaptive_smoke(tmp_path, capsys):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text(
        "M = 16\nT = 0.2\nkappa = 0.01\nepsilon = 0.05\n"
        "betas = [10, 1000]\ntau_min = 0.001\ntau_max = 0.05\n"
    )
    out = tmp_path / "out"
    assert main(["adaptive", "--config", str(cfg), "--out", str(out)]) == 0
    capsys.readouterr()
    summary = json.loads((out / "adaptive_summary.json").read_text())
    assert len(summary["runs"]) == 2
    assert (out / "record_beta10.csv").exists()
    assert (out / "record_beta1000.csv").exists()
    header = (out / "record_beta10.csv").read_text().splitlines()[0]
    assert header == "n,t,tau,r,energy,modified_energy,volume,iters,wall_ms"


def test_cli_grid_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("M = 16\nT = 0.1\nkappa = 0.01\nepsilon = 0.05\n"
                   "betas = [100]\ntau_min = 0.001\ntau_max = 0.05\n")
    out = tmp_path / "out"
    assert main(["adaptive", "--config", str(cfg), "--grid", "8",
                 "--out", str(out)]) == 0
    capsys.readouterr()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["grid"] == 8


def test_ratio_clamp_seen_in_random_clamped_mesh(tmp_path, capsys):
    # sanity: the failing run reports the offending guard, not a crash
    cfg = tmp_path / "cfg.txt"
    cfg.write_text('N = 40\nmesh = "random-clamped"\nratio_clamp = 4.8\nseed = 12\n')
    out = tmp_path / "o"
    main(["certify", "--config", str(cfg), "--out", str(out)])
    capsys.readouterr()
    report = json.loads((out / "certify.json").read_text())
    if not report["pass"]:
        assert report.get("error") == "RatioExceedsUser" or report["probe_violations"] == 0
