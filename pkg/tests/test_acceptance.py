"""Acceptance suite: one test per headline property of the package.

Each test prints a single pass/fail line (collected again in the terminal
summary).  Test 11 is the long coarsening run and is marked slow.
"""

import time

import numpy as np
import pytest

from conftest import record_criterion

from chstep.diagnostics import convergence_order, scaling_fit
from chstep.errors import FixedPointDiverged
from chstep.experiments import (
    ExperimentConfig,
    random_initial,
    run_adaptive_simulation,
    run_bdf2_on_mesh,
    run_compare,
    run_scheme_on_mesh,
    total_variation,
)
from chstep.grid import inner, norm_l2
from chstep.kernels import (
    R_L,
    TimeMesh,
    bdf2_coeffs,
    certify_mesh,
    doc_kernels,
    quadratic_form_probes,
    stability_constants,
    verify_orthogonality,
)
from chstep.meshing import AdaptiveConfig, random_mesh, uniform_mesh
from chstep.schemes import (
    FixedPointConfig,
    ModelParams,
    SolverState,
    bdf2_residual,
    bdf2_step,
)

COARSE = dict(kappa=0.01, epsilon=0.05, L=2 * np.pi)


def clamped_mesh(N, seed, hi, T=1.0):
    """Random mesh whose consecutive step ratios stay below hi."""
    rng = np.random.default_rng(seed)
    steps = [1.0]
    for _ in range(N - 1):
        steps.append(steps[-1] * rng.uniform(0.05, hi))
    steps = np.asarray(steps)
    return TimeMesh.from_steps(steps * T / steps.sum())


# ---------------------------------------------------------------------------

def test_criterion_01_orthogonality():
    start = time.perf_counter()
    worst = 0.0
    for seed in range(20):
        mesh = clamped_mesh(200, seed, hi=4.8)
        worst = max(worst, verify_orthogonality(mesh, 200))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-11 and elapsed < 5.0
    record_criterion(1, ok, f"max residual {worst:.2e}, {elapsed:.2f} s")
    assert ok, f"orthogonality residual {worst:.2e}, elapsed {elapsed:.2f} s"


def test_criterion_02_uniform_closed_forms():
    tau = 0.03
    b0, b1 = bdf2_coeffs(tau, tau)
    err_b = max(abs(b0 - 1.5 / tau) / (1.5 / tau), abs(b1 + 0.5 / tau) / (0.5 / tau))
    n = 40
    mesh = uniform_mesh(n * tau, n)
    theta = doc_kernels(mesh, n)
    j = np.arange(2, n + 1)
    expected = (2 * tau / 3) * (1.0 / 3.0) ** (n - j)
    err_t = float(np.max(np.abs(theta - expected) / expected))
    ok = err_b <= 1e-14 and err_t <= 1e-14
    record_criterion(2, ok, f"kernel rel. err {err_b:.1e}, theta rel. err {err_t:.1e}")
    assert ok


def test_criterion_03_eigenvalue_bounds():
    constants = stability_constants(4.0)
    lam_min_margin = np.inf
    lam_max_margin = -np.inf
    rl_margin = np.inf
    for seed in range(100):
        mesh = clamped_mesh(500, 1000 + seed, hi=4.0)
        rep = certify_mesh(mesh, constants)
        lam_min_margin = min(lam_min_margin, rep.lambda_min)
        lam_max_margin = max(lam_max_margin, rep.lambda_max)
        rs = np.concatenate([mesh.ratios, [0.0]])
        rl_min = min(R_L(rs[k], rs[k + 1]) for k in range(len(rs) - 1))
        rl_margin = min(rl_margin, rep.lambda_min - rl_min)
    ok = (lam_min_margin >= constants.m1 - 1e-10
          and lam_max_margin <= constants.m2 + 1e-10
          and rl_margin >= -1e-10)
    record_criterion(3, ok, f"min lam_min {lam_min_margin:.4f}, "
                            f"max lam_max {lam_max_margin:.4f}")
    assert ok


def test_criterion_04_quadratic_sandwich():
    total_violations = 0
    for seed in range(50):
        mesh = clamped_mesh(60, 2000 + seed, hi=4.0)
        rep = quadratic_form_probes(mesh, trials=20)
        total_violations += (rep.violations_sandwich_lower
                             + rep.violations_sandwich_upper
                             + rep.violations_positive_definite
                             + rep.violations_young)
    ok = total_violations == 0
    record_criterion(4, ok, f"{total_violations} violations in 1000 draws")
    assert ok


def test_criterion_05_volume_conservation():
    p = ModelParams(M=32, **COARSE)
    cfg = FixedPointConfig()
    phi0 = random_initial(p, seed=2023)
    ones = np.ones_like(phi0)
    v0 = inner(p.grid, phi0, ones)
    tol = 1e-10 * p.L**2
    mesh = uniform_mesh(10.0, 1000)
    worst = 0.0

    def tracker():
        def on_level(n, t, phi, iters):
            nonlocal worst
            worst = max(worst, abs(inner(p.grid, phi, ones) - v0))
        return on_level

    for starter in ("trbdf2", "sdirk2", "bdf1", "cn", "convex"):
        run_bdf2_on_mesh(p, mesh, cfg, phi0, starter=starter, on_level=tracker())
    for scheme in ("cn", "cncs"):
        run_scheme_on_mesh(p, scheme, mesh, cfg, phi0, on_level=tracker())
    ok = worst <= tol
    record_criterion(5, ok, f"max volume drift {worst:.2e} (tol {tol:.1e})")
    assert ok


def test_criterion_06_modified_energy_monotone():
    p = ModelParams(M=64, **COARSE)
    acfg = AdaptiveConfig(tau_min=1e-4, tau_max=1e-1, beta=1e3, r_user=4.0)
    phi0 = random_initial(p, seed=2023)
    run = run_adaptive_simulation(p, acfg, 20.0, FixedPointConfig(), phi0,
                                  energy_safe=True)
    me = run.record.column("modified_energy")
    tol = 1e-9 * abs(me[0])
    increase = float(np.max(np.diff(me)))
    ok = increase <= tol
    record_criterion(6, ok, f"max increase {increase:.2e} over {len(me)} levels")
    assert ok


def _accuracy_orders(mesh_kind, seed):
    cfg = ExperimentConfig(kind="accuracy", M=32, mesh=mesh_kind, seed=seed,
                           kappa=1.0, epsilon=np.sqrt(0.5), T=1.0)
    from chstep.experiments import run_accuracy
    import tempfile
    from pathlib import Path

    rows = run_accuracy(cfg, Path(tempfile.mkdtemp()))
    orders = convergence_order([r["e"] for r in rows], [r["tau"] for r in rows])
    return rows, orders


def test_criterion_07_random_mesh_order():
    start = time.perf_counter()
    rows, orders = _accuracy_orders("random", seed=2023)
    elapsed = time.perf_counter() - start
    finest = orders[-3:]
    e_final = rows[-1]["e"]
    ok = (np.all((finest >= 1.7) & (finest <= 2.2))
          and e_final <= 5e-6 and elapsed < 120.0)
    record_criterion(7, ok, f"orders {np.round(finest, 3)}, e(640) {e_final:.2e}, "
                            f"{elapsed:.1f} s")
    assert ok


def test_criterion_08_uniform_mesh_order():
    rows, orders = _accuracy_orders("uniform", seed=2023)
    finest = orders[-3:]
    ok = np.all((finest >= 1.9) & (finest <= 2.1))
    record_criterion(8, ok, f"orders {np.round(finest, 3)}")
    assert ok


def test_criterion_09_oscillation_comparison(tmp_path):
    cfg = ExperimentConfig(kind="compare", M=128, T=0.1, seed=2023,
                           taus=[1e-1, 1e-3], tau_ref=1e-3, **COARSE)
    summary = run_compare(cfg, tmp_path)
    runs = {r["tag"]: r for r in summary["runs"] if "tv" in r}
    tv_cn = runs["cn_tau0.1"]["tv"]
    tv_bdf2 = runs["bdf2_tau0.1"]["tv"]
    fine_errs = [runs[f"{s}_tau0.001"]["max_err_vs_ref"] for s in ("bdf2", "cn", "cncs")]
    ok = tv_cn >= 2.0 * tv_bdf2 and max(fine_errs) <= 1e-3
    record_criterion(9, ok, f"TV ratio {tv_cn / tv_bdf2:.1f}, "
                            f"fine agreement {max(fine_errs):.1e}")
    assert ok


def test_criterion_10_adaptive_beta_ordering():
    p = ModelParams(M=64, **COARSE)
    phi0 = random_initial(p, seed=2023)
    levels = []
    ok_steps = True
    detail = []
    for beta in (10.0, 1e2, 1e3):
        acfg = AdaptiveConfig(tau_min=1e-4, tau_max=1e-1, beta=beta, r_user=4.0)
        run = run_adaptive_simulation(p, acfg, 30.0, FixedPointConfig(), phi0)
        tau = run.record.column("tau")
        r = run.record.column("r")
        ok_steps &= bool(np.all(tau >= acfg.tau_min - 1e-14)
                         and np.all(tau <= acfg.tau_max + 1e-14)
                         and np.nanmax(r) <= acfg.r_user + 1e-12)
        levels.append(run.levels)
        detail.append(f"beta={beta:g}: {run.levels}")
    ok = ok_steps and levels[0] < levels[1] < levels[2]
    record_criterion(10, ok, "; ".join(detail))
    assert ok, (levels, ok_steps)


@pytest.mark.slow
def test_criterion_11_coarsening_scaling_law():
    p = ModelParams(M=128, **COARSE)
    acfg = AdaptiveConfig(tau_min=1e-4, tau_max=1e-1, beta=1e3, r_user=4.0)
    phi0 = random_initial(p, seed=2023)
    run = run_adaptive_simulation(p, acfg, 500.0, FixedPointConfig(), phi0)
    slope = scaling_fit(run.record, 50.0, 500.0)
    ok = abs(slope - (-1.0 / 3.0)) <= 0.15
    record_criterion(11, ok, f"slope {slope:.3f} over {run.levels} levels "
                             f"({run.wall_s:.0f} s)")
    assert ok, slope


def test_criterion_12_fixed_point_residual():
    p = ModelParams(M=32, **COARSE)
    cfg = FixedPointConfig()
    rng = np.random.default_rng(12)
    # evolve into the coarsening regime first so states are physical
    mesh = uniform_mesh(1.0, 100)
    states = []
    collected = {}

    def on_level(n, t, phi, iters):
        collected[n] = phi

    run_bdf2_on_mesh(p, mesh, cfg, random_initial(p, seed=2023), on_level=on_level)
    worst = 0.0
    checked = 0
    phi_prev2, phi_prev = collected[99], collected[100]
    tau_prev = mesh.tau(100)
    for _ in range(100):
        # keep ratios admissible and the step inside the contraction range
        tau = min(float(tau_prev * rng.uniform(0.3, 3.9)), 0.1)
        state = SolverState(phi_prev=phi_prev, phi_prev2=phi_prev2,
                            tau_prev=tau_prev, tau_cur=tau, level=101)
        try:
            phi, _ = bdf2_step(p, state, cfg)
        except FixedPointDiverged:
            continue
        worst = max(worst, bdf2_residual(p, state, phi))
        checked += 1
        phi_prev2, phi_prev, tau_prev = phi_prev, phi, tau
    ok = worst <= 1e-11 and checked == 100
    record_criterion(12, ok, f"max residual {worst:.2e} over {checked} steps")
    assert ok
