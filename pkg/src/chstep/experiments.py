"""End-to-end experiment drivers: accuracy tables, scheme comparison,
adaptive-parameter study, coarsening dynamics, and kernel certification.

Every run is seeded and writes a manifest next to its outputs so that
identical config+seed reproduces identical CSV bytes (wall-time columns
excepted).
"""

from __future__ import annotations

import csv
import json
import struct
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .diagnostics import RunRecord, convergence_order, energy, modified_energy, scaling_fit
from .errors import FixedPointDiverged, RatioExceedsUser
from .grid import inner, laplacian, norm_l2
from .kernels import (
    TimeMesh,
    certify_mesh,
    quadratic_form_probes,
    stability_constants,
    verify_orthogonality,
)
from .meshing import AdaptiveConfig, adaptive_next_step, random_mesh, stability_cap, uniform_mesh
from .schemes import (
    TR_BDF2_RATIO,
    FixedPointConfig,
    ModelParams,
    SolverState,
    bdf1_step,
    bdf2_step,
    chemical_potential,
    cn_step,
    cncs_step,
    convex_splitting_first_step,
    sdirk2_start,
    solvability_cap,
    tr_bdf2_start,
    trapezoid_step,
)

RATIO_TABLE_THRESHOLD = 4.864  # literal table threshold for the N1 count


@dataclass
class ExperimentConfig:
    kind: str = "accuracy"
    kappa: float = 1.0
    epsilon: float = 0.7071067811865476
    L: float = 6.283185307179586
    M: int = 32
    T: float = 1.0
    scheme: str = "bdf2"
    starter: str = "trbdf2"
    mesh: str = "random"
    N: int = 100
    Ns: list = field(default_factory=lambda: [40, 80, 160, 320, 640])
    taus: list = field(default_factory=lambda: [1e-1, 2e-2, 1e-2])
    tau_ref: float = 1e-3
    beta: float = 1e3
    betas: list = field(default_factory=lambda: [10.0, 1e2, 1e3])
    tau_min: float = 1e-4
    tau_max: float = 1e-1
    r_user: float = 4.0
    seed: int = 2023
    out: str = "out"
    energy_safe: bool = False
    reference: bool = False
    snapshot_times: list = field(default_factory=lambda: [10.0, 50.0, 100.0, 200.0, 300.0, 500.0])
    fp_tol: float = 1e-12
    fp_max_iters: int = 500
    ratio_clamp: float = 4.0

    @property
    def params(self) -> ModelParams:
        return ModelParams(kappa=self.kappa, epsilon=self.epsilon, L=self.L, M=self.M)

    @property
    def fp(self) -> FixedPointConfig:
        return FixedPointConfig(tol=self.fp_tol, max_iters=self.fp_max_iters)


def load_config(path) -> ExperimentConfig:
    """Parse a `key = value` config file; values are JSON literals when possible."""
    cfg = ExperimentConfig()
    valid = set(asdict(cfg))
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in valid:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
            value = value.strip()
            try:
                parsed = json.loads(value)
            except json.JSONDecodeError:
                parsed = value
            setattr(cfg, key, parsed)
    return cfg


def write_manifest(cfg: ExperimentConfig, out_dir: Path, extra=None):
    echo = asdict(cfg)
    echo.pop("out")  # the manifest's own location; keeping it would break byte-level replay
    manifest = {"config": echo, "version": __version__, "seed": cfg.seed,
                "grid": cfg.M, "scheme": cfg.scheme}
    if extra:
        manifest.update(extra)
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))


def save_snapshot(path, phi: np.ndarray, L: float, t: float):
    """Flat binary snapshot: magic, int32 M, float64 L, float64 t, then M*M float64."""
    M = phi.shape[0]
    with open(path, "wb") as fh:
        fh.write(b"CHSN")
        fh.write(struct.pack("<i", M))
        fh.write(struct.pack("<dd", L, t))
        fh.write(np.ascontiguousarray(phi, dtype="<f8").tobytes())


def load_snapshot(path):
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != b"CHSN":
            raise ValueError(f"not a snapshot file: {path}")
        (M,) = struct.unpack("<i", fh.read(4))
        L, t = struct.unpack("<dd", fh.read(16))
        phi = np.frombuffer(fh.read(8 * M * M), dtype="<f8").reshape(M, M)
    return phi, L, t


def save_snapshot_csv(path, phi: np.ndarray):
    np.savetxt(path, phi, delimiter=",", fmt="%.17g")


def random_initial(p: ModelParams, seed: int) -> np.ndarray:
    """Uniform i.i.d. values in (-0.001, 0.001) per grid point; not mean-subtracted."""
    rng = np.random.default_rng(seed)
    return rng.uniform(-0.001, 0.001, (p.M, p.M))


def manufactured_problem(p: ModelParams):
    """Single-mode exact solution cos(t) sin(x) sin(y) with its discrete forcing.

    The forcing applies the discrete spatial operators to the interpolated
    exact solution, so the measured error is purely temporal.
    """
    g = p.grid
    x, y = g.points()
    sxy = np.sin(x) * np.sin(y)

    def exact(t):
        return np.cos(t) * sxy

    def forcing(t):
        phi = exact(t)
        return -np.sin(t) * sxy - p.kappa * laplacian(g, chemical_potential(p, phi))

    return exact, forcing


def split_first_interval(tau: float):
    """Split a leading step into trapezoid + BDF2 substeps with ratio sqrt(2)/2."""
    tau1 = tau / (1.0 + TR_BDF2_RATIO)
    return tau1, tau - tau1


def run_bdf2_on_mesh(p: ModelParams, mesh: TimeMesh, cfg: FixedPointConfig,
                     phi0: np.ndarray, forcing=None, starter: str = "trbdf2",
                     on_level=None):
    """March the two-step scheme over a prescribed mesh, starter included.

    on_level(n, t_n, phi_n, iters) is called for every computed level.
    Returns the final field.
    """
    N = len(mesh)
    t = mesh.levels

    def g_at(tn):
        return forcing(tn) if forcing is not None else None

    if starter == "trbdf2":
        if N < 2:
            raise ValueError("trbdf2 starter needs at least two levels")
        phi1, phi2, iters = tr_bdf2_start(p, phi0, mesh.tau(1), mesh.tau(2), cfg,
                                          forcing=forcing, t0=float(t[0]))
        history = [(1, phi1, iters), (2, phi2, 0)]
    elif starter == "cn":
        phi1, iters = trapezoid_step(p, phi0, mesh.tau(1), cfg,
                                     forcing_pair=(g_at(t[0]), g_at(t[1])) if forcing else None)
        history = [(1, phi1, iters)]
    elif starter == "sdirk2":
        phi1, iters = sdirk2_start(p, phi0, mesh.tau(1), cfg, forcing=forcing, t0=float(t[0]))
        history = [(1, phi1, iters)]
    elif starter == "bdf1":
        phi1, iters = bdf1_step(p, phi0, mesh.tau(1), cfg, forcing=g_at(t[1]))
        history = [(1, phi1, iters)]
    elif starter == "convex":
        phi1, iters = convex_splitting_first_step(p, phi0, mesh.tau(1), cfg, forcing=g_at(t[1]))
        history = [(1, phi1, iters)]
    else:
        raise ValueError(f"unknown starter {starter!r}")

    if on_level is not None:
        for n, phi, iters in history:
            on_level(n, float(t[n]), phi, iters)

    prev2 = phi0 if len(history) == 1 else history[-2][1]
    prev = history[-1][1]
    start = history[-1][0] + 1
    for n in range(start, N + 1):
        state = SolverState(phi_prev=prev, phi_prev2=prev2,
                            tau_prev=mesh.tau(n - 1), tau_cur=mesh.tau(n), level=n)
        phi, iters = bdf2_step(p, state, cfg, forcing=g_at(t[n]))
        if on_level is not None:
            on_level(n, float(t[n]), phi, iters)
        prev2, prev = prev, phi
    return prev


def run_scheme_on_mesh(p: ModelParams, scheme: str, mesh: TimeMesh, cfg: FixedPointConfig,
                       phi0: np.ndarray, forcing=None, on_level=None):
    """March bdf2/cn/cncs over a prescribed mesh with their native starters."""
    if scheme == "bdf2":
        return run_bdf2_on_mesh(p, mesh, cfg, phi0, forcing=forcing, on_level=on_level)
    t = mesh.levels

    def g_mid(n):
        if forcing is None:
            return None
        return forcing(0.5 * (t[n] + t[n - 1]))

    if scheme == "cn":
        prev = phi0
        for n in range(1, len(mesh) + 1):
            state = SolverState(phi_prev=prev, tau_cur=mesh.tau(n), level=n)
            phi, iters = cn_step(p, state, cfg, forcing=g_mid(n))
            if on_level is not None:
                on_level(n, float(t[n]), phi, iters)
            prev = phi
        return prev
    if scheme == "cncs":
        phi1, iters = convex_splitting_first_step(
            p, phi0, mesh.tau(1), cfg, forcing=forcing(t[1]) if forcing else None)
        if on_level is not None:
            on_level(1, float(t[1]), phi1, iters)
        prev2, prev = phi0, phi1
        for n in range(2, len(mesh) + 1):
            state = SolverState(phi_prev=prev, phi_prev2=prev2,
                                tau_prev=mesh.tau(n - 1), tau_cur=mesh.tau(n), level=n)
            phi, iters = cncs_step(p, state, cfg, forcing=g_mid(n))
            if on_level is not None:
                on_level(n, float(t[n]), phi, iters)
            prev2, prev = prev, phi
        return prev
    raise ValueError(f"unknown scheme {scheme!r}")


# ---------------------------------------------------------------------------
# adaptive driver

class AdaptiveRun:
    """Result bundle of an adaptive simulation."""

    def __init__(self):
        self.record = RunRecord()
        self.snapshots = {}
        self.levels = 0
        self.wall_s = 0.0
        self.final = None


def run_adaptive_simulation(p: ModelParams, acfg: AdaptiveConfig, T: float,
                            cfg: FixedPointConfig, phi0: np.ndarray,
                            energy_safe: bool = False, snapshot_times=(),
                            max_rejects: int = 20) -> AdaptiveRun:
    """Adaptive BDF2 march to time T with the rate-based step controller.

    The controller step is additionally clamped so snapshot times and T are
    hit exactly.  In energy-safe mode each step also respects the
    dissipation cap (with the worst-case future ratio) and the solvability
    cap.  A diverged fixed point rejects the step and halves tau.
    """
    start_wall = time.perf_counter()
    run = AdaptiveRun()
    g = p.grid
    vol0 = inner(g, phi0, np.ones_like(phi0))
    pending_snaps = sorted(tt for tt in snapshot_times if tt <= T)

    def clamp_to_events(t_now, tau):
        # land exactly on the next snapshot/final time, and never leave a
        # remainder shorter than tau_min behind
        rem = T - t_now
        for tt in pending_snaps:
            if tt > t_now + 1e-14:
                rem = min(rem, tt - t_now)
                break
        if rem < tau + acfg.tau_min:
            # equal split when the remainder alone would exceed tau_max
            return rem if rem <= acfg.tau_max else 0.5 * rem
        return tau

    def safe_cap(tau_prev_, tau_cand):
        # the caps depend on the candidate's own ratio; a few clamp passes settle it
        tau = tau_cand
        for _ in range(4):
            r = min(tau / tau_prev_, acfg.r_user)
            cap = min(stability_cap(p, r, acfg.r_user), solvability_cap(p, r))
            if tau <= cap:
                break
            tau = cap
        return tau

    # starting levels: trapezoid + BDF2 pair, both tau_min so every step of
    # the run lies inside [tau_min, tau_max]
    tau1 = acfg.tau_min
    tau2 = tau1
    phi1, phi2, iters12 = tr_bdf2_start(p, phi0, tau1, tau2, cfg)
    t1, t2 = tau1, tau1 + tau2
    run.record.append(1, t1, tau1, float("nan"), energy(p, phi1),
                      modified_energy(p, phi1, phi0, tau1, tau2),
                      inner(g, phi1, np.ones_like(phi1)), iters12, 0.0)

    prev2, prev = phi1, phi2
    t_prev, tau_prev = t2, tau2
    n = 2
    # bookkeeping for the deferred modified-energy entry of the current level
    pending = (n, t2, tau2, tau2 / tau1, prev2, prev, 0)
    while t_prev < T - 1e-12:
        rate = norm_l2(g, (prev - prev2) / tau_prev)
        tau = adaptive_next_step(acfg, tau_prev, rate)
        if energy_safe:
            tau = safe_cap(tau_prev, tau)
        tau = clamp_to_events(t_prev, tau)

        rejects = 0
        while True:
            try:
                state = SolverState(phi_prev=prev, phi_prev2=prev2,
                                    tau_prev=tau_prev, tau_cur=tau, level=n + 1)
                phi, iters = bdf2_step(p, state, cfg)
                break
            except FixedPointDiverged:
                rejects += 1
                if rejects > max_rejects:
                    raise
                tau *= 0.5

        # flush the previous level now that its successor step is known
        pn, pt, ptau, pr, pprev, pcur, pit = pending
        run.record.append(pn, pt, ptau, pr, energy(p, pcur),
                          modified_energy(p, pcur, pprev, ptau, tau),
                          inner(g, pcur, np.ones_like(pcur)), pit, 0.0)

        n += 1
        t_now = t_prev + tau
        if pending_snaps and abs(t_now - pending_snaps[0]) < 1e-10:
            run.snapshots[pending_snaps.pop(0)] = phi.copy()
        pending = (n, t_now, tau, tau / tau_prev, prev, phi, iters)
        prev2, prev = prev, phi
        t_prev, tau_prev = t_now, tau

    pn, pt, ptau, pr, pprev, pcur, pit = pending
    run.record.append(pn, pt, ptau, pr, energy(p, pcur),
                      modified_energy(p, pcur, pprev, ptau, None),
                      inner(g, pcur, np.ones_like(pcur)), pit, 0.0)
    run.levels = n
    run.final = prev
    run.wall_s = time.perf_counter() - start_wall
    assert abs(inner(g, prev, np.ones_like(prev)) - vol0) <= 1e-9 * p.L**2 + 1e-12
    return run


# ---------------------------------------------------------------------------
# experiment entry points

def run_accuracy(cfg: ExperimentConfig, out_dir: Path) -> list[dict]:
    """Temporal accuracy table on seeded random (or uniform) meshes."""
    p = cfg.params
    exact, forcing = manufactured_problem(p)
    master = np.random.default_rng(cfg.seed)
    rows = []
    for N in cfg.Ns:
        sub_seed = int(master.integers(0, 2**63 - 1))
        if cfg.mesh == "uniform":
            mesh = uniform_mesh(cfg.T, N)
        else:
            mesh = random_mesh(cfg.T, N, sub_seed)
        errs = []

        def on_level(n, t, phi, iters):
            errs.append(norm_l2(p.grid, phi - exact(t)))

        run_bdf2_on_mesh(p, mesh, cfg.fp, exact(0.0), forcing=forcing,
                         starter=cfg.starter, on_level=on_level)
        rows.append({
            "N": N,
            "tau": mesh.max_step(),
            "e": max(errs),
            "max_ratio": mesh.max_ratio(),
            "N1": mesh.count_ratios_above(RATIO_TABLE_THRESHOLD),
        })
    orders = convergence_order([r["e"] for r in rows], [r["tau"] for r in rows])
    for i, row in enumerate(rows):
        row["order"] = float(orders[i - 1]) if i > 0 else float("nan")
    with open(out_dir / "accuracy.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["N", "tau", "e", "order", "max_r", "N1"])
        for r in rows:
            w.writerow([r["N"], repr(r["tau"]), repr(r["e"]), repr(r["order"]),
                        repr(r["max_ratio"]), r["N1"]])
    write_manifest(cfg, out_dir)
    return rows


def total_variation(slice_values: np.ndarray) -> float:
    return float(np.sum(np.abs(np.diff(slice_values))))


def run_compare(cfg: ExperimentConfig, out_dir: Path) -> dict:
    """Scheme comparison on shared random initial data; per-run slice + energy CSVs."""
    p = cfg.params
    phi0 = random_initial(p, cfg.seed)
    mid = p.M // 2
    summary = {"runs": [], "reference": None}

    def run_one(scheme, tau, tag):
        mesh = uniform_mesh(cfg.T, max(1, round(cfg.T / tau)))
        if scheme == "bdf2" and len(mesh) == 1:
            # a single interval still needs two levels for the two-step scheme
            tau1, tau2 = split_first_interval(float(mesh.steps[0]))
            mesh = TimeMesh.from_steps([tau1, tau2])
        elif scheme == "bdf2":
            tau1, tau2 = split_first_interval(float(mesh.steps[0]))
            mesh = TimeMesh.from_steps([tau1, tau2] + list(mesh.steps[1:]))
        energies = []

        def on_level(n, t, phi, iters):
            energies.append((t, energy(p, phi), inner(p.grid, phi, np.ones_like(phi))))

        final = run_scheme_on_mesh(p, scheme, mesh, cfg.fp, phi0, on_level=on_level)
        slice_vals = final[:, mid]
        with open(out_dir / f"slice_{tag}.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["i", "x", "phi"])
            for i, v in enumerate(slice_vals):
                w.writerow([i, repr(i * p.grid.h), repr(float(v))])
        with open(out_dir / f"energy_{tag}.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "energy", "volume"])
            for t, E, vol in energies:
                w.writerow([repr(t), repr(E), repr(vol)])
        return final, slice_vals

    ref_tag = f"bdf2_tau{cfg.tau_ref:g}"
    ref_final, ref_slice = run_one("bdf2", cfg.tau_ref, ref_tag)
    summary["reference"] = {"tag": ref_tag, "tv": total_variation(ref_slice)}

    for scheme in ("bdf2", "cn", "cncs"):
        for tau in cfg.taus:
            tag = f"{scheme}_tau{tau:g}"
            try:
                final, slice_vals = run_one(scheme, tau, tag)
            except FixedPointDiverged as exc:
                summary["runs"].append({"tag": tag, "failed": str(exc)})
                continue
            summary["runs"].append({
                "tag": tag,
                "scheme": scheme,
                "tau": tau,
                "tv": total_variation(slice_vals),
                "max_err_vs_ref": float(np.max(np.abs(final - ref_final))),
            })
    (out_dir / "compare_summary.json").write_text(json.dumps(summary, indent=2))
    write_manifest(cfg, out_dir)
    return summary


def run_adaptive(cfg: ExperimentConfig, out_dir: Path) -> dict:
    """Adaptive-parameter study: one run per beta, optional uniform reference."""
    p = cfg.params
    phi0 = random_initial(p, cfg.seed)
    summary = {"runs": []}
    for beta in cfg.betas:
        acfg = AdaptiveConfig(tau_min=cfg.tau_min, tau_max=cfg.tau_max,
                              beta=float(beta), r_user=cfg.r_user)
        run = run_adaptive_simulation(p, acfg, cfg.T, cfg.fp, phi0,
                                      energy_safe=cfg.energy_safe)
        tag = f"beta{beta:g}"
        run.record.to_csv(out_dir / f"record_{tag}.csv")
        summary["runs"].append({"beta": beta, "levels": run.levels, "cpu_s": run.wall_s})
    if cfg.reference:
        mesh = uniform_mesh(cfg.T, round(cfg.T / cfg.tau_ref))
        rec = RunRecord()

        def on_level(n, t, phi, iters):
            rec.append(n, t, float(mesh.steps[n - 1]), float("nan"), energy(p, phi),
                       float("nan"), inner(p.grid, phi, np.ones_like(phi)), iters, 0.0)

        run_bdf2_on_mesh(p, mesh, cfg.fp, phi0, on_level=on_level)
        rec.to_csv(out_dir / "record_reference.csv")
        summary["reference_levels"] = len(mesh)
    (out_dir / "adaptive_summary.json").write_text(json.dumps(summary, indent=2))
    write_manifest(cfg, out_dir)
    return summary


def run_coarsen(cfg: ExperimentConfig, out_dir: Path) -> dict:
    """Long-time coarsening with snapshots and the energy scaling fit."""
    p = cfg.params
    phi0 = random_initial(p, cfg.seed)
    acfg = AdaptiveConfig(tau_min=cfg.tau_min, tau_max=cfg.tau_max,
                          beta=cfg.beta, r_user=cfg.r_user)
    run = run_adaptive_simulation(p, acfg, cfg.T, cfg.fp, phi0,
                                  energy_safe=cfg.energy_safe,
                                  snapshot_times=cfg.snapshot_times)
    run.record.to_csv(out_dir / "record.csv")
    for t_snap, phi in sorted(run.snapshots.items()):
        save_snapshot(out_dir / f"snapshot_t{t_snap:g}.bin", phi, p.L, t_snap)
        save_snapshot_csv(out_dir / f"snapshot_t{t_snap:g}.csv", phi)
    fit_lo, fit_hi = 50.0, cfg.T
    summary = {"levels": run.levels, "cpu_s": run.wall_s}
    try:
        summary["scaling_slope"] = scaling_fit(run.record, fit_lo, fit_hi)
        summary["fit_window"] = [fit_lo, fit_hi]
    except Exception as exc:  # window may be empty on short desk runs
        summary["scaling_slope"] = None
        summary["fit_error"] = str(exc)
    (out_dir / "coarsen_summary.json").write_text(json.dumps(summary, indent=2))
    write_manifest(cfg, out_dir)
    return summary


def run_certify(cfg: ExperimentConfig, out_dir: Path) -> dict:
    """Kernel certification: orthogonality, eigenvalue bounds, quadratic probes."""
    if cfg.mesh == "uniform":
        mesh = uniform_mesh(cfg.T, cfg.N)
    elif cfg.mesh == "random":
        mesh = random_mesh(cfg.T, cfg.N, cfg.seed)
    elif cfg.mesh == "random-clamped":
        rng = np.random.default_rng(cfg.seed)
        steps = [1.0]
        for _ in range(cfg.N - 1):
            steps.append(steps[-1] * rng.uniform(0.05, cfg.ratio_clamp))
        steps = np.array(steps)
        mesh = TimeMesh.from_steps(steps * cfg.T / steps.sum())
    else:
        raise ValueError(f"unknown mesh spec {cfg.mesh!r}")
    constants = stability_constants(cfg.r_user)
    report = {
        "n": len(mesh),
        "max_ratio": mesh.max_ratio(),
        "orthogonality_residual": verify_orthogonality(mesh, len(mesh)),
        "m1": constants.m1,
        "m2": constants.m2,
    }
    try:
        cert = certify_mesh(mesh, constants)
        report.update({"lambda_min": cert.lambda_min, "lambda_max": cert.lambda_max,
                       "pass": bool(cert.passed)})
    except RatioExceedsUser as exc:
        report.update({"error": "RatioExceedsUser", "detail": str(exc), "pass": False})
    probes = quadratic_form_probes(mesh, trials=200, constants=constants)
    report["probe_violations"] = (probes.violations_positive_definite
                                  + probes.violations_sandwich_lower
                                  + probes.violations_sandwich_upper
                                  + probes.violations_young)
    report["pass"] = bool(report.get("pass", False)) and probes.passed \
        and report["orthogonality_residual"] <= 1e-11
    (out_dir / "certify.json").write_text(json.dumps(report, indent=2))
    write_manifest(cfg, out_dir)
    return report


RUNNERS = {
    "accuracy": run_accuracy,
    "compare": run_compare,
    "adaptive": run_adaptive,
    "coarsen": run_coarsen,
    "certify": run_certify,
}


def run_experiment(cfg: ExperimentConfig):
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    return RUNNERS[cfg.kind](cfg, out_dir)
