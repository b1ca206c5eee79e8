"""Discrete energies, run records, convergence-order and scaling-law fits."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateRefinement, InsufficientData
from .grid import inner, norm_hm1, seminorm_h1

RECORD_HEADER = ["n", "t", "tau", "r", "energy", "modified_energy", "volume", "iters", "wall_ms"]


def double_well(phi: np.ndarray) -> np.ndarray:
    """F(phi) = (phi^2 - 1)^2 / 4."""
    return 0.25 * (phi * phi - 1.0) ** 2


def energy(p, phi: np.ndarray) -> float:
    """Discrete free energy eps^2/2 |grad phi|^2 + <F(phi), 1>."""
    g = p.grid
    return 0.5 * p.epsilon**2 * seminorm_h1(g, phi) ** 2 + inner(
        g, double_well(phi), np.ones_like(phi)
    )


def modified_energy(p, phi_n, phi_prev, tau_n: float, tau_next: float | None) -> float:
    """Energy plus the ratio-weighted squared H^-1 difference quotient.

    tau_next is the upcoming step; None at the final level, where the
    augmentation is dropped and the plain energy is returned.
    """
    base = energy(p, phi_n)
    if tau_next is None:
        return base
    r_next = tau_next / tau_n
    rate = norm_hm1(p.grid, (phi_n - phi_prev) / tau_n)
    weight = np.sqrt(r_next) * tau_next / (2.0 * p.kappa * (1.0 + r_next))
    return base + weight * rate**2


@dataclass
class RunRecord:
    """Per-level diagnostics rows, appendable and streamable as CSV."""

    rows: list = field(default_factory=list)

    def append(self, n, t, tau, r, E, E_mod, volume, iters, wall_ms):
        if self.rows and t <= self.rows[-1]["t"]:
            raise ValueError("rows must have strictly increasing t")
        self.rows.append(
            {
                "n": n,
                "t": t,
                "tau": tau,
                "r": r,
                "energy": E,
                "modified_energy": E_mod,
                "volume": volume,
                "iters": iters,
                "wall_ms": wall_ms,
            }
        )

    def column(self, name):
        return np.array([row[name] for row in self.rows], dtype=float)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=RECORD_HEADER)
            writer.writeheader()
            for row in self.rows:
                out = dict(row)
                for key in ("t", "tau", "r", "energy", "modified_energy", "volume"):
                    out[key] = repr(float(out[key]))
                writer.writerow(out)

    @classmethod
    def from_csv(cls, path):
        rec = cls()
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                rec.append(
                    int(row["n"]), float(row["t"]), float(row["tau"]), float(row["r"]),
                    float(row["energy"]), float(row["modified_energy"]),
                    float(row["volume"]), int(row["iters"]), float(row["wall_ms"]),
                )
        return rec


def convergence_order(errors, max_steps):
    """Per-refinement orders log(e_i/e_{i+1}) / log(tau_i/tau_{i+1})."""
    errors = np.asarray(errors, dtype=float)
    max_steps = np.asarray(max_steps, dtype=float)
    if len(errors) < 2 or len(errors) != len(max_steps):
        raise ValueError("need matching error/step lists with at least two levels")
    orders = []
    for i in range(len(errors) - 1):
        if max_steps[i] == max_steps[i + 1]:
            raise DegenerateRefinement(f"equal max steps at refinement {i}")
        orders.append(np.log(errors[i] / errors[i + 1]) / np.log(max_steps[i] / max_steps[i + 1]))
    return np.array(orders)


def scaling_fit(record: RunRecord, t_lo: float, t_hi: float, samples: int = 200) -> float:
    """Least-squares slope of log E vs log t on [t_lo, t_hi].

    The record is resampled at log-uniform times first, so adaptive runs
    that cluster levels in time do not bias the fit.
    """
    t = record.column("t")
    E = record.column("energy")
    mask = (t >= t_lo) & (t <= t_hi)
    if mask.sum() < 2:
        raise InsufficientData(f"no records inside [{t_lo}, {t_hi}]")
    if np.any(E[mask] <= 0):
        raise InsufficientData("energy must be positive for a log-log fit")
    log_t = np.log(t[mask])
    log_E = np.log(E[mask])
    ts = np.linspace(log_t[0], log_t[-1], samples)
    Es = np.interp(ts, log_t, log_E)
    return float(np.polyfit(ts, Es, 1)[0])
