"""Time-mesh generation and the adaptive step-size controller."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import OutOfDomain
from .kernels import R_STAR, R_L, TimeMesh


def uniform_mesh(T: float, N: int) -> TimeMesh:
    """N equal steps covering [0, T]."""
    if T <= 0 or N < 1:
        raise ValueError(f"need T > 0 and N >= 1, got T={T}, N={N}")
    return TimeMesh(np.linspace(0.0, T, N + 1))

def random_mesh(T: float, N: int, seed: int) -> TimeMesh:
    """Random steps tau_k = T*sigma_k/S with sigma_k ~ U(0,1); deterministic per seed."""
    if T <= 0 or N < 1:
        raise ValueError(f"need T > 0 and N >= 1, got T={T}, N={N}")
    rng = np.random.default_rng(seed)
    sigma = rng.uniform(0.0, 1.0, N)
    steps = T * sigma / sigma.sum()
    return TimeMesh.from_steps(steps)


@dataclass(frozen=True)
class AdaptiveConfig:
    tau_min: float
    tau_max: float
    beta: float
    r_user: float = 4.0

    def __post_init__(self):
        if not 0 < self.tau_min <= self.tau_max:
            raise ValueError(f"need 0 < tau_min <= tau_max, got ({self.tau_min}, {self.tau_max})")
        if self.beta <= 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if not 0 < self.r_user < R_STAR:
            raise OutOfDomain(f"r_user must lie in (0, {R_STAR:.4f}), got {self.r_user}")


def adaptive_next_step(cfg: AdaptiveConfig, tau_n: float, rate: float) -> float:
    """Next step from the solution change rate, capped by the ratio bound.

    tau_ada = max(tau_min, tau_max / sqrt(1 + beta*rate^2));
    tau_{n+1} = min(tau_ada, r_user * tau_n).
    """
    if tau_n <= 0:
        raise ValueError(f"tau_n must be positive, got {tau_n}")
    if rate < 0:
        raise ValueError(f"rate must be nonnegative, got {rate}")
    tau_ada = max(cfg.tau_min, cfg.tau_max / np.sqrt(1.0 + cfg.beta * rate * rate))
    return float(min(tau_ada, cfg.r_user * tau_n))


def stability_cap(params, r_n: float, r_user: float) -> float:
    """Largest step size keeping the modified energy non-increasing.

    Uses the conservative substitution s = r_user for the (unknown) next
    ratio; the bound function decreases in s, so the true cap is no smaller.
    """
    if not 0 < r_n <= r_user:
        raise OutOfDomain(f"need 0 < r_n <= r_user, got r_n={r_n}, r_user={r_user}")
    if r_user >= R_STAR:
        raise OutOfDomain(f"r_user must be below {R_STAR:.4f}, got {r_user}")
    eps2 = params.epsilon**2
    return (
        4.0
        * eps2
        / params.kappa
        * min((1.0 + 2.0 * r_n) / (1.0 + r_n), R_L(r_n, r_user))
    )


def mesh_to_csv(mesh: TimeMesh, path) -> None:
    """Write rows (k, t_k, tau_k, r_k); r_k is empty for k < 2."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "t_k", "tau_k", "r_k"])
        writer.writerow([0, repr(float(mesh.levels[0])), "", ""])
        for k in range(1, len(mesh) + 1):
            r = repr(float(mesh.ratios[k - 2])) if k >= 2 else ""
            writer.writerow([k, repr(float(mesh.levels[k])), repr(float(mesh.steps[k - 1])), r])


def mesh_from_csv(path) -> TimeMesh:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        levels = [float(row["t_k"]) for row in reader]
    return TimeMesh(levels)
