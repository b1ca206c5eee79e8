"""Time-stepping schemes for the periodic Cahn-Hilliard equation.

All schemes share one pattern: every term linear in the unknown level goes
into a Fourier-diagonal operator that is inverted exactly, and only the
cubic-type nonlinearity is lagged in a fixed-point iteration.  The lagged
splitting keeps each iteration at two transforms and conserves the volume
to roundoff because the zero mode of every Laplacian-driven term vanishes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import sqrt

import numpy as np

from ._accel import cube, max_abs_diff
from .errors import FixedPointDiverged
from .grid import Grid, laplacian
from .kernels import bdf2_coeffs

SDIRK_ALPHA = (2.0 - sqrt(2.0)) / 2.0
TR_BDF2_RATIO = sqrt(2.0) / 2.0  # recommended r_2 for the trapezoidal start


@dataclass(frozen=True)
class ModelParams:
    kappa: float
    epsilon: float
    L: float
    M: int

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.M % 2 != 0:
            raise ValueError(f"M must be even, got {self.M}")

    @property
    def grid(self) -> Grid:
        return _grid(self.L, self.M)


@lru_cache(maxsize=32)
def _grid(L: float, M: int) -> Grid:
    return Grid(L, M)


@dataclass
class FixedPointConfig:
    tol: float = 1e-12
    max_iters: int = 500

    def __post_init__(self):
        if self.tol <= 0 or self.max_iters < 1:
            raise ValueError("need tol > 0 and max_iters >= 1")


@dataclass
class SolverState:
    """Scheme history: phi_prev is level n-1, phi_prev2 is level n-2 (None before level 2)."""

    phi_prev: np.ndarray
    tau_cur: float
    level: int = 1
    phi_prev2: np.ndarray | None = None
    tau_prev: float | None = None


def chemical_potential(p: ModelParams, phi: np.ndarray) -> np.ndarray:
    """mu = phi^3 - phi - eps^2 * Laplacian(phi), with a collocation cube."""
    return cube(phi) - phi - p.epsilon**2 * laplacian(p.grid, phi)


def fixed_point_solve(g: Grid, multiplier, known_hat, guess, cfg: FixedPointConfig,
                      nonlinear=cube, nl_mult=None):
    """Iterate phi <- invert(known_hat + nl_mult * fft(nonlinear(phi))).

    multiplier is the Fourier symbol of the implicit linear operator;
    nl_mult is the symbol applied to the lagged nonlinearity (None for a
    purely linear solve).  Returns (field, iterations).
    """
    if np.min(multiplier) <= 0.0:
        raise FixedPointDiverged(
            "implicit operator is not positive: step size violates the solvability cap"
        )
    phi = guess
    for it in range(1, cfg.max_iters + 1):
        rhs_hat = known_hat
        if nl_mult is not None:
            rhs_hat = rhs_hat + nl_mult * g.to_spectral(nonlinear(phi))
        phi_new = g.to_physical(rhs_hat / multiplier)
        if max_abs_diff(phi_new, phi) <= cfg.tol:
            return phi_new, it
        phi = phi_new
    raise FixedPointDiverged(
        f"no convergence in {cfg.max_iters} iterations",
        iterations=cfg.max_iters,
        residual=max_abs_diff(phi_new, phi),
    )


def solvability_cap(p: ModelParams, r_n: float) -> float:
    """Step bound making the implicit step a convex minimization: 4*eps^2*(1+2r)/(kappa*(1+r))."""
    return 4.0 * p.epsilon**2 * (1.0 + 2.0 * r_n) / (p.kappa * (1.0 + r_n))


def bdf2_step(p: ModelParams, state: SolverState, cfg: FixedPointConfig,
              forcing: np.ndarray | None = None):
    """One variable-step BDF2 level; returns (phi_n, iterations)."""
    if state.phi_prev2 is None or state.tau_prev is None:
        raise ValueError("bdf2_step needs two history levels")
    g = p.grid
    b0, b1 = bdf2_coeffs(state.tau_prev, state.tau_cur)
    k2 = g.k2
    multiplier = b0 - p.kappa * k2 + p.kappa * p.epsilon**2 * k2 * k2
    known = b0 * state.phi_prev - b1 * (state.phi_prev - state.phi_prev2)
    if forcing is not None:
        known = known + forcing
    known_hat = g.to_spectral(known)
    return fixed_point_solve(
        g, multiplier, known_hat, state.phi_prev, cfg, nonlinear=cube, nl_mult=-p.kappa * k2
    )


def bdf2_residual(p: ModelParams, state: SolverState, phi: np.ndarray,
                  forcing: np.ndarray | None = None) -> float:
    """Max-norm defect of phi plugged back into the BDF2 scheme equation."""
    g = p.grid
    b0, b1 = bdf2_coeffs(state.tau_prev, state.tau_cur)
    lhs = b0 * (phi - state.phi_prev) + b1 * (state.phi_prev - state.phi_prev2)
    rhs = p.kappa * laplacian(g, chemical_potential(p, phi))
    if forcing is not None:
        rhs = rhs + forcing
    return float(np.max(np.abs(lhs - rhs)))


def trapezoid_step(p: ModelParams, phi0: np.ndarray, tau: float, cfg: FixedPointConfig,
                   forcing_pair=None):
    """Crank-Nicolson step with the full chemical potential at both ends.

    forcing_pair, when given, is (g at t, g at t+tau); the average is used.
    """
    g = p.grid
    k2 = g.k2
    half = 0.5 * p.kappa
    multiplier = 1.0 / tau - half * k2 + half * p.epsilon**2 * k2 * k2
    known_hat = g.to_spectral(phi0) / tau - half * k2 * g.to_spectral(chemical_potential(p, phi0))
    if forcing_pair is not None:
        known_hat = known_hat + g.to_spectral(0.5 * (forcing_pair[0] + forcing_pair[1]))
    return fixed_point_solve(g, multiplier, known_hat, phi0, cfg, nonlinear=cube, nl_mult=-half * k2)


def tr_bdf2_start(p: ModelParams, phi0: np.ndarray, tau1: float, tau2: float,
                  cfg: FixedPointConfig, forcing=None, t0: float = 0.0):
    """Two starting levels: trapezoidal substep then a BDF2 substep.

    forcing is an optional callable t -> field.  With tau2/tau1 = sqrt(2)/2
    the pair is the L-stable composition with gamma = 2 - sqrt(2).
    Returns (phi1, phi2, iterations).
    """
    pair = None
    if forcing is not None:
        pair = (forcing(t0), forcing(t0 + tau1))
    phi1, it1 = trapezoid_step(p, phi0, tau1, cfg, forcing_pair=pair)
    state = SolverState(phi_prev=phi1, phi_prev2=phi0, tau_prev=tau1, tau_cur=tau2, level=2)
    f2 = forcing(t0 + tau1 + tau2) if forcing is not None else None
    phi2, it2 = bdf2_step(p, state, cfg, forcing=f2)
    return phi1, phi2, it1 + it2


def sdirk2_start(p: ModelParams, phi0: np.ndarray, tau1: float, cfg: FixedPointConfig,
                 forcing=None, t0: float = 0.0):
    """First level by the two-stage L-stable DIRK scheme with alpha = (2-sqrt(2))/2."""
    g = p.grid
    k2 = g.k2
    a = SDIRK_ALPHA
    eps2 = p.epsilon**2

    g_a = forcing(t0 + a * tau1) if forcing is not None else None
    mult1 = 1.0 / (a * tau1) - p.kappa * k2 + p.kappa * eps2 * k2 * k2
    known_hat = g.to_spectral(phi0) / (a * tau1)
    if g_a is not None:
        known_hat = known_hat + g.to_spectral(g_a)
    phi_a, it1 = fixed_point_solve(g, mult1, known_hat, phi0, cfg, nonlinear=cube,
                                   nl_mult=-p.kappa * k2)

    mult2 = 1.0 / tau1 - a * p.kappa * k2 + a * p.kappa * eps2 * k2 * k2
    stage_rhs_hat = -p.kappa * k2 * g.to_spectral(chemical_potential(p, phi_a))
    if g_a is not None:
        stage_rhs_hat = stage_rhs_hat + g.to_spectral(g_a)
    known_hat = g.to_spectral(phi0) / tau1 + (1.0 - a) * stage_rhs_hat
    if forcing is not None:
        known_hat = known_hat + a * g.to_spectral(forcing(t0 + tau1))
    phi1, it2 = fixed_point_solve(g, mult2, known_hat, phi_a, cfg, nonlinear=cube,
                                  nl_mult=-a * p.kappa * k2)
    return phi1, it1 + it2


def cn_step(p: ModelParams, state: SolverState, cfg: FixedPointConfig,
            forcing: np.ndarray | None = None):
    """Stabilized Crank-Nicolson step (midpoint potential with averaged square)."""
    g = p.grid
    k2 = g.k2
    tau = state.tau_cur
    phi_prev = state.phi_prev
    half = 0.5 * p.kappa
    multiplier = 1.0 / tau - half * k2 + half * p.epsilon**2 * k2 * k2
    prev_hat = g.to_spectral(phi_prev)
    known_hat = prev_hat / tau - p.kappa * k2 * (
        -0.5 * prev_hat - 0.5 * p.epsilon**2 * (-k2) * prev_hat
    )
    if forcing is not None:
        known_hat = known_hat + g.to_spectral(forcing)
    sq_prev = phi_prev * phi_prev

    def midpoint_nonlinear(phi):
        return 0.25 * (phi * phi + sq_prev) * (phi + phi_prev)

    return fixed_point_solve(g, multiplier, known_hat, phi_prev, cfg,
                             nonlinear=midpoint_nonlinear, nl_mult=-p.kappa * k2)


def cncs_step(p: ModelParams, state: SolverState, cfg: FixedPointConfig,
              forcing: np.ndarray | None = None):
    """Second-order convex-splitting Crank-Nicolson step (needs two history levels)."""
    if state.phi_prev2 is None:
        raise ValueError("cncs_step needs two history levels")
    g = p.grid
    k2 = g.k2
    tau = state.tau_cur
    phi_prev, phi_prev2 = state.phi_prev, state.phi_prev2
    eps2 = p.epsilon**2
    multiplier = 1.0 / tau + 0.75 * p.kappa * eps2 * k2 * k2
    check = 0.5 * (3.0 * phi_prev - phi_prev2)  # explicit concave part
    known_hat = (
        g.to_spectral(phi_prev) / tau
        - p.kappa * k2 * (-g.to_spectral(check) + 0.25 * eps2 * k2 * g.to_spectral(phi_prev2))
    )
    if forcing is not None:
        known_hat = known_hat + g.to_spectral(forcing)
    sq_prev = phi_prev * phi_prev

    def midpoint_nonlinear(phi):
        return 0.25 * (phi * phi + sq_prev) * (phi + phi_prev)

    return fixed_point_solve(g, multiplier, known_hat, phi_prev, cfg,
                             nonlinear=midpoint_nonlinear, nl_mult=-p.kappa * k2)


def bdf1_step(p: ModelParams, phi0: np.ndarray, tau1: float, cfg: FixedPointConfig,
              forcing: np.ndarray | None = None):
    """Backward Euler level with the full chemical potential implicit."""
    g = p.grid
    k2 = g.k2
    multiplier = 1.0 / tau1 - p.kappa * k2 + p.kappa * p.epsilon**2 * k2 * k2
    known_hat = g.to_spectral(phi0) / tau1
    if forcing is not None:
        known_hat = known_hat + g.to_spectral(forcing)
    return fixed_point_solve(g, multiplier, known_hat, phi0, cfg, nonlinear=cube,
                             nl_mult=-p.kappa * k2)


def convex_splitting_first_step(p: ModelParams, phi0: np.ndarray, tau1: float,
                                cfg: FixedPointConfig, forcing: np.ndarray | None = None):
    """First-order convex-splitting level: implicit cube and bilaplacian, explicit -phi."""
    g = p.grid
    k2 = g.k2
    multiplier = 1.0 / tau1 + p.kappa * p.epsilon**2 * k2 * k2
    known_hat = g.to_spectral(phi0) / tau1 + p.kappa * k2 * g.to_spectral(phi0)
    if forcing is not None:
        known_hat = known_hat + g.to_spectral(forcing)
    return fixed_point_solve(g, multiplier, known_hat, phi0, cfg, nonlinear=cube,
                             nl_mult=-p.kappa * k2)
