"""Periodic 2-D grid, FFT-based differential operators and discrete norms.

Grid functions are plain numpy arrays of shape (M, M) indexed as v[i, j]
for the point (x_i, y_j) = (i*h, j*h).  Their spectral duals are complex
arrays of the same shape in numpy FFT ordering.
"""

from __future__ import annotations

import numpy as np

from .errors import NonZeroMean

MEAN_ZERO_RTOL = 1e-10


class Grid:
    """Uniform periodic grid on the square (0, L)^2 with M points per side."""

    def __init__(self, L: float, M: int):
        if M < 4 or M % 2 != 0:
            raise ValueError(f"M must be an even integer >= 4, got {M}")
        if L <= 0:
            raise ValueError(f"L must be positive, got {L}")
        self.L = float(L)
        self.M = int(M)
        self.h = self.L / self.M
        self.nu = 2.0 * np.pi / self.L

        # Wavenumbers nu*l for l in FFT ordering {0,...,M/2-1,-M/2,...,-1}.
        k1 = self.nu * np.fft.fftfreq(M, d=1.0 / M)
        self.kx = k1[:, None] * np.ones((1, M))
        self.ky = np.ones((M, 1)) * k1[None, :]
        self.k2 = self.kx**2 + self.ky**2

        # First derivatives drop the unmatched -M/2 mode to keep outputs real.
        k1_odd = k1.copy()
        k1_odd[M // 2] = 0.0
        self.kx_odd = k1_odd[:, None] * np.ones((1, M))
        self.ky_odd = np.ones((M, 1)) * k1_odd[None, :]

    def points(self):
        """Return (x, y) coordinate arrays of shape (M, M)."""
        c = self.h * np.arange(self.M)
        return np.meshgrid(c, c, indexing="ij")

    def to_spectral(self, v: np.ndarray) -> np.ndarray:
        return np.fft.fft2(v)

    def to_physical(self, vhat: np.ndarray) -> np.ndarray:
        return np.fft.ifft2(vhat).real

    def __repr__(self):
        return f"Grid(L={self.L!r}, M={self.M})"


def laplacian(g: Grid, v: np.ndarray) -> np.ndarray:
    """Pseudo-spectral Laplacian; exact for trigonometric polynomials of degree < M/2."""
    return g.to_physical(-g.k2 * g.to_spectral(v))


def gradient(g: Grid, v: np.ndarray):
    """Pseudo-spectral gradient (d/dx, d/dy) with the Nyquist mode zeroed."""
    vhat = g.to_spectral(v)
    return (
        g.to_physical(1j * g.kx_odd * vhat),
        g.to_physical(1j * g.ky_odd * vhat),
    )


def _require_mean_zero(g: Grid, v: np.ndarray, what: str):
    vol = inner(g, v, np.ones_like(v))
    if abs(vol) > MEAN_ZERO_RTOL * norm_l2(g, v) * g.L:
        raise NonZeroMean(f"{what} requires a mean-zero field, got <v,1> = {vol:.3e}")


def inv_laplacian(g: Grid, v: np.ndarray, gamma: float = 1.0) -> np.ndarray:
    """Apply (-Laplacian)^(-gamma) to a mean-zero field; the (0,0) mode is set to zero."""
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    _require_mean_zero(g, v, "inv_laplacian")
    vhat = g.to_spectral(v)
    k2 = g.k2.copy()
    k2[0, 0] = 1.0  # dummy, zeroed below
    out = vhat / k2**gamma
    out[0, 0] = 0.0
    return g.to_physical(out)


def inner(g: Grid, u: np.ndarray, v: np.ndarray) -> float:
    """Discrete inner product h^2 * sum(u*v)."""
    return g.h**2 * float(np.sum(u * v))


def norm_l2(g: Grid, v: np.ndarray) -> float:
    return g.h * float(np.linalg.norm(v))


def norm_lq(g: Grid, v: np.ndarray, q: float) -> float:
    if q <= 0:
        raise ValueError(f"q must be positive, got {q}")
    return float((g.h**2 * np.sum(np.abs(v) ** q)) ** (1.0 / q))


def seminorm_h1(g: Grid, v: np.ndarray) -> float:
    dx, dy = gradient(g, v)
    return float(np.sqrt(g.h**2 * (np.sum(dx**2) + np.sum(dy**2))))


def norm_hm1(g: Grid, v: np.ndarray) -> float:
    """Norm induced by the inverse Laplacian on mean-zero fields."""
    _require_mean_zero(g, v, "norm_hm1")
    w = inv_laplacian(g, v, 1.0)
    return float(np.sqrt(max(inner(g, w, v), 0.0)))
