"""Pure-numpy implementations of the hot kernels."""

import numpy as np


def cube(x: np.ndarray) -> np.ndarray:
    """Elementwise x**3 (the lagged nonlinearity of every implicit step)."""
    return x * x * x


def max_abs_diff(a: np.ndarray, b: np.ndarray) -> float:
    """max |a - b|, the fixed-point termination measure."""
    return float(np.max(np.abs(a - b)))


def doc_theta_matrix(taus: np.ndarray, rs: np.ndarray) -> np.ndarray:
    """Full lower-triangular DOC kernel matrix from the closed product form.

    taus: tau_2..tau_n (length m); rs: r_2..r_n (length m).
    Entry [k-2, j-2] = theta_{k-j}^{(k)} for 2 <= j <= k <= n.
    Computed in log space; entries far from the diagonal underflow to zero,
    which is harmless since they are genuinely negligible.
    """
    taus = np.asarray(taus, dtype=float)
    rs = np.asarray(rs, dtype=float)
    m = len(taus)
    b0 = (1.0 + 2.0 * rs) / (taus * (1.0 + rs))
    logf = np.log(rs * rs / (1.0 + 2.0 * rs))
    prefix = np.concatenate(([0.0], np.cumsum(logf[1:])))  # L_j = sum_{i=3..j} logf_i
    expo = prefix[:, None] - prefix[None, :] - np.log(b0)[None, :]
    expo = np.where(np.tril(np.ones((m, m), dtype=bool)), expo, -np.inf)
    return np.exp(expo)
