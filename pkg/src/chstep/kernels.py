"""BDF2 convolution kernels, DOC kernels and step-ratio stability machinery.

The two-step kernels b0, b1 discretize the first time derivative on a
nonuniform mesh.  The discrete orthogonal convolution (DOC) kernels theta
are their inverse under lower-triangular convolution; their positivity and
the eigenvalue bounds of the step-scaled kernel matrices underpin the
stability of the variable-step scheme.  Everything here is certified
numerically rather than assumed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from ._accel import doc_theta_matrix
from .errors import NonPositiveStep, OutOfDomain, RatioExceedsUser


class TimeMesh:
    """Monotone time levels with cached step sizes and adjacent ratios."""

    def __init__(self, levels):
        levels = np.asarray(levels, dtype=float)
        if levels.ndim != 1 or len(levels) < 2:
            raise ValueError("need at least two time levels")
        steps = np.diff(levels)
        if np.any(steps <= 0):
            raise NonPositiveStep("time levels must be strictly increasing")
        self.levels = levels
        self.steps = steps  # tau_k = t_k - t_{k-1}, k = 1..N
        self.ratios = steps[1:] / steps[:-1]  # r_k, k = 2..N

    @classmethod
    def from_steps(cls, steps, t0=0.0):
        steps = np.asarray(steps, dtype=float)
        return cls(t0 + np.concatenate(([0.0], np.cumsum(steps))))

    def __len__(self):
        return len(self.steps)

    def tau(self, k: int) -> float:
        """Step size tau_k for 1 <= k <= N."""
        return float(self.steps[k - 1])

    def ratio(self, k: int) -> float:
        """Step ratio r_k = tau_k / tau_{k-1} for 2 <= k <= N."""
        return float(self.ratios[k - 2])

    def max_ratio(self) -> float:
        return float(self.ratios.max()) if len(self.ratios) else 0.0

    def count_ratios_above(self, threshold: float) -> int:
        return int(np.count_nonzero(self.ratios >= threshold))

    def max_step(self) -> float:
        return float(self.steps.max())

    def __repr__(self):
        return f"TimeMesh(N={len(self)}, T={self.levels[-1]!r})"


def bdf2_coeffs(tau_prev: float, tau_cur: float):
    """Two-step kernels (b0, b1) for the current level, units 1/time."""
    if tau_prev <= 0 or tau_cur <= 0:
        raise NonPositiveStep(f"steps must be positive, got ({tau_prev}, {tau_cur})")
    r = tau_cur / tau_prev
    denom = tau_cur * (1.0 + r)
    return (1.0 + 2.0 * r) / denom, -(r * r) / denom


def r_star(tol: float = 1e-12) -> float:
    """Positive root of 1 + 2r - r^(3/2) = 0, located by bisection on [4, 5]."""
    f = lambda r: 1.0 + 2.0 * r - r**1.5
    lo, hi = 4.0, 5.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


R_STAR = r_star()


def R_L(z: float, s: float) -> float:
    """Gerschgorin lower-bound function for the symmetrized step-scaled matrix."""
    if z < 0 or s < 0:
        raise OutOfDomain(f"ratios must be nonnegative, got ({z}, {s})")
    return (2.0 + 4.0 * z - z**1.5) / (1.0 + z) - s**1.5 / (1.0 + s)


def R_U(z: float, s: float) -> float:
    """Gerschgorin upper-bound function for the normal matrix of the step-scaled kernels."""
    if z < 0 or s < 0:
        raise OutOfDomain(f"ratios must be nonnegative, got ({z}, {s})")
    return (1.0 + 2.0 * z) * (1.0 + 2.0 * z + z**1.5) / (1.0 + z) ** 2 + s**1.5 * (
        1.0 + 2.0 * s + s**1.5
    ) / (1.0 + s) ** 2


@dataclass(frozen=True)
class StabilityConstants:
    r_user: float
    r_star: float
    m1: float
    m2: float
    m3: float


def stability_constants(r_user: float) -> StabilityConstants:
    """Ratio-cap dependent constants bounding the kernel quadratic forms."""
    if not 0 < r_user < R_STAR:
        raise OutOfDomain(f"r_user must lie in (0, {R_STAR:.6f}), got {r_user}")
    m1 = 2.0 * (1.0 + 2.0 * r_user - r_user**1.5) / (1.0 + r_user)
    m2 = R_U(r_user, r_user)
    m_star = r_user**1.5 / (1.0 + 2.0 * r_user)
    m3 = 2.0 / (1.0 - m_star)
    return StabilityConstants(r_user=r_user, r_star=R_STAR, m1=m1, m2=m2, m3=m3)


def _b_arrays(mesh: TimeMesh, n: int):
    """Vectors of b0^(k), b1^(k) for k = 2..n."""
    taus = mesh.steps[1:n]  # tau_2..tau_n
    rs = mesh.ratios[: n - 1]  # r_2..r_n
    denom = taus * (1.0 + rs)
    return (1.0 + 2.0 * rs) / denom, -(rs * rs) / denom


def doc_kernels(mesh: TimeMesh, n: int) -> np.ndarray:
    """DOC kernel row (theta_{n-j}^{(n)} for j = 2..n) by the closed product formula.

    theta_{n-j}^{(n)} = (1/b0^(j)) prod_{i=j+1..n} r_i^2/(1+2r_i), every factor
    positive.  The product is taken directly when it cannot overflow or
    underflow, otherwise in log space (far-off-diagonal underflow to zero is
    benign there).
    """
    if n < 2 or n > len(mesh):
        raise ValueError(f"level index n must be in [2, {len(mesh)}], got {n}")
    b0, _ = _b_arrays(mesh, n)
    rs = mesh.ratios[: n - 1]
    f = rs * rs / (1.0 + 2.0 * rs)  # factor for i = 2..n
    logf = np.log(f)
    # cumulative log-products S_j = sum_{i=j+1..n} logf_i
    csum = np.concatenate(([0.0], np.cumsum(logf[::-1])))[::-1]  # csum[j-2] = sum_{i=j+1..n}
    if np.max(np.abs(csum)) < 600.0:
        prod = np.concatenate(([1.0], np.cumprod(f[::-1])))[::-1]
        return prod[1:] / b0
    return np.exp(csum[1:] - np.log(b0))


def doc_kernels_recursive(mesh: TimeMesh, n: int) -> np.ndarray:
    """DOC kernel row by the defining recursion; test oracle for doc_kernels."""
    if n < 2 or n > len(mesh):
        raise ValueError(f"level index n must be in [2, {len(mesh)}], got {n}")
    b0, b1 = _b_arrays(mesh, n)
    theta = np.zeros(n - 1)  # theta[j-2] = theta_{n-j}^{(n)}
    theta[n - 2] = 1.0 / b0[n - 2]
    for k in range(n - 1, 1, -1):
        # theta_{n-k}^{(n)} = -(1/b0^(k)) sum_{j=k+1..n} theta_{n-j}^{(n)} b_{j-k}^{(j)}
        # b_{j-k}^{(j)} vanishes except j = k+1.
        theta[k - 2] = -theta[k - 1] * b1[k - 1] / b0[k - 2]
    return theta


def bdf2_matrix(mesh: TimeMesh, n: int) -> np.ndarray:
    """Lower-bidiagonal kernel matrix B2 of size (n-1) x (n-1)."""
    b0, b1 = _b_arrays(mesh, n)
    B = np.diag(b0)
    B[np.arange(1, n - 1), np.arange(n - 2)] = b1[1:]
    return B


def doc_matrix(mesh: TimeMesh, n: int) -> np.ndarray:
    """Lower-triangular DOC kernel matrix Theta2 = B2^{-1} via the product formula."""
    taus = np.asarray(mesh.steps[1:n])
    rs = np.asarray(mesh.ratios[: n - 1])
    return doc_theta_matrix(taus, rs)


def verify_orthogonality(mesh: TimeMesh, N: int) -> float:
    """Max residual of both orthogonality identities over 2 <= k <= n <= N."""
    if N < 2 or N > len(mesh):
        raise ValueError(f"N must be in [2, {len(mesh)}], got {N}")
    B2 = bdf2_matrix(mesh, N)
    T2 = doc_matrix(mesh, N)
    eye = np.eye(N - 1)
    res1 = np.abs(T2 @ B2 - eye).max()
    res2 = np.abs(B2 @ T2 - eye).max()
    return float(max(res1, res2))


def _step_scaled_diagonals(mesh: TimeMesh, n: int):
    """Diagonals of the step-scaled bidiagonal matrix: b~0 (main) and b~1 (sub)."""
    rs = mesh.ratios[: n - 1]
    d0 = (1.0 + 2.0 * rs) / (1.0 + rs)
    d1 = -(rs[1:] ** 1.5) / (1.0 + rs[1:])
    return d0, d1


@dataclass
class CertifyReport:
    n: int
    lambda_min: float
    lambda_max: float
    gersh_lower: float
    gersh_upper: float
    m1: float
    m2: float
    passed: bool

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.n,
                "lambda_min": self.lambda_min,
                "lambda_max": self.lambda_max,
                "gersh_lower": self.gersh_lower,
                "gersh_upper": self.gersh_upper,
                "m1": self.m1,
                "m2": self.m2,
                "pass": self.passed,
            }
        )


MAX_CERTIFY_SIZE = 10_000


def certify_mesh(mesh: TimeMesh, constants: StabilityConstants) -> CertifyReport:
    """Eigenvalue certification of the step-scaled kernel matrices.

    Checks lambda_min(B~ + B~^T) >= m1 and lambda_max(B~2^T B~2) <= m2.
    Both matrices are symmetric tridiagonal, so extreme eigenvalues come
    from the Sturm-sequence solver.
    """
    n = len(mesh)
    if n > MAX_CERTIFY_SIZE:
        raise ValueError(f"certification capped at n = {MAX_CERTIFY_SIZE}, got {n}")
    if mesh.max_ratio() > constants.r_user:
        raise RatioExceedsUser(
            f"mesh ratio {mesh.max_ratio():.4f} exceeds r_user = {constants.r_user}"
        )
    d0, d1 = _step_scaled_diagonals(mesh, n)
    if n == 2:
        lam_min = 2.0 * d0[0]
        lam_max = d0[0] ** 2
    else:
        lam_min = float(eigh_tridiagonal(2.0 * d0, d1, select="i", select_range=(0, 0), eigvals_only=True)[0])
        # B~2^T B~2 is tridiagonal: diag b0_k^2 + b1_{k+1}^2, offdiag b0_{k+1} b1_{k+1}
        m = len(d0)
        diag = d0**2
        diag[:-1] += d1**2
        off = d0[1:] * d1
        lam_max = float(eigh_tridiagonal(diag, off, select="i", select_range=(m - 1, m - 1), eigvals_only=True)[0])
    rs = np.concatenate((mesh.ratios, [0.0]))
    gersh_lower = min(R_L(rs[k], rs[k + 1]) for k in range(len(mesh.ratios)))
    gersh_upper = max(R_U(rs[k], rs[k + 1]) for k in range(len(mesh.ratios)))
    passed = lam_min >= constants.m1 - 1e-10 and lam_max <= constants.m2 + 1e-10
    return CertifyReport(
        n=n,
        lambda_min=lam_min,
        lambda_max=lam_max,
        gersh_lower=float(gersh_lower),
        gersh_upper=float(gersh_upper),
        m1=constants.m1,
        m2=constants.m2,
        passed=passed,
    )


@dataclass
class ProbeReport:
    trials: int
    violations_positive_definite: int
    violations_sandwich_lower: int
    violations_sandwich_upper: int
    violations_young: int

    @property
    def passed(self) -> bool:
        return (
            self.violations_positive_definite
            + self.violations_sandwich_lower
            + self.violations_sandwich_upper
            + self.violations_young
        ) == 0


def quadratic_form_probes(
    mesh: TimeMesh,
    trials: int,
    constants: StabilityConstants | None = None,
    rng=None,
    tol: float = 1e-12,
) -> ProbeReport:
    """Randomized checks of the kernel quadratic-form inequalities.

    For random vectors w (and v), verifies
      (i)  2 w^T B2 w >= sum_k R_L(r_k, r_{k+1}) w_k^2 / tau_k  (r_{N+1} := 0),
      (ii) (m1/m2) |Lambda w|^2 <= w^T Theta w <= m3 |Lambda w|^2,
      (iii) the Young-type bound sum theta w v <= eps sum tau v^2
            + m3/(4 m1 eps) sum tau w^2 for eps in {0.5, 1, 2}.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    if constants is None:
        constants = stability_constants(4.0)
    n = len(mesh)
    B2 = bdf2_matrix(mesh, n)
    T2 = doc_matrix(mesh, n)
    Theta = T2 + T2.T
    taus = mesh.steps[1:n]
    rs = np.concatenate((mesh.ratios, [0.0]))
    rl = np.array([R_L(rs[k], rs[k + 1]) for k in range(n - 1)])

    viol_pd = viol_lo = viol_hi = viol_young = 0
    for _ in range(trials):
        w = rng.standard_normal(n - 1)
        v = rng.standard_normal(n - 1)
        scale = float(w @ w) + 1e-300

        lhs = 2.0 * float(w @ (B2 @ w))
        rhs = float(np.sum(rl * w * w / taus))
        if lhs < rhs - tol * max(abs(lhs), abs(rhs)):
            viol_pd += 1

        quad = float(w @ (Theta @ w))
        lam_w = float(np.sum(taus * w * w))
        if quad < constants.m1 / constants.m2 * lam_w - tol * scale:
            viol_lo += 1
        if quad > constants.m3 * lam_w + tol * scale:
            viol_hi += 1

        cross = float(w @ (T2 @ v))
        for eps in (0.5, 1.0, 2.0):
            bound = eps * float(np.sum(taus * v * v)) + constants.m3 / (
                4.0 * constants.m1 * eps
            ) * float(np.sum(taus * w * w))
            if cross > bound + tol * max(abs(cross), abs(bound)):
                viol_young += 1
    return ProbeReport(
        trials=trials,
        violations_positive_definite=viol_pd,
        violations_sandwich_lower=viol_lo,
        violations_sandwich_upper=viol_hi,
        violations_young=viol_young,
    )
