"""Spectral grid operators against closed-form references."""

import numpy as np
import pytest

from chstep.errors import NonZeroMean
from chstep.grid import (
    Grid,
    gradient,
    inner,
    inv_laplacian,
    laplacian,
    norm_hm1,
    norm_l2,
    norm_lq,
    seminorm_h1,
)


@pytest.fixture
def g():
    return Grid(2 * np.pi, 32)


def band_limited(g, seed=0):
    """Random real field with the Nyquist row/column and mean removed."""
    rng = np.random.default_rng(seed)
    vhat = g.to_spectral(rng.standard_normal((g.M, g.M)))
    vhat[g.M // 2, :] = 0.0
    vhat[:, g.M // 2] = 0.0
    vhat[0, 0] = 0.0
    return g.to_physical(vhat)


def test_laplacian_single_mode(g):
    x, y = g.points()
    v = np.sin(3 * x) * np.cos(2 * y)
    assert np.allclose(laplacian(g, v), -13.0 * v, atol=1e-12)


def test_gradient_single_mode(g):
    x, y = g.points()
    v = np.sin(3 * x) * np.cos(2 * y)
    gx, gy = gradient(g, v)
    assert np.allclose(gx, 3 * np.cos(3 * x) * np.cos(2 * y), atol=1e-12)
    assert np.allclose(gy, -2 * np.sin(3 * x) * np.sin(2 * y), atol=1e-12)


def test_inv_laplacian_inverts(g):
    # inv_laplacian applies (-lap)^(-1), so composing with lap negates
    v = band_limited(g, 1)
    w = laplacian(g, v)
    assert np.allclose(inv_laplacian(g, w), -v, atol=1e-12)


def test_inv_laplacian_rejects_nonzero_mean(g):
    with pytest.raises(NonZeroMean):
        inv_laplacian(g, np.ones((g.M, g.M)))


def test_green_identity(g):
    """<-lap u, v> equals <grad u, grad v> for band-limited fields."""
    u = band_limited(g, 2)
    v = band_limited(g, 3)
    lhs = inner(g, -laplacian(g, u), v)
    ux, uy = gradient(g, u)
    vx, vy = gradient(g, v)
    rhs = inner(g, ux, vx) + inner(g, uy, vy)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


def test_norms_constant_field(g):
    c = 0.7 * np.ones((g.M, g.M))
    L = g.L
    assert norm_l2(g, c) == pytest.approx(0.7 * L, rel=1e-13)
    assert norm_lq(g, c, 4) == pytest.approx(0.7 * L ** 0.5, rel=1e-13)
    assert seminorm_h1(g, c) == pytest.approx(0.0, abs=1e-13)


def test_hm1_single_mode(g):
    x, y = g.points()
    v = np.sin(x) * np.sin(y)
    # |k|^2 = 2 for this mode, so the H^-1 norm is the L2 norm / sqrt(2)
    assert norm_hm1(g, v) == pytest.approx(norm_l2(g, v) / np.sqrt(2.0), rel=1e-12)


def test_parseval(g):
    v = band_limited(g, 4)
    vhat = g.to_spectral(v)
    assert norm_l2(g, v) ** 2 == pytest.approx(
        g.h ** 2 * np.sum(np.abs(vhat) ** 2) / g.M ** 2, rel=1e-12
    )


def test_roundtrip(g):
    rng = np.random.default_rng(5)
    v = rng.standard_normal((g.M, g.M))
    assert np.allclose(g.to_physical(g.to_spectral(v)), v, atol=1e-13)
