# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot kernels."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def cube(object x):
    """Elementwise x**3 over a C-contiguous float64 array."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] flat = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty_like(flat)
    cdef Py_ssize_t i, n = flat.shape[0]
    cdef double v
    for i in range(n):
        v = flat[i]
        out[i] = v * v * v
    return out.reshape(x.shape)


def max_abs_diff(object a, object b):
    """max |a - b| without allocating a temporary."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] fa = np.ascontiguousarray(a, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] fb = np.ascontiguousarray(b, dtype=np.float64).ravel()
    cdef Py_ssize_t i, n = fa.shape[0]
    cdef double d, best = 0.0
    for i in range(n):
        d = fa[i] - fb[i]
        if d < 0:
            d = -d
        if d > best:
            best = d
    return best


def doc_theta_matrix(object taus, object rs):
    """Full lower-triangular DOC kernel matrix, built row-wise in O(m^2).

    Within a row the entries satisfy
        theta[k, j] = theta[k, j+1] * (b0_{j+1} / b0_j) * f_{j+1},
    with f_i = r_i^2 / (1 + 2 r_i), starting from theta[k, k] = 1 / b0_k.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=1] t = np.ascontiguousarray(taus, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] r = np.ascontiguousarray(rs, dtype=np.float64)
    cdef Py_ssize_t m = t.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] b0 = np.empty(m)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] f = np.empty(m)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] theta = np.zeros((m, m))
    cdef Py_ssize_t k, j
    cdef double acc
    for j in range(m):
        b0[j] = (1.0 + 2.0 * r[j]) / (t[j] * (1.0 + r[j]))
        f[j] = r[j] * r[j] / (1.0 + 2.0 * r[j])
    for k in range(m):
        acc = 1.0 / b0[k]
        theta[k, k] = acc
        for j in range(k - 1, -1, -1):
            acc = acc * (b0[j + 1] / b0[j]) * f[j + 1]
            theta[k, j] = acc
    return theta
