# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loop for contribution-feature construction.

For each sample i the kernel accumulates the m x m matrix
sum_k z(i,k) z(i,k)^T, where z(i,k) is the vector of centered (optionally
standardized) per-feature distances between samples i and k. Accumulation
over k uses Kahan compensation so large n does not erode the O(n^2)
reductions. Runs without the GIL so callers can parallelize over blocks.
"""

from libc.math cimport fabs

import numpy as np


def phi_feature_block(const double[:, ::1] x,
                      const double[:, ::1] row_mean,
                      const double[::1] grand_mean,
                      Py_ssize_t start,
                      Py_ssize_t stop,
                      bint standardize,
                      double[:, :, ::1] out):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t m = x.shape[1]
    cdef Py_ssize_t i, k, j, l, b
    cdef double zj, y, t
    scratch = np.empty((2 * m + 1) * m, dtype=np.float64)
    cdef double[::1] buf = scratch
    # buf layout: z (m), acc (m*m), comp (m*m)
    with nogil:
        for i in range(start, stop):
            b = i - start
            for j in range(2 * m * m):
                buf[m + j] = 0.0
            for k in range(n):
                for j in range(m):
                    zj = (fabs(x[i, j] - x[k, j])
                          - row_mean[i, j] - row_mean[k, j] + grand_mean[j])
                    if standardize:
                        zj /= grand_mean[j]
                    buf[j] = zj
                for j in range(m):
                    for l in range(j, m):
                        y = buf[j] * buf[l] - buf[m + m * m + j * m + l]
                        t = buf[m + j * m + l] + y
                        buf[m + m * m + j * m + l] = (t - buf[m + j * m + l]) - y
                        buf[m + j * m + l] = t
            for j in range(m):
                out[b, j, j] = buf[m + j * m + j]
                for l in range(j + 1, m):
                    out[b, j, l] = buf[m + j * m + l]
                    out[b, l, j] = buf[m + j * m + l]
