# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loop of projected dual coordinate ascent.

One call performs a full sweep over the given coordinate order, updating the
dual variables and the cached gradient ``g = Q @ alpha`` in place, and returns
the largest KKT violation seen after each coordinate's update.
"""

import numpy as np

cimport cython


cpdef double sweep(double[:, ::1] q, double[::1] alpha, double[::1] g,
                   long[::1] order):
    cdef Py_ssize_t n = alpha.shape[0]
    cdef Py_ssize_t idx, i, j
    cdef double qii, new_alpha, delta, violation, worst = 0.0
    for idx in range(n):
        i = order[idx]
        # KKT residual on arrival (post-update it is zero by construction)
        if alpha[i] > 0.0:
            violation = g[i] - 1.0
            if violation < 0.0:
                violation = -violation
        else:
            violation = 1.0 - g[i]
            if violation < 0.0:
                violation = 0.0
        if violation > worst:
            worst = violation
        qii = q[i, i]
        new_alpha = alpha[i] + (1.0 - g[i]) / qii
        if new_alpha < 0.0:
            new_alpha = 0.0
        delta = new_alpha - alpha[i]
        if delta != 0.0:
            alpha[i] = new_alpha
            for j in range(n):
                g[j] += delta * q[i, j]
    return worst
