# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the local-value computation.

Mirrors ``_kernels_py`` function for function.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, sqrt

cnp.import_array()

BACKEND = "cython"


cdef inline double _gain(double o2) nogil:
    # lambda - lambda^2 / 2 with lambda = sqrt(1 - o^2)
    cdef double l2 = 1.0 - o2
    if l2 < 0.0:
        l2 = 0.0
    return sqrt(l2) - 0.5 * l2


def strategy_scores(const double[:, ::1] o):
    cdef Py_ssize_t d = o.shape[0], i, j
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((d, d), dtype=np.float64)
    cdef double[:, ::1] g = np.empty((d, d), dtype=np.float64)
    cdef double[::1] row = np.zeros(d, dtype=np.float64)
    cdef double[::1] col = np.zeros(d, dtype=np.float64)
    with nogil:
        for i in range(d):
            for j in range(d):
                g[i, j] = _gain(o[i, j] * o[i, j])
                row[i] += g[i, j]
                col[j] += g[i, j]
    for i in range(d):
        for j in range(d):
            out[i, j] = row[i] + col[j] - 2.0 * g[i, j]
    return out


def local_value_oracle(const double[:, ::1] o):
    cdef Py_ssize_t d = o.shape[0], u, v, x1, x2
    cdef int a
    cdef double lam, c, term, best_term, total, best = -1e300
    for u in range(d):
        for v in range(d):
            total = 0.0
            for x1 in range(d):
                for x2 in range(d):
                    lam = 1.0 - o[x1, x2] * o[x1, x2]
                    lam = sqrt(lam) if lam > 0.0 else 0.0
                    c = lam * ((x1 == u) - (x2 == v))
                    best_term = -1e300
                    for a in range(-1, 2):
                        term = c * a - 0.5 * lam * lam * a * a
                        if term > best_term:
                            best_term = term
                    total += best_term
            if total > best:
                best = total
    return best


def beta_l_of_unitary(const double complex[:, ::1] u):
    """max over strategies of the score table for the overlap |u|."""
    cdef Py_ssize_t d = u.shape[0], i, j
    cdef double g_ij, s, best = -1e300
    cdef double[:, ::1] g = np.empty((d, d), dtype=np.float64)
    cdef double[::1] row = np.zeros(d, dtype=np.float64)
    cdef double[::1] col = np.zeros(d, dtype=np.float64)
    with nogil:
        for i in range(d):
            for j in range(d):
                g_ij = _gain(u[i, j].real * u[i, j].real + u[i, j].imag * u[i, j].imag)
                g[i, j] = g_ij
                row[i] += g_ij
                col[j] += g_ij
        for i in range(d):
            for j in range(d):
                s = row[i] + col[j] - 2.0 * g[i, j]
                if s > best:
                    best = s
    return best


def soft_beta_l_of_unitary(const double complex[:, ::1] u, double temperature):
    """(T log sum exp(s/T), max s) over the score table of |u|."""
    cdef Py_ssize_t d = u.shape[0], i, j
    cdef double g_ij, s, acc = 0.0, best = -1e300
    cdef double[:, ::1] g = np.empty((d, d), dtype=np.float64)
    cdef double[::1] row = np.zeros(d, dtype=np.float64)
    cdef double[::1] col = np.zeros(d, dtype=np.float64)
    with nogil:
        for i in range(d):
            for j in range(d):
                g_ij = _gain(u[i, j].real * u[i, j].real + u[i, j].imag * u[i, j].imag)
                g[i, j] = g_ij
                row[i] += g_ij
                col[j] += g_ij
        for i in range(d):
            for j in range(d):
                s = row[i] + col[j] - 2.0 * g[i, j]
                if s > best:
                    best = s
        for i in range(d):
            for j in range(d):
                acc += exp((row[i] + col[j] - 2.0 * g[i, j] - best) / temperature)
    return best + temperature * log(acc), best
