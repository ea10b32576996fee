# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled per-sample GEV log-likelihood and score reductions."""
import numpy as np

from libc.math cimport exp, log, log1p, fabs, INFINITY, NAN

DEF LOGU_CUT = 1e-5
DEF DLOGU_CUT = 1e-4


cdef inline double _log_u(double g, double z, double gz) nogil:
    if fabs(gz) < LOGU_CUT:
        return -z + g * z * z / 2.0 - g * g * z * z * z / 3.0 + g * g * g * z * z * z * z / 4.0
    return -log1p(gz) / g


cdef inline double _dlogu(double g, double z, double gz, double w) nogil:
    cdef double d
    if fabs(gz) < DLOGU_CUT:
        return z * z * (0.5 - 2.0 / 3.0 * gz + 0.75 * gz * gz - 0.8 * gz * gz * gz)
    d = (log1p(gz) / g - z / w) / g
    return d if d > 0.0 else 0.0


def loglik_sum(double gamma, double mu, double sigma, const double[::1] x):
    """Sum of log-densities, or -inf if any observation is outside the support."""
    cdef Py_ssize_t i, n = x.shape[0]
    cdef double z, gz, w, lu, acc = 0.0
    cdef double log_sigma = log(sigma)
    with nogil:
        for i in range(n):
            z = (x[i] - mu) / sigma
            gz = gamma * z
            w = 1.0 + gz
            if not (w > 0.0):
                acc = -INFINITY
                break
            lu = _log_u(gamma, z, gz)
            acc += -log_sigma - exp(lu) + (gamma + 1.0) * lu
    return acc


def loglik_score_sum(double gamma, double mu, double sigma, const double[::1] x):
    """Return ``(sum log p, sum score)``; ``(-inf, nan*3)`` when any point is outside."""
    cdef Py_ssize_t i, n = x.shape[0]
    cdef double z, gz, w, lu, u, dl, acc = 0.0
    cdef double sg = 0.0, sm = 0.0, ss = 0.0
    cdef double log_sigma = log(sigma)
    cdef bint bad = False
    with nogil:
        for i in range(n):
            z = (x[i] - mu) / sigma
            gz = gamma * z
            w = 1.0 + gz
            if not (w > 0.0):
                bad = True
                break
            lu = _log_u(gamma, z, gz)
            u = exp(lu)
            acc += -log_sigma - u + (gamma + 1.0) * lu
            dl = _dlogu(gamma, z, gz, w)
            sg += (1.0 - u) * dl - z / w
            sm += (gamma + 1.0 - u) / (sigma * w)
            ss += ((1.0 - u) * z - 1.0) / (sigma * w)
    if bad:
        return -INFINITY, np.full(3, NAN)
    return acc, np.array([sg, sm, ss])


def score_moments(double gamma, double mu, double sigma, const double[::1] x):
    """Return ``(sum score, sum score score^T, n_outside)``."""
    cdef Py_ssize_t i, j, k, n = x.shape[0]
    cdef double z, gz, w, lu, u, dl
    cdef double s[3]
    cdef double first[3]
    cdef double second[3][3]
    cdef Py_ssize_t n_out = 0
    for j in range(3):
        first[j] = 0.0
        for k in range(3):
            second[j][k] = 0.0
    with nogil:
        for i in range(n):
            z = (x[i] - mu) / sigma
            gz = gamma * z
            w = 1.0 + gz
            if not (w > 0.0):
                n_out += 1
                continue
            lu = _log_u(gamma, z, gz)
            u = exp(lu)
            dl = _dlogu(gamma, z, gz, w)
            s[0] = (1.0 - u) * dl - z / w
            s[1] = (gamma + 1.0 - u) / (sigma * w)
            s[2] = ((1.0 - u) * z - 1.0) / (sigma * w)
            for j in range(3):
                first[j] += s[j]
                for k in range(j, 3):
                    second[j][k] += s[j] * s[k]
    out1 = np.array([first[0], first[1], first[2]])
    out2 = np.empty((3, 3))
    for j in range(3):
        for k in range(j, 3):
            out2[j, k] = second[j][k]
            out2[k, j] = second[j][k]
    return out1, out2, n_out
