# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled regularized-risk solver (hot kernel).

Mirrors ``_svr_py.svr_solve`` step for step; see that module for the
algorithm description. Plain C loops instead of BLAS calls, so the float
summation order differs from the numpy fallback by a few ulps.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()


cdef double _objective(const double[:, ::1] x, const double[::1] y,
                       const double[::1] beta, double b0,
                       int loss_kind, double epsilon, double c_over_n) nogil:
    cdef Py_ssize_t n = x.shape[0], p = x.shape[1]
    cdef Py_ssize_t i, j
    cdef double pred, r, loss_sum = 0.0, reg = 0.0, l
    for i in range(n):
        pred = b0
        for j in range(p):
            pred += x[i, j] * beta[j]
        r = y[i] - pred
        if loss_kind == 0:
            l = fabs(r) - epsilon
            if l > 0.0:
                loss_sum += l
        else:
            loss_sum += r * r
    for j in range(p):
        reg += beta[j] * beta[j]
    return 0.5 * reg + c_over_n * loss_sum


def svr_solve(object x_in, object y_in, int loss_kind, double epsilon,
              double c, int max_iters, double tol, double learning_rate):
    """Compiled twin of ``_svr_py.svr_solve`` (same contract)."""
    cdef const double[:, ::1] xv = np.ascontiguousarray(x_in, dtype=np.float64)
    cdef const double[::1] yv = np.ascontiguousarray(y_in, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], p = xv.shape[1]
    cdef double c_over_n = c / n

    cdef cnp.ndarray[double, ndim=1] beta_arr = np.zeros(p)
    cdef cnp.ndarray[double, ndim=1] avg_arr = np.zeros(p)
    cdef cnp.ndarray[double, ndim=1] best_arr = np.zeros(p)
    cdef cnp.ndarray[double, ndim=1] gsl_arr = np.zeros(p)
    cdef cnp.ndarray[double, ndim=1] trace_arr = np.empty(max_iters)
    cdef double[::1] beta = beta_arr
    cdef double[::1] avg_beta = avg_arr
    cdef double[::1] best_beta = best_arr
    cdef double[::1] g_slope = gsl_arr
    cdef double[::1] trace = trace_arr

    cdef double b0 = 0.0, avg_b0 = 0.0, best_b0 = 0.0
    cdef double best = _objective(xv, yv, beta, b0, loss_kind, epsilon, c_over_n)
    cdef double last_check = best
    cdef bint converged = False
    cdef Py_ssize_t iterations = 0, i, j
    cdef int t, window_start = 1, span
    cdef bint restart
    cdef double pred, r, w, g0, gnorm, step, obj

    for t in range(1, max_iters + 1):
        for j in range(p):
            g_slope[j] = 0.0
        g0 = 0.0
        for i in range(n):
            pred = b0
            for j in range(p):
                pred += xv[i, j] * beta[j]
            r = yv[i] - pred
            if loss_kind == 0:
                if r > epsilon:
                    w = -1.0
                elif r < -epsilon:
                    w = 1.0
                else:
                    w = 0.0
            else:
                w = -2.0 * r
            for j in range(p):
                g_slope[j] += w * xv[i, j]
            g0 += w
        g0 *= c_over_n
        for j in range(p):
            g_slope[j] = beta[j] + c_over_n * g_slope[j]

        gnorm = g0 * g0
        for j in range(p):
            gnorm += g_slope[j] * g_slope[j]
        gnorm = sqrt(gnorm)
        if gnorm > 0.0:
            step = learning_rate / sqrt(<double> t) / gnorm
            for j in range(p):
                beta[j] -= step * g_slope[j]
            b0 -= step * g0

        restart = t == 2 * window_start
        if restart:
            # running mean restarts at every doubling of t (tail averaging);
            # convergence is checked on the same schedule
            window_start = t
            for j in range(p):
                avg_beta[j] = beta[j]
            avg_b0 = b0
        else:
            span = t - window_start + 1
            for j in range(p):
                avg_beta[j] += (beta[j] - avg_beta[j]) / span
            avg_b0 += (b0 - avg_b0) / span

        obj = _objective(xv, yv, avg_beta, avg_b0, loss_kind, epsilon, c_over_n)
        if obj < best:
            best = obj
            for j in range(p):
                best_beta[j] = avg_beta[j]
            best_b0 = avg_b0
        trace[t - 1] = best
        iterations = t
        if restart and t >= 64:  # earlier windows are too short to judge
            if last_check - best < tol:
                converged = True
                break
            last_check = best

    return (best_arr.copy(), best_b0, best, int(iterations), bool(converged),
            trace_arr[:iterations].copy())
