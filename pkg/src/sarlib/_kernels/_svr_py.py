"""Pure-numpy regularized-risk solver, fallback for the compiled kernel.

Same algorithm as ``_svr_cy.pyx`` step for step: deterministic full-batch
subgradient descent with step learning_rate/sqrt(t) on the normalized
subgradient, running-mean iterate averaging restarted at every doubling of t
(tail averaging, so the early walk-in phase does not bias the mean), and
best-averaged-iterate tracking (subgradient steps are not descent steps, so
the solution estimate and the reported objective trace follow the best
iterate found so far, which is non-increasing by construction). Results may
differ from the compiled kernel in the last few ulps because numpy's dot
products sum in a different order than the C loops.
"""

from __future__ import annotations

import math

import numpy as np


def _objective(x, y, beta, b0, loss_kind, epsilon, c_over_n):
    r = y - (x @ beta + b0)
    if loss_kind == 0:
        loss = np.abs(r) - epsilon
        np.maximum(loss, 0.0, out=loss)
    else:
        loss = r * r
    return 0.5 * float(beta @ beta) + c_over_n * float(loss.sum())


def svr_solve(x, y, loss_kind, epsilon, c, max_iters, tol, learning_rate):
    """Minimize 0.5*|slope|^2 + (c/N) * sum loss(y_i, f(x_i)).

    The intercept is not regularized. Convergence is declared when the best
    objective improves by less than ``tol`` over a doubling window (t/2 .. t),
    the natural scale for the 1/sqrt(t) step schedule. Returns
    (slope, intercept, objective, iterations, converged, trace) where trace[t]
    is the best objective seen up to iteration t+1.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    n, p = x.shape
    c_over_n = c / n

    beta = np.zeros(p)
    b0 = 0.0
    avg_beta = np.zeros(p)
    avg_b0 = 0.0
    best_beta = np.zeros(p)
    best_b0 = 0.0
    best = _objective(x, y, beta, b0, loss_kind, epsilon, c_over_n)
    last_check = best
    trace = np.empty(max_iters)
    converged = False
    iterations = 0
    window_start = 1  # running mean restarts at every doubling of t

    for t in range(1, max_iters + 1):
        r = y - (x @ beta + b0)
        if loss_kind == 0:
            w = np.where(np.abs(r) > epsilon, -np.sign(r), 0.0)
        else:
            w = -2.0 * r
        g_slope = beta + c_over_n * (x.T @ w)
        g0 = c_over_n * float(w.sum())
        gnorm = math.sqrt(float(g_slope @ g_slope) + g0 * g0)
        if gnorm > 0.0:
            step = learning_rate / math.sqrt(t) / gnorm
            beta = beta - step * g_slope
            b0 -= step * g0
        restart = t == 2 * window_start
        if restart:
            window_start = t
            avg_beta = beta.copy()
            avg_b0 = b0
        else:
            span = t - window_start + 1
            avg_beta += (beta - avg_beta) / span
            avg_b0 += (b0 - avg_b0) / span
        obj = _objective(x, y, avg_beta, avg_b0, loss_kind, epsilon, c_over_n)
        if obj < best:
            best = obj
            best_beta = avg_beta.copy()
            best_b0 = avg_b0
        trace[t - 1] = best
        iterations = t
        if restart and t >= 64:  # earlier windows are too short to judge
            if last_check - best < tol:
                converged = True
                break
            last_check = best

    return best_beta, best_b0, best, iterations, converged, trace[:iterations].copy()
