"""Classical significance tests and the special functions behind them.

The slope F-test and the Breusch-Pagan heteroscedasticity test, with the
regularized incomplete beta / lower gamma functions their p-values need.
Both special functions follow the classic series / continued-fraction
evaluations (modified Lentz) to absolute error well below 1e-10.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, TestResult
from .errors import DomainError
from .regressors import ols_fit_xy, predict

_FPMIN = 1e-300
_EPS = 1e-15
_MAXIT = 500


@dataclass(frozen=True)
class AnovaDecomposition:
    """Sums of squares and mean squares of a fitted regression.

    ``ssr`` is computed as sst - sse clamped at zero, so residuals from
    arbitrary (non-least-squares) fits decompose sanely: a fit worse than
    the mean carries zero regression sum of squares.
    """

    sst: float
    sse: float
    ssr: float
    msr: float
    mse: float


def _betacf(a: float, b: float, x: float) -> float:
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise DomainError(f"incomplete beta did not converge for a={a}, b={b}, x={x}")


def reg_inc_beta(x: float, a: float, b: float) -> float:
    """Regularized incomplete beta I_x(a, b), continued-fraction evaluation."""
    if a <= 0 or b <= 0:
        raise DomainError("need a > 0 and b > 0")
    if not 0.0 <= x <= 1.0:
        raise DomainError("need x in [0, 1]")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def _gamma_p_series(x: float, k: float) -> float:
    total = 1.0 / k
    term = total
    for n in range(1, _MAXIT * 20):
        term *= x / (k + n)
        total += term
        if abs(term) < abs(total) * _EPS:
            return total * math.exp(-x + k * math.log(x) - math.lgamma(k))
    raise DomainError(f"incomplete gamma series did not converge for x={x}, k={k}")


def _gamma_q_contfrac(x: float, k: float) -> float:
    b = x + 1.0 - k
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, _MAXIT * 20):
        an = -i * (i - k)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h * math.exp(-x + k * math.log(x) - math.lgamma(k))
    raise DomainError(f"incomplete gamma fraction did not converge for x={x}, k={k}")


def reg_inc_gamma_lower(x: float, k: float) -> float:
    """Regularized lower incomplete gamma P(k, x) for shape k > 0, x >= 0.

    Series expansion for x < k + 1, continued fraction for the upper tail
    otherwise.
    """
    if k <= 0:
        raise DomainError("need shape k > 0")
    if x < 0:
        raise DomainError("need x >= 0")
    if x == 0.0:
        return 0.0
    if x < k + 1.0:
        return _gamma_p_series(x, k)
    return 1.0 - _gamma_q_contfrac(x, k)


def reg_inc_gamma_upper(x: float, k: float) -> float:
    """Q(k, x) = 1 - P(k, x), evaluated without cancellation in the far tail."""
    if k <= 0:
        raise DomainError("need shape k > 0")
    if x < 0:
        raise DomainError("need x >= 0")
    if x == 0.0:
        return 1.0
    if x < k + 1.0:
        return 1.0 - _gamma_p_series(x, k)
    return _gamma_q_contfrac(x, k)


def f_cdf(x: float, d1: int, d2: int) -> float:
    """CDF of the F distribution with (d1, d2) degrees of freedom."""
    if x <= 0:
        return 0.0
    return reg_inc_beta(d1 * x / (d1 * x + d2), d1 / 2.0, d2 / 2.0)


def f_sf(x: float, d1: int, d2: int) -> float:
    """Upper tail 1 - CDF of the F distribution, cancellation-free."""
    if x <= 0:
        return 1.0
    return reg_inc_beta(d2 / (d2 + d1 * x), d2 / 2.0, d1 / 2.0)


def chi2_cdf(x: float, dof: int) -> float:
    """CDF of the chi-square distribution with ``dof`` degrees of freedom."""
    if x <= 0:
        return 0.0
    return reg_inc_gamma_lower(x / 2.0, dof / 2.0)


def chi2_sf(x: float, dof: int) -> float:
    """Upper tail of the chi-square distribution."""
    if x <= 0:
        return 1.0
    return reg_inc_gamma_upper(x / 2.0, dof / 2.0)


def anova_decomposition(resid: np.ndarray, y: np.ndarray, p: int) -> AnovaDecomposition:
    """Sums of squares of residuals against the total variation of y."""
    y = np.asarray(y, dtype=np.float64).ravel()
    resid = np.asarray(resid, dtype=np.float64).ravel()
    n = y.shape[0]
    sst = float(np.sum((y - y.mean()) ** 2))
    sse = float(np.sum(resid**2))
    ssr = max(0.0, sst - sse)
    msr = ssr / p
    mse = sse / (n - p - 1)
    return AnovaDecomposition(sst=sst, sse=sse, ssr=ssr, msr=msr, mse=mse)


def f_test_slope(resid: np.ndarray, y: np.ndarray, p: int) -> TestResult:
    """ANOVA F-test for a nonzero slope applied to arbitrary residuals.

    F = (SSR/p) / (SSE/(N-p-1)) with SSR = max(0, SST - SSE), so residuals
    from any regressor are accepted: a fit worse than the mean yields F = 0
    and p-value 1. A numerically exact fit (SSE < 1e-14 * SST) is flagged
    degenerate with the p-value pinned to 0 rather than dividing by ~0.
    """
    y = np.asarray(y, dtype=np.float64).ravel()
    resid = np.asarray(resid, dtype=np.float64).ravel()
    n = y.shape[0]
    if resid.shape[0] != n:
        raise DomainError("residuals and y must have the same length")
    if n <= p + 1:
        raise DomainError(f"need N > p + 1, got N={n}, p={p}")
    dec = anova_decomposition(resid, y, p)
    if dec.sse < 1e-14 * dec.sst or dec.sst == 0.0:
        return TestResult(
            statistic=math.inf, dof_num=p, dof_den=n - p - 1, p_value=0.0,
            degenerate=True,
        )
    stat = dec.msr / dec.mse
    return TestResult(
        statistic=stat, dof_num=p, dof_den=n - p - 1,
        p_value=f_sf(stat, p, n - p - 1),
    )


def bp_test(resid: np.ndarray, d: Dataset) -> TestResult:
    """Breusch-Pagan heteroscedasticity test, statistic T = N * R^2.

    The squared residuals are regressed on the predictors (with intercept);
    R^2 of that auxiliary fit times N follows a chi-square with P degrees of
    freedom under homoscedasticity.
    """
    resid = np.asarray(resid, dtype=np.float64).ravel()
    n, p = d.n, d.p
    if resid.shape[0] != n:
        raise DomainError("residuals and dataset must have the same length")
    if n <= p + 1:
        raise DomainError(f"need N > P + 1, got N={n}, P={p}")
    sq = resid**2
    sst = float(np.sum((sq - sq.mean()) ** 2))
    if sst == 0.0:
        rsq = 0.0
    else:
        aux = ols_fit_xy(d.predictors, sq)
        sse = float(np.sum((sq - predict(aux, d.predictors)) ** 2))
        rsq = min(max(1.0 - sse / sst, 0.0), 1.0)
    stat = n * rsq
    return TestResult(
        statistic=stat, dof_num=p, dof_den=None, p_value=chi2_sf(stat, p)
    )
