"""Linear model fitting: least squares and regularized-risk regression.

Least squares solves the normal equations of the intercept-augmented design
by Gaussian elimination with partial pivoting and a relative pivot guard.
The regularized fit minimizes 0.5*|slope|^2 + (c/N)*sum of losses by
deterministic averaged-subgradient descent (see ``_kernels``); the intercept
is left out of the regularizer so flatness pressure acts on the slope only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .dataset import Dataset, LinearModel, LossKind
from .errors import DimensionMismatch, SingularDesign

_PIVOT_REL = 1e-12


@dataclass(frozen=True)
class SvrConfig:
    """Hyperparameters of the regularized-risk fit.

    ``c`` trades empirical loss against slope flatness. The subgradient path
    uses step learning_rate/sqrt(t) on standardized data and stops once the
    best objective improves by less than ``tol`` over a 50-iteration window.
    """

    loss: LossKind = LossKind.l1(0.0)
    c: float = 10.0
    max_iters: int = 5000
    tol: float = 1e-8
    learning_rate: float = 0.1

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError("c must be > 0")
        if self.tol <= 0:
            raise ValueError("tol must be > 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")


@dataclass(frozen=True)
class SvrFit:
    """Regularized fit plus solver diagnostics.

    ``converged`` is False when max_iters was hit while the objective was
    still improving by >= tol per window; the model is returned regardless.
    ``objective_trace[t]`` is the best objective after t+1 iterations and is
    non-increasing by construction.
    """

    model: LinearModel
    objective: float
    iterations: int
    converged: bool
    objective_trace: np.ndarray


def solve_linear(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve a (small, dense) SPD-ish system by elimination, partial pivoting.

    Raises SingularDesign when a pivot falls below 1e-12 relative to the
    largest pivot encountered.
    """
    a = np.array(a, dtype=np.float64)
    b = np.array(b, dtype=np.float64)
    m = a.shape[0]
    scale = float(np.max(np.abs(a)))
    if scale == 0.0:
        raise SingularDesign("zero system matrix")
    for col in range(m):
        piv_row = col + int(np.argmax(np.abs(a[col:, col])))
        piv = abs(a[piv_row, col])
        if piv <= _PIVOT_REL * scale:
            raise SingularDesign(f"pivot {piv:.3e} below threshold at column {col}")
        if piv_row != col:
            a[[col, piv_row]] = a[[piv_row, col]]
            b[[col, piv_row]] = b[[piv_row, col]]
        factors = a[col + 1 :, col] / a[col, col]
        a[col + 1 :, col:] -= factors[:, None] * a[col, col:]
        b[col + 1 :] -= factors * b[col]
    out = np.empty(m)
    for row in range(m - 1, -1, -1):
        out[row] = (b[row] - a[row, row + 1 :] @ out[row + 1 :]) / a[row, row]
    return out


def ols_fit_xy(x: np.ndarray, y: np.ndarray) -> LinearModel:
    """Least-squares fit on raw arrays (intercept appended internally)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape[0] != y.shape[0]:
        raise DimensionMismatch("X and y row counts differ")
    xa = np.column_stack([x, np.ones(x.shape[0])])
    coef = solve_linear(xa.T @ xa, xa.T @ y)
    return LinearModel(slope=coef[:-1], intercept=float(coef[-1]))


def ols_fit(d: Dataset) -> LinearModel:
    """Least-squares minimizer of |y - f(X)|^2 via the normal equations."""
    return ols_fit_xy(d.predictors, d.response)


def svr_fit_xy(x: np.ndarray, y: np.ndarray, cfg: SvrConfig) -> SvrFit:
    """Regularized-risk fit on raw arrays."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape[0] != y.shape[0]:
        raise DimensionMismatch("X and y row counts differ")
    loss_kind = 0 if cfg.loss.is_l1 else 1
    slope, b0, obj, iters, converged, trace = _kernels.svr_solve(
        x, y, loss_kind, cfg.loss.epsilon, cfg.c, cfg.max_iters, cfg.tol,
        cfg.learning_rate,
    )
    return SvrFit(
        model=LinearModel(slope=slope, intercept=b0),
        objective=float(obj),
        iterations=int(iters),
        converged=bool(converged),
        objective_trace=trace,
    )


def svr_fit(d: Dataset, cfg: SvrConfig) -> SvrFit:
    """Fit the regularized risk functional on a dataset."""
    return svr_fit_xy(d.predictors, d.response, cfg)


def predict(m: LinearModel, x: np.ndarray) -> np.ndarray:
    """Evaluate f(x) = slope . x + intercept row-wise."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[1] != m.slope.shape[0]:
        raise DimensionMismatch(
            f"model expects {m.slope.shape[0]} predictors, got {x.shape[1]}"
        )
    return x @ m.slope + m.intercept


def residuals(m: LinearModel, d: Dataset) -> np.ndarray:
    """y - f(x) for every observation."""
    return d.response - predict(m, d.predictors)
