"""Core domain types: datasets, fitted linear models, losses, test results.

All types are immutable after construction (arrays are marked read-only) and
safe to share across threads; the operations here are pure functions.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import BadFoldCount, ConstantColumn, DimensionMismatch
from .rng import RandomStream

_STD_TOL = 1e-9
_SD_FLOOR = 1e-12


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    """N observations of P predictors plus a response.

    ``predictors`` is N x P, ``response`` length N; all entries finite,
    N >= 3, P >= 1. When ``standardized`` is set, every column (predictors
    and response) must have sample mean ~0 and sample sd ~1 (tolerance 1e-9);
    the pre-standardization means/sds are kept so the transform round-trips.
    """

    predictors: np.ndarray
    response: np.ndarray
    standardized: bool = False
    column_names: tuple[str, ...] | None = None
    pred_means: np.ndarray | None = None
    pred_sds: np.ndarray | None = None
    resp_mean: float | None = None
    resp_sd: float | None = None

    def __post_init__(self):
        x = _readonly(np.atleast_2d(self.predictors))
        y = _readonly(np.asarray(self.response).ravel())
        object.__setattr__(self, "predictors", x)
        object.__setattr__(self, "response", y)
        n, p = x.shape
        if n < 3 or p < 1:
            raise ValueError(f"need N >= 3 and P >= 1, got N={n}, P={p}")
        if y.shape[0] != n:
            raise DimensionMismatch(f"response length {y.shape[0]} != N={n}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("all entries must be finite")
        if self.column_names is not None:
            names = tuple(self.column_names)
            if len(names) != p:
                raise ValueError("column_names length must equal P")
            object.__setattr__(self, "column_names", names)
        if self.standardized:
            cols = np.column_stack([x, y])
            means = cols.mean(axis=0)
            sds = cols.std(axis=0, ddof=1)
            if np.any(np.abs(means) > _STD_TOL) or np.any(np.abs(sds - 1.0) > _STD_TOL):
                raise ValueError("standardized flag set but columns are not standardized")

    @property
    def n(self) -> int:
        return self.predictors.shape[0]

    @property
    def p(self) -> int:
        return self.predictors.shape[1]


@dataclass(frozen=True)
class LinearModel:
    """Fitted hyperplane: slope vector and intercept."""

    slope: np.ndarray
    intercept: float

    def __post_init__(self):
        s = _readonly(np.asarray(self.slope).ravel())
        object.__setattr__(self, "slope", s)
        object.__setattr__(self, "intercept", float(self.intercept))
        if not (np.all(np.isfinite(s)) and np.isfinite(self.intercept)):
            raise ValueError("model coefficients must be finite")


@dataclass(frozen=True)
class LossKind:
    """Loss selector: absolute loss with an insensitivity tube, or squared.

    ``l1(epsilon)`` is max(0, |y - yhat| - epsilon); epsilon = 0 gives the
    plain absolute loss. ``l2()`` is the squared loss.
    """

    kind: str
    epsilon: float = 0.0

    def __post_init__(self):
        if self.kind not in ("l1", "l2"):
            raise ValueError("kind must be 'l1' or 'l2'")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.kind == "l2" and self.epsilon != 0.0:
            raise ValueError("squared loss takes no epsilon")

    @classmethod
    def l1(cls, epsilon: float = 0.0) -> "LossKind":
        return cls("l1", float(epsilon))

    @classmethod
    def l2(cls) -> "LossKind":
        return cls("l2")

    @property
    def is_l1(self) -> bool:
        return self.kind == "l1"


@dataclass(frozen=True)
class TestResult:
    """Statistic, degrees of freedom and p-value of a classical test.

    ``dof_den`` is None for chi-square statistics. ``degenerate`` marks an
    essentially exact fit where the statistic's denominator vanished and the
    p-value was pinned to 0 instead of dividing by ~0.
    """

    statistic: float
    dof_num: int
    dof_den: int | None
    p_value: float
    degenerate: bool = False

    def __post_init__(self):
        if not self.degenerate and not 0.0 <= self.p_value <= 1.0:
            raise ValueError("p_value must be in [0, 1]")


def standardize(d: Dataset) -> Dataset:
    """Center every column and scale it to unit sample sd (ddof=1).

    Raises ConstantColumn for any column with sd <= 1e-12; never silently
    passes a degenerate column through. The input is untouched.
    """
    x, y = d.predictors, d.response
    means = x.mean(axis=0)
    sds = x.std(axis=0, ddof=1)
    ymean = float(y.mean())
    ysd = float(y.std(ddof=1))
    bad = [f"x{j + 1}" for j in np.nonzero(sds <= _SD_FLOOR)[0]]
    if ysd <= _SD_FLOOR:
        bad.append("y")
    if bad:
        raise ConstantColumn(f"zero-variance column(s): {', '.join(bad)}")
    return Dataset(
        predictors=(x - means) / sds,
        response=(y - ymean) / ysd,
        standardized=True,
        column_names=d.column_names,
        pred_means=_readonly(means),
        pred_sds=_readonly(sds),
        resp_mean=ymean,
        resp_sd=ysd,
    )


def destandardize(d: Dataset) -> Dataset:
    """Invert standardize() using the stored means/sds."""
    if not d.standardized or d.pred_means is None:
        raise ValueError("dataset is not standardized (or lacks scaling metadata)")
    return Dataset(
        predictors=d.predictors * d.pred_sds + d.pred_means,
        response=d.response * d.resp_sd + d.resp_mean,
        standardized=False,
        column_names=d.column_names,
    )


def split_kfold(d: Dataset, k: int, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Seeded K-fold partition: shuffle 0..N-1, then chunk contiguously.

    Fold sizes differ by at most one (the first N mod K folds get the extra
    row). Returns (train_indices, test_indices) per fold; deterministic for
    a fixed (dataset shape, k, seed).
    """
    n = d.n
    if not 2 <= k <= n:
        raise BadFoldCount(f"need 2 <= K <= N, got K={k}, N={n}")
    perm = RandomStream(seed).permutation(n)
    base, extra = divmod(n, k)
    folds = []
    start = 0
    for i in range(k):
        size = base + (1 if i < extra else 0)
        test = np.sort(perm[start : start + size])
        train = np.sort(np.concatenate([perm[:start], perm[start + size :]]))
        folds.append((train, test))
        start += size
    return folds


def with_columns(d: Dataset, names: tuple[str, ...]) -> Dataset:
    """Copy of d with column labels attached."""
    return replace(d, column_names=tuple(names))
