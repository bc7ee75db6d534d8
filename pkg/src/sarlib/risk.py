"""Risk evaluation, null-hypothesis loss thresholds, and the agnostic test.

The significance test compares a worst-case-corrected empirical risk against
the expected loss under predictor/response orthogonality. The null model
treats prediction/response pairs as uniform on a centered box: for data whose
columns are standardized to unit sample sd, the matching uniform box has
half-width sqrt(3) per axis (the unit-variance uniform), the response bound
is b = sqrt(3) and the prediction bound is a = max |f(x)| over the box,
i.e. sqrt(3) * |slope|_1 + |intercept|. Closed forms on the box:

    absolute loss:  b/2 + a^2 / (6b)   (valid for a <= b)
    squared loss:   (a^2 + b^2) / 3

The worst-case correction Delta is a concentration bound over a lambda grid,

    Delta = min_i [ R_N + (2 lambda_i^2 L_max / N) (KL + ln(k/eta)) ]
                  / (2 lambda_i - 1),

with KL = (1 - dropout_rate)/2 * |slope|^2, valid with probability at least
1 - eta. Rejecting the null requires R_N + Delta to fall strictly below the
threshold. Alternative bounds plug in via the ``delta_fn`` hook.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .dataset import Dataset, LinearModel, LossKind
from .errors import DimensionMismatch, DomainError, NonzeroEpsilon
from .regressors import predict
from .rng import RandomStream, derive_seed

HALF_WIDTH_UNIT_SD = math.sqrt(3.0)
_QUASI_POINTS = 10**6
_QUASI_SEED = 0x6D657368  # fixed: the quasi-uniform fallback is not caller-seeded


def default_lambda_grid(k: int = 20) -> np.ndarray:
    """k log-spaced grid values in (0.5, 10] starting at 0.501."""
    return np.geomspace(0.501, 10.0, num=k)


@dataclass(frozen=True)
class PacBayesParams:
    """Parameters of the concentration correction.

    ``l_max`` is the loss ceiling (outlier threshold); leave it None to use
    the maximum per-sample loss observed on the data being tested. ``eta`` is
    the confidence parameter: the corrected risk upper-bounds the true risk
    with probability at least 1 - eta.
    """

    lambda_grid: np.ndarray = None
    dropout_rate: float = 0.5
    l_max: float | None = None
    eta: float = 0.5

    def __post_init__(self):
        grid = self.lambda_grid
        if grid is None:
            grid = default_lambda_grid()
        grid = np.asarray(grid, dtype=np.float64).ravel()
        if grid.size < 1:
            raise ValueError("lambda_grid needs at least one value")
        if np.any(grid <= 0.5):
            raise ValueError("every lambda must exceed 0.5")
        grid.setflags(write=False)
        object.__setattr__(self, "lambda_grid", grid)
        if not 0.0 <= self.dropout_rate <= 1.0:
            raise ValueError("dropout_rate must be in [0, 1]")
        if self.l_max is not None and self.l_max <= 0:
            raise ValueError("l_max must be positive when given")
        if not 0.0 < self.eta < 1.0:
            raise ValueError("eta must be in (0, 1)")

    @property
    def k(self) -> int:
        return int(self.lambda_grid.size)


@dataclass(frozen=True)
class RiskEstimate:
    """Empirical risk, its worst-case increment, and their sum."""

    empirical_risk: float
    delta: float
    corrected_risk: float
    per_fold_risks: np.ndarray | None = None
    loss: LossKind = LossKind.l2()

    def __post_init__(self):
        if self.empirical_risk < 0 or self.delta < 0:
            raise ValueError("risks and increments must be nonnegative")
        if self.corrected_risk != self.empirical_risk + self.delta:
            raise ValueError("corrected_risk must equal empirical_risk + delta")
        if self.per_fold_risks is not None:
            pf = np.asarray(self.per_fold_risks, dtype=np.float64).ravel()
            pf.setflags(write=False)
            object.__setattr__(self, "per_fold_risks", pf)

    @classmethod
    def make(cls, empirical_risk, delta, per_fold_risks=None, loss=LossKind.l2()):
        return cls(
            empirical_risk=float(empirical_risk),
            delta=float(delta),
            corrected_risk=float(empirical_risk) + float(delta),
            per_fold_risks=per_fold_risks,
            loss=loss,
        )


@dataclass(frozen=True)
class SarDecision:
    """Outcome of the agnostic significance test.

    ``reject_null`` is True exactly when the corrected risk is strictly below
    the null threshold; ties keep the null. ``a``/``b`` are the prediction and
    response bounds that parameterized the threshold; ``mesh_fallback`` marks
    an absolute-loss case with a > b where the closed form does not apply and
    the threshold was averaged on a grid instead.
    """

    threshold: float
    risk: RiskEstimate
    reject_null: bool
    eta: float
    a: float = float("nan")
    b: float = float("nan")
    threshold_mode: str = "analytic"
    mesh_fallback: bool = False

    def __post_init__(self):
        if self.reject_null != (self.risk.corrected_risk < self.threshold):
            raise ValueError("reject_null inconsistent with strict comparison")


def sar_decision(threshold: float, risk: RiskEstimate, eta: float, **extra) -> SarDecision:
    """Apply the strict decision rule: reject iff corrected risk < threshold."""
    return SarDecision(
        threshold=float(threshold),
        risk=risk,
        reject_null=bool(risk.corrected_risk < threshold),
        eta=float(eta),
        **extra,
    )


def loss_value(kind: LossKind, y_hat, y):
    """Per-sample loss; elementwise on arrays, scalar on scalars."""
    y_hat = np.asarray(y_hat, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    diff = y - y_hat
    if kind.is_l1:
        out = np.maximum(np.abs(diff) - kind.epsilon, 0.0)
    else:
        out = diff * diff
    return float(out) if out.ndim == 0 else out


def empirical_risk(m: LinearModel, d: Dataset, kind: LossKind) -> float:
    """Mean per-sample loss of the model over the dataset."""
    if d.p != m.slope.shape[0]:
        raise DimensionMismatch("model/dataset predictor counts differ")
    return float(np.mean(loss_value(kind, predict(m, d.predictors), d.response)))


def null_threshold_analytic(a: float, b: float, kind: LossKind) -> float:
    """Expected loss of uniform (prediction, response) pairs on [-a,a]x[-b,b].

    Absolute loss requires epsilon = 0 and a <= b; squared loss holds for any
    bounds.
    """
    if b <= 0:
        raise DomainError("need b > 0")
    if a < 0:
        raise DomainError("need a >= 0")
    if kind.is_l1:
        if kind.epsilon != 0.0:
            raise NonzeroEpsilon("analytic absolute-loss threshold needs epsilon = 0")
        if a > b:
            raise DomainError(f"absolute-loss closed form needs a <= b, got a={a}, b={b}")
        return b / 2.0 + a * a / (6.0 * b)
    return (a * a + b * b) / 3.0


def _midpoint_axis(half_width: float, m: int) -> np.ndarray:
    i = np.arange(m, dtype=np.float64)
    return -half_width + (2.0 * i + 1.0) * half_width / m


def _quasi_uniform(n_points: int, dims: int) -> np.ndarray:
    """Additive-recurrence (golden-ratio) low-discrepancy points in [0,1)^dims."""
    phi = 2.0
    for _ in range(40):
        phi = (1.0 + phi) ** (1.0 / (dims + 1))
    alphas = np.array([phi ** -(j + 1) for j in range(dims)])
    offsets = RandomStream(derive_seed(_QUASI_SEED, dims)).uniforms(dims)
    idx = np.arange(1, n_points + 1, dtype=np.float64)[:, None]
    return np.mod(offsets + idx * alphas, 1.0)


def null_threshold_mesh(
    p: int,
    half_widths,
    kind: LossKind,
    points_per_axis: int,
    model: LinearModel,
) -> float:
    """Average loss of the model over a centered box of uniform (x, y) points.

    Cell-centered tensor grid with ``points_per_axis`` points per axis for up
    to 4 axes; above that the grid is replaced by 10^6 points of a seeded
    golden-ratio quasi-uniform sequence (fixed internal seed).
    """
    if p < 1:
        raise DomainError("need p >= 1")
    if points_per_axis < 3:
        raise DomainError("need points_per_axis >= 3")
    half_widths = np.asarray(half_widths, dtype=np.float64).ravel()
    if half_widths.shape[0] != p + 1:
        raise DimensionMismatch("half_widths must have length p + 1")
    if np.any(half_widths <= 0):
        raise DomainError("half_widths must be positive")
    if model.slope.shape[0] != p:
        raise DimensionMismatch("model slope length must equal p")

    if p + 1 > 4:
        u = _quasi_uniform(_QUASI_POINTS, p + 1)
        pts = (2.0 * u - 1.0) * half_widths
        y_hat = pts[:, :p] @ model.slope + model.intercept
        return float(np.mean(loss_value(kind, y_hat, pts[:, p])))

    m = points_per_axis
    y_grid = _midpoint_axis(half_widths[p], m)
    x_axes = [_midpoint_axis(half_widths[j], m) for j in range(p)]
    # y_hat over the x tensor grid separates into a sum over axes
    y_hat = np.full(1, model.intercept)
    for j in range(p):
        y_hat = (y_hat[:, None] + model.slope[j] * x_axes[j][None, :]).ravel()
    chunk = 1 << 14
    sums = [
        float(np.sum(loss_value(kind, y_hat[i : i + chunk, None], y_grid[None, :])))
        for i in range(0, y_hat.shape[0], chunk)
    ]
    return float(np.sum(sums) / (y_hat.shape[0] * m))


def pac_bayes_delta(
    params: PacBayesParams, empirical_risk: float, slope_sq_norm: float, n: int
) -> float:
    """Worst-case risk increment minimized over the lambda grid."""
    if n < 1:
        raise DomainError("need n >= 1")
    if params.l_max is None:
        raise ValueError("params.l_max must be set (or supplied by the caller)")
    if empirical_risk < 0 or slope_sq_norm < 0:
        raise DomainError("risk and slope norm must be nonnegative")
    lam = params.lambda_grid
    kl = 0.5 * (1.0 - params.dropout_rate) * slope_sq_norm
    penalty = kl + math.log(params.k / params.eta)
    vals = (empirical_risk + (2.0 * lam**2 * params.l_max / n) * penalty) / (
        2.0 * lam - 1.0
    )
    return float(np.min(vals))


def prediction_bound(m: LinearModel, half_widths) -> float:
    """Max |f(x)| over the centered box with the given predictor half-widths."""
    half_widths = np.asarray(half_widths, dtype=np.float64).ravel()
    return float(np.abs(m.slope) @ half_widths + abs(m.intercept))


def sar_test(
    m: LinearModel,
    d: Dataset,
    kind: LossKind,
    params: PacBayesParams | None = None,
    threshold_mode: str = "analytic",
    points_per_axis: int | None = None,
    delta_fn=None,
) -> SarDecision:
    """Significance test: corrected risk vs the orthogonality loss threshold.

    Requires standardized data (the box bounds assume unit-sd columns).
    ``delta_fn(empirical_risk, slope_sq_norm, n) -> delta`` overrides the
    default concentration correction. In analytic mode an absolute-loss fit
    with prediction bound a > response bound b falls back to the mesh
    average (flagged on the decision) instead of erroring.
    """
    if not d.standardized:
        raise DomainError("sar_test needs a standardized dataset")
    if threshold_mode not in ("analytic", "mesh"):
        raise ValueError("threshold_mode must be 'analytic' or 'mesh'")
    params = params if params is not None else PacBayesParams()

    per_sample = loss_value(kind, predict(m, d.predictors), d.response)
    r_n = float(np.mean(per_sample))
    slope_sq = float(m.slope @ m.slope)

    if delta_fn is not None:
        delta = float(delta_fn(r_n, slope_sq, d.n))
    else:
        if params.l_max is None:
            params = replace(params, l_max=max(float(np.max(per_sample)), 1e-300))
        delta = pac_bayes_delta(params, r_n, slope_sq, d.n)

    half = HALF_WIDTH_UNIT_SD
    widths = np.full(d.p + 1, half)
    a = prediction_bound(m, widths[: d.p])
    b = half
    if points_per_axis is None:
        points_per_axis = {1: 401, 2: 201, 3: 101}.get(d.p, 401)

    mode = threshold_mode
    fallback = False
    if mode == "analytic" and kind.is_l1 and a > b:
        mode = "mesh"
        fallback = True
    if mode == "analytic":
        threshold = null_threshold_analytic(a, b, kind)
    else:
        threshold = null_threshold_mesh(d.p, widths, kind, points_per_axis, m)

    risk = RiskEstimate.make(r_n, delta, loss=kind)
    return sar_decision(
        threshold, risk, params.eta, a=a, b=b, threshold_mode=mode,
        mesh_fallback=fallback,
    )
