"""Cross-validation risk estimators and Monte Carlo sweep engine.

A sweep walks a (tau, N) grid, draws R realizations per cell from the chosen
regime, fits every requested method, and aggregates risks, slope F-test
p-values and rejection frequencies. Every (tau, N, realization) triple owns
its own PRNG substream keyed off the master seed, so results are independent
of worker scheduling and of the method list ordering.

Methods are named "<regressor>+<scheme>" with regressor in {ols, svr_l1,
svr_l2} and scheme in {resub, kfold, loo, sar}. The F-test on cross-validated
methods uses out-of-fold prediction residuals (concatenated over folds) so
that CV residuals are genuinely predictive; set ``cv_residuals="resub"`` for
the resubstitution variant.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .classical import f_test_slope
from .dataset import Dataset, LossKind, split_kfold, standardize
from .errors import FoldFailure, MissingCell, NoFolds, SarError
from .generators import (
    DEFAULT_THETA,
    ClusterPruneConfig,
    GaussianGenConfig,
    HeteroGenConfig,
    gen_gaussian_2d,
    gen_heteroscedastic,
    gen_transformed,
    load_csv,
    prune_clusters,
)
from .regressors import SvrConfig, ols_fit_xy, predict, svr_fit_xy
from .risk import PacBayesParams, RiskEstimate, sar_test
from .rng import derive_seed, float_key, substream

REGRESSORS = ("ols", "svr_l1", "svr_l2")
SCHEMES = ("resub", "kfold", "loo", "sar")
REGIMES = ("gaussian", "cluster_pruned", "heteroscedastic", "csv")


@dataclass(frozen=True)
class Resub:
    pass


@dataclass(frozen=True)
class KFold:
    k: int = 10
    seed: int = 0


@dataclass(frozen=True)
class Loo:
    pass


def method_loss(regressor: str) -> LossKind:
    """Loss a method is fitted/evaluated under: absolute for svr_l1, else squared."""
    return LossKind.l1(0.0) if regressor == "svr_l1" else LossKind.l2()


def parse_method(name: str) -> tuple[str, str]:
    parts = name.split("+")
    if len(parts) != 2 or parts[0] not in REGRESSORS or parts[1] not in SCHEMES:
        raise ValueError(
            f"bad method {name!r}; want <regressor>+<scheme> with regressor in "
            f"{REGRESSORS} and scheme in {SCHEMES}"
        )
    return parts[0], parts[1]


def _method_key(name: str) -> int:
    h = 0
    for byte in name.encode():
        h = (h * 131 + byte) & ((1 << 64) - 1)
    return h


def worker_count() -> int:
    """Thread count from SAR_THREADS (0 or unset = one per CPU)."""
    raw = os.environ.get("SAR_THREADS", "0").strip() or "0"
    n = int(raw)
    if n < 0:
        raise ValueError("SAR_THREADS must be >= 0")
    return n if n > 0 else (os.cpu_count() or 1)


def _fit(regressor, x, y, svr_cfg: SvrConfig | None):
    if regressor == "ols":
        return ols_fit_xy(x, y)
    cfg = svr_cfg if svr_cfg is not None else SvrConfig(loss=method_loss(regressor))
    if (cfg.loss.is_l1) != (regressor == "svr_l1"):
        cfg = SvrConfig(loss=method_loss(regressor), c=cfg.c, max_iters=cfg.max_iters,
                        tol=cfg.tol, learning_rate=cfg.learning_rate)
    return svr_fit_xy(x, y, cfg).model


def _mean_loss(kind: LossKind, y_hat, y) -> float:
    diff = np.asarray(y) - np.asarray(y_hat)
    if kind.is_l1:
        return float(np.mean(np.maximum(np.abs(diff) - kind.epsilon, 0.0)))
    return float(np.mean(diff * diff))


def _cv_run(d: Dataset, folds, regressor: str, kind: LossKind,
            svr_cfg: SvrConfig | None):
    """Per-fold fits: (fold risks, out-of-fold predictions in row order)."""
    oof = np.empty(d.n)
    risks = np.empty(len(folds))
    for i, (train, test) in enumerate(folds):
        try:
            model = _fit(regressor, d.predictors[train], d.response[train], svr_cfg)
        except SarError as exc:
            raise FoldFailure(i, exc) from exc
        pred = predict(model, d.predictors[test])
        risks[i] = _mean_loss(kind, pred, d.response[test])
        oof[test] = pred
    return risks, oof


def cv_risk(d: Dataset, scheme, regressor="ols", kind: LossKind | None = None,
            svr_cfg: SvrConfig | None = None) -> RiskEstimate:
    """Risk of a regressor under resubstitution, K-fold or leave-one-out.

    ``scheme`` is Resub(), KFold(k, seed) or Loo(); ``regressor`` is "ols",
    "svr_l1" or "svr_l2". CV estimates average the per-fold mean losses and
    carry them in ``per_fold_risks``; no worst-case increment is added.
    """
    if kind is None:
        kind = method_loss(regressor)
    if isinstance(scheme, Resub):
        model = _fit(regressor, d.predictors, d.response, svr_cfg)
        risk = _mean_loss(kind, predict(model, d.predictors), d.response)
        return RiskEstimate.make(risk, 0.0, loss=kind)
    if isinstance(scheme, KFold):
        folds = split_kfold(d, scheme.k, scheme.seed)
    elif isinstance(scheme, Loo):
        idx = np.arange(d.n)
        folds = [(np.delete(idx, i), idx[i : i + 1]) for i in range(d.n)]
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    risks, _ = _cv_run(d, folds, regressor, kind, svr_cfg)
    return RiskEstimate.make(float(np.mean(risks)), 0.0, per_fold_risks=risks,
                             loss=kind)


@dataclass(frozen=True)
class SweepConfig:
    """Grid, regime and methods of a Monte Carlo sweep."""

    taus: tuple[float, ...]
    sample_sizes: tuple[int, ...]
    realizations: int
    methods: tuple[str, ...]
    regime: str = "gaussian"
    alpha: float = 0.05
    master_seed: int = 0
    kfold_k: int = 10
    eta: float = 0.5
    svr_c: float = 10.0
    theta: float = DEFAULT_THETA
    n_clusters: int = 8
    n_keep: int = 3
    csv_path: str | None = None
    csv_response: str | None = None
    cv_residuals: str = "oof"

    def __post_init__(self):
        object.__setattr__(self, "taus", tuple(float(t) for t in self.taus))
        object.__setattr__(self, "sample_sizes", tuple(int(n) for n in self.sample_sizes))
        object.__setattr__(self, "methods", tuple(self.methods))
        if self.realizations < 1:
            raise ValueError("realizations must be >= 1")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")
        if self.regime not in REGIMES:
            raise ValueError(f"regime must be one of {REGIMES}")
        if self.regime == "csv" and not (self.csv_path and self.csv_response):
            raise ValueError("csv regime needs csv_path and csv_response")
        if self.cv_residuals not in ("oof", "resub"):
            raise ValueError("cv_residuals must be 'oof' or 'resub'")
        if not self.methods:
            raise ValueError("need at least one method")
        for m in self.methods:
            parse_method(m)


@dataclass
class CellStats:
    """Aggregates of one (tau, N, method) cell across realizations."""

    realizations: int
    mean_risk: float
    mean_corrected_risk: float
    fold_std: float
    mean_f_pvalue: float
    f_rejection_freq: float
    sar_threshold: float
    sar_rejection_freq: float


@dataclass
class SweepResult:
    """Per-cell aggregates plus any failed cells."""

    config: SweepConfig
    records: dict[tuple[float, int, str], CellStats]
    failures: list[tuple[tuple[float, int, str], str]] = field(default_factory=list)


_csv_cache: dict[tuple[str, str], Dataset] = {}


def _csv_dataset(path: str, response: str) -> Dataset:
    key = (str(path), response)
    if key not in _csv_cache:
        _csv_cache[key] = load_csv(path, response).dataset
    return _csv_cache[key]


def sample_regime(
    regime: str,
    n: int,
    tau: float = 0.0,
    seed: int = 0,
    *,
    theta: float = DEFAULT_THETA,
    p: int = 1,
    n_clusters: int = 8,
    n_keep: int = 3,
    csv_path: str | None = None,
    csv_response: str | None = None,
) -> Dataset:
    """Draw one dataset of size n from a named data regime.

    Regimes: "gaussian" (2D rotated/scaled normal), "transformed" (p
    predictors through a random orthogonal-factor transform),
    "cluster_pruned" (gaussian pool, k-means pruned, first n surviving rows),
    "heteroscedastic", and "csv" (seeded down-sample of a file).
    """
    if regime == "gaussian":
        return gen_gaussian_2d(GaussianGenConfig(n=n, tau=tau, theta=theta, seed=seed))
    if regime == "transformed":
        return gen_transformed(n, p, tau, seed)
    if regime == "cluster_pruned":
        keep_frac = n_keep / n_clusters
        pool = max(int(np.ceil(2.0 * n / keep_frac)), 4 * n, n_clusters)
        for _ in range(5):
            raw = gen_gaussian_2d(GaussianGenConfig(n=pool, tau=tau, theta=theta,
                                                    seed=seed))
            pruned = prune_clusters(
                raw,
                ClusterPruneConfig(n_clusters=n_clusters, n_keep=n_keep,
                                   seed=derive_seed(seed, 1)),
            )
            if pruned.n >= n:
                return Dataset(predictors=pruned.predictors[:n],
                               response=pruned.response[:n])
            pool *= 2
        raise SarError(f"cluster pruning kept fewer than {n} rows after 5 attempts")
    if regime == "heteroscedastic":
        return gen_heteroscedastic(HeteroGenConfig(n=n, seed=seed))
    if regime == "csv":
        loaded = _csv_dataset(csv_path, csv_response)
        if n > loaded.n:
            raise SarError(f"csv has only {loaded.n} rows, cell asks for {n}")
        rows = np.sort(substream(seed, 0).permutation(loaded.n)[:n])
        return Dataset(predictors=loaded.predictors[rows],
                       response=loaded.response[rows],
                       column_names=loaded.column_names)
    raise ValueError(f"unknown regime {regime!r}")


def _pool_dataset(cfg: SweepConfig, tau: float, n: int, seed: int) -> Dataset:
    return sample_regime(
        cfg.regime, n, tau, seed, theta=cfg.theta, n_clusters=cfg.n_clusters,
        n_keep=cfg.n_keep, csv_path=cfg.csv_path, csv_response=cfg.csv_response,
    )


def _realization(cfg: SweepConfig, tau: float, n: int, r: int):
    """All methods on one generated dataset; returns method -> record dict."""
    data_seed = derive_seed(cfg.master_seed, float_key(tau), n, r)
    try:
        d = standardize(_pool_dataset(cfg, tau, n, data_seed))
    except SarError as exc:
        msg = f"{type(exc).__name__}: {exc}"
        return {name: {"error": msg} for name in cfg.methods}
    out = {}
    for name in cfg.methods:
        regressor, scheme = parse_method(name)
        kind = method_loss(regressor)
        svr_cfg = (None if regressor == "ols"
                   else SvrConfig(loss=kind, c=cfg.svr_c))
        try:
            rec = _run_method(cfg, d, regressor, scheme, kind, svr_cfg, data_seed)
        except SarError as exc:
            rec = {"error": f"{type(exc).__name__}: {exc}"}
        out[name] = rec
    return out


def _run_method(cfg, d, regressor, scheme, kind, svr_cfg, data_seed):
    if scheme in ("resub", "sar"):
        model = _fit(regressor, d.predictors, d.response, svr_cfg)
        resid = d.response - predict(model, d.predictors)
        risk = _mean_loss(kind, predict(model, d.predictors), d.response)
        rec = {
            "risk": risk, "corrected": risk, "fold_std": np.nan,
            "sar_threshold": np.nan, "sar_reject": np.nan,
        }
        if scheme == "sar":
            decision = sar_test(model, d, kind, PacBayesParams(eta=cfg.eta))
            rec["corrected"] = decision.risk.corrected_risk
            rec["sar_threshold"] = decision.threshold
            rec["sar_reject"] = float(decision.reject_null)
    else:
        if scheme == "kfold":
            folds = split_kfold(d, min(cfg.kfold_k, d.n),
                                derive_seed(data_seed, _method_key(regressor)))
        else:
            idx = np.arange(d.n)
            folds = [(np.delete(idx, i), idx[i : i + 1]) for i in range(d.n)]
        fold_risks, oof = _cv_run(d, folds, regressor, kind, svr_cfg)
        risk = float(np.mean(fold_risks))
        if cfg.cv_residuals == "oof":
            resid = d.response - oof
        else:
            model = _fit(regressor, d.predictors, d.response, svr_cfg)
            resid = d.response - predict(model, d.predictors)
        rec = {
            "risk": risk, "corrected": risk,
            "fold_std": float(np.std(fold_risks, ddof=1)) if len(fold_risks) > 1
            else 0.0,
            "sar_threshold": np.nan, "sar_reject": np.nan,
        }
    ftr = f_test_slope(resid, d.response, d.p)
    rec["f_pvalue"] = ftr.p_value
    rec["f_reject"] = float(ftr.p_value < cfg.alpha)
    return rec


def run_sweep(cfg: SweepConfig) -> SweepResult:
    """Run every (tau, N) cell for R realizations and aggregate per method.

    Failures are recorded per cell and the sweep continues; a cell appears in
    ``records`` when at least one realization succeeded. Output is a pure
    function of the config (realizations are aggregated in a fixed order, so
    worker scheduling cannot change any number).
    """
    tasks = [(tau, n) for tau in cfg.taus for n in cfg.sample_sizes]
    workers = worker_count()

    def run_cell(cell):
        tau, n = cell
        return [_realization(cfg, tau, n, r) for r in range(cfg.realizations)]

    if workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_cell = list(pool.map(run_cell, tasks))
    else:
        per_cell = [run_cell(t) for t in tasks]

    records: dict[tuple[float, int, str], CellStats] = {}
    failures: list[tuple[tuple[float, int, str], str]] = []
    for (tau, n), reals in zip(tasks, per_cell):
        for name in cfg.methods:
            ok = [rec[name] for rec in reals if "error" not in rec[name]]
            errors = [rec[name]["error"] for rec in reals if "error" in rec[name]]
            key = (tau, n, name)
            if errors:
                failures.append((key, f"{len(errors)} realization(s) failed; "
                                      f"first: {errors[0]}"))
            if not ok:
                continue
            records[key] = CellStats(
                realizations=len(ok),
                mean_risk=float(np.mean([r["risk"] for r in ok])),
                mean_corrected_risk=float(np.mean([r["corrected"] for r in ok])),
                fold_std=float(np.nanmean([r["fold_std"] for r in ok]))
                if any(np.isfinite(r["fold_std"]) for r in ok) else float("nan"),
                mean_f_pvalue=float(np.mean([r["f_pvalue"] for r in ok])),
                f_rejection_freq=float(np.mean([r["f_reject"] for r in ok])),
                sar_threshold=float(np.nanmean([r["sar_threshold"] for r in ok]))
                if any(np.isfinite(r["sar_threshold"]) for r in ok) else float("nan"),
                sar_rejection_freq=float(np.nanmean([r["sar_reject"] for r in ok]))
                if any(np.isfinite(r["sar_reject"]) for r in ok) else float("nan"),
            )
    return SweepResult(config=cfg, records=records, failures=failures)


def power_table(result: SweepResult) -> list[dict]:
    """One row per (tau, N, method) with the cell's rejection frequency.

    SAR methods report the agnostic-test rejection frequency; all others the
    slope F-test rejection frequency at the sweep's alpha. Raises MissingCell
    for cells of the configured grid that are absent from the records.
    """
    cfg = result.config
    rows = []
    for tau in cfg.taus:
        for n in cfg.sample_sizes:
            for name in cfg.methods:
                key = (tau, n, name)
                if key not in result.records:
                    raise MissingCell(f"cell {key} missing from sweep records")
                cell = result.records[key]
                _, scheme = parse_method(name)
                power = (cell.sar_rejection_freq if scheme == "sar"
                         else cell.f_rejection_freq)
                rows.append({"tau": tau, "n": n, "method": name, "power": power,
                             "realizations": cell.realizations})
    return rows


def fold_variability(obj):
    """Spread of per-fold risks.

    For a RiskEstimate: the sample std (ddof=1) of its per-fold risks; raises
    NoFolds when there are none. For a SweepResult: a dict keyed by cell with
    the mean per-realization fold std for every fold-based method cell.
    """
    if isinstance(obj, RiskEstimate):
        if obj.per_fold_risks is None or obj.per_fold_risks.size < 2:
            raise NoFolds("estimate has no per-fold risks")
        return float(np.std(obj.per_fold_risks, ddof=1))
    if isinstance(obj, SweepResult):
        out = {}
        for key, cell in obj.records.items():
            _, scheme = parse_method(key[2])
            if scheme in ("kfold", "loo") and np.isfinite(cell.fold_std):
                out[key] = cell.fold_std
        return out
    raise TypeError("expected RiskEstimate or SweepResult")
