"""Synthetic dataset generators and CSV ingestion.

All generators are pure functions of their config (seed included) built on
the stream contract in :mod:`sarlib.rng`. The 2D Gaussian generator applies
a scale-then-rotate transform to isotropic normal rows using the row-vector
convention Zhat = Z T, so the population covariance of the output rows is
T' T (transpose times T); tests check that convention.
"""

from __future__ import annotations

import csv
import math
import sys
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import (
    DomainError,
    EmptyResult,
    MissingColumn,
    ParseError,
    SingularDesign,
    TooFewRows,
)
from .regressors import ols_fit_xy, predict
from .rng import RandomStream

DEFAULT_THETA = math.pi / 4.0


@dataclass(frozen=True)
class GaussianGenConfig:
    """Rotated-and-scaled 2D Gaussian: correlation knob tau, angle theta."""

    n: int
    tau: float
    theta: float = DEFAULT_THETA
    seed: int = 0

    def __post_init__(self):
        if self.n < 3:
            raise DomainError("need n >= 3")
        if not 0.0 <= self.tau < 1.0:
            raise DomainError("need tau in [0, 1)")


@dataclass(frozen=True)
class ClusterPruneConfig:
    """Segment into n_clusters by k-means, keep a random n_keep of them."""

    n_clusters: int
    n_keep: int = 3
    seed: int = 0
    kmeans_iters: int = 50

    def __post_init__(self):
        if self.n_clusters < 2:
            raise DomainError("need n_clusters >= 2")
        if not 1 <= self.n_keep <= self.n_clusters:
            raise DomainError("need 1 <= n_keep <= n_clusters")
        if self.kmeans_iters < 1:
            raise DomainError("need kmeans_iters >= 1")


@dataclass(frozen=True)
class HeteroGenConfig:
    """Linear response with noise whose scale grows with the predictor."""

    n: int
    age_min: float = 1.0
    age_max: float = 20.0
    noise_sd: float = 1.0
    base_slope: float = 3.0
    base_intercept: float = 50.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 3:
            raise DomainError("need n >= 3")
        if not self.age_min < self.age_max:
            raise DomainError("need age_min < age_max")
        if self.noise_sd <= 0:
            raise DomainError("need noise_sd > 0")


def sample_standard_normal(count: int, seed: int) -> np.ndarray:
    """i.i.d. standard-normal draws from the seeded stream (Box-Muller)."""
    if count < 1:
        raise DomainError("need count >= 1")
    return RandomStream(seed).normals(count)


def scaling_rotation(tau: float, theta: float) -> np.ndarray:
    """T = S R with S = diag(1, 1 - tau) and R the rotation by theta."""
    s = np.diag([1.0, 1.0 - tau])
    c, sn = math.cos(theta), math.sin(theta)
    r = np.array([[c, -sn], [sn, c]])
    return s @ r


def gen_gaussian_2d(cfg: GaussianGenConfig) -> Dataset:
    """Isotropic normal pairs pushed through T; first coord is the predictor."""
    stream = RandomStream(cfg.seed)
    z = stream.normals(2 * cfg.n).reshape(cfg.n, 2)
    zhat = z @ scaling_rotation(cfg.tau, cfg.theta)
    return Dataset(predictors=zhat[:, :1], response=zhat[:, 1])


def gen_transformed(n: int, p: int, tau: float, seed: int) -> Dataset:
    """(p+1)-dim normal rows through a random orthogonal-factor transform.

    T = U diag(1, ..., 1, 1 - tau) V' with U, V Haar orthogonal, so tau = 0
    leaves the singular values untouched (an orthogonal map: uncorrelated
    output) and tau -> 1 collapses one random direction. The last output
    coordinate is the response.
    """
    if p < 1:
        raise DomainError("need p >= 1")
    if not 0.0 <= tau < 1.0:
        raise DomainError("need tau in [0, 1)")
    if n < 3:
        raise DomainError("need n >= 3")
    stream = RandomStream(seed)
    z = stream.normals(n * (p + 1)).reshape(n, p + 1)
    u = stream.random_orthogonal(p + 1)
    v = stream.random_orthogonal(p + 1)
    singular = np.ones(p + 1)
    singular[p] = 1.0 - tau
    t = u @ np.diag(singular) @ v.T
    zhat = z @ t
    return Dataset(predictors=zhat[:, :p], response=zhat[:, p])


def _kmeans(points: np.ndarray, k: int, iters: int, stream: RandomStream):
    """Seeded Lloyd iterations; returns (labels, centers).

    Centers start at k distinct data points; an emptied cluster is re-seeded
    from the point farthest from its assigned center. Stops early when the
    largest relative center shift drops below 1e-6.
    """
    n = points.shape[0]
    centers = points[stream.choose(n, k)].copy()
    labels = np.zeros(n, dtype=int)
    for _ in range(iters):
        d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        labels = np.argmin(d2, axis=1)
        new_centers = centers.copy()
        assigned = d2[np.arange(n), labels]
        for c in range(k):
            mask = labels == c
            if np.any(mask):
                new_centers[c] = points[mask].mean(axis=0)
            else:
                far = int(np.argmax(assigned))
                new_centers[c] = points[far]
                labels[far] = c
                assigned[far] = 0.0
        shift = np.linalg.norm(new_centers - centers, axis=1)
        scale = 1.0 + np.linalg.norm(centers, axis=1)
        centers = new_centers
        if np.max(shift / scale) < 1e-6:
            break
    d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(d2, axis=1), centers


def prune_clusters(d: Dataset, cfg: ClusterPruneConfig) -> Dataset:
    """Keep the rows of n_keep uniformly chosen k-means clusters.

    Rows keep their original order, so n_keep = n_clusters returns the
    dataset unchanged. Output rows are always a subset of the input rows.
    """
    if d.n < cfg.n_clusters:
        raise DomainError("need N >= n_clusters")
    stream = RandomStream(cfg.seed)
    points = np.column_stack([d.predictors, d.response])
    labels, _ = _kmeans(points, cfg.n_clusters, cfg.kmeans_iters, stream)
    kept = stream.choose(cfg.n_clusters, cfg.n_keep)
    mask = np.isin(labels, kept)
    if not np.any(mask):
        raise EmptyResult("all kept clusters are empty")
    return Dataset(
        predictors=d.predictors[mask],
        response=d.response[mask],
        column_names=d.column_names,
    )


def gen_heteroscedastic(cfg: HeteroGenConfig) -> Dataset:
    """Predictor-proportional noise: y = b0 + b1*x + x*eps."""
    stream = RandomStream(cfg.seed)
    x = cfg.age_min + (cfg.age_max - cfg.age_min) * stream.uniforms(cfg.n)
    eps = cfg.noise_sd * stream.normals(cfg.n)
    y = cfg.base_intercept + cfg.base_slope * x + x * eps
    return Dataset(predictors=x[:, None], response=y, column_names=("age",))


@dataclass(frozen=True)
class CsvLoad:
    """Loaded dataset plus the number of rows dropped during parsing."""

    dataset: Dataset
    dropped_rows: int


def load_csv(
    path, response_column: str, predictor_columns: list[str] | None = None
) -> CsvLoad:
    """Read a header-full CSV into a Dataset, dropping unparseable rows.

    Rows with missing or non-finite values in any selected column are
    dropped and counted; the count is reported on stderr when nonzero.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise ParseError(f"{path}: empty file") from None
            rows = list(reader)
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    header = [h.strip() for h in header]
    if response_column not in header:
        raise MissingColumn(f"response column {response_column!r} not in header")
    if predictor_columns is None:
        predictor_columns = [h for h in header if h != response_column]
    if not predictor_columns:
        raise MissingColumn("no predictor columns")
    for name in predictor_columns:
        if name not in header:
            raise MissingColumn(f"predictor column {name!r} not in header")
    want = [header.index(c) for c in predictor_columns] + [header.index(response_column)]

    data = []
    dropped = 0
    for row in rows:
        if not row:
            continue
        try:
            vals = [float(row[i]) for i in want]
        except (ValueError, IndexError):
            dropped += 1
            continue
        if not all(math.isfinite(v) for v in vals):
            dropped += 1
            continue
        data.append(vals)
    if len(data) < 3:
        raise TooFewRows(f"{path}: {len(data)} usable rows after dropping {dropped}")
    if dropped:
        print(f"load_csv: dropped {dropped} unparseable row(s) from {path}",
              file=sys.stderr)
    arr = np.asarray(data)
    return CsvLoad(
        dataset=Dataset(
            predictors=arr[:, :-1],
            response=arr[:, -1],
            column_names=tuple(predictor_columns),
        ),
        dropped_rows=dropped,
    )


def vif(d: Dataset) -> np.ndarray:
    """Variance inflation factor 1/(1 - R^2_j) per predictor.

    R^2_j comes from regressing column j on the remaining predictors (with
    intercept). Columns with R^2_j >= 1 - 1e-12 are perfectly collinear and
    raise SingularDesign naming every offending column.
    """
    if d.p < 2:
        raise DomainError("need P >= 2 predictors")
    x = d.predictors
    out = np.empty(d.p)
    bad: list[str] = []
    names = d.column_names or tuple(f"x{j + 1}" for j in range(d.p))
    for j in range(d.p):
        others = np.delete(x, j, axis=1)
        target = x[:, j]
        sst = float(np.sum((target - target.mean()) ** 2))
        try:
            fit = ols_fit_xy(others, target)
            sse = float(np.sum((target - predict(fit, others)) ** 2))
        except SingularDesign:
            bad.append(names[j])
            continue
        if sst == 0.0:
            bad.append(names[j])
            continue
        rsq = 1.0 - sse / sst
        if rsq >= 1.0 - 1e-12:
            bad.append(names[j])
            continue
        out[j] = 1.0 / (1.0 - rsq)
    if bad:
        raise SingularDesign(f"perfectly collinear column(s): {', '.join(bad)}")
    return out
