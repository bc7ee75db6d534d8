"""sarlib: significance testing for linear regression via risk bounds.

Fits linear regressors (least squares and regularized linear regression),
upper-bounds their expected loss with a concentration inequality, and tests
regression significance by comparing the corrected risk against the expected
loss under predictor/response orthogonality, alongside classical F and
Breusch-Pagan tests, cross-validation baselines, seeded synthetic data
generators, and a Monte Carlo power-analysis harness.
"""

__version__ = "0.1.0"

from ._kernels import BACKEND, HAVE_COMPILED
from .classical import (
    AnovaDecomposition,
    anova_decomposition,
    bp_test,
    chi2_cdf,
    f_cdf,
    f_test_slope,
    reg_inc_beta,
    reg_inc_gamma_lower,
)
from .dataset import (
    Dataset,
    LinearModel,
    LossKind,
    TestResult,
    destandardize,
    split_kfold,
    standardize,
)
from .errors import SarError
from .generators import (
    ClusterPruneConfig,
    GaussianGenConfig,
    HeteroGenConfig,
    gen_gaussian_2d,
    gen_heteroscedastic,
    gen_transformed,
    load_csv,
    prune_clusters,
    sample_standard_normal,
    vif,
)
from .harness import (
    KFold,
    Loo,
    Resub,
    SweepConfig,
    SweepResult,
    cv_risk,
    fold_variability,
    power_table,
    run_sweep,
    sample_regime,
)
from .regressors import (
    SvrConfig,
    SvrFit,
    ols_fit,
    predict,
    residuals,
    svr_fit,
)
from .risk import (
    PacBayesParams,
    RiskEstimate,
    SarDecision,
    empirical_risk,
    loss_value,
    null_threshold_analytic,
    null_threshold_mesh,
    pac_bayes_delta,
    sar_test,
)
from .rng import RandomStream, derive_seed, substream

__all__ = [
    "AnovaDecomposition",
    "BACKEND",
    "ClusterPruneConfig",
    "Dataset",
    "GaussianGenConfig",
    "HAVE_COMPILED",
    "HeteroGenConfig",
    "KFold",
    "LinearModel",
    "Loo",
    "LossKind",
    "PacBayesParams",
    "RandomStream",
    "Resub",
    "RiskEstimate",
    "SarDecision",
    "SarError",
    "SvrConfig",
    "SvrFit",
    "SweepConfig",
    "SweepResult",
    "TestResult",
    "anova_decomposition",
    "bp_test",
    "chi2_cdf",
    "cv_risk",
    "derive_seed",
    "destandardize",
    "empirical_risk",
    "f_cdf",
    "f_test_slope",
    "fold_variability",
    "gen_gaussian_2d",
    "gen_heteroscedastic",
    "gen_transformed",
    "load_csv",
    "loss_value",
    "null_threshold_analytic",
    "null_threshold_mesh",
    "ols_fit",
    "pac_bayes_delta",
    "power_table",
    "predict",
    "prune_clusters",
    "reg_inc_beta",
    "reg_inc_gamma_lower",
    "residuals",
    "run_sweep",
    "sample_regime",
    "sample_standard_normal",
    "sar_test",
    "split_kfold",
    "standardize",
    "substream",
    "svr_fit",
    "vif",
]
