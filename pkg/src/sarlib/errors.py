"""Exception hierarchy shared by all sarlib modules."""


class SarError(Exception):
    """Base class for all sarlib errors."""


class ConstantColumn(SarError):
    """A column has (numerically) zero variance and cannot be standardized."""


class BadFoldCount(SarError):
    """Requested fold count K is outside 2 <= K <= N."""


class SingularDesign(SarError):
    """A linear system is numerically singular (pivot below threshold)."""


class DimensionMismatch(SarError):
    """Shapes of model, predictors and response do not agree."""


class DomainError(SarError):
    """An argument is outside the mathematical domain of the operation."""


class NonzeroEpsilon(DomainError):
    """Analytic absolute-loss threshold requires epsilon = 0."""


class EmptyResult(SarError):
    """Cluster pruning kept no rows."""


class ParseError(SarError):
    """A CSV file could not be parsed."""


class MissingColumn(SarError):
    """A named CSV column is absent."""


class TooFewRows(SarError):
    """Fewer than 3 usable rows after dropping bad ones."""


class FoldFailure(SarError):
    """A cross-validation fold failed to fit; names the fold."""

    def __init__(self, fold: int, cause: Exception):
        super().__init__(f"fold {fold} failed: {cause}")
        self.fold = fold
        self.cause = cause


class NoFolds(SarError):
    """Fold variability requested for an estimate without per-fold risks."""


class MissingCell(SarError):
    """A sweep cell required for a table is absent (it failed or was skipped)."""
