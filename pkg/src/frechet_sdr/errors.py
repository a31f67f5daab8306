"""Exception hierarchy.

Three branches map onto the CLI exit codes: ConfigError -> 2,
DataError -> 3, NumericalError -> 4.
"""


class FrechetSdrError(Exception):
    """Base class for all package errors."""


class ConfigError(FrechetSdrError):
    """Invalid configuration or option combination."""


class DataError(FrechetSdrError):
    """Invalid or inconsistent input data."""


class NumericalError(FrechetSdrError):
    """A numerical procedure failed on otherwise valid input."""


# -- data errors ------------------------------------------------------------

class LengthMismatch(DataError):
    """Empirical distributions with different sample sizes."""


class DimMismatch(DataError):
    """Objects with incompatible dimensions."""


class NonFinite(DataError):
    """NaN or infinity where a finite value is required."""


class ShapeMismatch(DataError):
    """Array arguments with inconsistent shapes."""


class NotSymmetric(DataError):
    """A matrix argument that must be symmetric is not."""


class RankDeficient(DataError):
    """A basis matrix without full column rank."""


# -- numerical errors -------------------------------------------------------

class NotPositiveDefinite(NumericalError):
    """A matrix required to be SPD has an eigenvalue at or below the floor."""


class SingularCovariance(NumericalError):
    """Predictor sample covariance too close to singular to standardize."""


class ZeroVariance(NumericalError):
    """A predictor column with zero variance."""

    def __init__(self, column: int, message: str | None = None):
        self.column = column
        super().__init__(message or f"column {column} has zero variance")


class DegenerateDistances(NumericalError):
    """All off-diagonal distances are zero; no kernel scale exists."""


class DegenerateColumn(NumericalError):
    """A kernel column with equal entries cannot be sliced."""


class DegenerateEnsemble(NumericalError):
    """More than half of the ensemble members were degenerate."""


class SingularLocalFit(NumericalError):
    """A local weighted least-squares system was singular."""

    def __init__(self, center: int, message: str | None = None):
        self.center = center
        super().__init__(message or f"singular local fit at center {center}")


class SingularMaveSystem(NumericalError):
    """The stacked MAVE normal equations were singular."""


class AllZeroWeights(NumericalError):
    """Smoothing weights underflowed to zero for every neighbour."""


class InvalidModel(ConfigError):
    """A simulation model incompatible with the requested dimensions."""
