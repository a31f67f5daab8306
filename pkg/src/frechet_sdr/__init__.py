"""Sufficient dimension reduction for metric-space-valued responses.

Estimates a low-dimensional subspace of the Euclidean predictors that
carries all the information about a response living in a metric space
(univariate distributions, SPD matrices, or spheres), by ensembling
classical SDR estimators over a universal-kernel family of transformed
responses.
"""

from .api import ALL_METHODS, fit_named
from .errors import FrechetSdrError
from .forward_ensemble import bandwidth_schedule, fmave_fit, fopg_fit
from .inverse_ensemble import InverseMethod, SliceScheme, SliceSpec, fit_inverse
from .kernels import KernelFamily, KernelGram, KernelSpec, center_columns, gram, select_gamma
from .linalg import (
    PredictorMatrix,
    SubspaceEstimate,
    benchmark_distance,
    inv_sqrt_psd,
    projection_distance,
    standardize_full,
    standardize_marginal,
    top_eigenvectors,
)
from .metrics import (
    EmpiricalDistribution,
    MetricKind,
    ResponseKind,
    ResponseSet,
    SpdMatrix,
    UnitVector,
    matrix_log,
    pairwise_distances,
    spd_frobenius,
    spd_log_euclidean,
    sphere_geodesic,
    wasserstein2,
)
from .moment_ensemble import MomentMethod, MomentSpec, fit_moment
from .report import FitReport
from .simulate import GroundTruth, ModelId, SimConfig, gen_dataset, gen_predictors, run_experiment

__version__ = "0.1.0"

__all__ = [
    "ALL_METHODS",
    "EmpiricalDistribution",
    "FitReport",
    "FrechetSdrError",
    "GroundTruth",
    "InverseMethod",
    "KernelFamily",
    "KernelGram",
    "KernelSpec",
    "MetricKind",
    "ModelId",
    "MomentMethod",
    "MomentSpec",
    "PredictorMatrix",
    "ResponseKind",
    "ResponseSet",
    "SimConfig",
    "SliceScheme",
    "SliceSpec",
    "SpdMatrix",
    "SubspaceEstimate",
    "UnitVector",
    "bandwidth_schedule",
    "benchmark_distance",
    "center_columns",
    "fit_inverse",
    "fit_moment",
    "fit_named",
    "fmave_fit",
    "fopg_fit",
    "gen_dataset",
    "gen_predictors",
    "gram",
    "inv_sqrt_psd",
    "matrix_log",
    "pairwise_distances",
    "projection_distance",
    "run_experiment",
    "select_gamma",
    "spd_frobenius",
    "spd_log_euclidean",
    "sphere_geodesic",
    "standardize_full",
    "standardize_marginal",
    "top_eigenvectors",
    "wasserstein2",
]
