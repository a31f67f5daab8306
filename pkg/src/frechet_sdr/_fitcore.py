"""Shared plumbing for the estimator pipelines."""
from __future__ import annotations

import warnings
from typing import Optional

import numpy as np

from . import kernels
from .errors import ShapeMismatch
from .linalg import PredictorMatrix, orthonormalize, projection_distance
from .metrics import MetricKind, ResponseSet, pairwise_distances
from .report import FitReport


def prepare_gram(
    x: PredictorMatrix,
    ys: ResponseSet,
    kind: MetricKind,
    kspec: kernels.KernelSpec,
) -> kernels.KernelGram:
    """Distance matrix plus Gram matrix, with the n-consistency check."""
    if x.n != len(ys):
        raise ShapeMismatch(f"{x.n} predictor rows but {len(ys)} responses")
    d = pairwise_distances(ys, kind)
    return kernels.gram(d, kspec)


def finalize_report(
    x: PredictorMatrix,
    basis_std: np.ndarray,
    back_transform: np.ndarray,
    eigenvalues: np.ndarray,
    method: str,
    hyper: dict,
    truth: Optional[np.ndarray] = None,
    warn: Optional[list] = None,
) -> FitReport:
    """Map a basis from the standardized scale back to the X scale.

    ``back_transform`` multiplies each standardized-scale direction
    (Sigma^(-1/2) for full standardization, diag(1/sd) for marginal); the
    result is re-orthonormalized before reporting.
    """
    basis = orthonormalize(back_transform @ basis_std)
    report = FitReport(
        method=method,
        hyperparameters=hyper,
        eigenvalues=eigenvalues,
        basis=basis,
        sufficient_predictors=x.x @ basis,
        warnings=list(warn or []),
    )
    if truth is not None:
        report.error = projection_distance(basis, truth)
    return report


def catch_gram_warnings(fn, *args, **kwargs):
    """Run ``fn`` recording any kernel diagnostics as report warnings."""
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", kernels.IndefiniteGramWarning)
        out = fn(*args, **kwargs)
    notes = [str(w.message) for w in caught if issubclass(w.category, kernels.IndefiniteGramWarning)]
    return out, notes
