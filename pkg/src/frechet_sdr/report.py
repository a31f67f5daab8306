"""Fit results container."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import RankDeficient, ShapeMismatch


@dataclass
class FitReport:
    """Outcome of one estimator run.

    ``eigenvalues`` is the full spectrum of the candidate matrix (for scree
    inspection), ``basis`` the p x d0 estimate of the central subspace on the
    original predictor scale, and ``sufficient_predictors`` the n x d0 matrix
    of projected predictors X @ basis. ``error`` is the projection distance
    to a known truth when one was supplied.
    """

    method: str
    hyperparameters: dict
    eigenvalues: np.ndarray
    basis: np.ndarray
    sufficient_predictors: np.ndarray
    error: Optional[float] = None
    warnings: list = field(default_factory=list)

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        if b.ndim != 2:
            raise ShapeMismatch("basis must be 2-d")
        d0 = b.shape[1]
        if np.abs(b.T @ b - np.eye(d0)).max() > 1e-8:
            raise RankDeficient("report basis must have orthonormal columns")
        ev = np.asarray(self.eigenvalues, dtype=float)
        if np.any(np.diff(ev) > 1e-12):
            raise ShapeMismatch("eigenvalues must be non-increasing")
        self.basis = b
        self.eigenvalues = ev
        self.sufficient_predictors = np.asarray(self.sufficient_predictors, dtype=float)

    @property
    def d0(self) -> int:
        return self.basis.shape[1]
