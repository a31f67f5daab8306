"""Kernel ensembles over response distances.

The estimator ensemble is the family of functions kappa(., Y_i) evaluated at
the observed responses, collected into an n x n Gram matrix. Gaussian kernels
use exp(-gamma * d^2), Laplacian kernels exp(-gamma * d).
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError, DegenerateDistances, DimMismatch, NonFinite
from .metrics import MetricKind


class KernelFamily(enum.Enum):
    GAUSSIAN = "gaussian"
    LAPLACIAN = "laplacian"


#: (metric, family) pairs with a known-valid (positive definite) kernel.
#: The Gaussian kernel on geodesic sphere distances is indefinite.
UNIVERSAL_PAIRS = frozenset({
    (MetricKind.WASSERSTEIN2, KernelFamily.GAUSSIAN),
    (MetricKind.WASSERSTEIN2, KernelFamily.LAPLACIAN),
    (MetricKind.SPD_FROBENIUS, KernelFamily.GAUSSIAN),
    (MetricKind.SPD_FROBENIUS, KernelFamily.LAPLACIAN),
    (MetricKind.SPD_LOG_EUCLIDEAN, KernelFamily.GAUSSIAN),
    (MetricKind.SPD_LOG_EUCLIDEAN, KernelFamily.LAPLACIAN),
    (MetricKind.SPHERE_GEODESIC, KernelFamily.LAPLACIAN),
})

#: Smallest Gram eigenvalue tolerated before a diagnostic warning is issued.
PSD_WARN_FLOOR = -1e-8


def is_universal_pair(kind: MetricKind, family: KernelFamily) -> bool:
    return (kind, family) in UNIVERSAL_PAIRS


class IndefiniteGramWarning(UserWarning):
    """Gram matrix has an eigenvalue below the PSD tolerance."""


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus bandwidth parameter.

    ``gamma=None`` requests the automatic median heuristic.
    """

    family: KernelFamily = KernelFamily.GAUSSIAN
    gamma: Optional[float] = None

    def __post_init__(self):
        if self.gamma is not None and not self.gamma > 0:
            raise ConfigError(f"gamma must be positive, got {self.gamma}")


@dataclass(frozen=True)
class KernelGram:
    """n x n matrix of kernel evaluations kappa(Y_j, Y_k).

    Symmetric with unit diagonal and entries in (0, 1]. Positive
    semidefiniteness is diagnostic only: an eigenvalue below -1e-8 triggers
    a warning, not an error, since slicing-based estimators tolerate
    indefiniteness.
    """

    entries: np.ndarray
    spec: KernelSpec
    gamma_used: float

    def __post_init__(self):
        g = np.asarray(self.entries, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise DimMismatch(f"gram must be square, got shape {g.shape}")
        if not np.all(np.isfinite(g)):
            raise NonFinite("gram entries must be finite")
        if np.abs(g - g.T).max() != 0.0:
            raise DimMismatch("gram must be exactly symmetric")
        if np.any(np.diag(g) != 1.0):
            raise DimMismatch("gram diagonal must be exactly 1")
        if g.min() <= 0.0 or g.max() > 1.0:
            raise DimMismatch("gram entries must lie in (0, 1]")
        g = g.copy()
        g.flags.writeable = False
        object.__setattr__(self, "entries", g)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.entries)[0])


def select_gamma(d: np.ndarray, spec: KernelSpec) -> float:
    """Resolve the kernel bandwidth for a distance matrix.

    Explicit gamma passes through. The automatic rule is the median
    heuristic on the strictly positive off-diagonal distances:
    gamma = 1 / (2 med^2) for Gaussian, 1 / med for Laplacian.
    """
    if spec.gamma is not None:
        return float(spec.gamma)
    d = np.asarray(d, dtype=float)
    iu = np.triu_indices(d.shape[0], k=1)
    off = d[iu]
    pos = off[off > 0.0]
    if pos.size == 0:
        raise DegenerateDistances("all off-diagonal distances are zero")
    med = float(np.median(pos))
    if spec.family is KernelFamily.GAUSSIAN:
        return 1.0 / (2.0 * med * med)
    return 1.0 / med


def gram(d: np.ndarray, spec: KernelSpec, check_psd: bool = True) -> KernelGram:
    """Build the kernel Gram matrix from a pairwise distance matrix."""
    d = np.asarray(d, dtype=float)
    g = select_gamma(d, spec)
    if spec.family is KernelFamily.GAUSSIAN:
        k = np.exp(-g * d * d)
    else:
        k = np.exp(-g * d)
    # The distance matrix is exactly symmetric with zero diagonal, so k
    # already has unit diagonal; fill defensively anyway.
    np.fill_diagonal(k, 1.0)
    out = KernelGram(entries=k, spec=spec, gamma_used=g)
    if check_psd:
        lam = out.min_eigenvalue()
        if lam < PSD_WARN_FLOOR:
            warnings.warn(
                f"gram matrix is indefinite (smallest eigenvalue {lam:.3e}); "
                "moment and forward estimators may be unreliable",
                IndefiniteGramWarning,
                stacklevel=2,
            )
    return out


def center_columns(g: KernelGram) -> np.ndarray:
    """Subtract the column mean from every column of the Gram matrix.

    Column k of the output is the centered ensemble member
    kappa(., Y_k) - E_n kappa(Y, Y_k); every output column sums to zero.
    """
    e = g.entries
    return e - e.mean(axis=0, keepdims=True)
