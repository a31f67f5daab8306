"""Shared numerical primitives.

Standardization, symmetric eigendecomposition helpers, inverse square roots,
and subspace distances. All sample moments use the divisor n so they match
empirical means throughout the package.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    NonFinite,
    NotPositiveDefinite,
    NotSymmetric,
    RankDeficient,
    ShapeMismatch,
    SingularCovariance,
    ZeroVariance,
)

#: Relative ridge added to near-singular covariance eigenvalues by default.
DEFAULT_RIDGE_SCALE = 1e-10


@dataclass(frozen=True)
class PredictorMatrix:
    """n x p matrix of Euclidean predictors with optional column names."""

    x: np.ndarray
    column_names: Optional[tuple] = None

    def __post_init__(self):
        a = np.asarray(self.x, dtype=float)
        if a.ndim != 2:
            raise ShapeMismatch(f"predictors must be 2-d, got shape {a.shape}")
        if a.shape[0] < 2:
            raise ShapeMismatch("need at least two observations")
        if not np.all(np.isfinite(a)):
            raise NonFinite("predictor entries must be finite")
        a = a.copy()
        a.flags.writeable = False
        object.__setattr__(self, "x", a)
        if self.column_names is not None:
            names = tuple(str(c) for c in self.column_names)
            if len(names) != a.shape[1]:
                raise ShapeMismatch("column_names length must equal p")
            object.__setattr__(self, "column_names", names)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]


@dataclass(frozen=True)
class SubspaceEstimate:
    """Orthonormal basis of an estimated subspace plus eigenvalue diagnostics."""

    basis: np.ndarray
    eigenvalues: np.ndarray
    estimator: str = "eig"

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        ev = np.asarray(self.eigenvalues, dtype=float)
        d0 = b.shape[1]
        if np.abs(b.T @ b - np.eye(d0)).max() > 1e-10:
            raise RankDeficient("basis columns are not orthonormal")
        if np.any(np.diff(ev) > 0):
            raise ShapeMismatch("eigenvalues must be non-increasing")
        b = b.copy()
        b.flags.writeable = False
        object.__setattr__(self, "basis", b)
        object.__setattr__(self, "eigenvalues", ev.copy())

    @property
    def d0(self) -> int:
        return self.basis.shape[1]


def _cov_n(x: np.ndarray) -> np.ndarray:
    """Sample covariance with divisor n."""
    xc = x - x.mean(axis=0, keepdims=True)
    return xc.T @ xc / x.shape[0]


def inv_sqrt_psd(m: np.ndarray, ridge: float = 0.0) -> np.ndarray:
    """Symmetric inverse square root of a PSD matrix.

    Eigenvalues lambda_i are replaced by (lambda_i + ridge)^(-1/2).
    """
    m = np.asarray(m, dtype=float)
    scale = max(1.0, float(np.abs(m).max()))
    if m.ndim != 2 or m.shape[0] != m.shape[1] or np.abs(m - m.T).max() > 1e-8 * scale:
        raise NotSymmetric("input must be a symmetric square matrix")
    w, v = np.linalg.eigh(0.5 * (m + m.T))
    shifted = w + ridge
    if shifted[0] <= 0.0:
        raise NotPositiveDefinite(
            f"eigenvalue {w[0]:.3e} plus ridge {ridge:.3e} is not positive"
        )
    out = (v * shifted ** -0.5) @ v.T
    return 0.5 * (out + out.T)


def standardize_full(x: PredictorMatrix, ridge: Optional[float] = None):
    """Center and whiten predictors: z_i = Sigma^(-1/2) (x_i - mean).

    Returns ``(z, mean, sigma_inv_sqrt)``. With ``ridge=None`` a small
    relative ridge (1e-10 * trace/p) stabilizes near-collinear predictors,
    but covariance eigenvalues at or below that floor raise
    :class:`SingularCovariance`. Passing ``ridge=0`` disables regularization
    entirely (same floor check); an explicit positive ridge skips the check.
    """
    xa = x.x
    mean = xa.mean(axis=0)
    sigma = _cov_n(xa)
    floor = DEFAULT_RIDGE_SCALE * np.trace(sigma) / x.p
    lam_min = float(np.linalg.eigvalsh(sigma)[0])
    if ridge is None or ridge == 0.0:
        if lam_min <= floor:
            raise SingularCovariance(
                f"covariance eigenvalue {lam_min:.3e} at or below floor {floor:.3e}"
            )
        ridge_val = floor if ridge is None else 0.0
    else:
        ridge_val = float(ridge)
    s_inv_sqrt = inv_sqrt_psd(sigma, ridge_val)
    z = (xa - mean) @ s_inv_sqrt
    return z, mean, s_inv_sqrt


def standardize_marginal(x: PredictorMatrix):
    """Scale each predictor column to mean 0 and standard deviation 1.

    Returns ``(z, sds)``. Standard deviations use divisor n.
    """
    xa = x.x
    mean = xa.mean(axis=0)
    sds = np.sqrt(((xa - mean) ** 2).mean(axis=0))
    for j, s in enumerate(sds):
        if s == 0.0:
            raise ZeroVariance(j)
    return (xa - mean) / sds, sds


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip column signs so the largest-magnitude entry is positive."""
    out = vectors.copy()
    for j in range(out.shape[1]):
        k = int(np.argmax(np.abs(out[:, j])))
        if out[k, j] < 0:
            out[:, j] = -out[:, j]
    return out


def top_eigenvectors(
    m: np.ndarray,
    d0: int,
    by_magnitude: bool = False,
    estimator: str = "eig",
) -> SubspaceEstimate:
    """Leading eigenvectors of a symmetric matrix.

    Eigenpairs are ranked by eigenvalue, or by absolute eigenvalue when
    ``by_magnitude`` is set (used for indefinite candidate matrices). The
    full eigenvalue vector is retained for scree output, and each
    eigenvector's largest-magnitude entry is made positive for
    reproducibility.
    """
    m = np.asarray(m, dtype=float)
    p = m.shape[0]
    if not 1 <= d0 <= p:
        raise ShapeMismatch(f"d0 must be in [1, {p}], got {d0}")
    w, v = np.linalg.eigh(0.5 * (m + m.T))
    key = np.abs(w) if by_magnitude else w
    order = np.argsort(key)[::-1]
    ranked = key[order]
    basis = _fix_signs(v[:, order[:d0]])
    return SubspaceEstimate(basis=basis, eigenvalues=ranked, estimator=estimator)


def orthonormalize(b: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the column span, with deterministic signs."""
    q, r = np.linalg.qr(b)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return _fix_signs(q * signs)


def projection_distance(b1: np.ndarray, b2: np.ndarray) -> float:
    """Frobenius distance between the orthogonal projectors of two spans.

    Bases need not be orthonormal but must have full column rank. The value
    lies in [0, sqrt(d1 + d2)] and is invariant to changes of basis.
    """
    projs = []
    for b in (b1, b2):
        b = np.asarray(b, dtype=float)
        if b.ndim == 1:
            b = b[:, None]
        q, r = np.linalg.qr(b)
        diag = np.abs(np.diag(r))
        if diag.min() <= 1e-12 * max(1.0, diag.max()):
            raise RankDeficient("basis does not have full column rank")
        projs.append(q @ q.T)
    return float(np.linalg.norm(projs[0] - projs[1], "fro"))


def benchmark_distance(p: int, d0: int, reps: int, seed: int) -> float:
    """Mean projection distance between independent uniform random subspaces.

    Each subspace is the span of an orthonormalized p x d0 standard normal
    matrix. Used as the no-information reference level for estimation error.
    """
    rng = np.random.Generator(np.random.Philox(seed))
    total = 0.0
    for _ in range(reps):
        b1 = orthonormalize(rng.standard_normal((p, d0)))
        b2 = orthonormalize(rng.standard_normal((p, d0)))
        total += projection_distance(b1, b2)
    return total / reps
