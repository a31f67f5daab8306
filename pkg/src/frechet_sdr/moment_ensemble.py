"""Ensembled moment estimators: Frechet OLS, PHD, and IHT.

Each estimator forms a p x p candidate matrix by averaging, over the
observed responses Y_i, a classical moment-based candidate computed for the
transformed scalar response kappa(Y, Y_i). The leading eigenvectors of the
averaged candidate estimate the central subspace on the standardized scale.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._fitcore import catch_gram_warnings, finalize_report, prepare_gram
from .errors import ConfigError, ShapeMismatch
from .kernels import KernelSpec, center_columns
from .linalg import PredictorMatrix, standardize_full, top_eigenvectors
from .metrics import MetricKind, ResponseSet
from .report import FitReport

#: Cap on the number of iterative Hessian powers, to bound conditioning.
MAX_IHT_POWERS = 10


class MomentMethod(enum.Enum):
    FOLS = "fols"
    FPHD = "fphd"
    FIHT = "fiht"


@dataclass(frozen=True)
class MomentSpec:
    """Choice of moment estimator, with the IHT power count when relevant."""

    method: MomentMethod
    iht_r: Optional[int] = None

    def __post_init__(self):
        if self.iht_r is not None and self.iht_r < 1:
            raise ConfigError(f"iht_r must be >= 1, got {self.iht_r}")


def _check_shapes(z: np.ndarray, kc: np.ndarray):
    if z.ndim != 2 or kc.ndim != 2 or kc.shape[0] != kc.shape[1] or z.shape[0] != kc.shape[0]:
        raise ShapeMismatch(
            f"incompatible shapes: z {z.shape}, gram {kc.shape}"
        )


def fols_candidate(z, gram) -> np.ndarray:
    """Average of C(Y_i) C(Y_i)^T with C(y) = cov_n[Z, kappa(Y, y)].

    PSD by construction; vanishes when the kernel columns are constant.
    """
    kc = center_columns(gram)
    _check_shapes(z, kc)
    n = z.shape[0]
    c = z.T @ kc / n
    m = c @ c.T / n
    return 0.5 * (m + m.T)


def fphd_candidate(z, gram) -> np.ndarray:
    """Average of E_n[Z Z^T kappa_c(Y, Y_i)] over ensemble members.

    Symmetric but generally indefinite; the fit ranks its eigenpairs by
    algebraic eigenvalue.
    """
    kc = center_columns(gram)
    _check_shapes(z, kc)
    n = z.shape[0]
    w = kc.sum(axis=1)
    m = (z * w[:, None]).T @ z / (n * n)
    return 0.5 * (m + m.T)


def _iht_stack(c: np.ndarray, h: np.ndarray, r: int) -> np.ndarray:
    """Columns C, HC, ..., H^r C for one ensemble member."""
    cols = [c]
    v = c
    for _ in range(r):
        v = h @ v
        cols.append(v)
    return np.column_stack(cols)


def fiht_candidate(z, gram, r: int) -> np.ndarray:
    """Average of W(Y_i) W(Y_i)^T with W(y) = (C(y), H(y)C(y), ..., H(y)^r C(y)).

    ``r = 0`` collapses to the OLS candidate and is allowed for testing.
    """
    if r < 0:
        raise ConfigError(f"r must be non-negative, got {r}")
    kc = center_columns(gram)
    _check_shapes(z, kc)
    n, p = z.shape
    m = np.zeros((p, p))
    c_all = z.T @ kc / n
    for i in range(n):
        h = (z * kc[:, i][:, None]).T @ z / n
        h = 0.5 * (h + h.T)
        w = _iht_stack(c_all[:, i], h, r)
        m += w @ w.T
    m /= n
    return 0.5 * (m + m.T)


def _loo_candidate(z: np.ndarray, gram_entries: np.ndarray, method: MomentMethod, r: int) -> np.ndarray:
    """Leave-one-out variant: member i uses moments over the sample minus i.

    Predictor standardization stays global; only the per-member kernel
    centering and moment averages drop subject i. Numerically this tracks
    the default path closely and exists for the consistency-trend check.
    """
    n, p = z.shape
    m = np.zeros((p, p))
    for i in range(n):
        mask = np.ones(n, dtype=bool)
        mask[i] = False
        zi = z[mask]
        col = gram_entries[mask, i]
        kc = col - col.mean()
        if method is MomentMethod.FOLS:
            c = zi.T @ kc / (n - 1)
            m += np.outer(c, c)
        elif method is MomentMethod.FPHD:
            m += (zi * kc[:, None]).T @ zi / (n - 1)
        else:
            c = zi.T @ kc / (n - 1)
            h = (zi * kc[:, None]).T @ zi / (n - 1)
            h = 0.5 * (h + h.T)
            w = _iht_stack(c, h, r)
            m += w @ w.T
    m /= n
    return 0.5 * (m + m.T)


def resolve_iht_r(spec: MomentSpec, p: int) -> int:
    if spec.iht_r is not None:
        return spec.iht_r
    return max(1, min(p - 1, MAX_IHT_POWERS))


def fit_moment(
    x: PredictorMatrix,
    ys: ResponseSet,
    kind: MetricKind,
    kspec: KernelSpec,
    mspec: MomentSpec,
    d0: int,
    ridge: Optional[float] = None,
    truth: Optional[np.ndarray] = None,
    loo: bool = False,
) -> FitReport:
    """Full moment-estimator pipeline.

    Standardize predictors, build the kernel Gram matrix, average the
    method's candidate matrix over ensemble members, extract the leading
    d0 eigenvectors, and map the basis back to the original predictor scale.
    """
    z, _, s_inv_sqrt = standardize_full(x, ridge)
    g, notes = catch_gram_warnings(prepare_gram, x, ys, kind, kspec)
    r = resolve_iht_r(mspec, x.p)
    if loo:
        m = _loo_candidate(z, g.entries, mspec.method, r)
    elif mspec.method is MomentMethod.FOLS:
        m = fols_candidate(z, g)
    elif mspec.method is MomentMethod.FPHD:
        m = fphd_candidate(z, g)
    else:
        m = fiht_candidate(z, g, r)
    sub = top_eigenvectors(m, d0, estimator=mspec.method.value)
    hyper = {
        "kernel_family": kspec.family.value,
        "gamma": g.gamma_used,
        "metric": kind.value,
        "d0": d0,
        "loo": loo,
    }
    if mspec.method is MomentMethod.FIHT:
        hyper["iht_r"] = r
    return finalize_report(
        x, sub.basis, s_inv_sqrt, sub.eigenvalues, mspec.method.value, hyper, truth, notes
    )
