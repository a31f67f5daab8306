"""Ensembled forward-regression estimators.

FOPG averages outer products of local-linear gradient estimates of
E[kappa(Y, Y_k) | X] over all centers j and ensemble members k; its refined
version shrinks the smoothing kernel onto the current subspace estimate and
iterates. FMAVE alternates between local coefficient fits and a pooled
update of the projection matrix, minimizing a single weighted least-squares
objective.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._fitcore import catch_gram_warnings, finalize_report, prepare_gram
from .errors import ShapeMismatch, SingularMaveSystem
from .kernels import KernelSpec
from .linalg import PredictorMatrix, orthonormalize, standardize_marginal, top_eigenvectors
from .metrics import MetricKind, ResponseSet
from .report import FitReport

#: Bandwidth constant from the classical OPG/MAVE recipe.
C0 = 2.34

#: Relative ridge on local weighted normal matrices.
LOCAL_RIDGE = 1e-8

#: Iteration budget for the refined estimators.
DEFAULT_MAX_ITER = 10


class SingularCenterWarning(UserWarning):
    """A local least-squares system was singular; the center was skipped."""


@dataclass
class SmoothingState:
    """Current bandwidth, projection for the kernel weights, and iteration."""

    h: float
    b_current: np.ndarray
    iteration: int = 0


@dataclass(frozen=True)
class LocalFit:
    """Per-center local linear fits against every ensemble member.

    ``a[j, k]`` is the intercept and ``b[j, :, k]`` the coefficient vector of
    the fit centered at j for kernel column k. ``skipped`` lists centers
    whose normal matrix was singular.
    """

    a: np.ndarray
    b: np.ndarray
    skipped: tuple = ()


def bandwidth_schedule(n: int, p: int, d0: int, t: int) -> float:
    """Bandwidth after t shrinkage steps.

    h_0 = c0 * n^(-1/(p0+6)) with p0 = max(p, 3); subsequent bandwidths
    shrink by the factor r_n = n^(-1/(2(p0+6))) but never drop below
    c0 * n^(-1/(d0+4)).
    """
    if t < 0:
        raise ShapeMismatch(f"t must be non-negative, got {t}")
    p0 = max(p, 3)
    h = C0 * n ** (-1.0 / (p0 + 6))
    r_n = n ** (-1.0 / (2 * (p0 + 6)))
    floor = C0 * n ** (-1.0 / (d0 + 4))
    for _ in range(t):
        h = max(r_n * h, floor)
    return h


def _projected_sq_dists(z: np.ndarray, b: np.ndarray, block: int = 128) -> np.ndarray:
    """Squared pairwise distances of the rows of z @ b, by direct differences."""
    proj = z @ b
    n = proj.shape[0]
    out = np.empty((n, n))
    for start in range(0, n, block):
        stop = min(start + block, n)
        diff = proj[start:stop, None, :] - proj[None, :, :]
        out[start:stop] = np.sum(diff * diff, axis=-1)
    return out


def _normalize_rows(raw: np.ndarray, d2: np.ndarray, min_support: int) -> np.ndarray:
    """Normalize kernel weights per center, with a nearest-neighbour fallback.

    A center whose positive weights cannot identify the local design gets
    uniform weights over its min_support nearest points instead.
    """
    n_points = raw.shape[1]
    k = min(n_points, min_support)
    w = raw.copy()
    support = (w > 0.0).sum(axis=1)
    for j in np.flatnonzero(support < k):
        nearest = np.argsort(d2[j], kind="stable")[:k]
        w[j] = 0.0
        w[j, nearest] = 1.0
    return w / w.sum(axis=1, keepdims=True)


def _weights_all(z: np.ndarray, b: np.ndarray, h: float, min_support: int) -> np.ndarray:
    """Row j holds the normalized kernel weights w_h for center j."""
    d2 = _projected_sq_dists(z, b)
    raw = np.exp(-d2 / (2.0 * h * h))
    return _normalize_rows(raw, d2, min_support)


def local_weights(z: np.ndarray, b: np.ndarray, h: float, j: int, min_support: Optional[int] = None) -> np.ndarray:
    """Normalized Gaussian kernel weights of every point relative to center j.

    Weights are proportional to K0(||b^T (z_i - z_j)|| / h) with K0 the
    standard normal density; the density's constants cancel in the
    normalization. When too few points carry positive weight the center
    falls back to uniform weights over its nearest neighbours.
    """
    if h <= 0:
        raise ShapeMismatch(f"bandwidth must be positive, got {h}")
    diff = (z - z[j]) @ b
    d2 = np.sum(diff * diff, axis=-1)
    raw = np.exp(-d2 / (2.0 * h * h))
    need = min_support if min_support is not None else b.shape[0] + 2
    return _normalize_rows(raw[None, :], d2[None, :], need)[0]


def _ridge_eye(m: np.ndarray, scale: float) -> np.ndarray:
    """Identity perturbation sized relative to the mean diagonal of each matrix."""
    dim = m.shape[-1]
    tr = np.trace(m, axis1=-2, axis2=-1)
    return scale * (tr / dim)[..., None, None] * np.eye(dim)


def _batched_weighted_ls(design: np.ndarray, w: np.ndarray, kmat: np.ndarray, ridge: float):
    """Solve, for every center j, the weighted LS of all kernel columns.

    ``design[j]`` is the n x q local design, ``w[j]`` the weights. Returns
    the (n, q, n) solution stack plus the indices of singular centers,
    which are zero-filled.
    """
    n, _, q = design.shape
    gw = design * w[:, :, None]
    m = np.einsum("jiq,jir->jqr", gw, design)
    m = m + _ridge_eye(m, ridge)
    rhs = (gw.transpose(0, 2, 1).reshape(n * q, n) @ kmat).reshape(n, q, n)
    try:
        return np.linalg.solve(m, rhs), ()
    except np.linalg.LinAlgError:
        coefs = np.zeros((n, q, n))
        skipped = []
        for j in range(n):
            try:
                coefs[j] = np.linalg.solve(m[j], rhs[j])
            except np.linalg.LinAlgError:
                skipped.append(j)
        return coefs, tuple(skipped)


def opg_local_ls(z: np.ndarray, kmat: np.ndarray, weights: np.ndarray, ridge: float = LOCAL_RIDGE) -> LocalFit:
    """Local linear fits of every kernel column around every center.

    For center j the design is (1, z_i - z_j) and all n kernel columns are
    regressed simultaneously; gradients sit in the bottom p rows.
    """
    n, p = z.shape
    if kmat.shape != (n, n) or weights.shape != (n, n):
        raise ShapeMismatch(
            f"kernel {kmat.shape} and weights {weights.shape} must be {(n, n)}"
        )
    delta = z[None, :, :] - z[:, None, :]
    design = np.concatenate([np.ones((n, n, 1)), delta], axis=2)
    coefs, skipped = _batched_weighted_ls(design, weights, kmat, ridge)
    if skipped:
        warnings.warn(
            f"skipped {len(skipped)} singular local fit(s)",
            SingularCenterWarning,
            stacklevel=2,
        )
    return LocalFit(a=coefs[:, 0, :], b=coefs[:, 1:, :], skipped=skipped)


def _opg_iteration(z, kmat, state: SmoothingState, ridge: float):
    """One gradient outer-product pass; returns the spectrum and new basis."""
    n, p = z.shape
    w = _weights_all(z, state.b_current, state.h, min_support=p + 2)
    fit = opg_local_ls(z, kmat, w, ridge)
    lam = np.einsum("jpk,jqk->pq", fit.b, fit.b) / (n * n)
    return 0.5 * (lam + lam.T)


def fopg_fit(
    x: PredictorMatrix,
    ys: ResponseSet,
    kind: MetricKind,
    kspec: KernelSpec,
    d0: int,
    refine: bool = True,
    max_iter: int = DEFAULT_MAX_ITER,
    ridge: float = LOCAL_RIDGE,
    truth: Optional[np.ndarray] = None,
) -> FitReport:
    """Gradient outer-product estimator, single pass or refined.

    The refined variant projects the smoothing kernel through the current
    basis and shrinks the bandwidth each iteration. The final basis is the
    eigenbasis mapped back through the marginal standardization.
    """
    z, sds = standardize_marginal(x)
    g, notes = catch_gram_warnings(prepare_gram, x, ys, kind, kspec)
    n, p = z.shape
    state = SmoothingState(h=bandwidth_schedule(n, p, d0, 0), b_current=np.eye(p))
    schedule = []
    eigenvalues = None
    iters = max_iter if refine else 1
    for t in range(1, iters + 1):
        schedule.append(state.h)
        lam = _opg_iteration(z, g.entries, state, ridge)
        sub = top_eigenvectors(lam, d0, estimator="rfopg" if refine else "fopg")
        eigenvalues = sub.eigenvalues
        state = SmoothingState(
            h=bandwidth_schedule(n, p, d0, t), b_current=sub.basis, iteration=t
        )
    hyper = {
        "kernel_family": kspec.family.value,
        "gamma": g.gamma_used,
        "metric": kind.value,
        "d0": d0,
        "refine": refine,
        "max_iter": iters,
        "h_schedule": schedule,
        "ridge": ridge,
    }
    method = "rfopg" if refine else "fopg"
    return finalize_report(
        x, state.b_current, np.diag(1.0 / sds), eigenvalues, method, hyper, truth, notes
    )


# -- MAVE ---------------------------------------------------------------------

def mave_local_coefs(z, kmat, w, b, ridge: float = LOCAL_RIDGE):
    """Step (i): intercepts and projected-scale loadings for fixed B.

    Regresses every kernel column on (1, (z_i - z_j) @ B) around each
    center. Returns (a, c) with a of shape (n, n) and c of shape (n, d0, n).
    """
    n = z.shape[0]
    proj = z @ b
    delta = proj[None, :, :] - proj[:, None, :]
    design = np.concatenate([np.ones((n, n, 1)), delta], axis=2)
    coefs, skipped = _batched_weighted_ls(design, w, kmat, ridge)
    if skipped:
        warnings.warn(
            f"skipped {len(skipped)} singular local fit(s)",
            SingularCenterWarning,
            stacklevel=2,
        )
    return coefs[:, 0, :], coefs[:, 1:, :]


def mave_basis_step(z, kmat, w, a, c, ridge: float = LOCAL_RIDGE) -> np.ndarray:
    """Step (ii): pooled update of B for fixed local coefficients.

    Solves the (p d0) x (p d0) normal equations of the joint objective; the
    flattening is row-major so the normal matrix is the Kronecker product of
    the weighted difference Gram and the loading Gram per center.
    """
    n, p = z.shape
    d0 = c.shape[1]
    delta = z[None, :, :] - z[:, None, :]
    s = np.einsum("jip,ji,jiq->jpq", delta, w, delta)
    t = np.einsum("jdk,jek->jde", c, c)
    normal = np.einsum("jpq,jde->pdqe", s, t).reshape(p * d0, p * d0)
    v = np.einsum("ik,jdk->jid", kmat, c) - np.einsum("jk,jdk->jd", a, c)[:, None, :]
    rhs = np.einsum("jip,ji,jid->pd", delta, w, v).reshape(p * d0)
    for scale in (ridge, ridge * 1e3):
        try:
            sol = np.linalg.solve(normal + _ridge_eye(normal, scale), rhs)
            return sol.reshape(p, d0)
        except np.linalg.LinAlgError:
            continue
    raise SingularMaveSystem("stacked MAVE normal equations are singular")


def mave_objective(z, kmat, w, a, c, b) -> float:
    """Pooled weighted least-squares objective for the current (a, c, B)."""
    n = z.shape[0]
    proj = z @ b
    total = 0.0
    for j in range(n):
        pred = a[j][None, :] + (proj - proj[j]) @ c[j]
        resid = kmat - pred
        total += float(w[j] @ np.sum(resid * resid, axis=1))
    return total


def fmave_fit(
    x: PredictorMatrix,
    ys: ResponseSet,
    kind: MetricKind,
    kspec: KernelSpec,
    d0: int,
    refine: bool = True,
    max_iter: int = DEFAULT_MAX_ITER,
    ridge: float = LOCAL_RIDGE,
    truth: Optional[np.ndarray] = None,
) -> FitReport:
    """Minimum average variance estimator, plain or refined.

    Initialized from a single-pass FOPG; each iteration alternates the two
    exact coordinate minimizations and re-orthonormalizes B. The refined
    variant also projects the smoothing kernel through the current B.
    """
    z, sds = standardize_marginal(x)
    g, notes = catch_gram_warnings(prepare_gram, x, ys, kind, kspec)
    kmat = g.entries
    n, p = z.shape

    init_state = SmoothingState(h=bandwidth_schedule(n, p, d0, 0), b_current=np.eye(p))
    lam = _opg_iteration(z, kmat, init_state, ridge)
    init = top_eigenvectors(lam, d0, estimator="fopg")
    b_cur = init.basis

    schedule = []
    h = bandwidth_schedule(n, p, d0, 0)
    eye = np.eye(p)
    for t in range(1, max_iter + 1):
        schedule.append(h)
        w = _weights_all(z, b_cur if refine else eye, h, min_support=d0 + 2)
        a, c = mave_local_coefs(z, kmat, w, b_cur, ridge)
        b_cur = orthonormalize(mave_basis_step(z, kmat, w, a, c, ridge))
        h = bandwidth_schedule(n, p, d0, t)
    hyper = {
        "kernel_family": kspec.family.value,
        "gamma": g.gamma_used,
        "metric": kind.value,
        "d0": d0,
        "refine": refine,
        "max_iter": max_iter,
        "h_schedule": schedule,
        "ridge": ridge,
        "init": "fopg",
    }
    method = "rfmave" if refine else "fmave"
    return finalize_report(
        x, b_cur, np.diag(1.0 / sds), init.eigenvalues, method, hyper, truth, notes
    )
