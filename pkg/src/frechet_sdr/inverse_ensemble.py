"""Ensembled inverse-regression estimators: Frechet SIR, SAVE, and DR.

For each ensemble member i the kernel values kappa(Y_j, Y_i) play the role
of a scalar response, whose range is partitioned into slices: balanced
equal-frequency slices by default, equal-width intervals on request.
Conditional moments of the standardized predictors within slices yield the
classical SIR/SAVE/DR candidate matrices, which are averaged over members.
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from ._fitcore import catch_gram_warnings, finalize_report, prepare_gram
from .errors import ConfigError, DegenerateColumn, DegenerateEnsemble, ShapeMismatch
from .kernels import KernelGram, KernelSpec
from .linalg import PredictorMatrix, standardize_full, top_eigenvectors
from .metrics import MetricKind, ResponseSet
from .report import FitReport


class SliceScheme(enum.Enum):
    EQUAL_WIDTH = "equal_width"
    EQUAL_FREQUENCY = "equal_frequency"


class InverseMethod(enum.Enum):
    FSIR = "fsir"
    FSAVE = "fsave"
    FDR = "fdr"


class DegenerateMemberWarning(UserWarning):
    """An ensemble member's kernel column could not be sliced."""


@dataclass(frozen=True)
class SliceSpec:
    """Number of slices and partitioning scheme."""

    s: int
    scheme: SliceScheme = SliceScheme.EQUAL_FREQUENCY

    def __post_init__(self):
        if self.s < 2:
            raise ConfigError(f"need at least 2 slices, got {self.s}")


@dataclass(frozen=True)
class SliceMoments:
    """Per-slice proportions and raw moment sums.

    ``a[l]`` is the fraction of points in slice l, ``b[l]`` the slice sum of
    z divided by n, and ``c[l]`` the slice sum of z z^T divided by n.
    Conditional moments divide out ``a[l]``; empty slices are flagged and
    contribute nothing downstream.
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        if np.any(a < 0) or abs(a.sum() - 1.0) > 1e-12:
            raise ShapeMismatch("slice proportions must be non-negative and sum to 1")
        object.__setattr__(self, "a", a)

    @property
    def nonempty(self) -> np.ndarray:
        return self.a > 0.0

    def cond_mean(self) -> np.ndarray:
        """E(Z | slice l), zero rows for empty slices."""
        out = np.zeros_like(self.b)
        ok = self.nonempty
        out[ok] = self.b[ok] / self.a[ok, None]
        return out

    def cond_second(self) -> np.ndarray:
        """E(Z Z^T | slice l), zero blocks for empty slices."""
        out = np.zeros_like(self.c)
        ok = self.nonempty
        out[ok] = self.c[ok] / self.a[ok, None, None]
        return out

    def cond_var(self) -> np.ndarray:
        """var(Z | slice l), zero blocks for empty slices."""
        e1 = self.cond_mean()
        out = self.cond_second() - e1[:, :, None] * e1[:, None, :]
        out[~self.nonempty] = 0.0
        return out


def slice_kernel_column(col: np.ndarray, s: int, scheme: SliceScheme = SliceScheme.EQUAL_WIDTH) -> np.ndarray:
    """Assign each kernel value to one of s slices covering [min, max].

    Equal width splits the range into s half-open intervals with the last
    one closed. Equal frequency assigns by rank so the slices are balanced.
    """
    if s < 2:
        raise ConfigError(f"need at least 2 slices, got {s}")
    col = np.asarray(col, dtype=float)
    lo, hi = float(col.min()), float(col.max())
    if hi == lo:
        raise DegenerateColumn("all kernel values in the column are equal")
    if scheme is SliceScheme.EQUAL_WIDTH:
        width = (hi - lo) / s
        idx = np.floor((col - lo) / width).astype(int)
        return np.clip(idx, 0, s - 1)
    order = np.argsort(col, kind="stable")
    ranks = np.empty_like(order)
    ranks[order] = np.arange(col.size)
    return np.clip(ranks * s // col.size, 0, s - 1).astype(int)


def slice_moments(z: np.ndarray, assignment: np.ndarray, s: int) -> SliceMoments:
    """Slice proportions plus first and second moment sums of z."""
    n, p = z.shape
    a = np.zeros(s)
    b = np.zeros((s, p))
    c = np.zeros((s, p, p))
    for l in range(s):
        mask = assignment == l
        cnt = int(mask.sum())
        if cnt == 0:
            continue
        zl = z[mask]
        a[l] = cnt / n
        b[l] = zl.sum(axis=0) / n
        c[l] = zl.T @ zl / n
    return SliceMoments(a=a, b=b, c=c)


def _member_matrix(mom: SliceMoments, method: InverseMethod, s: int, p: int) -> np.ndarray:
    ok = mom.nonempty
    if method is InverseMethod.FSIR:
        m = np.einsum("lp,lq->pq", mom.b[ok] / mom.a[ok, None], mom.b[ok])
        return m / s
    if method is InverseMethod.FSAVE:
        v = mom.cond_var()[ok]
        resid = np.eye(p)[None, :, :] - v
        m = np.einsum("l,lpq->pq", mom.a[ok], np.einsum("lpr,lrq->lpq", resid, resid))
        return m / s
    # Directional regression in its classical form: slice-probability
    # weighted averages, with the conditional second moment squared inside
    # the average. The slice weights already sum to one, so no extra 1/s
    # factor enters.
    t1 = np.zeros((p, p))
    for l in np.flatnonzero(ok):
        t1 += mom.c[l] @ mom.c[l] / mom.a[l]
    u = np.einsum("lp,lq->pq", mom.b[ok] / mom.a[ok, None], mom.b[ok])
    return 2.0 * t1 + 2.0 * u @ u + 2.0 * np.trace(u) * u - 2.0 * np.eye(p)


def _ensemble_average(
    z: np.ndarray,
    gram: KernelGram,
    s: int,
    method: InverseMethod,
    scheme: SliceScheme = SliceScheme.EQUAL_FREQUENCY,
):
    """Average the per-member candidate over sliceable kernel columns."""
    n, p = z.shape
    if gram.n != n:
        raise ShapeMismatch(f"gram has {gram.n} rows but z has {n}")
    total = np.zeros((p, p))
    skipped = []
    for i in range(n):
        try:
            assignment = slice_kernel_column(gram.entries[:, i], s, scheme)
        except DegenerateColumn:
            skipped.append(i)
            continue
        mom = slice_moments(z, assignment, s)
        total += _member_matrix(mom, method, s, p)
    n_bad = len(skipped)
    if n_bad > n // 2:
        raise DegenerateEnsemble(
            f"{n_bad} of {n} kernel columns are constant; cannot slice"
        )
    if n_bad:
        warnings.warn(
            f"skipped {n_bad} degenerate ensemble member(s)",
            DegenerateMemberWarning,
            stacklevel=2,
        )
    m = total / (n - n_bad)
    return 0.5 * (m + m.T), n_bad


def fsir_candidate(z, gram, s: int, scheme: SliceScheme = SliceScheme.EQUAL_FREQUENCY) -> np.ndarray:
    """Averaged sliced-inverse-regression candidate; PSD."""
    return _ensemble_average(z, gram, s, InverseMethod.FSIR, scheme)[0]


def fsave_candidate(z, gram, s: int, scheme: SliceScheme = SliceScheme.EQUAL_FREQUENCY) -> np.ndarray:
    """Averaged sliced-average-variance candidate; PSD."""
    return _ensemble_average(z, gram, s, InverseMethod.FSAVE, scheme)[0]


def fdr_candidate(z, gram, s: int, scheme: SliceScheme = SliceScheme.EQUAL_FREQUENCY) -> np.ndarray:
    """Averaged directional-regression candidate; symmetric."""
    return _ensemble_average(z, gram, s, InverseMethod.FDR, scheme)[0]


def resolve_slices(method: InverseMethod, n: int, p: int, s: Union[int, str, None]) -> int:
    """Resolve the slice count; the automatic rules floor at 2."""
    if isinstance(s, int):
        if s < 2:
            raise ConfigError(f"need at least 2 slices, got {s}")
        return s
    if s not in (None, "auto"):
        raise ConfigError(f"slices must be an integer or 'auto', got {s!r}")
    if method is InverseMethod.FDR:
        return max(2, n // 50)
    return max(2, n // (2 * p))


def fit_inverse(
    x: PredictorMatrix,
    ys: ResponseSet,
    kind: MetricKind,
    kspec: KernelSpec,
    method: InverseMethod,
    d0: int,
    s: Union[int, str, None] = "auto",
    scheme: SliceScheme = SliceScheme.EQUAL_FREQUENCY,
    ridge: Optional[float] = None,
    truth: Optional[np.ndarray] = None,
) -> FitReport:
    """Full inverse-regression pipeline with automatic slice counts."""
    z, _, s_inv_sqrt = standardize_full(x, ridge)
    g, notes = catch_gram_warnings(prepare_gram, x, ys, kind, kspec)
    s_used = resolve_slices(method, x.n, x.p, s)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DegenerateMemberWarning)
        m, n_bad = _ensemble_average(z, g, s_used, method, scheme)
    notes = notes + [str(w.message) for w in caught]
    sub = top_eigenvectors(m, d0, estimator=method.value)
    hyper = {
        "kernel_family": kspec.family.value,
        "gamma": g.gamma_used,
        "metric": kind.value,
        "d0": d0,
        "slices": s_used,
        "scheme": scheme.value,
        "skipped_members": n_bad,
    }
    return finalize_report(
        x, sub.basis, s_inv_sqrt, sub.eigenvalues, method.value, hyper, truth, notes
    )
