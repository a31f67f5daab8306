"""Response metric spaces and their distance computations.

Three kinds of responses are supported: univariate empirical distributions
under the Wasserstein-2 distance, symmetric positive definite matrices under
the Frobenius or log-Euclidean distance, and unit vectors on a sphere under
the geodesic distance.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import (
    DimMismatch,
    LengthMismatch,
    NonFinite,
    NotPositiveDefinite,
    NotSymmetric,
)

# Relative eigenvalue floor below which a matrix is treated as not SPD.
SPD_EIG_FLOOR = 1e-12

# Tolerances for construction-time invariants.
_SYM_RTOL = 1e-10
_UNIT_NORM_TOL = 1e-10


class MetricKind(enum.Enum):
    """Distance used to compare responses."""

    WASSERSTEIN2 = "wasserstein2"
    SPD_FROBENIUS = "spd_frobenius"
    SPD_LOG_EUCLIDEAN = "spd_log_euclidean"
    SPHERE_GEODESIC = "sphere_geodesic"


class ResponseKind(enum.Enum):
    """Space a response lives in."""

    DISTRIBUTION = "distribution"
    SPD = "spd"
    SPHERE = "sphere"


#: Metric kinds valid for each response kind.
COMPATIBLE_METRICS = {
    ResponseKind.DISTRIBUTION: (MetricKind.WASSERSTEIN2,),
    ResponseKind.SPD: (MetricKind.SPD_FROBENIUS, MetricKind.SPD_LOG_EUCLIDEAN),
    ResponseKind.SPHERE: (MetricKind.SPHERE_GEODESIC,),
}


@dataclass(frozen=True)
class EmpiricalDistribution:
    """A univariate empirical measure stored as sorted samples.

    Samples are sorted ascending on construction; all entries must be finite
    and the sample must be non-empty.
    """

    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float).ravel()
        if s.size == 0:
            raise LengthMismatch("empirical distribution needs at least one sample")
        if not np.all(np.isfinite(s)):
            raise NonFinite("empirical distribution samples must be finite")
        s = np.sort(s)
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    @property
    def m(self) -> int:
        return self.samples.size


@dataclass(frozen=True)
class SpdMatrix:
    """A symmetric positive definite matrix.

    Symmetry is checked to 1e-10 relative tolerance and all eigenvalues must
    be strictly positive.
    """

    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimMismatch(f"expected a square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise NonFinite("SPD matrix entries must be finite")
        scale = max(1.0, float(np.abs(a).max()))
        if np.abs(a - a.T).max() > _SYM_RTOL * scale:
            raise NotSymmetric("matrix is not symmetric within 1e-10 relative tolerance")
        a = 0.5 * (a + a.T)
        if np.linalg.eigvalsh(a).min() <= 0.0:
            raise NotPositiveDefinite("matrix has a non-positive eigenvalue")
        a.flags.writeable = False
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class UnitVector:
    """A point on the unit sphere, stored with its ambient coordinates."""

    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float).ravel()
        if not np.all(np.isfinite(c)):
            raise NonFinite("unit vector coordinates must be finite")
        nrm = np.linalg.norm(c)
        if abs(nrm - 1.0) > _UNIT_NORM_TOL:
            raise DimMismatch(f"vector norm {nrm!r} is not 1 within {_UNIT_NORM_TOL}")
        c.flags.writeable = False
        object.__setattr__(self, "coords", c)

    @property
    def ambient_dim(self) -> int:
        return self.coords.size


Response = Union[EmpiricalDistribution, SpdMatrix, UnitVector]

_KIND_OF_TYPE = {
    EmpiricalDistribution: ResponseKind.DISTRIBUTION,
    SpdMatrix: ResponseKind.SPD,
    UnitVector: ResponseKind.SPHERE,
}


@dataclass(frozen=True)
class ResponseSet:
    """A homogeneous collection of metric-space responses."""

    kind: ResponseKind
    items: tuple = field(default_factory=tuple)

    def __post_init__(self):
        items = tuple(self.items)
        if not items:
            raise LengthMismatch("response set must be non-empty")
        for i, y in enumerate(items):
            got = _KIND_OF_TYPE.get(type(y))
            if got is not self.kind:
                raise DimMismatch(f"item {i} is {type(y).__name__}, not a {self.kind.value} response")
        if self.kind is ResponseKind.DISTRIBUTION:
            m0 = items[0].m
            for i, y in enumerate(items):
                if y.m != m0:
                    raise LengthMismatch(f"item {i} has {y.m} samples, expected {m0}")
        else:
            attr = "dim" if self.kind is ResponseKind.SPD else "ambient_dim"
            d0 = getattr(items[0], attr)
            for i, y in enumerate(items):
                if getattr(y, attr) != d0:
                    raise DimMismatch(f"item {i} has dimension {getattr(y, attr)}, expected {d0}")
        object.__setattr__(self, "items", items)

    def __len__(self) -> int:
        return len(self.items)

    @classmethod
    def from_items(cls, items: Sequence[Response]) -> "ResponseSet":
        if not items:
            raise LengthMismatch("response set must be non-empty")
        kind = _KIND_OF_TYPE.get(type(items[0]))
        if kind is None:
            raise DimMismatch(f"unsupported response type {type(items[0]).__name__}")
        return cls(kind=kind, items=tuple(items))


# -- scalar distances ---------------------------------------------------------

def wasserstein2(a: EmpiricalDistribution, b: EmpiricalDistribution) -> float:
    """Wasserstein-2 distance between two equal-size empirical measures.

    Computed from order statistics as sqrt((1/m) * sum_j (a_(j) - b_(j))^2),
    the exact optimal transport cost between the two uniform discrete
    measures. Sample sizes must agree.
    """
    if a.m != b.m:
        raise LengthMismatch(f"sample sizes differ: {a.m} vs {b.m}")
    diff = a.samples - b.samples
    return float(np.sqrt(np.mean(diff * diff)))


def spd_frobenius(a: SpdMatrix, b: SpdMatrix) -> float:
    """Frobenius distance between two SPD matrices of equal dimension."""
    if a.dim != b.dim:
        raise DimMismatch(f"matrix dimensions differ: {a.dim} vs {b.dim}")
    return float(np.linalg.norm(a.entries - b.entries, "fro"))


def _sym_eig_log(arr: np.ndarray) -> np.ndarray:
    """Matrix logarithm of a symmetric matrix with positive spectrum."""
    w, v = np.linalg.eigh(arr)
    floor = SPD_EIG_FLOOR * max(w[-1], 0.0)
    if w[0] <= floor:
        raise NotPositiveDefinite(
            f"smallest eigenvalue {w[0]:.3e} at or below floor {floor:.3e}"
        )
    logw = np.log(w)
    out = (v * logw) @ v.T
    return 0.5 * (out + out.T)


def _sym_eig_exp(arr: np.ndarray) -> np.ndarray:
    """Matrix exponential of a symmetric matrix via eigendecomposition."""
    a = 0.5 * (arr + arr.T)
    w, v = np.linalg.eigh(a)
    out = (v * np.exp(w)) @ v.T
    return 0.5 * (out + out.T)


def matrix_log(a: SpdMatrix) -> np.ndarray:
    """Symmetric matrix logarithm, inverse of the matrix exponential.

    Eigenvalues at or below ``SPD_EIG_FLOOR`` times the largest eigenvalue
    raise :class:`NotPositiveDefinite`.
    """
    return _sym_eig_log(a.entries)


def spd_log_euclidean(a: SpdMatrix, b: SpdMatrix) -> float:
    """Log-Euclidean distance: Frobenius distance of matrix logarithms."""
    if a.dim != b.dim:
        raise DimMismatch(f"matrix dimensions differ: {a.dim} vs {b.dim}")
    return float(np.linalg.norm(matrix_log(a) - matrix_log(b), "fro"))


def sphere_geodesic(a: UnitVector, b: UnitVector) -> float:
    """Geodesic (great-circle) distance between two unit vectors.

    The inner product is clamped to [-1, 1] before arccos so rounding noise
    never produces NaN.
    """
    if a.ambient_dim != b.ambient_dim:
        raise DimMismatch(f"ambient dimensions differ: {a.ambient_dim} vs {b.ambient_dim}")
    dot = float(np.dot(a.coords, b.coords))
    return float(np.arccos(min(1.0, max(-1.0, dot))))


# -- pairwise distance matrices -----------------------------------------------

def _pairwise_blocks(stacked: np.ndarray, block: int = 128) -> np.ndarray:
    """All-pairs Euclidean distances between rows, by direct differences.

    Row blocks keep the intermediate (b, n, d) difference array small. Each
    entry is computed exactly as the norm of a per-pair difference, matching
    the scalar routines bit for bit.
    """
    n = stacked.shape[0]
    out = np.zeros((n, n))
    for start in range(0, n, block):
        stop = min(start + block, n)
        diff = stacked[start:stop, None, :] - stacked[None, :, :]
        out[start:stop] = np.sqrt(np.sum(diff * diff, axis=-1))
    return out


def pairwise_distances(ys: ResponseSet, kind: MetricKind) -> np.ndarray:
    """n x n matrix of pairwise distances under the requested metric.

    The result is exactly symmetric with a zero diagonal.
    """
    if kind not in COMPATIBLE_METRICS[ys.kind]:
        raise DimMismatch(
            f"metric {kind.value} is not valid for {ys.kind.value} responses"
        )
    n = len(ys)
    if kind is MetricKind.WASSERSTEIN2:
        stacked = np.stack([y.samples for y in ys.items])
        m = stacked.shape[1]
        d = _pairwise_blocks(stacked) / np.sqrt(m)
    elif kind is MetricKind.SPD_FROBENIUS:
        stacked = np.stack([y.entries.ravel() for y in ys.items])
        d = _pairwise_blocks(stacked)
    elif kind is MetricKind.SPD_LOG_EUCLIDEAN:
        logs = []
        for i, y in enumerate(ys.items):
            try:
                logs.append(_sym_eig_log(y.entries).ravel())
            except NotPositiveDefinite as exc:
                raise NotPositiveDefinite(f"response {i}: {exc}") from exc
        d = _pairwise_blocks(np.stack(logs))
    elif kind is MetricKind.SPHERE_GEODESIC:
        u = np.stack([y.coords for y in ys.items])
        d = np.arccos(np.clip(u @ u.T, -1.0, 1.0))
    else:  # pragma: no cover
        raise DimMismatch(f"unknown metric kind {kind!r}")
    # Mirror the upper triangle so the matrix is exactly symmetric.
    iu = np.triu_indices(n, k=1)
    d[(iu[1], iu[0])] = d[iu]
    np.fill_diagonal(d, 0.0)
    return d
