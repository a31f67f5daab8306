"""Top-level fitting interface shared by the CLI and the simulation harness."""
from __future__ import annotations

from typing import Optional, Union

import numpy as np

from .errors import ConfigError
from .forward_ensemble import fmave_fit, fopg_fit
from .inverse_ensemble import InverseMethod, SliceScheme, fit_inverse
from .kernels import KernelFamily, KernelSpec, is_universal_pair
from .linalg import PredictorMatrix
from .metrics import MetricKind, ResponseKind, ResponseSet
from .moment_ensemble import MomentMethod, MomentSpec, fit_moment
from .report import FitReport

MOMENT_METHODS = ("fols", "fphd", "fiht")
INVERSE_METHODS = ("fsir", "fsave", "fdr")
FORWARD_METHODS = ("fopg", "rfopg", "fmave", "rfmave")
ALL_METHODS = MOMENT_METHODS + INVERSE_METHODS + FORWARD_METHODS

#: Metric used for each response kind unless overridden.
DEFAULT_METRIC = {
    ResponseKind.DISTRIBUTION: MetricKind.WASSERSTEIN2,
    ResponseKind.SPD: MetricKind.SPD_FROBENIUS,
    ResponseKind.SPHERE: MetricKind.SPHERE_GEODESIC,
}

#: Kernel family used for each response kind unless overridden. The sphere
#: uses the Laplacian kernel because the Gaussian one is indefinite there.
DEFAULT_FAMILY = {
    ResponseKind.DISTRIBUTION: KernelFamily.GAUSSIAN,
    ResponseKind.SPD: KernelFamily.GAUSSIAN,
    ResponseKind.SPHERE: KernelFamily.LAPLACIAN,
}


def check_kernel_policy(kind: MetricKind, family: KernelFamily, allow_indefinite: bool = False):
    """Reject kernel/metric pairs without a positive definiteness guarantee."""
    if not is_universal_pair(kind, family) and not allow_indefinite:
        raise ConfigError(
            f"kernel family '{family.value}' is indefinite on metric "
            f"'{kind.value}'; pass allow_indefinite to override"
        )


def fit_named(
    x: PredictorMatrix,
    ys: ResponseSet,
    method: str,
    d0: int,
    kind: Optional[MetricKind] = None,
    kspec: Optional[KernelSpec] = None,
    truth: Optional[np.ndarray] = None,
    iht_r: Optional[int] = None,
    slices: Union[int, str, None] = "auto",
    scheme: SliceScheme = SliceScheme.EQUAL_FREQUENCY,
    max_iter: int = 10,
    ridge: Optional[float] = None,
    loo: bool = False,
    allow_indefinite: bool = False,
) -> FitReport:
    """Dispatch a fit by method name with per-kind defaults.

    ``kind`` defaults to the natural metric of the response kind and
    ``kspec`` to the kernel family known to be valid there, with the
    automatic bandwidth.
    """
    method = method.lower()
    if method not in ALL_METHODS:
        raise ConfigError(f"unknown method '{method}'; choose from {ALL_METHODS}")
    kind = kind or DEFAULT_METRIC[ys.kind]
    kspec = kspec or KernelSpec(family=DEFAULT_FAMILY[ys.kind])
    check_kernel_policy(kind, kspec.family, allow_indefinite)

    if method in MOMENT_METHODS:
        mspec = MomentSpec(method=MomentMethod(method), iht_r=iht_r)
        return fit_moment(x, ys, kind, kspec, mspec, d0, ridge=ridge, truth=truth, loo=loo)
    if method in INVERSE_METHODS:
        return fit_inverse(
            x, ys, kind, kspec, InverseMethod(method), d0,
            s=slices, scheme=scheme, ridge=ridge, truth=truth,
        )
    refine = method.startswith("r")
    local_ridge = 1e-8 if ridge is None else ridge
    if method.endswith("fopg"):
        return fopg_fit(
            x, ys, kind, kspec, d0, refine=refine, max_iter=max_iter,
            ridge=local_ridge, truth=truth,
        )
    return fmave_fit(
        x, ys, kind, kspec, d0, refine=refine, max_iter=max_iter,
        ridge=local_ridge, truth=truth,
    )
