"""CSV input and output.

All files are UTF-8 CSVs with one header row. Responses are one per row:
distributions as m sample values, SPD matrices as row-major flattened
entries, sphere points as ambient coordinates. Numeric output uses six
significant digits.
"""
from __future__ import annotations

import csv
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import DataError, DimMismatch, NonFinite
from .linalg import PredictorMatrix
from .metrics import (
    EmpiricalDistribution,
    ResponseKind,
    ResponseSet,
    SpdMatrix,
    UnitVector,
)
from .report import FitReport

#: Sphere rows are renormalized when within this distance of unit norm.
SPHERE_NORM_TOL = 1e-6


def fmt(v) -> str:
    return f"{float(v):.6g}"


def _read_rows(path) -> tuple:
    path = Path(path)
    if not path.exists():
        raise DataError(f"file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        rows = list(reader)
    if len(rows) < 2:
        raise DataError(f"{path}: expected a header row plus data rows")
    header, data = rows[0], rows[1:]
    parsed = []
    for i, row in enumerate(data):
        if len(row) != len(header):
            raise DataError(f"{path}: row {i + 1} has {len(row)} fields, header has {len(header)}")
        try:
            parsed.append([float(v) for v in row])
        except ValueError as exc:
            raise DataError(f"{path}: row {i + 1}: {exc}") from exc
    return header, np.array(parsed, dtype=float)


def load_predictors(path) -> PredictorMatrix:
    header, arr = _read_rows(path)
    try:
        return PredictorMatrix(arr, column_names=tuple(header))
    except (DataError, ValueError) as exc:
        raise DataError(f"{path}: {exc}") from exc


def load_matrix(path) -> np.ndarray:
    """Any headered numeric CSV as a 2-d array."""
    _, arr = _read_rows(path)
    return arr


def load_truth(path) -> np.ndarray:
    return load_matrix(path)


def load_responses(path, kind: ResponseKind, spd_dim: Optional[int] = None) -> ResponseSet:
    """Read a response file according to the declared response kind."""
    _, arr = _read_rows(path)
    if not np.all(np.isfinite(arr)):
        raise NonFinite(f"{path}: responses must be finite")
    if kind is ResponseKind.DISTRIBUTION:
        items = tuple(EmpiricalDistribution(row) for row in arr)
    elif kind is ResponseKind.SPD:
        if spd_dim is None:
            raise DataError("SPD responses need the matrix dimension (spd_dim)")
        r = int(spd_dim)
        if arr.shape[1] != r * r:
            raise DimMismatch(
                f"{path}: expected {r * r} columns for {r}x{r} matrices, got {arr.shape[1]}"
            )
        items = tuple(SpdMatrix(row.reshape(r, r)) for row in arr)
    else:
        norms = np.linalg.norm(arr, axis=1)
        bad = np.flatnonzero(np.abs(norms - 1.0) > SPHERE_NORM_TOL)
        if bad.size:
            raise DimMismatch(
                f"{path}: row {bad[0] + 1} has norm {norms[bad[0]]:.8g}, "
                f"more than {SPHERE_NORM_TOL} from 1"
            )
        items = tuple(UnitVector(row / nrm) for row, nrm in zip(arr, norms))
    return ResponseSet(kind, items)


def write_matrix(path, arr: np.ndarray, header: Sequence[str]):
    arr = np.atleast_2d(np.asarray(arr, dtype=float))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(header))
        for row in arr:
            writer.writerow([fmt(v) for v in row])


def write_predictors(path, x: PredictorMatrix):
    names = x.column_names or tuple(f"x{j + 1}" for j in range(x.p))
    write_matrix(path, x.x, names)


def write_responses(path, ys: ResponseSet):
    if ys.kind is ResponseKind.DISTRIBUTION:
        arr = np.stack([y.samples for y in ys.items])
        header = [f"w{j + 1}" for j in range(arr.shape[1])]
    elif ys.kind is ResponseKind.SPD:
        r = ys.items[0].dim
        arr = np.stack([y.entries.ravel() for y in ys.items])
        header = [f"a{i + 1}{j + 1}" for i in range(r) for j in range(r)]
    else:
        arr = np.stack([y.coords for y in ys.items])
        header = [f"c{j + 1}" for j in range(arr.shape[1])]
    write_matrix(path, arr, header)


def write_manifest(path, entries: dict):
    """Flat key = value manifest capturing every resolved setting."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    for key, val in entries.items():
        if isinstance(val, float):
            val = fmt(val)
        elif isinstance(val, (list, tuple, np.ndarray)):
            val = " ".join(fmt(v) if isinstance(v, (int, float, np.floating)) else str(v) for v in val)
        lines.append(f"{key} = {val}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_fit_report(outdir, report: FitReport, extra_manifest: Optional[dict] = None):
    """Persist a fit: basis, eigenvalues, sufficient predictors, manifest."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    d0 = report.d0
    write_matrix(outdir / "basis.csv", report.basis, [f"b{j + 1}" for j in range(d0)])
    write_matrix(outdir / "eigenvalues.csv", report.eigenvalues[:, None], ["eigenvalue"])
    write_matrix(
        outdir / "sufficient_predictors.csv",
        report.sufficient_predictors,
        [f"sp{j + 1}" for j in range(d0)],
    )
    manifest = {"method": report.method}
    manifest.update(report.hyperparameters)
    if report.error is not None:
        manifest["projection_distance_to_truth"] = report.error
    if report.warnings:
        manifest["warnings"] = "; ".join(report.warnings)
    if extra_manifest:
        manifest.update(extra_manifest)
    write_manifest(outdir / "manifest.txt", manifest)
