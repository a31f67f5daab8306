"""Command-line front end.

Subcommands: ``simulate`` writes a synthetic dataset, ``fit`` estimates the
central subspace from predictor/response CSVs, ``scree`` emits the candidate
eigenvalue spectrum, ``bench`` scores methods on a simulation model, and
``reproduce`` runs the desk-scale simulation grids.

Exit codes: 2 for configuration errors, 3 for data errors, 4 for numerical
failures. Options may also be supplied through an INI config file with
sections named after the package modules; command-line values win.
"""
from __future__ import annotations

import configparser
import sys
from pathlib import Path

import click

from . import api, io
from . import simulate as sim
from .errors import ConfigError, DataError, FrechetSdrError
from .inverse_ensemble import SliceScheme
from .kernels import KernelFamily, KernelSpec
from .linalg import benchmark_distance
from .metrics import COMPATIBLE_METRICS, MetricKind, ResponseKind

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4

#: Column order of the estimator comparison tables.
TABLE_METHODS = ["rfopg", "rfmave", "fols", "fphd", "fiht", "fsir", "fsave", "fdr"]

_SIZES_23 = [(10, 100), (10, 200), (20, 100), (20, 200)]

#: (model, (p, n) cells) for each reproduction table, in printed order.
TABLE_GRIDS = {
    1: [
        (sim.ModelId.I1, [(10, 200), (20, 200), (30, 400)]),
        (sim.ModelId.I2, [(10, 200), (20, 200), (30, 400)]),
        (sim.ModelId.I3, [(10, 200), (20, 300), (30, 400)]),
        (sim.ModelId.I4, [(10, 200), (20, 300), (30, 400)]),
    ],
    2: [(sim.ModelId.II1, _SIZES_23), (sim.ModelId.II2, _SIZES_23)],
    3: [
        (sim.ModelId.III1, _SIZES_23),
        (sim.ModelId.III2, _SIZES_23),
        (sim.ModelId.III3, _SIZES_23),
    ],
}

MODEL_D0 = {
    sim.ModelId.I1: 1,
    sim.ModelId.I2: 2,
    sim.ModelId.I3: 1,
    sim.ModelId.I4: 2,
    sim.ModelId.II1: 1,
    sim.ModelId.II2: 2,
    sim.ModelId.III1: 1,
    sim.ModelId.III2: 2,
    sim.ModelId.III3: 2,
}


def _fail(stage: str, exc: Exception):
    if isinstance(exc, ConfigError):
        code = EXIT_CONFIG
    elif isinstance(exc, DataError):
        code = EXIT_DATA
    else:
        code = EXIT_NUMERICAL
    click.echo(f"error [{stage}]: {type(exc).__name__}: {exc}", err=True)
    sys.exit(code)


def _stage(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except FrechetSdrError as exc:
        _fail(name, exc)


def parse_model(text: str) -> sim.ModelId:
    norm = text.strip().upper().replace("-", "")
    for model in sim.ModelId:
        if model.value.replace("-", "") == norm:
            return model
    raise ConfigError(f"unknown model '{text}'")


def parse_gamma(text: str):
    if text.strip().lower() == "auto":
        return None
    try:
        val = float(text)
    except ValueError as exc:
        raise ConfigError(f"gamma must be 'auto' or a number, got '{text}'") from exc
    if val <= 0:
        raise ConfigError(f"gamma must be positive, got {val}")
    return val


def parse_slices(text: str):
    if text.strip().lower() == "auto":
        return "auto"
    try:
        return int(text)
    except ValueError as exc:
        raise ConfigError(f"slices must be 'auto' or an integer, got '{text}'") from exc


def _resolve_metric(metric: str, kind: ResponseKind) -> MetricKind:
    if metric == "auto":
        return api.DEFAULT_METRIC[kind]
    try:
        mk = MetricKind(metric)
    except ValueError as exc:
        raise ConfigError(f"unknown metric '{metric}'") from exc
    if mk not in COMPATIBLE_METRICS[kind]:
        raise ConfigError(f"metric '{metric}' is not valid for {kind.value} responses")
    return mk


def _resolve_family(kernel: str, kind: ResponseKind) -> KernelFamily:
    if kernel == "auto":
        return api.DEFAULT_FAMILY[kind]
    try:
        return KernelFamily(kernel)
    except ValueError as exc:
        raise ConfigError(f"unknown kernel family '{kernel}'") from exc


#: option name -> (config section, config key). Sections mirror module names.
CONFIG_MAP = {
    "kernel": ("kernels", "family"),
    "gamma": ("kernels", "gamma"),
    "iht_r": ("moment_ensemble", "iht_r"),
    "slices": ("inverse_ensemble", "slices"),
    "slice_scheme": ("inverse_ensemble", "scheme"),
    "max_iter": ("forward_ensemble", "max_iter"),
    "predictors": ("cli", "predictors"),
    "responses": ("cli", "responses"),
    "kind": ("cli", "kind"),
    "spd_dim": ("cli", "spd_dim"),
    "metric": ("cli", "metric"),
    "method": ("cli", "method"),
    "d0": ("cli", "d0"),
    "truth": ("cli", "truth"),
    "out": ("cli", "out"),
    "allow_indefinite": ("cli", "allow_indefinite"),
}

_INT_OPTS = {"iht_r", "max_iter", "d0", "spd_dim"}
_BOOL_OPTS = {"allow_indefinite"}


def _apply_config(ctx: click.Context, params: dict, config_path) -> dict:
    """Fill options the user left at their defaults from the config file."""
    if not config_path:
        return params
    parser = configparser.ConfigParser()
    read = parser.read(config_path, encoding="utf-8")
    if not read:
        raise ConfigError(f"config file not found: {config_path}")
    out = dict(params)
    for opt, (section, key) in CONFIG_MAP.items():
        if opt not in params:
            continue
        src = ctx.get_parameter_source(opt)
        if src is not None and src.name != "DEFAULT":
            continue
        # singular aliases are accepted alongside the module-named sections
        if not parser.has_option(section, key) and parser.has_option(section.rstrip("s"), key):
            section = section.rstrip("s")
        if parser.has_option(section, key):
            raw = parser.get(section, key)
            if opt in _INT_OPTS:
                try:
                    out[opt] = int(raw)
                except ValueError as exc:
                    raise ConfigError(f"[{section}] {key} must be an integer, got '{raw}'") from exc
            elif opt in _BOOL_OPTS:
                out[opt] = raw.strip().lower() in ("1", "true", "yes", "on")
            else:
                out[opt] = raw
    return out


@click.group()
def main():
    """Sufficient dimension reduction for metric-space-valued responses."""


# -- simulate -----------------------------------------------------------------

@main.command()
@click.option("--model", required=True, help="Model id, e.g. I-1 or III-2.")
@click.option("--n", type=int, required=True)
@click.option("--p", type=int, required=True)
@click.option("--m", type=int, default=None, help="Samples per distribution (Scenario I only).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), required=True)
def simulate(model, n, p, m, seed, out):
    """Write a synthetic dataset (predictors, responses, truth)."""
    model_id = _stage("config", parse_model, model)
    cfg = _stage("config", sim.SimConfig, model=model_id, n=n, p=p, m=m, seed=seed)
    x, ys, truth = _stage("simulate", sim.gen_dataset, cfg)
    outdir = Path(out)
    io.write_predictors(outdir / "predictors.csv", x)
    io.write_responses(outdir / "responses.csv", ys)
    io.write_matrix(outdir / "truth.csv", truth.b0, [f"b{j + 1}" for j in range(truth.d0)])
    manifest = {
        "model": model_id.value,
        "n": n,
        "p": p,
        "seed": seed,
        "kind": ys.kind.value,
        "d0": truth.d0,
    }
    if m is not None:
        manifest["m"] = m
    if ys.kind is ResponseKind.SPD:
        manifest["spd_dim"] = ys.items[0].dim
    io.write_manifest(outdir / "manifest.txt", manifest)
    click.echo(f"wrote dataset to {outdir}")


# -- fit and scree ------------------------------------------------------------

_fit_options = [
    click.option("--predictors", type=str, default=None, help="Predictor CSV (n x p, header)."),
    click.option("--responses", type=str, default=None, help="Response CSV, one response per row."),
    click.option("--kind", type=click.Choice([k.value for k in ResponseKind]), default=None),
    click.option("--spd-dim", type=int, default=None, help="Matrix dimension r for SPD responses."),
    click.option("--metric", type=str, default="auto", show_default=True),
    click.option("--kernel", type=str, default="auto", show_default=True,
                 help="Kernel family: auto, gaussian, or laplacian."),
    click.option("--gamma", type=str, default="auto", show_default=True),
    click.option("--method", type=click.Choice(list(api.ALL_METHODS)), default=None),
    click.option("--iht-r", type=int, default=None, help="Power count for fiht."),
    click.option("--slices", type=str, default="auto", show_default=True),
    click.option("--slice-scheme", type=click.Choice([s.value for s in SliceScheme]),
                 default=SliceScheme.EQUAL_FREQUENCY.value, show_default=True),
    click.option("--max-iter", type=int, default=10, show_default=True),
    click.option("--truth", type=str, default=None, help="Optional truth basis CSV (p x d0)."),
    click.option("--allow-indefinite", is_flag=True, default=False),
    click.option("--config", "config_path", type=str, default=None, help="INI config file."),
    click.option("--threads", type=int, default=1, show_default=True,
                 help="Worker cap for internal parallelism."),
    click.option("--out", type=str, default=None, required=False),
]


def _add_options(options):
    def wrap(fn):
        for opt in reversed(options):
            fn = opt(fn)
        return fn
    return wrap


def _prepare_fit(ctx, params, need_d0=True):
    """Shared config resolution and data loading for fit and scree."""
    params = _stage("config", _apply_config, ctx, params, params.get("config_path"))
    missing = [k for k in ("predictors", "responses", "kind", "method", "out") if not params.get(k)]
    if need_d0 and not params.get("d0"):
        missing.append("d0")
    if missing:
        _fail("config", ConfigError(f"missing required option(s): {', '.join(missing)}"))
    kind = ResponseKind(params["kind"])
    metric = _stage("config", _resolve_metric, params["metric"], kind)
    family = _stage("config", _resolve_family, params["kernel"], kind)
    gamma = _stage("config", parse_gamma, params["gamma"])
    kspec = _stage("config", KernelSpec, family=family, gamma=gamma)
    _stage("config", api.check_kernel_policy, metric, family, params["allow_indefinite"])
    slices = _stage("config", parse_slices, params["slices"])
    if kind is ResponseKind.SPD and params.get("spd_dim") is None:
        _fail("config", ConfigError("SPD responses need --spd-dim"))

    x = _stage("data", io.load_predictors, params["predictors"])
    ys = _stage("data", io.load_responses, params["responses"], kind, params.get("spd_dim"))
    truth = None
    if params.get("truth"):
        truth = _stage("data", io.load_truth, params["truth"])
    return params, kind, metric, kspec, slices, x, ys, truth


@main.command()
@_add_options(_fit_options)
@click.option("--d0", type=int, default=None, help="Structural dimension.")
@click.pass_context
def fit(ctx, **params):
    """Estimate the central subspace and write the fit report."""
    prep = _prepare_fit(ctx, params)
    params, kind, metric, kspec, slices, x, ys, truth = prep
    report = _stage(
        "fit",
        api.fit_named,
        x,
        ys,
        params["method"],
        params["d0"],
        kind=metric,
        kspec=kspec,
        truth=truth,
        iht_r=params.get("iht_r"),
        slices=slices,
        scheme=SliceScheme(params["slice_scheme"]),
        max_iter=params["max_iter"],
        allow_indefinite=params["allow_indefinite"],
    )
    extra = {
        "predictors_file": params["predictors"],
        "responses_file": params["responses"],
        "threads": params["threads"],
    }
    io.write_fit_report(params["out"], report, extra)
    if report.error is not None:
        click.echo(f"projection distance to truth: {io.fmt(report.error)}")
    click.echo(f"wrote fit report to {params['out']}")


@main.command()
@_add_options(_fit_options)
@click.pass_context
def scree(ctx, **params):
    """Emit the full candidate eigenvalue spectrum for choosing d0."""
    prep = _prepare_fit(ctx, params, need_d0=False)
    params, kind, metric, kspec, slices, x, ys, truth = prep
    method = params["method"]
    # Scree inspects the candidate-matrix spectrum; the forward family all
    # share the single-pass gradient outer product matrix.
    scree_method = "fopg" if method in api.FORWARD_METHODS else method
    report = _stage(
        "fit",
        api.fit_named,
        x,
        ys,
        scree_method,
        1,
        kind=metric,
        kspec=kspec,
        iht_r=params.get("iht_r"),
        slices=slices,
        scheme=SliceScheme(params["slice_scheme"]),
        max_iter=1,
        allow_indefinite=params["allow_indefinite"],
    )
    outdir = Path(params["out"])
    io.write_matrix(outdir / "eigenvalues.csv", report.eigenvalues[:, None], ["eigenvalue"])
    manifest = {"method": method, "scree_method": scree_method}
    manifest.update(report.hyperparameters)
    io.write_manifest(outdir / "manifest.txt", manifest)
    click.echo(f"wrote eigenvalue spectrum to {outdir}")


# -- bench and reproduce ------------------------------------------------------

def _write_bench_tables(outdir: Path, results: dict, methods, reps: int, manifest: dict):
    outdir.mkdir(parents=True, exist_ok=True)
    with open(outdir / "results.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write("method,reps,mean,sd,failures\n")
        for name in methods:
            res = results[name]
            fh.write(f"{name},{reps},{io.fmt(res.mean)},{io.fmt(res.sd)},{res.n_failures}\n")
    with open(outdir / "per_rep.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write("rep," + ",".join(methods) + "\n")
        for r in range(reps):
            cells = []
            for name in methods:
                err = results[name].errors[r]
                cells.append("" if err is None else io.fmt(err))
            fh.write(f"{r}," + ",".join(cells) + "\n")
    io.write_manifest(outdir / "manifest.txt", manifest)


@main.command()
@click.option("--model", required=True)
@click.option("--method", "methods", multiple=True, default=("rfopg",), show_default=True)
@click.option("--reps", type=int, default=20, show_default=True)
@click.option("--n", type=int, default=200, show_default=True)
@click.option("--p", type=int, default=10, show_default=True)
@click.option("--m", type=int, default=100, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--threads", type=int, default=1, show_default=True)
@click.option("--out", type=click.Path(), required=True)
def bench(model, methods, reps, n, p, m, seed, threads, out):
    """Run one simulation model and summarize estimation errors."""
    model_id = _stage("config", parse_model, model)
    m_arg = m if sim.response_kind(model_id) is ResponseKind.DISTRIBUTION else None
    cfg = _stage("config", sim.SimConfig, model=model_id, n=n, p=p, m=m_arg, seed=seed)
    for name in methods:
        if name not in api.ALL_METHODS:
            _fail("config", ConfigError(f"unknown method '{name}'"))
    results = _stage("bench", sim.run_experiment, cfg, list(methods), reps, threads=threads)
    manifest = {
        "model": model_id.value,
        "n": n,
        "p": p,
        "seed": seed,
        "reps": reps,
        "methods": " ".join(methods),
    }
    if m_arg is not None:
        manifest["m"] = m_arg
    _write_bench_tables(Path(out), results, list(methods), reps, manifest)
    click.echo(f"wrote benchmark results to {out}")


def _parse_size(text: str):
    try:
        p_str, n_str = text.split(",")
        return int(p_str), int(n_str)
    except ValueError as exc:
        raise ConfigError(f"sizes must look like 'p,n', got '{text}'") from exc


@main.command()
@click.option("--table", type=click.IntRange(1, 3), required=True)
@click.option("--reps", type=int, default=20, show_default=True)
@click.option("--models", multiple=True, help="Restrict to these model ids.")
@click.option("--sizes", multiple=True, help="Restrict to these 'p,n' cells.")
@click.option("--methods", multiple=True, help="Restrict to these methods.")
@click.option("--m", type=int, default=100, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--benchmark-reps", type=int, default=1000, show_default=True)
@click.option("--threads", type=int, default=1, show_default=True)
@click.option("--out", type=click.Path(), required=True)
def reproduce(table, reps, models, sizes, methods, m, seed, benchmark_reps, threads, out):
    """Run a desk-scale version of one simulation table."""
    grid = TABLE_GRIDS[table]
    model_filter = {_stage("config", parse_model, t) for t in models} if models else None
    size_filter = {_stage("config", _parse_size, t) for t in sizes} if sizes else None
    use_methods = list(methods) if methods else list(TABLE_METHODS)
    for name in use_methods:
        if name not in api.ALL_METHODS:
            _fail("config", ConfigError(f"unknown method '{name}'"))

    bench_cache = {}

    def benchmark(p, d0):
        if (p, d0) not in bench_cache:
            bench_cache[(p, d0)] = benchmark_distance(p, d0, benchmark_reps, seed)
        return bench_cache[(p, d0)]

    rows = []
    cell_index = 0
    for model_id, cells in grid:
        for (p, n) in cells:
            index = cell_index
            cell_index += 1
            if model_filter is not None and model_id not in model_filter:
                continue
            if size_filter is not None and (p, n) not in size_filter:
                continue
            m_arg = m if sim.response_kind(model_id) is ResponseKind.DISTRIBUTION else None
            cfg = _stage(
                "config", sim.SimConfig,
                model=model_id, n=n, p=p, m=m_arg, seed=seed + 100000 * index,
            )
            results = _stage("reproduce", sim.run_experiment, cfg, use_methods, reps, threads=threads)
            row = {
                "model": model_id.value,
                "p": p,
                "n": n,
                "benchmark": benchmark(p, MODEL_D0[model_id]),
            }
            for name in use_methods:
                row[f"{name}_mean"] = results[name].mean
                row[f"{name}_sd"] = results[name].sd
                row[f"{name}_failures"] = results[name].n_failures
            rows.append(row)
            click.echo(
                f"{model_id.value} (p={p}, n={n}): "
                + ", ".join(f"{name}={io.fmt(results[name].mean)}" for name in use_methods)
            )

    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    header = ["model", "p", "n", "benchmark"]
    for name in use_methods:
        header += [f"{name}_mean", f"{name}_sd", f"{name}_failures"]
    with open(outdir / "table.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            cells = []
            for key in header:
                val = row[key]
                cells.append(io.fmt(val) if isinstance(val, float) else str(val))
            fh.write(",".join(cells) + "\n")
    io.write_manifest(
        outdir / "manifest.txt",
        {
            "table": table,
            "reps": reps,
            "seed": seed,
            "m": m,
            "methods": " ".join(use_methods),
            "benchmark_reps": benchmark_reps,
        },
    )
    click.echo(f"wrote table to {outdir}")


if __name__ == "__main__":
    main()
