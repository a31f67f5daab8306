"""Tests for the command-line interface and file formats."""

from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from frechet_sdr import io
from frechet_sdr.cli import main, parse_model
from frechet_sdr.errors import ConfigError, DataError, DimMismatch
from frechet_sdr.linalg import PredictorMatrix
from frechet_sdr.metrics import ResponseKind
from frechet_sdr.simulate import ModelId


@pytest.fixture()
def runner():
    return CliRunner()


def simulate_dataset(runner, tmp_path, model="I-1", n=60, p=4, m=20, seed=0):
    out = tmp_path / "data"
    args = ["simulate", "--model", model, "--n", str(n), "--p", str(p),
            "--seed", str(seed), "--out", str(out)]
    if m is not None:
        args += ["--m", str(m)]
    result = runner.invoke(main, args)
    assert result.exit_code == 0, result.output
    return out


class TestParseModel:
    def test_accepts_variants(self):
        assert parse_model("I-1") is ModelId.I1
        assert parse_model("i1") is ModelId.I1
        assert parse_model("III-2") is ModelId.III2

    def test_rejects_unknown(self):
        with pytest.raises(ConfigError):
            parse_model("IV-1")


class TestSimulateCommand:
    def test_writes_dataset(self, runner, tmp_path):
        out = simulate_dataset(runner, tmp_path)
        x = io.load_predictors(out / "predictors.csv")
        assert (x.n, x.p) == (60, 4)
        ys = io.load_responses(out / "responses.csv", ResponseKind.DISTRIBUTION)
        assert len(ys) == 60
        truth = io.load_truth(out / "truth.csv")
        assert truth.shape == (4, 1)
        manifest = (out / "manifest.txt").read_text()
        assert "seed = 0" in manifest

    def test_bad_model_exits_2(self, runner, tmp_path):
        result = runner.invoke(main, ["simulate", "--model", "X-9", "--n", "10",
                                      "--p", "4", "--out", str(tmp_path / "d")])
        assert result.exit_code == 2

    def test_p_too_small_exits_2(self, runner, tmp_path):
        result = runner.invoke(main, ["simulate", "--model", "I-4", "--n", "10",
                                      "--p", "3", "--m", "5", "--out", str(tmp_path / "d")])
        assert result.exit_code == 2

    def test_spd_round_trip(self, runner, tmp_path):
        out = simulate_dataset(runner, tmp_path, model="II-1", n=20, p=4, m=None)
        ys = io.load_responses(out / "responses.csv", ResponseKind.SPD, spd_dim=2)
        assert ys.items[0].dim == 2

    def test_sphere_round_trip(self, runner, tmp_path):
        out = simulate_dataset(runner, tmp_path, model="III-1", n=20, p=4, m=None)
        ys = io.load_responses(out / "responses.csv", ResponseKind.SPHERE)
        assert ys.items[0].ambient_dim == 2


class TestFitCommand:
    def test_round_trip_with_truth(self, runner, tmp_path):
        data = simulate_dataset(runner, tmp_path)
        out = tmp_path / "fit"
        result = runner.invoke(main, [
            "fit", "--predictors", str(data / "predictors.csv"),
            "--responses", str(data / "responses.csv"),
            "--kind", "distribution", "--method", "fols", "--d0", "1",
            "--truth", str(data / "truth.csv"), "--out", str(out),
        ])
        assert result.exit_code == 0, result.output
        assert "projection distance to truth" in result.output
        manifest = (out / "manifest.txt").read_text()
        assert "projection_distance_to_truth" in manifest
        assert "gamma" in manifest
        basis = io.load_matrix(out / "basis.csv")
        assert basis.shape == (4, 1)
        eig = io.load_matrix(out / "eigenvalues.csv")
        assert eig.shape == (4, 1)
        sp = io.load_matrix(out / "sufficient_predictors.csv")
        assert sp.shape == (60, 1)

    def test_missing_response_file_exits_3(self, runner, tmp_path):
        data = simulate_dataset(runner, tmp_path)
        result = runner.invoke(main, [
            "fit", "--predictors", str(data / "predictors.csv"),
            "--responses", str(data / "nope.csv"),
            "--kind", "distribution", "--method", "fols", "--d0", "1",
            "--out", str(tmp_path / "f"),
        ])
        assert result.exit_code == 3
        assert "data" in result.output

    def test_sphere_gaussian_exits_2(self, runner, tmp_path):
        data = simulate_dataset(runner, tmp_path, model="III-1", n=30, p=4, m=None)
        args = [
            "fit", "--predictors", str(data / "predictors.csv"),
            "--responses", str(data / "responses.csv"),
            "--kind", "sphere", "--kernel", "gaussian",
            "--method", "fols", "--d0", "1", "--out", str(tmp_path / "f"),
        ]
        result = runner.invoke(main, args)
        assert result.exit_code == 2
        assert "indefinite" in result.output
        result = runner.invoke(main, args + ["--allow-indefinite"])
        assert result.exit_code == 0, result.output

    def test_invalid_gamma_exits_2(self, runner, tmp_path):
        data = simulate_dataset(runner, tmp_path)
        result = runner.invoke(main, [
            "fit", "--predictors", str(data / "predictors.csv"),
            "--responses", str(data / "responses.csv"),
            "--kind", "distribution", "--method", "fols", "--d0", "1",
            "--gamma", "-2", "--out", str(tmp_path / "f"),
        ])
        assert result.exit_code == 2

    def test_config_file_supplies_options(self, runner, tmp_path):
        data = simulate_dataset(runner, tmp_path)
        cfg = tmp_path / "run.ini"
        cfg.write_text(
            "[kernels]\nfamily = gaussian\ngamma = 0.75\n"
            "[cli]\nkind = distribution\nmethod = fsir\nd0 = 1\n"
        )
        out = tmp_path / "fit"
        result = runner.invoke(main, [
            "fit", "--predictors", str(data / "predictors.csv"),
            "--responses", str(data / "responses.csv"),
            "--config", str(cfg), "--out", str(out),
        ])
        assert result.exit_code == 0, result.output
        manifest = (out / "manifest.txt").read_text()
        assert "method = fsir" in manifest
        assert "gamma = 0.75" in manifest

    def test_cli_overrides_config(self, runner, tmp_path):
        data = simulate_dataset(runner, tmp_path)
        cfg = tmp_path / "run.ini"
        cfg.write_text("[cli]\nkind = distribution\nmethod = fsir\nd0 = 1\n")
        out = tmp_path / "fit"
        result = runner.invoke(main, [
            "fit", "--predictors", str(data / "predictors.csv"),
            "--responses", str(data / "responses.csv"),
            "--config", str(cfg), "--method", "fols", "--out", str(out),
        ])
        assert result.exit_code == 0, result.output
        assert "method = fols" in (out / "manifest.txt").read_text()


class TestScreeCommand:
    def test_emits_full_spectrum(self, runner, tmp_path):
        data = simulate_dataset(runner, tmp_path, n=50, p=5)
        out = tmp_path / "scree"
        result = runner.invoke(main, [
            "scree", "--predictors", str(data / "predictors.csv"),
            "--responses", str(data / "responses.csv"),
            "--kind", "distribution", "--method", "fols", "--out", str(out),
        ])
        assert result.exit_code == 0, result.output
        eig = io.load_matrix(out / "eigenvalues.csv")
        assert eig.shape == (5, 1)

    def test_deterministic_output(self, runner, tmp_path):
        data = simulate_dataset(runner, tmp_path, n=40, p=4)
        outs = []
        for name in ("s1", "s2"):
            out = tmp_path / name
            result = runner.invoke(main, [
                "scree", "--predictors", str(data / "predictors.csv"),
                "--responses", str(data / "responses.csv"),
                "--kind", "distribution", "--method", "rfopg", "--out", str(out),
            ])
            assert result.exit_code == 0, result.output
            outs.append((out / "eigenvalues.csv").read_bytes())
        assert outs[0] == outs[1]

    def test_elbow_on_two_dim_model(self, runner, tmp_path):
        # FOPG spectrum on a d0 = 2 model concentrates in two eigenvalues
        data = simulate_dataset(runner, tmp_path, model="I-2", n=400, p=10, m=50, seed=3)
        out = tmp_path / "scree"
        result = runner.invoke(main, [
            "scree", "--predictors", str(data / "predictors.csv"),
            "--responses", str(data / "responses.csv"),
            "--kind", "distribution", "--method", "fopg", "--out", str(out),
        ])
        assert result.exit_code == 0, result.output
        eig = io.load_matrix(out / "eigenvalues.csv").ravel()
        assert eig.shape == (10,)
        assert eig[1] / eig[2] > 3.0


class TestBenchCommand:
    def test_writes_results(self, runner, tmp_path):
        out = tmp_path / "bench"
        result = runner.invoke(main, [
            "bench", "--model", "I-1", "--method", "fols", "--method", "fsir",
            "--reps", "2", "--n", "50", "--p", "4", "--m", "15",
            "--out", str(out),
        ])
        assert result.exit_code == 0, result.output
        lines = (out / "results.csv").read_text().strip().splitlines()
        assert lines[0] == "method,reps,mean,sd,failures"
        assert len(lines) == 3
        per_rep = (out / "per_rep.csv").read_text().strip().splitlines()
        assert per_rep[0] == "rep,fols,fsir"
        assert len(per_rep) == 3


class TestReproduceCommand:
    def test_small_grid(self, runner, tmp_path):
        out = tmp_path / "repro"
        result = runner.invoke(main, [
            "reproduce", "--table", "1", "--reps", "2",
            "--models", "I-1", "--sizes", "10,200", "--methods", "fols",
            "--m", "20", "--benchmark-reps", "50", "--out", str(out),
        ])
        assert result.exit_code == 0, result.output
        lines = (out / "table.csv").read_text().strip().splitlines()
        assert lines[0] == "model,p,n,benchmark,fols_mean,fols_sd,fols_failures"
        assert lines[1].startswith("I-1,10,200,")


class TestLoaders:
    def test_spd_requires_dim(self, tmp_path):
        path = tmp_path / "r.csv"
        path.write_text("a,b,c,d\n1,0,0,1\n1,0,0,1\n")
        with pytest.raises(DataError):
            io.load_responses(path, ResponseKind.SPD)

    def test_spd_wrong_width(self, tmp_path):
        path = tmp_path / "r.csv"
        path.write_text("a,b,c\n1,0,1,\n".replace(",\n", "\n"))
        with pytest.raises(DimMismatch):
            io.load_responses(path, ResponseKind.SPD, spd_dim=2)

    def test_sphere_rejects_non_unit(self, tmp_path):
        path = tmp_path / "r.csv"
        path.write_text("c1,c2\n1,0\n2,0\n")
        with pytest.raises(DimMismatch):
            io.load_responses(path, ResponseKind.SPHERE)

    def test_sphere_normalizes_near_unit(self, tmp_path):
        path = tmp_path / "r.csv"
        path.write_text(f"c1,c2\n{1 + 1e-7},0\n0,1\n")
        ys = io.load_responses(path, ResponseKind.SPHERE)
        assert np.linalg.norm(ys.items[0].coords) == pytest.approx(1.0, abs=1e-15)

    def test_ragged_rows_rejected(self, tmp_path):
        path = tmp_path / "r.csv"
        path.write_text("w1,w2\n1,2\n1\n")
        with pytest.raises(DataError):
            io.load_responses(path, ResponseKind.DISTRIBUTION)

    def test_non_numeric_rejected(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("x1\nfoo\n")
        with pytest.raises(DataError):
            io.load_predictors(path)

    def test_six_significant_digits(self, tmp_path):
        path = tmp_path / "m.csv"
        io.write_matrix(path, np.array([[np.pi]]), ["v"])
        assert path.read_text().splitlines()[1] == "3.14159"
