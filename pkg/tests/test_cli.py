"""End-to-end CLI runs: file outputs, reproducibility, chart format contract."""

import json

import pytest

from olppmon.cli import main
from olppmon.dataio import load_csv, load_model, records_from_csv


@pytest.fixture(scope="module")
def numerical_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("numdata")
    rc = main(["simulate", "--process", "numerical", "--out", str(out),
               "--seed", "123", "--n-samples", "400", "--onset", "200"])
    assert rc == 0
    return out


@pytest.fixture(scope="module")
def trained_dir(tmp_path_factory, numerical_dir):
    out = tmp_path_factory.mktemp("model")
    rc = main(["train", "--train", str(numerical_dir / "train.csv"),
               "--method", "olpp", "--k", "8", "--k1", "5", "--k2", "10",
               "--alpha", "0.99", "--dim", "1", "--out", str(out)])
    assert rc == 0
    return out


class TestSimulate:
    def test_writes_all_numerical_files(self, numerical_dir):
        for name in ("train.csv", "test_normal.csv", "test_fault1.csv",
                     "test_fault2.csv", "test_fault3.csv"):
            assert (numerical_dir / name).exists()

    def test_fault_files_labeled(self, numerical_dir):
        ds = load_csv(numerical_dir / "test_fault2.csv")
        assert ds.x.shape == (3, 400)
        assert set(ds.labels) == {0, 2}

    def test_cstr_simulation(self, tmp_path):
        rc = main(["simulate", "--process", "cstr", "--out", str(tmp_path),
                   "--seed", "5", "--train-seconds", "120",
                   "--test-minutes", "2"])
        assert rc == 0
        ds = load_csv(tmp_path / "test_fault4.csv")
        assert ds.x.shape == (4, 120)
        assert ds.variable_names == ["c_a", "t", "t_c", "q"]

    def test_cstr_train_detect_with_lowpass(self, tmp_path):
        data = tmp_path / "data"
        main(["simulate", "--process", "cstr", "--out", str(data),
              "--seed", "5", "--train-seconds", "200", "--test-minutes", "2"])
        run = tmp_path / "run"
        rc = main(["train", "--train", str(data / "train.csv"), "--k", "5",
                   "--dim", "2", "--lowpass", "0.8", "--out", str(run)])
        assert rc == 0
        rc = main(["detect", "--model", str(run / "model.json"),
                   "--test", str(data / "test_normal.csv"),
                   "--lowpass", "0.8", "--out", str(run / "normal")])
        assert rc == 0
        summary = json.loads((run / "normal" / "summary.json").read_text())
        assert summary["n_scored"] == 120


class TestIdEstimate:
    def test_reports_pooled_and_rounded(self, numerical_dir, capsys):
        rc = main(["id-estimate", "--data", str(numerical_dir / "train.csv"),
                   "--k1", "5", "--k2", "10"])
        assert rc == 0
        report = json.loads(capsys.readouterr().out)
        assert report["k1"] == 5 and report["k2"] == 10
        assert report["rounded"] >= 1
        assert len(report["per_k"]) == 6

    def test_sweep_table(self, numerical_dir, capsys):
        rc = main(["id-estimate", "--data", str(numerical_dir / "train.csv"),
                   "--sweep", "--sweep-k1", "5", "--sweep-k2", "10", "15",
                   "--strides", "1", "2"])
        assert rc == 0
        report = json.loads(capsys.readouterr().out)
        assert len(report["sweep"]) == 4


class TestTrain:
    def test_outputs_exist(self, trained_dir):
        assert (trained_dir / "model.json").exists()
        assert (trained_dir / "train_report.json").exists()

    def test_report_echoes_alpha_and_dimension(self, trained_dir):
        report = json.loads((trained_dir / "train_report.json").read_text())
        assert report["alpha"] == 0.99
        assert report["dimension"] == 1
        assert report["method"] == "olpp"
        assert 0.9 <= report["training_coverage"]["t2"] <= 1.0

    def test_rerun_is_byte_identical(self, numerical_dir, tmp_path):
        args = ["train", "--train", str(numerical_dir / "train.csv"),
                "--method", "olpp", "--k", "8", "--k1", "5", "--k2", "10",
                "--dim", "1"]
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        assert (a / "model.json").read_bytes() == (b / "model.json").read_bytes()
        assert (a / "train_report.json").read_bytes() == \
            (b / "train_report.json").read_bytes()

    def test_strategy_flags(self, numerical_dir, tmp_path):
        rc = main(["train", "--train", str(numerical_dir / "train.csv"),
                   "--method", "lpp", "--k", "8", "--dim", "1",
                   "--strategy", "pseudoinverse", "--out", str(tmp_path)])
        assert rc == 0
        model = load_model(tmp_path / "model.json")
        assert model.projection.method == "lpp"

    def test_beta_flag(self, numerical_dir, tmp_path):
        rc = main(["train", "--train", str(numerical_dir / "train.csv"),
                   "--k", "8", "--dim", "1", "--strategy", "regularize",
                   "--beta", "1e-7", "--out", str(tmp_path)])
        assert rc == 0
        model = load_model(tmp_path / "model.json")
        assert model.projection.strategy.beta == 1e-7


class TestDetect:
    def test_outputs_and_metrics(self, numerical_dir, trained_dir, tmp_path):
        rc = main(["detect", "--model", str(trained_dir / "model.json"),
                   "--test", str(numerical_dir / "test_fault1.csv"),
                   "--out", str(tmp_path), "--svg"])
        assert rc == 0
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["fdr"] is not None and summary["far"] is not None
        records, _, _ = records_from_csv(tmp_path / "records.csv")
        assert len(records) == 400

    def test_all_normal_slice_reports_far_only(self, numerical_dir,
                                               trained_dir, tmp_path):
        rc = main(["detect", "--model", str(trained_dir / "model.json"),
                   "--test", str(numerical_dir / "test_normal.csv"),
                   "--out", str(tmp_path)])
        assert rc == 0
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["far"] is not None
        assert summary["fdr"] is None

    def test_svg_format_contract(self, numerical_dir, trained_dir, tmp_path):
        main(["detect", "--model", str(trained_dir / "model.json"),
              "--test", str(numerical_dir / "test_fault1.csv"),
              "--out", str(tmp_path), "--svg"])
        svg = (tmp_path / "chart.svg").read_text()
        assert svg.count('id="axes_') == 2
        assert svg.count('id="threshold-') == 2

    def test_reproducible_outputs_including_svg(self, numerical_dir,
                                                trained_dir, tmp_path):
        args = ["detect", "--model", str(trained_dir / "model.json"),
                "--test", str(numerical_dir / "test_fault2.csv"), "--svg"]
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        for name in ("records.csv", "summary.json", "chart.svg"):
            assert (a / name).read_bytes() == (b / name).read_bytes(), name

    def test_dimension_mismatch_fails_nonzero(self, trained_dir, tmp_path,
                                              capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n1,2\n3,4\n")
        rc = main(["detect", "--model", str(trained_dir / "model.json"),
                   "--test", str(bad), "--out", str(tmp_path)])
        assert rc != 0
        assert "error" in capsys.readouterr().err


class TestEvaluate:
    def test_metrics_from_records(self, numerical_dir, trained_dir, tmp_path,
                                  capsys):
        main(["detect", "--model", str(trained_dir / "model.json"),
              "--test", str(numerical_dir / "test_fault3.csv"),
              "--out", str(tmp_path)])
        capsys.readouterr()
        rc = main(["evaluate", "--records", str(tmp_path / "records.csv")])
        assert rc == 0
        metrics = json.loads(capsys.readouterr().out)
        assert metrics["n_faulty"] == 200    # onset at sample 200 of 400
        assert 0.0 <= metrics["far"] <= 100.0


class TestBenchmark:
    def test_numerical_table_shape(self, tmp_path, capsys):
        rc = main(["benchmark", "--suite", "numerical", "--methods", "pca",
                   "--out", str(tmp_path)])
        assert rc == 0
        lines = (tmp_path / "benchmark.csv").read_text().strip().splitlines()
        assert lines[0] == "case,pca"
        cases = [ln.split(",")[0] for ln in lines[1:]]
        assert cases == ["normal", "fault1", "fault2", "fault3"]
        table = json.loads((tmp_path / "benchmark.json").read_text())
        assert table["methods"] == ["pca"]
        assert all("pca" in row and "olpp" not in row for row in table["rows"])
