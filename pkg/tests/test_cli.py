import json

import numpy as np
import pytest

from qkgeom.cli import main
from qkgeom.data import GenNormSpec, sample_dataset, save_csv, Dataset
from qkgeom.kernel import load_kernel
from qkgeom.tuning import save_curve, gamma_max_curve


@pytest.fixture
def dataset_csv(tmp_path):
    path = tmp_path / "d.csv"
    assert main([
        "gen-data", "--beta", "2", "--r", "0", "--n", "40", "--dim", "3",
        "--seed", "7", "--out", str(path),
    ]) == 0
    return path


class TestGenData:
    def test_identical_reruns(self, tmp_path):
        args = ["gen-data", "--beta", "2", "--r", "0", "--n", "100", "--dim", "4", "--seed", "7"]
        assert main(args + ["--out", str(tmp_path / "a.csv")]) == 0
        assert main(args + ["--out", str(tmp_path / "b.csv")]) == 0
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
        meta = json.loads((tmp_path / "a.meta.json").read_text())
        assert meta["seed"] == 7
        assert meta["spec"] == {"beta": 2.0, "r": 0.0}


class TestKernelCommand:
    def test_product_z_alias_gives_all_ones(self, tmp_path, dataset_csv, capsys):
        out = tmp_path / "k.csv"
        code = main([
            "kernel", "--map", "productz", "--lambda", "1", "--data", str(dataset_csv),
            "--out", str(out),
        ])
        assert code == 0
        entries = load_kernel(out).entries
        np.testing.assert_allclose(entries, np.ones_like(entries), atol=1e-10)

    def test_sidecar_records_data_hash(self, tmp_path, dataset_csv):
        out = tmp_path / "k.csv"
        main(["kernel", "--map", "iqp", "--lambda", "0.5", "--data", str(dataset_csv), "--out", str(out)])
        meta = json.loads((tmp_path / "k.meta.json").read_text())
        assert len(meta["data_sha256"]) == 64
        assert meta["spec"]["family"] == "iqp"


class TestGdCommand:
    def test_self_difference_prints_one(self, tmp_path, dataset_csv, capsys):
        k = tmp_path / "k.csv"
        main(["kernel", "--map", "iqp", "--lambda", "0.5", "--data", str(dataset_csv), "--out", str(k)])
        capsys.readouterr()
        assert main(["gd", "--k1", str(k), "--k2", str(k)]) == 0
        value = float(capsys.readouterr().out.strip())
        assert abs(value - 1.0) < 1e-8

    def test_singular_kernel_with_zero_eps_is_numerical_failure(self, tmp_path, dataset_csv, capsys):
        k = tmp_path / "ones.csv"
        main(["kernel", "--map", "product_z", "--lambda", "1", "--data", str(dataset_csv), "--out", str(k)])
        capsys.readouterr()
        code = main(["gd", "--k1", str(k), "--k2", str(k), "--eps-rel", "0"])
        assert code == 2

    def test_json_errors(self, tmp_path, capsys):
        code = main(["--json-errors", "gd", "--k1", "missing.csv", "--k2", "missing.csv"])
        assert code == 1
        payload = json.loads(capsys.readouterr().err.strip())
        assert payload["error"] == "validation"


class TestSpectrumCommand:
    def test_prints_gamma_max_and_writes_values(self, tmp_path, dataset_csv, capsys):
        k = tmp_path / "k.csv"
        main(["kernel", "--map", "product_z", "--lambda", "1", "--data", str(dataset_csv), "--out", str(k)])
        capsys.readouterr()
        out = tmp_path / "s.csv"
        assert main(["spectrum", "--kernel", str(k), "--out", str(out)]) == 0
        assert abs(float(capsys.readouterr().out.strip()) - 1.0) < 1e-9
        values = [float(v) for v in out.read_text().split()]
        assert len(values) == 40
        assert abs(sum(values) - 1.0) < 1e-9


class TestSvmCommand:
    def test_train_and_score(self, tmp_path, capsys):
        raw = sample_dataset(GenNormSpec(beta=2.0), 90, 3, seed=5)
        labeled = Dataset(points=raw.points, labels=np.where(raw.points[:, 0] >= 0, 1, -1))
        train_csv = save_csv(
            Dataset(points=labeled.points[:60], labels=labeled.labels[:60]), tmp_path / "train.csv"
        )
        test_csv = save_csv(
            Dataset(points=labeled.points[60:], labels=labeled.labels[60:]), tmp_path / "test.csv"
        )
        model_path = tmp_path / "model.json"
        code = main([
            "svm", "--map", "classical_iqp", "--lambda", "0.2", "--C", "5",
            "--train-data", str(train_csv), "--test-data", str(test_csv),
            "--model-out", str(model_path),
        ])
        assert code == 0
        output = capsys.readouterr().out
        train_acc = float(output.splitlines()[0].split("=")[1])
        test_acc = float(output.splitlines()[1].split("=")[1])
        assert train_acc >= 0.9
        assert test_acc >= 0.8
        model = json.loads(model_path.read_text())
        assert set(model) == {"C", "alphas", "bias", "support_indices", "train_labels"}


class TestTuneGammaCommand:
    def test_reads_curve_and_inverts(self, tmp_path, capsys):
        curve = gamma_max_curve(
            "iqp", 2.0, GenNormSpec(beta=1.0), 30, [3],
            np.logspace(-1.5, 0.5, 6), replicates=2, seed=1,
        )
        path = save_curve(curve, tmp_path / "curve.csv")
        capsys.readouterr()
        assert main(["tune-gamma", "--curve", str(path), "--n", "3", "--target", "0.9"]) == 0
        lam = float(capsys.readouterr().out.strip())
        assert 10**-1.5 <= lam <= 10**0.5


class TestMinGdCommand:
    def test_writes_schema_csv(self, tmp_path, dataset_csv, capsys):
        k = tmp_path / "kq.csv"
        main(["kernel", "--map", "iqp", "--lambda", "0.8", "--data", str(dataset_csv), "--out", str(k)])
        out = tmp_path / "gd.csv"
        capsys.readouterr()
        code = main([
            "min-gd", "--quantum-kernel", str(k), "--data", str(dataset_csv),
            "--grid-num", "5", "--out", str(out),
        ])
        assert code == 0
        assert "gd_min=" in capsys.readouterr().out
        lines = out.read_text().splitlines()
        assert lines[0] == "n_qubits,quantum_lambda,classical_lambda_star,gd_min,gd_matched,sqrt_N"


class TestExperimentCommand:
    def test_run_with_overrides(self, tmp_path, capsys):
        config = {
            "kind": "spectrum_curve",
            "n_points": 30,
            "qubits": [2, 3],
            "lambda_grid": {"log10_start": -1.5, "log10_stop": 0.5, "num": 5},
            "replicates": 1,
            "seed": 2,
        }
        cfg_path = tmp_path / "exp.json"
        cfg_path.write_text(json.dumps(config))
        code = main([
            "experiment", "--config", str(cfg_path), "--out", str(tmp_path / "run"),
            "--threads", "1", "--set", "seed=4",
        ])
        assert code == 0
        summary = json.loads(capsys.readouterr().out.strip())
        assert summary["outputs"] == ["curve.csv"]
        manifest = json.loads((tmp_path / "run" / "manifest.json").read_text())
        assert manifest["config"]["seed"] == 4

    def test_empty_qubits_fails_validation(self, tmp_path, capsys):
        cfg_path = tmp_path / "exp.json"
        cfg_path.write_text(json.dumps({"kind": "spectrum_curve", "qubits": []}))
        assert main(["experiment", "--config", str(cfg_path)]) == 1
        assert "must not be empty" in capsys.readouterr().err


class TestArgumentHandling:
    def test_unknown_flag_rejected(self, capsys):
        assert main(["gen-data", "--beta", "2", "--n", "10", "--dim", "2",
                     "--seed", "1", "--out", "x.csv", "--bogus"]) == 1
        assert "unrecognized" in capsys.readouterr().err

    def test_unknown_subcommand_rejected(self, capsys):
        assert main(["frobnicate"]) == 1

    def test_validation_exit_code_for_bad_family(self, tmp_path, dataset_csv):
        assert main([
            "kernel", "--map", "warp", "--lambda", "1",
            "--data", str(dataset_csv), "--out", str(tmp_path / "k.csv"),
        ]) == 1
