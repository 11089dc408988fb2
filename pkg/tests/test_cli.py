"""
End-to-end tests for the trsoden command-line interface.
"""

import json

import pandas as pd
import pytest

from cli.main import (
    CHECKPOINT_FILE,
    EXIT_INVALID,
    EXIT_NUMERIC,
    EXIT_OK,
    HISTORY_FILE,
    REPORT_FILE,
    SYMMETRY_FILE,
    main,
    run_slug,
)
from dynamics.datasets import DatasetSpec, NoiseSpec
from dynamics.systems import SystemSpec
from experiments.config import (
    ExperimentConfig,
    ModelConfig,
    ModelKind,
    RunVariant,
    SolverSettings,
    TrainingSettings,
    save_config,
)
from experiments.training import TrainingAbortedError
from integrators.schemas import SolverMethod
from losses.schedules import LambdaSchedule
from models.checkpoint import load_checkpoint

pytestmark = [pytest.mark.integration, pytest.mark.dataio]

LABELS = ["ODEN", "HODEN", "TRS-ODEN"]


@pytest.fixture
def config_path(tmp_path):
    config = ExperimentConfig(
        experiment_id="mini",
        dataset=DatasetSpec(
            system=SystemSpec(parameters={'alpha': 1.0}),
            count=3, length=6, test_count=2, test_length=8,
            noise=NoiseSpec(sigma=0.05),
        ),
        model=ModelConfig(hidden_dims=[4]),
        training=TrainingSettings(epochs=2, learning_rate=1e-3, max_segment_length=3, log_every=1),
        output_dir=str(tmp_path / "runs"),
        runs=[
            RunVariant(label="ODEN"),
            RunVariant(label="HODEN", model=ModelConfig(kind=ModelKind.HODEN, hidden_dims=[4]),
                       solver=SolverSettings(method=SolverMethod.LEAPFROG)),
            RunVariant(label="TRS-ODEN", schedule=LambdaSchedule.constant(10.0)),
        ],
    )
    path = tmp_path / "mini.json"
    save_config(config, path)
    return path


@pytest.fixture
def trained(config_path, tmp_path):
    """Config path after generate + train."""
    assert main(["generate", "--config", str(config_path)]) == EXIT_OK
    assert main(["train", "--config", str(config_path)]) == EXIT_OK
    return config_path


class TestRunSlug:
    @pytest.mark.parametrize("label, slug", [
        ("ODEN", "ODEN"),
        ("TRS-ODEN (λ=0.5t)", "TRS-ODEN_lambda=0.5t"),
        ("TRS-ODEN(λ=10)", "TRS-ODEN_lambda=10"),
        ("???", "run"),
    ])
    def test_slugs(self, label, slug):
        """Test run labels map to filesystem-safe directory names."""
        assert run_slug(label) == slug


class TestPipeline:
    def test_generate_writes_trajectory_files(self, config_path, tmp_path, capsys):
        """Test generate writes the train, clean train and test files."""
        assert main(["generate", "--config", str(config_path)]) == EXIT_OK
        data_dir = tmp_path / "runs" / "data"
        assert {p.name for p in data_dir.iterdir()} == {"train.csv", "train_clean.csv", "test.csv"}
        assert "[SUCCESS]" in capsys.readouterr().out

    def test_train_writes_run_outputs(self, trained, tmp_path):
        """Test train writes a checkpoint, history and config per run."""
        for label in LABELS:
            run_dir = tmp_path / "runs" / label
            assert (run_dir / HISTORY_FILE).exists()
            model, metadata = load_checkpoint(run_dir / CHECKPOINT_FILE)
            assert metadata['label'] == label
            assert metadata['epochs'] == 2
            assert json.loads((run_dir / "config.json").read_text())['label'] == label
        hoden, _ = load_checkpoint(tmp_path / "runs" / "HODEN" / CHECKPOINT_FILE)
        assert hoden.kind == "hoden"

    def test_overrides(self, config_path, tmp_path):
        """Test --run, --seed, --epochs and --out override the config."""
        out = tmp_path / "other"
        code = main(["train", "--config", str(config_path), "--run", "ODEN", "--seed", "7", "--epochs", "3",
                     "--out", str(out)])
        assert code == EXIT_OK
        history = pd.read_csv(out / "ODEN" / HISTORY_FILE)
        assert len(history) == 3
        _, metadata = load_checkpoint(out / "ODEN" / CHECKPOINT_FILE)
        assert metadata['seed'] == 7
        assert not (out / "HODEN").exists()

    def test_generate_seed_override(self, config_path, tmp_path):
        """Test generate --seed changes the data and reproduces it for a repeated seed."""
        def generated(seed, name):
            data_dir = tmp_path / name
            argv = ["generate", "--config", str(config_path), "--data", str(data_dir), "--seed", str(seed)]
            assert main(argv) == EXIT_OK
            return (data_dir / "train.csv").read_text()

        first = generated(5, "a")
        assert generated(5, "b") == first
        assert generated(6, "c") != first

    def test_same_seed_gives_identical_outputs(self, config_path, tmp_path):
        """Test two runs with one seed write identical checkpoints and reports."""
        def run(name):
            out = tmp_path / name
            common = ["--config", str(config_path), "--run", "TRS-ODEN", "--seed", "3", "--out", str(out)]
            assert main(["train"] + common) == EXIT_OK
            assert main(["evaluate"] + common) == EXIT_OK
            run_dir = out / "TRS-ODEN"
            return (run_dir / CHECKPOINT_FILE).read_bytes(), (run_dir / REPORT_FILE).read_text()

        checkpoint_a, report_a = run("a")
        checkpoint_b, report_b = run("b")
        assert checkpoint_a == checkpoint_b
        assert report_a == report_b

    def test_evaluate_writes_reports(self, trained, tmp_path):
        """Test evaluate writes a report per run."""
        assert main(["evaluate", "--config", str(trained)]) == EXIT_OK
        report = json.loads((tmp_path / "runs" / "TRS-ODEN" / REPORT_FILE).read_text())
        assert report['experiment_id'] == "mini"
        assert report['n_trajectories'] == 2
        assert report['energy_mse'] is not None

    def test_symmetry_check(self, trained, tmp_path):
        """Test symmetry-check writes the error and the HODEN evenness gap."""
        assert main(["symmetry-check", "--config", str(trained), "--steps", "5"]) == EXIT_OK
        oden = json.loads((tmp_path / "runs" / "ODEN" / SYMMETRY_FILE).read_text())
        hoden = json.loads((tmp_path / "runs" / "HODEN" / SYMMETRY_FILE).read_text())
        assert oden['steps'] == 5 and oden['relative_error'] >= 0
        assert 'hamiltonian_max_abs_gap' not in oden
        assert hoden['hamiltonian_max_abs_gap'] >= 0

    def test_lyapunov(self, trained, tmp_path):
        """Test lyapunov writes one curve per run next to the ground truth."""
        output = tmp_path / "sigma.csv"
        code = main(["lyapunov", "--config", str(trained), "--members", "2", "--steps", "10",
                     "--output", str(output)])
        assert code == EXIT_OK
        frame = pd.read_csv(output)
        assert list(frame.columns) == ["t", "ground_truth"] + LABELS
        assert len(frame) == 10

    def test_report_table(self, trained, tmp_path, capsys):
        """Test report collates reports into a mean ± std table."""
        main(["evaluate", "--config", str(trained)])
        table_path = tmp_path / "table.csv"
        assert main(["report", str(tmp_path / "runs"), "--out", str(table_path)]) == EXIT_OK
        table = pd.read_csv(table_path)
        assert list(table.columns) == ["Metric", "Model", "mini"]
        assert set(table['Model']) == set(LABELS)
        assert "±" in capsys.readouterr().out


class TestErrors:
    def test_config_or_preset_required(self, capsys):
        """Test a command without --config or --preset is invalid."""
        assert main(["train"]) == EXIT_INVALID
        assert "--preset" in capsys.readouterr().err

    def test_config_and_preset_exclusive(self, config_path):
        """Test --config and --preset together are invalid."""
        assert main(["train", "--config", str(config_path), "--preset", "exp1"]) == EXIT_INVALID

    def test_unknown_preset(self, capsys):
        """Test an unknown preset name is invalid."""
        assert main(["generate", "--preset", "exp42"]) == EXIT_INVALID
        assert "Unknown preset" in capsys.readouterr().err

    def test_unknown_run_label(self, config_path):
        """Test an unknown run label is invalid."""
        assert main(["train", "--config", str(config_path), "--run", "TRS-HODEN"]) == EXIT_INVALID

    def test_evaluate_before_training(self, config_path, capsys):
        """Test evaluate without checkpoints points at train."""
        assert main(["evaluate", "--config", str(config_path)]) == EXIT_INVALID
        assert "trsoden train" in capsys.readouterr().err

    def test_invalid_config(self, tmp_path, capsys):
        """Test a config failing validation is invalid."""
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({'solver': {'method': "leapfrog"}}))
        assert main(["train", "--config", str(path)]) == EXIT_INVALID
        assert "Invalid configuration" in capsys.readouterr().err

    def test_malformed_argument_is_invalid(self):
        """Test a non-integer --seed exits with the invalid-input code."""
        assert main(["train", "--preset", "exp1", "--seed", "abc"]) == EXIT_INVALID

    def test_unknown_subcommand_is_invalid(self):
        """Test an unknown subcommand exits with the invalid-input code."""
        assert main(["frobnicate"]) == EXIT_INVALID

    def test_help_exits_cleanly(self):
        """Test --help exits with success."""
        assert main(["--help"]) == EXIT_OK

    def test_missing_report_inputs(self, tmp_path):
        """Test report without any report file is invalid."""
        assert main(["report", str(tmp_path / "nowhere")]) == EXIT_INVALID

    def test_numeric_abort(self, config_path, mocker, capsys):
        """Test an aborted training run exits with the numeric code."""
        mocker.patch("cli.main.train", side_effect=TrainingAbortedError(4))
        assert main(["train", "--config", str(config_path)]) == EXIT_NUMERIC
        assert "epoch 4" in capsys.readouterr().err
