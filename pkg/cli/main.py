"""
trsoden command-line interface.

Usage:
    trsoden generate --preset exp1 --out runs/exp1 [--seed 5]
    trsoden train --preset exp1 [--run TRS-ODEN] [--seed 1] [--epochs 200]
    trsoden evaluate --preset exp1
    trsoden symmetry-check --preset exp2 --run TRS-HODEN
    trsoden lyapunov --preset exp6
    trsoden report runs/exp1 runs/exp4 --out table1.csv

Each job of a preset writes into <out>/<run label>/: model.trsoden,
loss_history.csv, config.json, report.json, symmetry.json.

Exit codes: 0 success, 1 invalid input (bad arguments included), 2 numeric abort.
"""

import argparse
import json
import re
import sys
from pathlib import Path
from typing import List, Optional

from loguru import logger
from pydantic import ValidationError

from autodiff.tensor import NonFiniteError
from eval.lyapunov import ensemble_lyapunov
from eval.metrics import MetricReport, export_report_json, load_report_json
from eval.symmetry_checks import forward_backward_relative_error, hamiltonian_symmetry_gap
from experiments.config import ExperimentConfig, load_config, load_preset, save_config
from experiments.data import ExperimentData, generate_files, load_data, prepare_data
from experiments.evaluation import evaluate
from experiments.report import TWO_MASS_GROUPS, collate_reports, component_table
from experiments.training import train
from ingest.exporter import export_loss_history_to_csv, export_lyapunov_to_csv, export_table_to_csv
from integrators.rollout import DivergenceError
from models.checkpoint import load_checkpoint, save_checkpoint
from models.hoden import HodenModel

CHECKPOINT_FILE = "model.trsoden"
HISTORY_FILE = "loss_history.csv"
CONFIG_FILE = "config.json"
REPORT_FILE = "report.json"
SYMMETRY_FILE = "symmetry.json"
LYAPUNOV_FILE = "lyapunov.csv"
DATA_DIR = "data"

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NUMERIC = 2


def configure_logging(verbose: bool = False) -> None:
    logger.remove()
    logger.add(sys.stderr, level="DEBUG" if verbose else "INFO",
               format="<green>{time:HH:mm:ss}</green> | <level>{level: <8}</level> | {message}")


def run_slug(label: str) -> str:
    """Directory name of a run label, e.g. "TRS-ODEN (λ=0.5t)" -> "TRS-ODEN_lambda=0.5t"."""
    slug = re.sub(r"[^A-Za-z0-9.=+-]+", "_", label.replace("λ", "lambda")).strip("_")
    return slug or "run"


# ============================================================================
# Config and data resolution
# ============================================================================

def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    if args.config and args.preset:
        raise ValueError("Pass either --config or --preset, not both")
    if args.config:
        config = load_config(args.config)
    elif args.preset:
        config = load_preset(args.preset)
    else:
        raise ValueError("A --config file or a --preset name is required")

    update = {}
    if getattr(args, 'seed', None) is not None:
        update['seed'] = args.seed
    if getattr(args, 'out', None):
        update['output_dir'] = args.out
    if getattr(args, 'epochs', None) is not None:
        update['training'] = config.training.model_copy(update={'epochs': args.epochs})
    return config.model_copy(update=update) if update else config


def select_jobs(config: ExperimentConfig, run: Optional[str]) -> List[ExperimentConfig]:
    return [config.job(run)] if run else config.expand()


def resolve_data(args: argparse.Namespace, config: ExperimentConfig) -> ExperimentData:
    """Trajectory files from --data, or the experiment's data regenerated in memory."""
    if getattr(args, 'data', None):
        return load_data(args.data)
    default_dir = Path(config.output_dir) / DATA_DIR
    if (default_dir / "test.csv").exists():
        logger.info(f"Using trajectory files in {default_dir}")
        return load_data(default_dir)
    return prepare_data(config)


def job_dir(job: ExperimentConfig) -> Path:
    return Path(job.output_dir) / run_slug(job.label)


def load_job_model(job: ExperimentConfig):
    path = job_dir(job) / CHECKPOINT_FILE
    if not path.exists():
        raise FileNotFoundError(f"No checkpoint for run {job.label!r} at {path}; run `trsoden train` first")
    model, _ = load_checkpoint(path)
    return model


# ============================================================================
# Commands
# ============================================================================

def cmd_generate(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    if args.seed is not None:
        config = config.model_copy(update={'dataset': config.dataset.with_seed(args.seed)})
    output_dir = Path(args.data) if args.data else Path(config.output_dir) / DATA_DIR
    data = generate_files(config, output_dir)
    print(f"[SUCCESS] Wrote {len(data.train)} train and {len(data.test)} test trajectories to {output_dir}")
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    data = resolve_data(args, config)
    for job in select_jobs(config, args.run):
        result = train(job, data.train)
        out = job_dir(job)
        save_checkpoint(result.model, out / CHECKPOINT_FILE, metadata={
            'experiment_id': job.experiment_id,
            'label': job.label,
            'seed': job.seed,
            'epochs': job.training.epochs,
            'final_loss': result.final_loss if len(result.history) else None,
            'data': data.metadata,
        })
        export_loss_history_to_csv(result.history, out / HISTORY_FILE)
        save_config(job, out / CONFIG_FILE)
        print(f"[SUCCESS] {job.label}: checkpoint and loss history written to {out}")
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    data = resolve_data(args, config)
    for job in select_jobs(config, args.run):
        report = evaluate(load_job_model(job), data.test, job)
        export_report_json(report, job_dir(job) / REPORT_FILE)
        energy = f", energy MSE {report.energy_mse.mean:.4g}" if report.energy_mse else ""
        print(f"[SUCCESS] {job.label}: trajectory MSE {report.trajectory_mse.mean:.4g}{energy}, "
              f"{report.divergence_count} diverged")
    return EXIT_OK


def cmd_symmetry_check(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    data = resolve_data(args, config)
    initial_states = [traj.initial for traj in data.test]
    for job in select_jobs(config, args.run):
        model = load_job_model(job)
        steps = args.steps or job.dataset.length
        error = forward_backward_relative_error(model, initial_states, steps, job.reversing_operator(),
                                                job.solver_config(), initial_time=initial_states[0].time)
        result = {'label': job.label, 'steps': steps, 'relative_error': error.value,
                  'absolute': error.absolute}
        if isinstance(model, HodenModel) and not model.time_augmented:
            gap = hamiltonian_symmetry_gap(model)
            result['hamiltonian_max_abs_gap'] = gap.max_abs_gap
        path = job_dir(job) / SYMMETRY_FILE
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(result, indent=2))
        print(f"[SUCCESS] {job.label}: forward/backward error {error.value:.4g}"
              + (f", Hamiltonian gap {result['hamiltonian_max_abs_gap']:.4g}"
                 if 'hamiltonian_max_abs_gap' in result else ""))
    return EXIT_OK


def cmd_lyapunov(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    data = resolve_data(args, config)
    initial_states = [traj.initial for traj in data.test][:args.members]
    steps = args.steps or config.dataset.test_length
    dt = config.step

    truth = ensemble_lyapunov(config.dataset.system.build_field(), initial_states, steps, dt,
                              args.perturbation, seed=config.seed)
    series = {'ground_truth': truth.sigma}
    for job in select_jobs(config, args.run):
        try:
            curve = ensemble_lyapunov(load_job_model(job), initial_states, steps, dt, args.perturbation,
                                      seed=config.seed, method=job.solver.method)
        except DivergenceError as exc:
            logger.warning(f"{job.label}: rollout diverged at step {exc.step}; no σ curve")
            continue
        series[job.label] = curve.sigma

    path = Path(args.output) if args.output else Path(config.output_dir) / LYAPUNOV_FILE
    export_lyapunov_to_csv(truth.times, series, path)
    finals = ", ".join(f"{label} {sigma[-1]:.4f}" for label, sigma in series.items())
    print(f"[SUCCESS] σ(t_end): {finals}; written to {path}")
    return EXIT_OK


def collect_reports(inputs: List[str]) -> List[MetricReport]:
    paths: List[Path] = []
    for item in inputs:
        path = Path(item)
        if path.is_dir():
            paths.extend(sorted(path.rglob(REPORT_FILE)))
        elif path.exists():
            paths.append(path)
        else:
            raise FileNotFoundError(f"Report input not found: {path}")
    if not paths:
        raise FileNotFoundError(f"No {REPORT_FILE} found under {inputs}")
    return [load_report_json(p) for p in paths]


def cmd_report(args: argparse.Namespace) -> int:
    reports = collect_reports(args.inputs)
    table = collate_reports(reports)
    output = Path(args.out)
    export_table_to_csv(table, output)
    print(table.to_string())

    two_mass = [r for r in reports if len(r.component_mse) == 4]
    if two_mass:
        per_mass = component_table(two_mass, TWO_MASS_GROUPS)
        export_table_to_csv(per_mass, output.with_name(f"{output.stem}_per_mass.csv"))
        print(per_mass.to_string())
    print(f"[SUCCESS] Report over {len(reports)} runs written to {output}")
    return EXIT_OK


# ============================================================================
# Parser
# ============================================================================

def _add_config_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="Experiment config JSON file")
    parser.add_argument("--preset", help="Shipped preset name (exp1 ... exp6)")
    parser.add_argument("--out", help="Output directory (overrides the config)")
    parser.add_argument("--data", help="Directory of trajectory files (train.csv, test.csv)")
    parser.add_argument("--run", help="Only this run label of the preset")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trsoden",
                                     description="ODE networks with time-reversal symmetry regularization")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    generate = sub.add_parser("generate", help="Generate train/test trajectory files")
    generate.add_argument("--config", help="Experiment config JSON file")
    generate.add_argument("--preset", help="Shipped preset name (exp1 ... exp6)")
    generate.add_argument("--out", help="Output directory (overrides the config)")
    generate.add_argument("--data", help="Directory for the trajectory files (default <out>/data)")
    generate.add_argument("--seed", type=int, help="Dataset seed: initial states and noise (overrides the config)")
    generate.set_defaults(handler=cmd_generate)

    train_parser = sub.add_parser("train", help="Train every run of an experiment")
    _add_config_args(train_parser)
    train_parser.add_argument("--seed", type=int, help="Training seed (overrides the config)")
    train_parser.add_argument("--epochs", type=int, help="Epoch count (overrides the config)")
    train_parser.set_defaults(handler=cmd_train)

    evaluate_parser = sub.add_parser("evaluate", help="Test metrics of trained runs")
    _add_config_args(evaluate_parser)
    evaluate_parser.add_argument("--seed", type=int, help="Seed recorded in the report")
    evaluate_parser.set_defaults(handler=cmd_evaluate)

    symmetry = sub.add_parser("symmetry-check", help="Forward/backward error and Hamiltonian evenness")
    _add_config_args(symmetry)
    symmetry.add_argument("--steps", type=int, help="Chain length (default: training trajectory length)")
    symmetry.set_defaults(handler=cmd_symmetry_check)

    lyapunov = sub.add_parser("lyapunov", help="Finite-time Lyapunov exponent curves")
    _add_config_args(lyapunov)
    lyapunov.add_argument("--steps", type=int, help="Horizon (default: test trajectory length)")
    lyapunov.add_argument("--members", type=int, default=50, help="Ensemble size")
    lyapunov.add_argument("--perturbation", type=float, default=1e-6, help="Initial separation")
    lyapunov.add_argument("--output", help="CSV path (default <out>/lyapunov.csv)")
    lyapunov.set_defaults(handler=cmd_lyapunov)

    report = sub.add_parser("report", help="Collate report.json files into an MSE table")
    report.add_argument("inputs", nargs="+", help="report.json files or directories searched recursively")
    report.add_argument("--out", default="report.csv", help="Output CSV path")
    report.set_defaults(handler=cmd_report)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad arguments; those are validation failures here
        return EXIT_OK if exc.code in (0, None) else EXIT_INVALID
    configure_logging(args.verbose)
    try:
        return args.handler(args)
    except NonFiniteError as exc:
        print(f"[ERROR] Numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValidationError as exc:
        print(f"[ERROR] Invalid configuration:\n{exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ValueError, FileNotFoundError) as exc:
        print(f"[ERROR] {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
