#!/usr/bin/env python3
"""
Desk-scale experiment suite.

Re-runs the shipped presets with narrower networks and fewer epochs over
several seeds and checks the qualitative findings on the seed medians:

    exp1       TRS-ODEN beats ODEN; TRS-ODEN trajectory MSE < 0.02
    exp4       TRS-ODEN (λ=0.5t) beats ODEN and HODEN; HODEN energy MSE is worse
    lambda     forward/backward error non-increasing in λ, < 1e-3 at λ=1000
    evenness   TRS-HODEN's Hamiltonian is at least 5x more even in p than HODEN's
    realdata   TRS-ODEN beats HODEN on the two-mass stand-in

Usage:
    python -m scripts.run_desk_scale [--checks exp1 exp4] [--seeds 0 1 2]
    python -m scripts.run_desk_scale --sweep-samples 10 25 50 100 --preset exp1 --run TRS-ODEN
"""

import argparse
import sys
from pathlib import Path
from typing import Callable, Dict, List, Sequence

import numpy as np
import pandas as pd
from loguru import logger

from eval.symmetry_checks import forward_backward_relative_error, hamiltonian_symmetry_gap
from experiments.config import ExperimentConfig, load_preset
from experiments.data import prepare_data
from experiments.evaluation import evaluate
from experiments.training import train
from ingest.exporter import export_table_to_csv
from losses.schedules import LambdaSchedule

GREEN = '\033[92m'
RED = '\033[91m'
RESET = '\033[0m'

DESK_WIDTH = 200
DESK_EPOCHS = 2000
DEFAULT_SEEDS = [0, 1, 2]


def desk_config(preset: str, width: int = DESK_WIDTH, epochs: int = DESK_EPOCHS) -> ExperimentConfig:
    """A preset with every network narrowed to `width` and `epochs` epochs."""
    data = load_preset(preset).model_dump()
    data['training']['epochs'] = epochs
    data['model']['hidden_dims'] = [width] * len(data['model']['hidden_dims'])
    for run in data['runs']:
        if run.get('model'):
            run['model']['hidden_dims'] = [width] * len(run['model']['hidden_dims'])
    return ExperimentConfig.model_validate(data)


def train_runs(config: ExperimentConfig, labels: Sequence[str], seeds: Sequence[int]) -> Dict[str, list]:
    """Train and evaluate each labelled run once per seed."""
    data = prepare_data(config)
    results: Dict[str, list] = {label: [] for label in labels}
    for seed in seeds:
        for label in labels:
            job = config.job(label).model_copy(update={'seed': seed})
            model = train(job, data.train).model
            results[label].append((model, evaluate(model, data.test, job), job))
    return results


def median_of(results: list, metric: Callable) -> float:
    return float(np.median([metric(entry) for entry in results]))


def traj_mse(entry) -> float:
    return entry[1].trajectory_mse.mean


def energy_mse(entry) -> float:
    return entry[1].energy_mse.mean


def check_exp1(seeds: Sequence[int]) -> List[bool]:
    results = train_runs(desk_config("exp1"), ["ODEN", "TRS-ODEN"], seeds)
    oden, trs = median_of(results["ODEN"], traj_mse), median_of(results["TRS-ODEN"], traj_mse)
    return [
        report("exp1: TRS-ODEN trajectory MSE < ODEN", trs < oden, f"{trs:.4g} vs {oden:.4g}"),
        report("exp1: TRS-ODEN trajectory MSE < 0.02", trs < 0.02, f"{trs:.4g}"),
    ]


def check_exp4(seeds: Sequence[int]) -> List[bool]:
    trs_label = "TRS-ODEN (λ=0.5t)"
    results = train_runs(desk_config("exp4"), ["ODEN", "HODEN", trs_label], seeds)
    trs = median_of(results[trs_label], traj_mse)
    oden = median_of(results["ODEN"], traj_mse)
    hoden = median_of(results["HODEN"], traj_mse)
    hoden_energy = median_of(results["HODEN"], energy_mse)
    trs_energy = median_of(results[trs_label], energy_mse)
    return [
        report("exp4: TRS-ODEN (λ=0.5t) beats ODEN and HODEN", trs < oden and trs < hoden,
               f"{trs:.4g} vs {oden:.4g} / {hoden:.4g}"),
        report("exp4: HODEN energy MSE > TRS-ODEN energy MSE", hoden_energy > trs_energy,
               f"{hoden_energy:.4g} vs {trs_energy:.4g}"),
    ]


def check_lambda_sweep(seeds: Sequence[int]) -> List[bool]:
    base = desk_config("exp1")
    data = prepare_data(base)
    initial_states = [traj.initial for traj in data.test]
    medians = []
    for coefficient in (1.0, 10.0, 100.0, 1000.0):
        errors = []
        for seed in seeds:
            job = base.job("TRS-ODEN").model_copy(update={
                'seed': seed, 'schedule': LambdaSchedule.constant(coefficient)})
            model = train(job, data.train).model
            errors.append(forward_backward_relative_error(
                model, initial_states, base.dataset.length, job.reversing_operator(), job.solver_config()).value)
        medians.append(float(np.median(errors)))
        logger.info(f"λ={coefficient:g}: median forward/backward error {medians[-1]:.4g}")
    monotone = all(b <= a for a, b in zip(medians, medians[1:]))
    return [
        report("lambda: error non-increasing in λ", monotone, ", ".join(f"{m:.3g}" for m in medians)),
        report("lambda: error < 1e-3 at λ=1000", medians[-1] < 1e-3, f"{medians[-1]:.4g}"),
    ]


def check_evenness(seeds: Sequence[int]) -> List[bool]:
    results = train_runs(desk_config("exp2"), ["HODEN", "TRS-HODEN"], seeds)

    def gap(entry) -> float:
        return hamiltonian_symmetry_gap(entry[0]).max_abs_gap

    plain, trs = median_of(results["HODEN"], gap), median_of(results["TRS-HODEN"], gap)
    return [report("evenness: TRS-HODEN gap 5x smaller than HODEN", 5 * trs <= plain,
                   f"{trs:.4g} vs {plain:.4g}")]


def check_real_data(seeds: Sequence[int]) -> List[bool]:
    results = train_runs(desk_config("exp5"), ["HODEN", "TRS-ODEN"], seeds)
    trs, hoden = median_of(results["TRS-ODEN"], traj_mse), median_of(results["HODEN"], traj_mse)
    return [report("realdata: TRS-ODEN trajectory MSE < HODEN", trs < hoden, f"{trs:.4g} vs {hoden:.4g}")]


CHECKS = {
    'exp1': check_exp1,
    'exp4': check_exp4,
    'lambda': check_lambda_sweep,
    'evenness': check_evenness,
    'realdata': check_real_data,
}


def report(name: str, passed: bool, detail: str) -> bool:
    mark = f"{GREEN}[PASS]{RESET}" if passed else f"{RED}[FAIL]{RESET}"
    print(f"{mark} {name} ({detail})")
    return passed


def sweep_samples(preset: str, label: str, counts: Sequence[int], seeds: Sequence[int],
                  output: Path) -> pd.DataFrame:
    """Test trajectory MSE of one run as the number of training trajectories grows."""
    rows = []
    for count in counts:
        data = desk_config(preset).model_dump()
        data['dataset']['count'] = count
        config = ExperimentConfig.model_validate(data)
        results = train_runs(config, [label], seeds)[label]
        mses = [traj_mse(entry) for entry in results]
        rows.append({'count': count, 'median_mse': float(np.median(mses)),
                     'min_mse': float(np.min(mses)), 'max_mse': float(np.max(mses))})
        print(f"[INFO] {label} with {count} trajectories: median test MSE {rows[-1]['median_mse']:.4g}")
    table = pd.DataFrame(rows).set_index('count')
    export_table_to_csv(table, output)
    return table


def main():
    parser = argparse.ArgumentParser(description="Run the desk-scale experiment suite")
    parser.add_argument("--checks", nargs="*", choices=sorted(CHECKS), default=sorted(CHECKS),
                        help="Checks to run (default: all)")
    parser.add_argument("--seeds", nargs="*", type=int, default=DEFAULT_SEEDS, help="Training seeds")
    parser.add_argument("--sweep-samples", nargs="*", type=int,
                        help="Training-set sizes for a sample-efficiency sweep instead of the checks")
    parser.add_argument("--preset", default="exp1", help="Preset of the sweep")
    parser.add_argument("--run", default="TRS-ODEN", help="Run label of the sweep")
    parser.add_argument("--output", default="runs/sample_sweep.csv", help="Sweep CSV path")
    args = parser.parse_args()

    if args.sweep_samples:
        sweep_samples(args.preset, args.run, args.sweep_samples, args.seeds, Path(args.output))
        return 0

    outcomes = []
    for name in args.checks:
        print(f"\n[INFO] Running {name} over seeds {args.seeds}...")
        outcomes.extend(CHECKS[name](args.seeds))
    passed = sum(outcomes)
    print(f"\n{passed}/{len(outcomes)} checks passed")
    return 0 if passed == len(outcomes) else 1


if __name__ == "__main__":
    sys.exit(main())
