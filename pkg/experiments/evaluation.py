"""
Evaluation of trained models on test trajectories.

Predictions are recursive rollouts from each test initial state over the
full test horizon, on the test grid. Diverged rollouts are clamped and
counted rather than aborting the evaluation.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from dynamics.datasets import simulate
from dynamics.systems import DuffingField, DuffingParams
from eval.energy import EnergyFunction, energy_for_system
from eval.metrics import MetricReport, component_mse, energy_mse, trajectory_mse
from integrators.rollout import rollout_clamped
from integrators.schemas import SolverConfig, SolverMethod, State, Trajectory
from losses.objectives import resolve_field

from .config import ExperimentConfig


def predict(model, test: Sequence[Trajectory],
            method: SolverMethod = SolverMethod.RK4) -> Tuple[List[Trajectory], List[int]]:
    """
    Roll a model out from every test initial state on the test grid.

    Args:
        model: VectorField or model
        test: Test trajectories
        method: Integrator

    Returns:
        Tuple of (predicted trajectories, indices of diverged rollouts)
    """
    field = resolve_field(model)
    predictions, diverged = [], []
    for index, traj in enumerate(test):
        outcome = rollout_clamped(field, traj.initial, traj.steps, SolverConfig(method, float(traj.dts[0])),
                                  dts=traj.dts)
        if outcome.diverged:
            logger.warning(f"Test trajectory {index} diverged at step {outcome.diverged_at}")
            diverged.append(index)
        predictions.append(outcome.trajectory)
    return predictions, diverged


def evaluate(model, test: Sequence[Trajectory], config: ExperimentConfig,
             label: Optional[str] = None, energy: Optional[EnergyFunction] = None) -> MetricReport:
    """
    Test metrics of a model.

    Args:
        model: Trained model, or any VectorField (e.g. the ground truth)
        test: Clean test trajectories
        config: Job configuration (solver, system, ids)
        label: Report label (defaults to the config label)
        energy: Energy function (defaults to the system's energy; none for
            real data)

    Returns:
        MetricReport
    """
    predictions, diverged = predict(model, test, config.solver.method)
    if energy is None and config.real_data is None:
        energy = energy_for_system(config.dataset.system)
    report = MetricReport(
        experiment_id=config.experiment_id,
        model_label=label or config.label,
        trajectory_mse=trajectory_mse(predictions, test),
        energy_mse=energy_mse(predictions, test, energy) if energy is not None else None,
        component_mse=component_mse(predictions, test),
        divergence_count=len(diverged),
        seed=config.seed,
        n_trajectories=len(test),
    )
    logger.info(f"{report.experiment_id}/{report.model_label}: trajectory MSE "
                f"{report.trajectory_mse.mean:.4g} ± {report.trajectory_mse.std:.4g}")
    return report


# Initial states of the non-linear oscillator's critical-point trajectories;
# zeros and the small offset are replaced by 1e-8 and 1e-2
CRITICAL_POINTS = {
    'center_plus': (1.0, 1e-8),
    'center_minus': (-1.0, 1e-8),
    'saddle': (1e-8, 1e-8),
    'homoclinic_plus': (1e-2, 1e-2),
    'homoclinic_minus': (-1e-2, -1e-2),
}


@dataclass
class CriticalPointResult:
    name: str
    initial: Tuple[float, float]
    prediction: Trajectory
    truth: Trajectory
    trajectory_mse: float
    energy_mse: float
    diverged: bool


def critical_point_rollouts(model, params: Optional[DuffingParams] = None, steps: int = 200,
                            dt: float = 0.1, method: SolverMethod = SolverMethod.RK4) -> List[CriticalPointResult]:
    """
    Rollouts of a model from the centers, saddle and homoclinic seeds.

    Args:
        model: Trained model or field on (q, p)
        params: Ground-truth oscillator (the non-linear oscillator by default)
        steps: Horizon in steps
        dt: Step size
        method: Integrator of the model

    Returns:
        One CriticalPointResult per critical-point start
    """
    params = params or DuffingParams.nonlinear_oscillator()
    truth_field = DuffingField(params)
    energy = EnergyFunction.duffing(params)
    field = resolve_field(model)

    results = []
    for name, start in CRITICAL_POINTS.items():
        truth = simulate(truth_field, np.array([start]), steps, dt)[0]
        outcome = rollout_clamped(field, State(np.array(start)), steps, SolverConfig(method, dt))
        results.append(CriticalPointResult(
            name=name,
            initial=start,
            prediction=outcome.trajectory,
            truth=truth,
            trajectory_mse=trajectory_mse([outcome.trajectory], [truth]).mean,
            energy_mse=energy_mse([outcome.trajectory], [truth], energy).mean,
            diverged=outcome.diverged,
        ))
    return results
