"""
Metrics & evaluation reports for trsoden.

Measures predicted trajectories against ground truth:
- Trajectory MSE (per trajectory, then mean ± std across trajectories)
- Energy MSE along the trajectories
- Per-component MSE (e.g. per mass for two-mass data)
"""

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from autodiff.tensor import ShapeError
from integrators.schemas import Trajectory

from .energy import EnergyFunction

TrajectorySet = Union[Sequence[Trajectory], np.ndarray]


@dataclass
class MseSummary:
    """Mean and population std of per-trajectory errors."""
    mean: float
    std: float
    per_trajectory: List[float] = field(default_factory=list)

    @classmethod
    def from_errors(cls, errors: np.ndarray) -> "MseSummary":
        errors = np.asarray(errors, dtype=np.float64)
        return cls(mean=float(errors.mean()), std=float(errors.std()), per_trajectory=errors.tolist())


def _stack(trajectories: TrajectorySet) -> np.ndarray:
    if isinstance(trajectories, np.ndarray):
        array = np.asarray(trajectories, dtype=np.float64)
    else:
        shapes = {t.states.shape for t in trajectories}
        if len(shapes) != 1:
            raise ShapeError(f"Trajectories must share a grid, got shapes {sorted(shapes)}")
        array = np.stack([t.states for t in trajectories])
    if array.ndim != 3 or array.shape[0] == 0:
        raise ShapeError(f"Expected a non-empty (count, T, dim) trajectory set, got {array.shape}")
    return array


def _times(trajectories: TrajectorySet, shape) -> np.ndarray:
    if isinstance(trajectories, np.ndarray):
        return np.zeros(shape[:2])
    return np.stack([t.times for t in trajectories])


def _aligned(predicted: TrajectorySet, truth: TrajectorySet):
    pred, true = _stack(predicted), _stack(truth)
    if pred.shape != true.shape:
        raise ShapeError(f"Grid mismatch: predicted {pred.shape}, truth {true.shape}")
    if not isinstance(predicted, np.ndarray) and not isinstance(truth, np.ndarray):
        if not np.allclose(_times(predicted, pred.shape), _times(truth, true.shape), rtol=0, atol=1e-9):
            raise ShapeError("Predicted and true trajectories are on different time grids")
    return pred, true


def trajectory_mse(predicted: TrajectorySet, truth: TrajectorySet) -> MseSummary:
    """
    Mean squared error over time steps and components, per trajectory.

    Args:
        predicted: Rollouts seeded at the true initial states
        truth: Ground-truth trajectories on the same grid

    Returns:
        MseSummary across trajectories
    """
    pred, true = _aligned(predicted, truth)
    return MseSummary.from_errors(np.mean((pred - true) ** 2, axis=(1, 2)))


def energy_mse(predicted: TrajectorySet, truth: TrajectorySet, energy: EnergyFunction) -> MseSummary:
    """
    Squared error of the energy series, averaged over time per trajectory.

    Args:
        predicted: Predicted trajectories
        truth: Ground-truth trajectories
        energy: Energy function applied to both

    Returns:
        MseSummary across trajectories
    """
    pred, true = _aligned(predicted, truth)
    times = _times(truth, true.shape)
    count, length, dim = pred.shape
    e_pred = energy(pred.reshape(-1, dim), times.reshape(-1)).reshape(count, length)
    e_true = energy(true.reshape(-1, dim), times.reshape(-1)).reshape(count, length)
    return MseSummary.from_errors(np.mean((e_pred - e_true) ** 2, axis=1))


def component_mse(predicted: TrajectorySet, truth: TrajectorySet) -> List[float]:
    """MSE per state component, averaged over trajectories and time."""
    pred, true = _aligned(predicted, truth)
    return np.mean((pred - true) ** 2, axis=(0, 1)).tolist()


@dataclass
class MetricReport:
    """
    Test metrics of one model on one experiment.

    Attributes:
        experiment_id: Experiment identifier (e.g. "exp1")
        model_label: Run label (e.g. "TRS-ODEN(λ=10)")
        trajectory_mse: Trajectory MSE summary
        energy_mse: Energy MSE summary, None when the system has no energy
        component_mse: MSE per state component
        divergence_count: Number of clamped, diverged rollouts
        seed: Training seed
        n_trajectories: Number of test trajectories
    """
    experiment_id: str
    model_label: str
    trajectory_mse: MseSummary
    energy_mse: Optional[MseSummary] = None
    component_mse: List[float] = field(default_factory=list)
    divergence_count: int = 0
    seed: int = 0
    n_trajectories: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "MetricReport":
        energy = data.get('energy_mse')
        return cls(
            experiment_id=data['experiment_id'],
            model_label=data['model_label'],
            trajectory_mse=MseSummary(**data['trajectory_mse']),
            energy_mse=MseSummary(**energy) if energy is not None else None,
            component_mse=list(data.get('component_mse', [])),
            divergence_count=int(data.get('divergence_count', 0)),
            seed=int(data.get('seed', 0)),
            n_trajectories=int(data.get('n_trajectories', 0)),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "MetricReport":
        return cls.from_dict(json.loads(text))


def export_report_json(report: MetricReport, output_path: Union[str, Path]) -> None:
    """
    Export a metric report to a JSON file.

    Args:
        report: MetricReport object
        output_path: Path to output JSON file
    """
    path = Path(output_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report.to_json())


def load_report_json(path: Union[str, Path]) -> MetricReport:
    return MetricReport.from_json(Path(path).read_text())
