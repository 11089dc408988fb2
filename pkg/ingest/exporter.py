"""
Data export module for trsoden.

This module writes trajectories, loss histories, Lyapunov series and report
tables to CSV. Floats are written with 17 significant digits so every value
reads back bit-identical.
"""

from pathlib import Path
from typing import List, Optional, Sequence, Union

import pandas as pd

from integrators.schemas import Trajectory

from .schemas import FLOAT_FORMAT, STEP_COLUMN, TIME_COLUMN, TRAJ_ID_COLUMN, component_names

PathLike = Union[str, Path]


def _prepare(output_path: PathLike) -> Path:
    path = Path(output_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def trajectories_to_frame(trajectories: Sequence[Trajectory],
                          names: Optional[Sequence[str]] = None) -> pd.DataFrame:
    """
    Flatten trajectories to one row per state.

    Args:
        trajectories: Trajectories sharing a state dimension
        names: Component column names (defaults by dimension)

    Returns:
        DataFrame with columns traj_id, step, t, <components>
    """
    if not trajectories:
        raise ValueError("No trajectories to export")
    columns = component_names(trajectories[0].dim, names)
    frames = []
    for traj_id, traj in enumerate(trajectories):
        frame = pd.DataFrame(traj.states, columns=columns)
        frame.insert(0, TIME_COLUMN, traj.times)
        frame.insert(0, STEP_COLUMN, range(len(traj)))
        frame.insert(0, TRAJ_ID_COLUMN, traj_id)
        frames.append(frame)
    return pd.concat(frames, ignore_index=True)


def export_trajectories_to_csv(trajectories: Sequence[Trajectory], output_path: PathLike,
                               names: Optional[Sequence[str]] = None) -> None:
    """
    Export trajectories to a trajectory CSV file.

    Args:
        trajectories: Trajectories to write
        output_path: Path to output CSV file
        names: Component column names
    """
    df = trajectories_to_frame(trajectories, names)
    df.to_csv(_prepare(output_path), index=False, float_format=FLOAT_FORMAT)


def export_loss_history_to_csv(history: pd.DataFrame, output_path: PathLike) -> None:
    """
    Export a per-epoch loss history (epoch, l_ode, l_trs, total).

    Args:
        history: Loss history DataFrame from training
        output_path: Path to output CSV file
    """
    history.to_csv(_prepare(output_path), index=False, float_format=FLOAT_FORMAT)


def export_lyapunov_to_csv(times: Sequence[float], series: dict, output_path: PathLike) -> None:
    """
    Export σ(t) curves, one column per label.

    Args:
        times: Time grid
        series: Mapping label -> σ values on the grid
        output_path: Path to output CSV file
    """
    data = {'t': list(times)}
    for label, sigma in series.items():
        data[label] = list(sigma)
    pd.DataFrame(data).to_csv(_prepare(output_path), index=False, float_format=FLOAT_FORMAT)


def export_table_to_csv(table: pd.DataFrame, output_path: PathLike) -> None:
    """Export a report table, keeping its row index."""
    table.to_csv(_prepare(output_path))


def export_all_trajectories(train: List[Trajectory], train_clean: List[Trajectory],
                            test: List[Trajectory], output_dir: PathLike,
                            names: Optional[Sequence[str]] = None) -> List[Path]:
    """
    Export a generated dataset as train.csv, train_clean.csv and test.csv.

    Args:
        train: Noisy training trajectories
        train_clean: Noise-free training trajectories
        test: Test trajectories
        output_dir: Directory to write CSV files
        names: Component column names

    Returns:
        Paths of the written files
    """
    output_path = Path(output_dir)
    output_path.mkdir(parents=True, exist_ok=True)
    written = []
    for name, trajectories in (('train.csv', train), ('train_clean.csv', train_clean), ('test.csv', test)):
        export_trajectories_to_csv(trajectories, output_path / name, names)
        written.append(output_path / name)
    return written
