"""
Trajectory file loading.
"""

from pathlib import Path
from typing import List, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger

from integrators.schemas import Trajectory

from .schemas import INDEX_COLUMNS, STEP_COLUMN, TIME_COLUMN, TRAJ_ID_COLUMN, TrajectoryFileError


def read_csv_exact(path: Union[str, Path]) -> pd.DataFrame:
    """Read a CSV with round-trip float parsing."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")
    try:
        return pd.read_csv(path, float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise TrajectoryFileError(f"Malformed CSV {path}: {exc}") from exc


def frame_to_trajectories(df: pd.DataFrame, source: str = "<frame>") -> Tuple[List[Trajectory], List[str]]:
    """
    Rebuild trajectories from a trajectory DataFrame.

    Args:
        df: Rows with traj_id, step, t and component columns
        source: Name used in error messages

    Returns:
        Tuple of (trajectories ordered by traj_id, component column names)

    Raises:
        TrajectoryFileError: missing columns, non-numeric or non-finite
            values, non-contiguous steps, or non-increasing time
    """
    missing = [c for c in INDEX_COLUMNS if c not in df.columns]
    if missing:
        raise TrajectoryFileError(f"{source}: missing columns {missing}")
    components = [c for c in df.columns if c not in INDEX_COLUMNS]
    if not components:
        raise TrajectoryFileError(f"{source}: no state columns")

    numeric = df[components + [TIME_COLUMN]].apply(pd.to_numeric, errors="coerce")
    if numeric.isna().any().any() or not np.all(np.isfinite(numeric.to_numpy(dtype=np.float64))):
        raise TrajectoryFileError(f"{source}: non-numeric or non-finite values")

    trajectories = []
    for traj_id, group in df.groupby(TRAJ_ID_COLUMN, sort=True):
        steps = group[STEP_COLUMN].to_numpy()
        if not np.array_equal(steps, np.arange(len(group))):
            raise TrajectoryFileError(f"{source}: steps of trajectory {traj_id} are not contiguous from 0")
        times = numeric.loc[group.index, TIME_COLUMN].to_numpy(dtype=np.float64)
        if len(times) > 1 and not np.all(np.diff(times) > 0):
            raise TrajectoryFileError(f"{source}: time of trajectory {traj_id} is not strictly increasing")
        states = numeric.loc[group.index, components].to_numpy(dtype=np.float64)
        trajectories.append(Trajectory(times, states))
    return trajectories, components


def load_trajectories_csv(path: Union[str, Path]) -> List[Trajectory]:
    """
    Load a trajectory CSV file.

    Args:
        path: Path to the CSV file

    Returns:
        Trajectories ordered by traj_id
    """
    df = read_csv_exact(path)
    trajectories, components = frame_to_trajectories(df, str(path))
    logger.debug(f"Loaded {len(trajectories)} trajectories ({', '.join(components)}) from {path}")
    return trajectories
