"""
Ingestion of measured two-mass recordings.

The recording is split chronologically: the first fraction trains, the rest
tests. Min-max normalization constants come from the training portion only
and are applied to both portions; time stays in its original units.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np
import pandas as pd
from loguru import logger

from dynamics.datasets import split_trajectories
from integrators.schemas import Trajectory

from .loader import read_csv_exact
from .schemas import FLOAT_FORMAT, RealDataSchema, TrajectoryFileError


@dataclass
class Normalization:
    """
    Per-column min-max scaling x' = (x - minimum) / scale.

    Columns that are constant on the training portion get scale 1.
    """
    columns: List[str]
    minimum: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, columns: List[str], values: np.ndarray) -> "Normalization":
        minimum = values.min(axis=0)
        spread = values.max(axis=0) - minimum
        return cls(list(columns), minimum, np.where(spread > 0, spread, 1.0))

    @classmethod
    def identity(cls, columns: List[str]) -> "Normalization":
        return cls(list(columns), np.zeros(len(columns)), np.ones(len(columns)))

    def apply(self, values: np.ndarray) -> np.ndarray:
        return (values - self.minimum) / self.scale

    def invert(self, values: np.ndarray) -> np.ndarray:
        return values * self.scale + self.minimum

    def to_dict(self) -> Dict[str, Any]:
        return {
            'method': 'min_max',
            'columns': self.columns,
            'minimum': self.minimum.tolist(),
            'scale': self.scale.tolist(),
        }


@dataclass
class RealDataset:
    """
    Chronologically split recording.

    Attributes:
        train: Normalized training portion
        test: Normalized test portion
        segments: Training portion cut into segments of at most max_len steps
        normalization: Constants fitted on the training portion
        schema: Column layout of the source file
    """
    train: Trajectory
    test: Trajectory
    segments: List[Trajectory]
    normalization: Normalization
    schema: RealDataSchema = field(default_factory=RealDataSchema)

    def record(self) -> Trajectory:
        """The full recording in original units."""
        states = np.vstack([self.train.states, self.test.states])
        return Trajectory(
            np.concatenate([self.train.times, self.test.times]),
            self.normalization.invert(states),
        )

    def metadata(self) -> Dict[str, Any]:
        return {
            'train_rows': len(self.train),
            'test_rows': len(self.test),
            'segments': len(self.segments),
            'state_columns': self.schema.state_columns,
            'normalization': self.normalization.to_dict(),
        }


def read_real_data(path: Union[str, Path], schema: RealDataSchema = RealDataSchema()) -> Trajectory:
    """
    Read a recording in original units.

    Raises:
        TrajectoryFileError: missing columns, malformed rows, non-monotone time
    """
    df = read_csv_exact(path)
    required = [schema.time_column] + schema.state_columns
    missing = [c for c in required if c not in df.columns]
    if missing:
        raise TrajectoryFileError(f"{path}: missing columns {missing}")
    numeric = df[required].apply(pd.to_numeric, errors="coerce")
    values = numeric.to_numpy(dtype=np.float64)
    bad_rows = np.where(~np.all(np.isfinite(values), axis=1))[0]
    if bad_rows.size:
        raise TrajectoryFileError(f"{path}: malformed rows at {bad_rows[:5].tolist()}")
    times = values[:, 0]
    if len(times) > 1 and not np.all(np.diff(times) > 0):
        raise TrajectoryFileError(f"{path}: time column is not strictly increasing")
    return Trajectory(times, values[:, 1:])


def ingest_real_data(path: Union[str, Path], schema: RealDataSchema = RealDataSchema(),
                     split_fraction: float = 0.6, max_len: int = 10,
                     normalize: bool = True) -> RealDataset:
    """
    Load, split and normalize a two-mass recording.

    Args:
        path: CSV file with columns t,q1,p1,q2,p2
        schema: Column layout
        split_fraction: Share of rows used for training (first rows)
        max_len: Maximum transitions per training segment
        normalize: Apply min-max normalization fitted on the training rows

    Returns:
        RealDataset
    """
    return split_record(read_real_data(path, schema), schema, split_fraction, max_len, normalize, str(path))


def split_record(record: Trajectory, schema: RealDataSchema = RealDataSchema(),
                 split_fraction: float = 0.6, max_len: int = 10, normalize: bool = True,
                 source: str = "<record>") -> RealDataset:
    """Split and normalize a recording already in memory (see ingest_real_data)."""
    if not 0 < split_fraction < 1:
        raise ValueError(f"split_fraction must be in (0, 1), got {split_fraction}")
    n_rows = len(record)
    n_train = int(round(n_rows * split_fraction))
    if n_train < 2 or n_rows - n_train < 2:
        raise TrajectoryFileError(
            f"{source}: {n_rows} rows give {n_train} train / {n_rows - n_train} test rows; need >= 2 each"
        )

    columns = schema.state_columns
    normalization = (Normalization.fit(columns, record.states[:n_train]) if normalize
                     else Normalization.identity(columns))
    states = normalization.apply(record.states)
    train = Trajectory(record.times[:n_train], states[:n_train])
    test = Trajectory(record.times[n_train:], states[n_train:])
    segments = split_trajectories([train], max_len)

    logger.info(f"Ingested {n_rows} rows from {source}: {n_train} train ({len(segments)} segments), "
                f"{n_rows - n_train} test")
    return RealDataset(train=train, test=test, segments=segments, normalization=normalization, schema=schema)


def export_real_data(record: Trajectory, output_path: Union[str, Path],
                     schema: RealDataSchema = RealDataSchema()) -> None:
    """
    Write a recording in the t,q1,p1,q2,p2 file layout.

    Args:
        record: Trajectory with states ordered positions first, then momenta
        output_path: Path to output CSV file
        schema: Column layout
    """
    if record.dim != len(schema.state_columns):
        raise TrajectoryFileError(f"Schema has {len(schema.state_columns)} state columns, record has {record.dim}")
    df = pd.DataFrame(record.states, columns=schema.state_columns)
    df.insert(0, schema.time_column, record.times)
    path = Path(output_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df[schema.file_columns].to_csv(path, index=False, float_format=FLOAT_FORMAT)
