"""
File schemas for trsoden.

This module defines the on-disk layouts of trajectory files and of the
measured two-mass recordings ingested for the real-data experiment.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple


class TrajectoryFileError(ValueError):
    """Raised on malformed trajectory or recording files."""


# ============================================================================
# Trajectory Files
# ============================================================================

TRAJ_ID_COLUMN = "traj_id"
STEP_COLUMN = "step"
TIME_COLUMN = "t"
INDEX_COLUMNS = [TRAJ_ID_COLUMN, STEP_COLUMN, TIME_COLUMN]

# 17 significant digits round-trip every float64
FLOAT_FORMAT = "%.17g"

DEFAULT_COMPONENT_NAMES = {
    2: ("q", "p"),
    3: ("x", "y", "z"),
    4: ("q1", "q2", "p1", "p2"),
}


def component_names(dim: int, names: Optional[Sequence[str]] = None) -> List[str]:
    """
    Column names of the state components.

    Args:
        dim: State dimension
        names: Explicit names; defaults depend on the dimension, falling back
            to c0, c1, ...

    Returns:
        List of `dim` column names
    """
    if names is not None:
        names = list(names)
        if len(names) != dim:
            raise TrajectoryFileError(f"Got {len(names)} component names for dimension {dim}")
        return names
    return list(DEFAULT_COMPONENT_NAMES.get(dim, [f"c{i}" for i in range(dim)]))


# ============================================================================
# Real-data Recordings
# ============================================================================

@dataclass(frozen=True)
class RealDataSchema:
    """
    Columns of a two-mass recording (file order `t,q1,p1,q2,p2`).

    States are assembled positions first, then momenta, so the momentum
    flip and the Hamiltonian split act on the second half of the vector.

    Attributes:
        time_column: Time stamp column
        position_columns: Position column per mass
        momentum_columns: Momentum (or velocity) column per mass
    """
    time_column: str = "t"
    position_columns: Tuple[str, ...] = ("q1", "q2")
    momentum_columns: Tuple[str, ...] = ("p1", "p2")

    @property
    def state_columns(self) -> List[str]:
        return list(self.position_columns) + list(self.momentum_columns)

    @property
    def file_columns(self) -> List[str]:
        """Column order written to disk: t, then (q_i, p_i) per mass."""
        columns = [self.time_column]
        for q, p in zip(self.position_columns, self.momentum_columns):
            columns.extend([q, p])
        return columns
