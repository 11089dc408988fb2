"""
λ schedules weighting the time-reversal loss.
"""

from enum import Enum

import numpy as np
from pydantic import BaseModel, Field


class ScheduleKind(str, Enum):
    CONSTANT = "constant"
    LINEAR_IN_NORMALIZED_TIME = "linear_in_normalized_time"


class LambdaSchedule(BaseModel):
    """
    λ(t) = coefficient, or coefficient * (t - t_min) / (t_max - t_min).

    The normalized time is clipped to [0, 1] so λ stays within
    [0, coefficient] for times outside the training span.
    """
    kind: ScheduleKind = ScheduleKind.CONSTANT
    coefficient: float = Field(0.0, ge=0)

    @property
    def time_dependent(self) -> bool:
        return self.kind is ScheduleKind.LINEAR_IN_NORMALIZED_TIME

    @property
    def is_zero(self) -> bool:
        return self.coefficient == 0

    def label(self) -> str:
        coefficient = f"{self.coefficient:g}"
        return f"{coefficient}t" if self.time_dependent else coefficient

    @classmethod
    def constant(cls, coefficient: float) -> "LambdaSchedule":
        return cls(kind=ScheduleKind.CONSTANT, coefficient=coefficient)

    @classmethod
    def linear(cls, coefficient: float) -> "LambdaSchedule":
        return cls(kind=ScheduleKind.LINEAR_IN_NORMALIZED_TIME, coefficient=coefficient)


def lambda_value(schedule: LambdaSchedule, t, t_min: float = 0.0, t_max: float = 1.0):
    """
    Evaluate λ at time(s) t.

    Args:
        schedule: λ schedule
        t: Time, float or array
        t_min: Start of the normalization range
        t_max: End of the normalization range (> t_min for the linear kind)

    Returns:
        λ(t) with the shape of `t`

    Raises:
        ValueError: degenerate normalization range
    """
    if not schedule.time_dependent:
        if np.ndim(t) == 0:
            return float(schedule.coefficient)
        return np.full(np.shape(t), schedule.coefficient, dtype=np.float64)
    if not t_min < t_max:
        raise ValueError(f"Normalization range needs t_min < t_max, got [{t_min}, {t_max}]")
    normalized = np.clip((np.asarray(t, dtype=np.float64) - t_min) / (t_max - t_min), 0.0, 1.0)
    value = schedule.coefficient * normalized
    return float(value) if np.ndim(value) == 0 else value
