"""
Initial-state samplers.
"""

from enum import Enum
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator


def sample_annulus(r_min: float, r_max: float, rng: np.random.Generator) -> Tuple[float, float]:
    """
    Draw a point uniformly (by area) from the annulus r_min <= r <= r_max.

    Args:
        r_min: Inner radius (>= 0)
        r_max: Outer radius (> r_min)
        rng: numpy Generator

    Returns:
        Tuple (q0, p0)
    """
    if not (0 <= r_min < r_max):
        raise ValueError(f"Annulus needs 0 <= r_min < r_max, got [{r_min}, {r_max}]")
    angle = rng.uniform(0.0, 2.0 * np.pi)
    radius = np.sqrt(rng.uniform() * (r_max ** 2 - r_min ** 2) + r_min ** 2)
    return float(radius * np.cos(angle)), float(radius * np.sin(angle))


class SamplerKind(str, Enum):
    """Initial-state distributions."""
    ANNULUS = "annulus"
    AXIS_UNIFORM = "axis_uniform"


class SamplerSpec(BaseModel):
    """
    Initial-state distribution.

    annulus: each (q_i, p_i) pair is drawn from the annulus [r_min, r_max].
    axis_uniform: every component is fixed to `fixed`, except component
        `uniform_index`, which is drawn from U[low, high].
    """
    kind: SamplerKind = SamplerKind.ANNULUS
    r_min: float = Field(0.2, ge=0)
    r_max: float = 1.0
    fixed: List[float] = Field(default_factory=list)
    uniform_index: int = Field(0, ge=0)
    low: float = 0.0
    high: float = 1.0

    @model_validator(mode="after")
    def _check_ranges(self) -> "SamplerSpec":
        if self.kind is SamplerKind.ANNULUS and not self.r_min < self.r_max:
            raise ValueError(f"Annulus needs r_min < r_max, got [{self.r_min}, {self.r_max}]")
        if self.kind is SamplerKind.AXIS_UNIFORM:
            if not self.low < self.high:
                raise ValueError(f"Uniform range needs low < high, got [{self.low}, {self.high}]")
            if self.fixed and self.uniform_index >= len(self.fixed):
                raise ValueError("uniform_index is outside the fixed state vector")
        return self

    def sample(self, dim: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind is SamplerKind.ANNULUS:
            if dim % 2:
                raise ValueError(f"Annulus sampling needs an even state dimension, got {dim}")
            n = dim // 2
            state = np.empty(dim)
            for i in range(n):
                state[i], state[n + i] = sample_annulus(self.r_min, self.r_max, rng)
            return state
        state = np.array(self.fixed, dtype=np.float64) if self.fixed else np.zeros(dim)
        if state.shape[0] != dim:
            raise ValueError(f"Sampler has {state.shape[0]} fixed components for dimension {dim}")
        state[self.uniform_index] = rng.uniform(self.low, self.high)
        return state
