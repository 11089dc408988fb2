"""
Reversing operators.

A reversing operator R is a diagonal ±1 map of phase space. A field is
R-reversible when f(R(x)) = -R(f(x)); for non-autonomous fields the time is
reflected as well, t -> -t + a.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np

from autodiff.tensor import ShapeError, Tensor
from integrators.schemas import State


class ReversalKind(str, Enum):
    """Built-in reversing operators."""
    MOMENTUM_FLIP = "momentum_flip"
    FULL_NEGATION = "full_negation"
    CUSTOM = "custom"


@dataclass(frozen=True)
class ReversingOperator:
    """
    Linear involution R = diag(signs).

    Attributes:
        signs: ±1 per state component
        kind: How the mask was built
        time_offset: Offset a of the time reflection t -> -t + a; None for
            autonomous use
    """
    signs: np.ndarray
    kind: ReversalKind = ReversalKind.CUSTOM
    time_offset: Optional[float] = None

    def __post_init__(self):
        signs = np.array(self.signs, dtype=np.float64).reshape(-1)
        if signs.size == 0 or not np.all(np.abs(signs) == 1.0):
            raise ValueError(f"Reversing mask entries must be +1 or -1, got {signs.tolist()}")
        signs.setflags(write=False)
        object.__setattr__(self, "signs", signs)
        object.__setattr__(self, "kind", ReversalKind(self.kind))
        if self.time_offset is not None:
            if not np.isfinite(self.time_offset):
                raise ValueError("Time offset must be finite")
            object.__setattr__(self, "time_offset", float(self.time_offset))

    @classmethod
    def momentum_flip(cls, dim: int, time_offset: Optional[float] = None) -> "ReversingOperator":
        """(q, p) -> (q, -p)."""
        if dim < 2 or dim % 2:
            raise ValueError(f"Momentum flip needs an even state dimension, got {dim}")
        n = dim // 2
        return cls(np.concatenate([np.ones(n), -np.ones(n)]), ReversalKind.MOMENTUM_FLIP, time_offset)

    @classmethod
    def full_negation(cls, dim: int, time_offset: Optional[float] = None) -> "ReversingOperator":
        """x -> -x."""
        return cls(-np.ones(dim), ReversalKind.FULL_NEGATION, time_offset)

    @classmethod
    def custom(cls, mask: Sequence[float], time_offset: Optional[float] = None) -> "ReversingOperator":
        return cls(np.asarray(mask, dtype=np.float64), ReversalKind.CUSTOM, time_offset)

    @property
    def dim(self) -> int:
        return self.signs.shape[0]

    @property
    def nonautonomous(self) -> bool:
        return self.time_offset is not None

    @property
    def offset(self) -> float:
        return self.time_offset if self.time_offset is not None else 0.0

    def __call__(self, x: Union[Tensor, np.ndarray]) -> Union[Tensor, np.ndarray]:
        """Apply the sign mask to a (batch, dim) tensor or array, or a (dim,) vector."""
        if x.shape[-1] != self.dim:
            raise ShapeError(f"Reversing operator acts on dimension {self.dim}, got shape {x.shape}")
        if isinstance(x, Tensor):
            return x * self.signs
        return np.asarray(x, dtype=np.float64) * self.signs

    def reflect_time(self, t):
        """τ = -t + a."""
        return -np.asarray(t, dtype=np.float64) + self.offset


def apply_reversing(op: ReversingOperator, state: State) -> State:
    """
    Apply R to a state.

    The time is mapped to -t + a only for non-autonomous operators.

    Raises:
        ShapeError: dimension mismatch
    """
    values = op(state.values)
    time = float(op.reflect_time(state.time)) if op.nonautonomous else state.time
    return State(values, time)
