"""
Phase-space data types for trsoden.

This module defines the states, trajectories, vector fields and solver
settings shared by the ground-truth simulators and the learned models.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterator, List, Optional, Sequence

import numpy as np

from autodiff.tensor import NonFiniteError, Tape, Tensor, columns, concat


class SolverError(ValueError):
    """Raised on an invalid solver request (zero step, unsupported field)."""


# ============================================================================
# States & Trajectories
# ============================================================================

@dataclass(frozen=True)
class State:
    """
    A point in phase space at a given time.

    Attributes:
        values: Phase-space vector, positions first then momenta for
            Hamiltonian systems
        time: Time stamp (dimensionless in all shipped experiments)
    """
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(values)) or not np.isfinite(self.time):
            raise NonFiniteError(f"State has non-finite components: {values}, t={self.time}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "time", float(self.time))

    @property
    def dim(self) -> int:
        return self.values.shape[0]


@dataclass
class Trajectory:
    """
    An ordered sequence of states on a time grid.

    Attributes:
        times: Time stamps, shape (T,), strictly increasing for data and
            forward rollouts, strictly decreasing for backward rollouts
        states: State vectors, shape (T, dim)
        nodes: Tape tensors of a differentiable rollout, one (1, dim) tensor
            per state; None for plain data
    """
    times: np.ndarray
    states: np.ndarray
    nodes: Optional[List[Tensor]] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64).reshape(-1)
        self.states = np.asarray(self.states, dtype=np.float64)
        if self.states.ndim != 2 or self.states.shape[0] != self.times.shape[0]:
            raise ValueError(
                f"Trajectory needs states (T, dim) matching times (T,), "
                f"got {self.states.shape} and {self.times.shape}"
            )
        if self.times.shape[0] == 0:
            raise ValueError("Trajectory must hold at least one state")
        if not np.all(np.isfinite(self.states)) or not np.all(np.isfinite(self.times)):
            raise NonFiniteError("Trajectory contains non-finite values")
        steps = np.diff(self.times)
        if steps.size and not (np.all(steps > 0) or np.all(steps < 0)):
            raise ValueError("Trajectory time stamps must be strictly monotone")

    @classmethod
    def from_states(cls, states: Sequence[State]) -> "Trajectory":
        return cls(
            times=np.array([s.time for s in states]),
            states=np.stack([s.values for s in states]),
        )

    def __len__(self) -> int:
        return self.times.shape[0]

    def __getitem__(self, index: int) -> State:
        return State(self.states[index], float(self.times[index]))

    def __iter__(self) -> Iterator[State]:
        for i in range(len(self)):
            yield self[i]

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @property
    def steps(self) -> int:
        """Number of transitions."""
        return len(self) - 1

    @property
    def dts(self) -> np.ndarray:
        return np.diff(self.times)

    @property
    def initial(self) -> State:
        return self[0]

    def segment(self, start: int, stop: int) -> "Trajectory":
        """States `start..stop` inclusive."""
        return Trajectory(self.times[start:stop + 1].copy(), self.states[start:stop + 1].copy())


# ============================================================================
# Vector Fields
# ============================================================================

class VectorField(ABC):
    """
    A right-hand side dx/dt = f(x, t).

    Fields are evaluated on batches: `x` is a (batch, dim) Tensor and `t` a
    (batch, 1) array of times. Every operation goes through the tensor's tape,
    so learned fields stay differentiable in their parameters.
    """

    dim: int
    autonomous: bool = True
    separable: bool = False

    @abstractmethod
    def __call__(self, x: Tensor, t: np.ndarray) -> Tensor:
        """Evaluate the field on a batch."""

    def evaluate(self, state: State) -> np.ndarray:
        """Evaluate at a single state, outside of any training tape."""
        tape = Tape(record=False)
        x = tape.constant(state.values[None, :])
        return self(x, np.full((1, 1), state.time)).value[0]


class SeparableField(VectorField):
    """
    Field of a separable Hamiltonian H(q, p) = K(p) + V(q).

    The state splits into equal halves (q, p); the field is
    (dK/dp, -dV/dq). Leapfrog integration uses the two gradients directly.
    """

    separable = True

    @property
    def half_dim(self) -> int:
        return self.dim // 2

    @abstractmethod
    def kinetic_grad(self, p: Tensor, t: np.ndarray) -> Tensor:
        """dK/dp on a (batch, n) momentum tensor."""

    @abstractmethod
    def potential_grad(self, q: Tensor, t: np.ndarray) -> Tensor:
        """dV/dq on a (batch, n) position tensor."""

    def __call__(self, x: Tensor, t: np.ndarray) -> Tensor:
        n = self.half_dim
        q = columns(x, 0, n)
        p = columns(x, n, 2 * n)
        return concat([self.kinetic_grad(p, t), -self.potential_grad(q, t)], axis=1)


class FunctionField(VectorField):
    """Field given by a plain callable `fn(x, t) -> Tensor`."""

    def __init__(self, fn: Callable[[Tensor, np.ndarray], Tensor], dim: int, autonomous: bool = True):
        self._fn = fn
        self.dim = dim
        self.autonomous = autonomous

    def __call__(self, x: Tensor, t: np.ndarray) -> Tensor:
        return self._fn(x, t)


class TimeDependentView(VectorField):
    """Presents an autonomous field as a non-autonomous one."""

    def __init__(self, field: VectorField):
        self._field = field
        self.dim = field.dim
        self.autonomous = False

    def __call__(self, x: Tensor, t: np.ndarray) -> Tensor:
        return self._field(x, t)


# ============================================================================
# Solver Settings
# ============================================================================

class SolverMethod(str, Enum):
    """Fixed-step integrators."""
    RK4 = "rk4"
    LEAPFROG = "leapfrog"


@dataclass(frozen=True)
class SolverConfig:
    """
    Integrator choice and step size.

    Attributes:
        method: rk4 or leapfrog (leapfrog needs a separable, autonomous field)
        step: Signed step size; negative values evolve backward in time
    """
    method: SolverMethod = SolverMethod.RK4
    step: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "method", SolverMethod(self.method))
        if self.step == 0 or not np.isfinite(self.step):
            raise SolverError(f"Solver step must be finite and non-zero, got {self.step}")

    def reversed(self) -> "SolverConfig":
        return SolverConfig(self.method, -self.step)
