"""
Multi-step rollouts (the `Solve` chain) for simulation, training and evaluation.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np
from loguru import logger

from autodiff.tensor import NonFiniteError, Tape, Tensor

from .schemas import SolverConfig, SolverMethod, State, Trajectory, VectorField
from .steppers import step

DIVERGENCE_CLAMP = 1e6


class DivergenceError(NonFiniteError):
    """Raised when a rollout produces a non-finite state."""

    def __init__(self, step_index: int, message: str = ""):
        self.step = step_index
        super().__init__(message or f"Rollout diverged at step {step_index}")


def integrate(field: VectorField, x0: Tensor, t0: np.ndarray,
              dts: Sequence[Union[float, np.ndarray]], method: SolverMethod) -> List[Tensor]:
    """
    Batched chain x(t_{i+1}) = Solve{x(t_i), f, dt_i}.

    Args:
        field: Vector field
        x0: Initial states, Tensor of shape (batch, dim)
        t0: Initial times, array of shape (batch, 1)
        dts: One signed step per transition, each scalar or (batch, 1)
        method: Integrator

    Returns:
        List of len(dts) + 1 state tensors, starting with x0
    """
    states = [x0]
    x, t = x0, np.asarray(t0, dtype=np.float64)
    for i, dt in enumerate(dts):
        try:
            x = step(field, x, t, dt, method)
        except NonFiniteError as exc:
            raise DivergenceError(i + 1) from exc
        t = t + dt
        states.append(x)
    return states


def _step_sizes(config: SolverConfig, steps: int, dts: Optional[np.ndarray]) -> np.ndarray:
    if dts is None:
        return np.full(steps, config.step)
    dts = np.asarray(dts, dtype=np.float64).reshape(-1)
    if dts.shape[0] != steps:
        raise ValueError(f"Got {dts.shape[0]} step sizes for {steps} steps")
    return dts


def rollout(field: VectorField, initial: State, steps: int, config: SolverConfig,
            tape: Optional[Tape] = None, dts: Optional[np.ndarray] = None) -> Trajectory:
    """
    Roll a field out from one initial state.

    Args:
        field: Vector field
        initial: Starting state
        steps: Number of transitions (>= 1)
        config: Integrator and step size
        tape: When given, every operation is recorded on it and the returned
            trajectory carries the state tensors in `nodes`
        dts: Optional per-step sizes overriding `config.step`

    Returns:
        Trajectory of steps + 1 states

    Raises:
        DivergenceError: a state became non-finite (carries the step index)
    """
    if steps < 1:
        raise ValueError(f"Rollout needs steps >= 1, got {steps}")
    sizes = _step_sizes(config, steps, dts)
    tape = tape if tape is not None else Tape(record=False)
    x0 = tape.constant(initial.values[None, :])
    nodes = integrate(field, x0, np.full((1, 1), initial.time), list(sizes), config.method)
    times = initial.time + np.concatenate([[0.0], np.cumsum(sizes)])
    states = np.stack([node.value[0] for node in nodes])
    return Trajectory(times, states, nodes=nodes if tape.record else None)


@dataclass
class RolloutOutcome:
    """Evaluation rollout with divergence bookkeeping."""
    trajectory: Trajectory
    diverged_at: Optional[int] = None

    @property
    def diverged(self) -> bool:
        return self.diverged_at is not None


def rollout_clamped(field: VectorField, initial: State, steps: int, config: SolverConfig,
                    dts: Optional[np.ndarray] = None,
                    clamp: float = DIVERGENCE_CLAMP) -> RolloutOutcome:
    """
    Evaluation rollout that stops at divergence instead of raising.

    States after a blow-up repeat the last finite state, and every component
    is clamped to ±`clamp` so downstream averages stay finite.
    """
    sizes = _step_sizes(config, steps, dts)
    tape = Tape(record=False)
    x = tape.constant(initial.values[None, :])
    t = np.full((1, 1), initial.time)
    states = [x.value[0]]
    diverged_at = None
    for i, dt in enumerate(sizes):
        try:
            x = step(field, x, t, dt, config.method)
        except NonFiniteError:
            diverged_at = i + 1
            logger.warning(f"Rollout diverged at step {diverged_at}; holding last finite state")
            break
        t = t + dt
        states.append(x.value[0])
    while len(states) < steps + 1:
        states.append(states[-1])
    times = initial.time + np.concatenate([[0.0], np.cumsum(sizes)])
    clamped = np.clip(np.stack(states), -clamp, clamp)
    return RolloutOutcome(Trajectory(times, clamped), diverged_at)
