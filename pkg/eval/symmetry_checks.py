"""
Diagnostics of time-reversal symmetry.

- Relative error between the reversed forward evolution and the backward
  evolution of the reversed state
- Gap H_θ(q, p) - H_θ(q, -p) of a learned Hamiltonian
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from loguru import logger

from autodiff.tensor import Tape
from integrators.schemas import SolverConfig, State
from losses.objectives import resolve_field, reversal_chains
from losses.symmetry import ReversingOperator
from models.hoden import HodenModel, hamiltonian_values


@dataclass
class RelativeError:
    """
    Forward/backward discrepancy.

    Attributes:
        value: Relative error, or the absolute error when `absolute` is set
        absolute: True when the reversed forward chain has zero norm
    """
    value: float
    absolute: bool = False


def forward_backward_relative_error(model, initial_states, steps: int, op: ReversingOperator,
                                    solver: SolverConfig, initial_time: float = 0.0) -> RelativeError:
    """
    ‖R(forward) - backward‖ / ‖R(forward)‖ aggregated over steps and samples.

    Norms are Euclidean over every state after the initial one, so the
    value is sqrt(Σ‖R x̃_i - x̃_R,i‖²) / sqrt(Σ‖R x̃_i‖²).

    Args:
        model: VectorField or model
        initial_states: Array (count, dim), (dim,), or a sequence of States
        steps: Transitions per chain
        op: Reversing operator
        solver: Integrator and positive step
        initial_time: Start time of every forward chain

    Returns:
        RelativeError (absolute with a flag when the denominator is zero)
    """
    field = resolve_field(model)
    if isinstance(initial_states, (list, tuple)) and initial_states and isinstance(initial_states[0], State):
        initial_states = np.stack([s.values for s in initial_states])
    x0_values = np.atleast_2d(np.asarray(initial_states, dtype=np.float64))
    tape = Tape(record=False)
    x0 = tape.constant(x0_values)
    t0 = np.full((x0_values.shape[0], 1), initial_time)
    forward, backward = reversal_chains(field, x0, t0, [solver.step] * steps, op, solver.method)

    numerator = 0.0
    denominator = 0.0
    for fwd, bwd in zip(forward[1:], backward[1:]):
        reversed_fwd = op(fwd.value)
        numerator += float(np.sum((reversed_fwd - bwd.value) ** 2))
        denominator += float(np.sum(reversed_fwd ** 2))

    if denominator == 0.0:
        logger.warning("Reversed forward chain has zero norm; reporting absolute error")
        return RelativeError(float(np.sqrt(numerator)), absolute=True)
    return RelativeError(float(np.sqrt(numerator / denominator)))


@dataclass
class SymmetryGap:
    """H_θ(q, p) - H_θ(q, -p) along a momentum grid."""
    momenta: List[float]
    gaps: List[float]
    max_abs_gap: float


def hamiltonian_symmetry_gap(model: HodenModel, q: Optional[Sequence[float]] = None,
                             momenta: Optional[Sequence[float]] = None) -> SymmetryGap:
    """
    Evenness of a learned Hamiltonian in the momentum.

    Args:
        model: Hamiltonian network
        q: Fixed position vector (zeros by default)
        momenta: Grid of momentum magnitudes, applied to every momentum
            component (default: 151 points in [0, 1.5])

    Returns:
        SymmetryGap with the gap series and its max absolute value
    """
    n = model.half_dim
    q = np.zeros(n) if q is None else np.asarray(q, dtype=np.float64).reshape(n)
    grid = np.linspace(0.0, 1.5, 151) if momenta is None else np.asarray(momenta, dtype=np.float64)

    plus = np.hstack([np.tile(q, (grid.size, 1)), np.tile(grid[:, None], (1, n))])
    minus = np.hstack([np.tile(q, (grid.size, 1)), np.tile(-grid[:, None], (1, n))])
    gaps = hamiltonian_values(model, plus) - hamiltonian_values(model, minus)
    return SymmetryGap(momenta=grid.tolist(), gaps=gaps.tolist(), max_abs_gap=float(np.max(np.abs(gaps))))
