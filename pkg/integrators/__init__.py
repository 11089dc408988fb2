"""
Fixed-step ODE integration for trsoden.

Provides the phase-space types (State, Trajectory, VectorField), the RK4 and
leapfrog steppers, and rollouts usable for ground-truth simulation and for
differentiable forward/backward chains.
"""

__version__ = "0.1.0"

from .schemas import (
    State,
    Trajectory,
    VectorField,
    SeparableField,
    FunctionField,
    TimeDependentView,
    SolverMethod,
    SolverConfig,
    SolverError,
)
from .steppers import rk4_step, leapfrog_step, rk4_update, leapfrog_update, step
from .rollout import (
    DIVERGENCE_CLAMP,
    DivergenceError,
    RolloutOutcome,
    integrate,
    rollout,
    rollout_clamped,
)

__all__ = [
    'State',
    'Trajectory',
    'VectorField',
    'SeparableField',
    'FunctionField',
    'TimeDependentView',
    'SolverMethod',
    'SolverConfig',
    'SolverError',
    'rk4_step',
    'leapfrog_step',
    'rk4_update',
    'leapfrog_update',
    'step',
    'DIVERGENCE_CLAMP',
    'DivergenceError',
    'RolloutOutcome',
    'integrate',
    'rollout',
    'rollout_clamped',
]
