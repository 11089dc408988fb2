"""
Single-step integrators.

Both steppers accept a signed step: evolving backward in time is the same
update with a negative `dt`. Batched variants work on (batch, dim) tensors
with `t` and `dt` given as scalars or (batch, 1) arrays.
"""

from typing import Callable, Union

import numpy as np

from autodiff.tensor import Tape, Tensor, columns, concat

from .schemas import SeparableField, SolverError, SolverMethod, State, VectorField

Step = Union[float, np.ndarray]
GradFn = Callable[[Tensor], Tensor]


def _check_step(dt: Step) -> None:
    if np.any(np.asarray(dt) == 0):
        raise SolverError("Step size must be non-zero")


def rk4_update(field: VectorField, x: Tensor, t: np.ndarray, dt: Step) -> Tensor:
    """
    Classical four-stage Runge-Kutta update on a batch.

    Args:
        field: Vector field
        x: States, Tensor of shape (batch, dim)
        t: Times, array of shape (batch, 1)
        dt: Signed step, scalar or (batch, 1)

    Returns:
        States after one step
    """
    _check_step(dt)
    half = dt / 2.0
    k1 = field(x, t)
    k2 = field(x + k1 * half, t + half)
    k3 = field(x + k2 * half, t + half)
    k4 = field(x + k3 * dt, t + dt)
    return x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)


def leapfrog_update(kinetic_grad: GradFn, potential_grad: GradFn, x: Tensor, dt: Step) -> Tensor:
    """
    Kick-drift-kick leapfrog update on a batch of (q, p) states.

    p_half = p - (dt/2) dV/dq(q)
    q'     = q + dt dK/dp(p_half)
    p'     = p_half - (dt/2) dV/dq(q')
    """
    _check_step(dt)
    dim = x.shape[1]
    if dim % 2:
        raise SolverError(f"Leapfrog needs an even state dimension, got {dim}")
    n = dim // 2
    half = dt / 2.0
    q = columns(x, 0, n)
    p = columns(x, n, dim)
    p_half = p - potential_grad(q) * half
    q_next = q + kinetic_grad(p_half) * dt
    p_next = p_half - potential_grad(q_next) * half
    return concat([q_next, p_next], axis=1)


def step(field: VectorField, x: Tensor, t: np.ndarray, dt: Step, method: SolverMethod) -> Tensor:
    """Advance a batch by one step with the requested method."""
    method = SolverMethod(method)
    if method is SolverMethod.RK4:
        return rk4_update(field, x, t, dt)
    if not field.separable or not isinstance(field, SeparableField):
        raise SolverError("Leapfrog requires a separable Hamiltonian field")
    if not field.autonomous:
        raise SolverError("Leapfrog is only available for autonomous fields")
    return leapfrog_update(
        lambda p: field.kinetic_grad(p, t),
        lambda q: field.potential_grad(q, t),
        x,
        dt,
    )


def rk4_step(field: VectorField, state: State, dt: float) -> State:
    """
    One RK4 step from a single state.

    Args:
        field: Vector field
        state: Current state
        dt: Signed step size

    Returns:
        New state at time `state.time + dt`
    """
    tape = Tape(record=False)
    x = tape.constant(state.values[None, :])
    t = np.full((1, 1), state.time)
    x_next = rk4_update(field, x, t, dt)
    return State(x_next.value[0], state.time + dt)


def leapfrog_step(kinetic_grad: GradFn, potential_grad: GradFn, state: State, dt: float) -> State:
    """
    One leapfrog step from a single (q, p) state.

    Args:
        kinetic_grad: dK/dp, maps a (1, n) tensor to a (1, n) tensor
        potential_grad: dV/dq, maps a (1, n) tensor to a (1, n) tensor
        state: Current state with an even dimension
        dt: Signed step size

    Returns:
        New state at time `state.time + dt`
    """
    tape = Tape(record=False)
    x = tape.constant(state.values[None, :])
    x_next = leapfrog_update(kinetic_grad, potential_grad, x, dt)
    return State(x_next.value[0], state.time + dt)
