"""
Finite-time leading Lyapunov exponent.

σ(t_i) = log(‖δx(t_i)‖ / ‖δx(t_0)‖) / (t_i - t_0), from one base and one
perturbed trajectory evolved with the same solver and no renormalization.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from loguru import logger

from autodiff.tensor import Tape
from integrators.rollout import integrate
from integrators.schemas import SolverMethod, State
from losses.objectives import resolve_field


@dataclass
class LyapunovSeries:
    """σ at each t_i, i >= 1."""
    times: np.ndarray
    sigma: np.ndarray

    def at(self, t: float) -> float:
        """σ at the grid time closest to `t`."""
        return float(self.sigma[int(np.argmin(np.abs(self.times - t)))])


def _unit_direction(dim: int, direction: Optional[Sequence[float]], seed: int) -> np.ndarray:
    if direction is None:
        direction = np.random.default_rng(seed).standard_normal(dim)
    direction = np.asarray(direction, dtype=np.float64).reshape(dim)
    norm = np.linalg.norm(direction)
    if norm == 0:
        raise ValueError("Perturbation direction must be non-zero")
    return direction / norm


def lyapunov_exponent(model, initial: State, steps: int, dt: float, perturbation: float = 1e-6,
                      direction: Optional[Sequence[float]] = None, seed: int = 0,
                      method: SolverMethod = SolverMethod.RK4) -> LyapunovSeries:
    """
    Finite-time Lyapunov exponent series of a field or model.

    Args:
        model: VectorField or model
        initial: Base initial state
        steps: Horizon in steps
        dt: Step size (> 0)
        perturbation: Size of the initial separation (> 0)
        direction: Perturbation direction; a seeded random unit vector by default
        seed: Seed of the random direction
        method: Integrator for both trajectories

    Returns:
        LyapunovSeries over t_1 .. t_steps

    Raises:
        DivergenceError: either trajectory blew up
    """
    if perturbation <= 0:
        raise ValueError(f"Perturbation size must be positive, got {perturbation}")
    if dt <= 0 or steps < 1:
        raise ValueError(f"Need dt > 0 and steps >= 1, got dt={dt}, steps={steps}")
    field = resolve_field(model)
    offset = perturbation * _unit_direction(initial.dim, direction, seed)

    tape = Tape(record=False)
    x0 = tape.constant(np.stack([initial.values, initial.values + offset]))
    nodes = integrate(field, x0, np.full((2, 1), initial.time), [dt] * steps, method)
    separation = np.array([np.linalg.norm(node.value[1] - node.value[0]) for node in nodes])

    d0 = separation[0]
    elapsed = dt * np.arange(1, steps + 1)
    with np.errstate(divide="ignore"):
        sigma = np.log(separation[1:] / d0) / elapsed
    return LyapunovSeries(times=initial.time + elapsed, sigma=sigma)


def ensemble_lyapunov(model, initial_states: Sequence[State], steps: int, dt: float,
                      perturbation: float = 1e-6, seed: int = 0,
                      method: SolverMethod = SolverMethod.RK4) -> LyapunovSeries:
    """
    σ(t) averaged over an ensemble of initial states.

    Each member draws its perturbation direction from seed + index.
    """
    if not initial_states:
        raise ValueError("Ensemble needs at least one initial state")
    series: List[LyapunovSeries] = [
        lyapunov_exponent(model, state, steps, dt, perturbation, seed=seed + index, method=method)
        for index, state in enumerate(initial_states)
    ]
    sigma = np.mean(np.stack([s.sigma for s in series]), axis=0)
    logger.debug(f"Ensemble Lyapunov over {len(series)} states: final σ={sigma[-1]:.4f}")
    return LyapunovSeries(times=series[0].times, sigma=sigma)
