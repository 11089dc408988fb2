"""
Dataset generation for the shipped experiments.

Ground truth is integrated with RK4 on the dataset grid. Every trajectory
draws from its own counter-based random stream (seed, stream, index), so
generation is reproducible and independent of ordering or parallelism.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from loguru import logger
from pydantic import BaseModel, Field

from autodiff.tensor import Tape
from integrators.rollout import integrate
from integrators.schemas import SolverMethod, Trajectory, VectorField

from .sampling import SamplerSpec
from .systems import CoupledOscillatorField, CoupledOscillatorParams, SystemSpec

# Random stream identifiers
TRAIN_STREAM = 0
TEST_STREAM = 1
NOISE_STREAM = 2


def stream_rng(seed: int, stream: int, index: int = 0) -> np.random.Generator:
    """Independent generator for one (seed, stream, index) counter."""
    return np.random.default_rng(np.random.SeedSequence([seed, stream, index]))


class NoiseSpec(BaseModel):
    """Additive Gaussian observation noise sigma * N(0, 1)."""
    sigma: float = Field(0.0, ge=0)
    seed: int = 0


class DatasetSpec(BaseModel):
    """
    Declarative description of a train/test dataset.

    Lengths count transitions: a trajectory of length L holds L + 1 states.
    """
    system: SystemSpec = Field(default_factory=SystemSpec)
    count: int = Field(50, ge=1)
    length: int = Field(30, ge=2)
    test_count: int = Field(50, ge=1)
    test_length: int = Field(200, ge=2)
    dt: float = Field(0.1, gt=0)
    t0: float = 0.0
    sampler: SamplerSpec = Field(default_factory=SamplerSpec)
    noise: NoiseSpec = Field(default_factory=NoiseSpec)
    seed: int = 0

    def with_seed(self, seed: int) -> "DatasetSpec":
        """Copy drawing initial states and observation noise from `seed`."""
        return self.model_copy(update={'seed': seed, 'noise': self.noise.model_copy(update={'seed': seed})})


@dataclass
class Dataset:
    """Generated trajectories: clean and noisy training sets, clean test set."""
    train_clean: List[Trajectory]
    train_noisy: List[Trajectory]
    test: List[Trajectory]
    spec: Optional[DatasetSpec] = field(default=None, repr=False)


def simulate(field: VectorField, initial_states: np.ndarray, steps: int, dt: float,
             t0: float = 0.0) -> List[Trajectory]:
    """
    Integrate ground truth with RK4 from a batch of initial states.

    Args:
        field: Ground-truth vector field
        initial_states: Array (count, dim)
        steps: Number of transitions
        dt: Step size
        t0: Start time shared by all trajectories

    Returns:
        One Trajectory per initial state

    Raises:
        DivergenceError: the ground truth blew up
    """
    initial_states = np.atleast_2d(np.asarray(initial_states, dtype=np.float64))
    tape = Tape(record=False)
    x0 = tape.constant(initial_states)
    t_start = np.full((initial_states.shape[0], 1), t0)
    nodes = integrate(field, x0, t_start, [dt] * steps, SolverMethod.RK4)
    stacked = np.stack([node.value for node in nodes], axis=1)  # (count, T, dim)
    times = t0 + dt * np.arange(steps + 1)
    return [Trajectory(times.copy(), stacked[i]) for i in range(stacked.shape[0])]


def add_noise(trajectories: Sequence[Trajectory], noise: NoiseSpec) -> List[Trajectory]:
    """Add i.i.d. sigma * N(0, 1) to every state component."""
    if noise.sigma == 0:
        return [Trajectory(t.times.copy(), t.states.copy()) for t in trajectories]
    noisy = []
    for index, traj in enumerate(trajectories):
        rng = stream_rng(noise.seed, NOISE_STREAM, index)
        states = traj.states + noise.sigma * rng.standard_normal(traj.states.shape)
        noisy.append(Trajectory(traj.times.copy(), states))
    return noisy


def sample_initial_states(spec: DatasetSpec, count: int, stream: int) -> np.ndarray:
    dim = spec.system.state_dim
    return np.stack([
        spec.sampler.sample(dim, stream_rng(spec.seed, stream, index))
        for index in range(count)
    ])


def generate_dataset(spec: DatasetSpec) -> Dataset:
    """
    Generate clean/noisy training trajectories and clean test trajectories.

    Test initial states come from a random stream disjoint from training.

    Args:
        spec: Dataset description

    Returns:
        Dataset with train_clean, train_noisy and test trajectories
    """
    field = spec.system.build_field()
    train_x0 = sample_initial_states(spec, spec.count, TRAIN_STREAM)
    test_x0 = sample_initial_states(spec, spec.test_count, TEST_STREAM)

    train_clean = simulate(field, train_x0, spec.length, spec.dt, spec.t0)
    test = simulate(field, test_x0, spec.test_length, spec.dt, spec.t0)
    train_noisy = add_noise(train_clean, spec.noise)

    logger.info(
        f"Generated {spec.system.kind.value} dataset: {spec.count} train x {spec.length} steps, "
        f"{spec.test_count} test x {spec.test_length} steps, sigma={spec.noise.sigma}"
    )
    return Dataset(train_clean=train_clean, train_noisy=train_noisy, test=test, spec=spec)


def split_trajectories(trajectories: Sequence[Trajectory], max_len: int) -> List[Trajectory]:
    """
    Cut trajectories into segments of at most `max_len` transitions.

    Consecutive segments share their junction state, so each segment's first
    state is the initial condition of its rollout.

    Args:
        trajectories: Trajectories to split
        max_len: Maximum transitions per segment (>= 2)

    Returns:
        Segments in input order
    """
    if max_len < 2:
        raise ValueError(f"max_len must be >= 2, got {max_len}")
    segments = []
    for traj in trajectories:
        start = 0
        while start < traj.steps:
            stop = min(start + max_len, traj.steps)
            segments.append(traj.segment(start, stop))
            start = stop
        if traj.steps == 0:
            segments.append(traj.segment(0, 0))
    return segments


def simulate_coupled_record(params: Optional[CoupledOscillatorParams] = None, length: int = 500,
                            dt: float = 0.1, sigma: float = 0.01, seed: int = 0,
                            initial: Optional[Sequence[float]] = None) -> Trajectory:
    """
    One long noisy record of two coupled damped oscillators.

    Stands in for a measured two-mass recording when none is available. The
    returned states are ordered (q1, q2, p1, p2).
    """
    field = CoupledOscillatorField(params or CoupledOscillatorParams())
    x0 = np.asarray(initial if initial is not None else [1.0, -0.5, 0.0, 0.0], dtype=np.float64)
    clean = simulate(field, x0[None, :], length, dt)[0]
    if sigma == 0:
        return clean
    rng = stream_rng(seed, NOISE_STREAM, 0)
    return Trajectory(clean.times, clean.states + sigma * rng.standard_normal(clean.states.shape))
