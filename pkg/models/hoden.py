"""
Hamiltonian ODE networks with a separable learned Hamiltonian.

H_θ(q, p) = K_θ1(p) + V_θ2(q). The vector field (dK/dp, -dV/dq) is built
from the networks' input gradients on the tape, so training differentiates
through them.
"""

from dataclasses import dataclass
from typing import List, Sequence, Union

import numpy as np

from autodiff.mlp import MlpSpec, ModelParams, init_params, mlp_forward, mlp_input_jacobian_as_graph
from autodiff.tensor import ShapeError, Tape, Tensor, columns, concat
from integrators.schemas import SeparableField, State


@dataclass
class HodenModel:
    """
    Separable Hamiltonian network.

    Attributes:
        kinetic_spec: Architecture of K (n or n+1 inputs -> 1)
        kinetic_params: θ1
        potential_spec: Architecture of V (n or n+1 inputs -> 1)
        potential_params: θ2
        half_dim: n, the number of positions (= momenta)
        time_augmented: Whether t is appended to both networks' inputs
    """
    kinetic_spec: MlpSpec
    kinetic_params: ModelParams
    potential_spec: MlpSpec
    potential_params: ModelParams
    half_dim: int
    time_augmented: bool = False

    kind = "hoden"

    def __post_init__(self):
        expected_in = self.half_dim + (1 if self.time_augmented else 0)
        for name, spec in (("kinetic", self.kinetic_spec), ("potential", self.potential_spec)):
            if spec.output_dim != 1:
                raise ShapeError(f"The {name} network must be scalar, output_dim={spec.output_dim}")
            if spec.input_dim != expected_in:
                raise ShapeError(f"The {name} network needs {expected_in} inputs, got {spec.input_dim}")
        self.kinetic_params.check(self.kinetic_spec)
        self.potential_params.check(self.potential_spec)

    @property
    def state_dim(self) -> int:
        return 2 * self.half_dim

    @classmethod
    def initialize(cls, state_dim: int, hidden_dims: Sequence[int], time_augmented: bool = False,
                   rng: np.random.Generator = None) -> "HodenModel":
        if state_dim % 2:
            raise ShapeError(f"HODEN needs an even state dimension, got {state_dim}")
        n = state_dim // 2
        spec = MlpSpec(n + (1 if time_augmented else 0), tuple(hidden_dims), 1)
        rng = rng if rng is not None else np.random.default_rng(0)
        kinetic = init_params(spec, rng)
        potential = init_params(spec, rng)
        return cls(spec, kinetic, spec, potential, n, time_augmented)

    def parameters(self) -> List[np.ndarray]:
        return self.kinetic_params.arrays() + self.potential_params.arrays()

    def with_parameters(self, arrays: Sequence[np.ndarray]) -> "HodenModel":
        split = len(self.kinetic_params.arrays())
        return HodenModel(
            self.kinetic_spec,
            ModelParams.from_arrays(arrays[:split]),
            self.potential_spec,
            ModelParams.from_arrays(arrays[split:]),
            self.half_dim,
            self.time_augmented,
        )

    def field(self) -> "HodenField":
        return HodenField(self)


def _with_time(model: HodenModel, z: Tensor, t: np.ndarray) -> Tensor:
    if not model.time_augmented:
        return z
    times = np.broadcast_to(np.asarray(t, dtype=np.float64), (z.shape[0], 1))
    return concat([z, times], axis=1)


class HodenField(SeparableField):
    """Vector field (dH/dp, -dH/dq) of a HodenModel."""

    def __init__(self, model: HodenModel):
        self.model = model
        self.dim = model.state_dim
        self.autonomous = not model.time_augmented
        self.separable = not model.time_augmented

    def kinetic_grad(self, p: Tensor, t: np.ndarray) -> Tensor:
        model = self.model
        grad = mlp_input_jacobian_as_graph(model.kinetic_spec, model.kinetic_params,
                                           _with_time(model, p, t))
        return columns(grad, 0, model.half_dim) if model.time_augmented else grad

    def potential_grad(self, q: Tensor, t: np.ndarray) -> Tensor:
        model = self.model
        grad = mlp_input_jacobian_as_graph(model.potential_spec, model.potential_params,
                                           _with_time(model, q, t))
        return columns(grad, 0, model.half_dim) if model.time_augmented else grad


def hoden_field(model: HodenModel) -> HodenField:
    return HodenField(model)


def hamiltonian_values(model: HodenModel, states: np.ndarray, times=None,
                       calibrate: bool = False) -> np.ndarray:
    """
    H_θ(q, p) = K(p) + V(q) for a batch of states.

    Args:
        model: Hamiltonian network
        states: Array (count, 2n)
        times: Optional times (count,) for time-augmented networks
        calibrate: Subtract H_θ(0, 0) so the ground energy level is zero

    Returns:
        Array (count,) of energies
    """
    states = np.atleast_2d(np.asarray(states, dtype=np.float64))
    n = model.half_dim
    if states.shape[1] != 2 * n:
        raise ShapeError(f"Expected states (count, {2 * n}), got {states.shape}")
    times = np.zeros((states.shape[0], 1)) if times is None else np.asarray(times, dtype=np.float64).reshape(-1, 1)

    tape = Tape(record=False)

    def energy(batch: np.ndarray, t: np.ndarray) -> np.ndarray:
        x = tape.constant(batch)
        q = columns(x, 0, n)
        p = columns(x, n, 2 * n)
        kinetic = mlp_forward(model.kinetic_spec, model.kinetic_params, _with_time(model, p, t))
        potential = mlp_forward(model.potential_spec, model.potential_params, _with_time(model, q, t))
        return (kinetic + potential).value[:, 0]

    values = energy(states, times)
    if calibrate:
        values = values - energy(np.zeros((1, 2 * n)), np.zeros((1, 1)))[0]
    return values


def hoden_energy(model: HodenModel, state: Union[State, np.ndarray], calibrate: bool = False) -> float:
    """
    Learned energy K_θ1(p) + V_θ2(q) at one state.

    Args:
        model: Hamiltonian network
        state: State (or phase-space vector)
        calibrate: Shift so that H_θ(0, 0) = 0

    Returns:
        Energy as a float
    """
    if isinstance(state, State):
        values, time = state.values, state.time
    else:
        values, time = np.asarray(state, dtype=np.float64), 0.0
    return float(hamiltonian_values(model, values[None, :], [time], calibrate=calibrate)[0])
