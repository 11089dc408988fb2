"""
ODE networks: a tanh MLP parameterizing the vector field directly.
"""

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from autodiff.mlp import MlpSpec, ModelParams, init_params, mlp_forward
from autodiff.tensor import ShapeError, Tensor, concat
from integrators.schemas import VectorField


@dataclass
class OdenModel:
    """
    ODEN f_θ(x) or, when time-augmented, f_θ(x, t).

    Attributes:
        spec: Network architecture, state_dim (+1 with time) -> state_dim
        params: Network parameters θ
        state_dim: Phase-space dimension
        time_augmented: Whether time is appended to the network input
    """
    spec: MlpSpec
    params: ModelParams
    state_dim: int
    time_augmented: bool = False

    kind = "oden"

    def __post_init__(self):
        expected_in = self.state_dim + (1 if self.time_augmented else 0)
        if self.spec.input_dim != expected_in or self.spec.output_dim != self.state_dim:
            raise ShapeError(
                f"ODEN over {self.state_dim}-D states needs a {expected_in} -> {self.state_dim} "
                f"network, got {self.spec.input_dim} -> {self.spec.output_dim}"
            )
        self.params.check(self.spec)

    @classmethod
    def initialize(cls, state_dim: int, hidden_dims: Sequence[int], time_augmented: bool = False,
                   rng: np.random.Generator = None) -> "OdenModel":
        spec = MlpSpec(state_dim + (1 if time_augmented else 0), tuple(hidden_dims), state_dim)
        rng = rng if rng is not None else np.random.default_rng(0)
        return cls(spec, init_params(spec, rng), state_dim, time_augmented)

    def parameters(self) -> List[np.ndarray]:
        return self.params.arrays()

    def with_parameters(self, arrays: Sequence[np.ndarray]) -> "OdenModel":
        return OdenModel(self.spec, ModelParams.from_arrays(arrays), self.state_dim, self.time_augmented)

    def field(self) -> "OdenField":
        return OdenField(self)


class OdenField(VectorField):
    """Vector field view of an OdenModel."""

    def __init__(self, model: OdenModel):
        self.model = model
        self.dim = model.state_dim
        self.autonomous = not model.time_augmented

    def network_input(self, x: Tensor, t: np.ndarray) -> Tensor:
        if x.ndim != 2 or x.shape[1] != self.dim:
            raise ShapeError(f"ODEN expects states (batch, {self.dim}), got {x.shape}")
        if not self.model.time_augmented:
            return x
        times = np.broadcast_to(np.asarray(t, dtype=np.float64), (x.shape[0], 1))
        return concat([x, times], axis=1)

    def __call__(self, x: Tensor, t: np.ndarray) -> Tensor:
        model = self.model
        return mlp_forward(model.spec, model.params, self.network_input(x, t))


def oden_field(model: OdenModel) -> OdenField:
    return OdenField(model)
