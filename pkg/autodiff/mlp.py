"""
Multilayer perceptrons for learned vector fields and Hamiltonians.

Networks have tanh hidden layers and a linear output layer. Weights are
stored as (fan_in, fan_out) arrays so a batch of row vectors maps through
`x @ W + b`.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .tensor import ShapeError, Tape, Tensor, matmul, square, tanh, transpose


class Activation(str, Enum):
    """Supported hidden-layer activations."""
    TANH = "tanh"


@dataclass(frozen=True)
class MlpSpec:
    """
    Architecture of a fully connected network.

    Attributes:
        input_dim: Width of the input vector
        hidden_dims: Widths of the hidden layers (at least one)
        output_dim: Width of the output vector
        activation: Hidden-layer activation (linear output layer)
    """
    input_dim: int
    hidden_dims: Tuple[int, ...]
    output_dim: int
    activation: Activation = Activation.TANH

    def __post_init__(self):
        object.__setattr__(self, "hidden_dims", tuple(int(h) for h in self.hidden_dims))
        object.__setattr__(self, "activation", Activation(self.activation))
        if not self.hidden_dims:
            raise ValueError("MlpSpec needs at least one hidden layer")
        dims = (self.input_dim, *self.hidden_dims, self.output_dim)
        if any(int(d) < 1 for d in dims):
            raise ValueError(f"All layer widths must be >= 1, got {dims}")

    @property
    def layer_shapes(self) -> List[Tuple[int, int]]:
        dims = (self.input_dim, *self.hidden_dims, self.output_dim)
        return [(dims[i], dims[i + 1]) for i in range(len(dims) - 1)]

    @property
    def parameter_count(self) -> int:
        return int(np.sum([fan_in * fan_out + fan_out for fan_in, fan_out in self.layer_shapes]))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'input_dim': self.input_dim,
            'hidden_dims': list(self.hidden_dims),
            'output_dim': self.output_dim,
            'activation': self.activation.value,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "MlpSpec":
        return cls(
            input_dim=int(data['input_dim']),
            hidden_dims=tuple(data['hidden_dims']),
            output_dim=int(data['output_dim']),
            activation=Activation(data.get('activation', 'tanh')),
        )


@dataclass
class ModelParams:
    """Weights and biases of one network, layer by layer."""
    weights: List[np.ndarray] = field(default_factory=list)
    biases: List[np.ndarray] = field(default_factory=list)

    def arrays(self) -> List[np.ndarray]:
        """Parameters in canonical order: W0, b0, W1, b1, ..."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend([w, b])
        return out

    @classmethod
    def from_arrays(cls, arrays: Sequence[np.ndarray]) -> "ModelParams":
        if len(arrays) % 2:
            raise ShapeError("Parameter list must alternate weights and biases")
        return cls(
            weights=[np.asarray(a, dtype=np.float64) for a in arrays[0::2]],
            biases=[np.asarray(a, dtype=np.float64) for a in arrays[1::2]],
        )

    def copy(self) -> "ModelParams":
        return ModelParams.from_arrays([a.copy() for a in self.arrays()])

    def check(self, spec: MlpSpec) -> None:
        """Raise ShapeError unless shapes match `spec`."""
        shapes = spec.layer_shapes
        if len(self.weights) != len(shapes) or len(self.biases) != len(shapes):
            raise ShapeError(f"Expected {len(shapes)} layers, got {len(self.weights)}")
        for layer, ((fan_in, fan_out), w, b) in enumerate(zip(shapes, self.weights, self.biases)):
            if w.shape != (fan_in, fan_out) or b.shape != (fan_out,):
                raise ShapeError(
                    f"Layer {layer}: expected W{(fan_in, fan_out)} b{(fan_out,)}, "
                    f"got W{w.shape} b{b.shape}"
                )


def zero_params(spec: MlpSpec) -> ModelParams:
    return ModelParams(
        weights=[np.zeros(shape) for shape in spec.layer_shapes],
        biases=[np.zeros(shape[1]) for shape in spec.layer_shapes],
    )


def init_params(spec: MlpSpec, rng: np.random.Generator) -> ModelParams:
    """
    Glorot-uniform weights in ±sqrt(6 / (fan_in + fan_out)), zero biases.

    Args:
        spec: Network architecture
        rng: numpy Generator (seeded by the caller)

    Returns:
        Freshly initialized ModelParams
    """
    weights = []
    for fan_in, fan_out in spec.layer_shapes:
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
    return ModelParams(weights=weights, biases=[np.zeros(s[1]) for s in spec.layer_shapes])


def _prepare(spec: MlpSpec, params: ModelParams, x, tape: Optional[Tape]) -> Tensor:
    if not isinstance(x, Tensor):
        tape = tape if tape is not None else Tape(record=False)
        x = tape.constant(np.atleast_2d(np.asarray(x, dtype=np.float64)))
    elif tape is not None and x.tape is not tape:
        raise ShapeError("Input tensor is bound to a different tape")
    if x.ndim != 2 or x.shape[1] != spec.input_dim:
        raise ShapeError(f"Expected input (batch, {spec.input_dim}), got {x.shape}")
    params.check(spec)
    return x


def _hidden_activations(spec: MlpSpec, params: ModelParams, x: Tensor) -> List[Tensor]:
    tape = x.tape
    h = x
    activations = []
    for w, b in zip(params.weights[:-1], params.biases[:-1]):
        h = tanh(matmul(h, tape.watch(w)) + tape.watch(b))
        activations.append(h)
    return activations


def mlp_forward(spec: MlpSpec, params: ModelParams, x, tape: Optional[Tape] = None) -> Tensor:
    """
    Evaluate the network on a batch of inputs.

    Args:
        spec: Network architecture
        params: Network parameters (bound to the tape as leaves)
        x: Input Tensor or array of shape (batch, input_dim)
        tape: Tape to record on when `x` is a plain array

    Returns:
        Output Tensor of shape (batch, output_dim)
    """
    x = _prepare(spec, params, x, tape)
    tape = x.tape
    activations = _hidden_activations(spec, params, x)
    return matmul(activations[-1], tape.watch(params.weights[-1])) + tape.watch(params.biases[-1])


def mlp_input_jacobian_as_graph(spec: MlpSpec, params: ModelParams, x,
                                tape: Optional[Tape] = None) -> Tensor:
    """
    Gradient of a scalar network with respect to its input, built from tape ops.

    The gradient network (transposed weights times tanh derivatives) is
    recorded like any other computation, so differentiating a loss that uses
    it yields second-order parameter gradients from a single backward pass.

    Args:
        spec: Network architecture with output_dim == 1
        params: Network parameters
        x: Input Tensor or array of shape (batch, input_dim)
        tape: Tape to record on when `x` is a plain array

    Returns:
        Tensor of shape (batch, input_dim) holding d(output)/d(input)
    """
    if spec.output_dim != 1:
        raise ShapeError(f"Input gradient needs a scalar network, output_dim={spec.output_dim}")
    x = _prepare(spec, params, x, tape)
    tape = x.tape
    activations = _hidden_activations(spec, params, x)

    ones = tape.constant(np.ones((x.shape[0], 1)))
    grad = matmul(ones, transpose(tape.watch(params.weights[-1])))
    for layer in range(len(activations) - 1, -1, -1):
        grad = grad * (1.0 - square(activations[layer]))
        grad = matmul(grad, transpose(tape.watch(params.weights[layer])))
    return grad
