"""
Reverse-mode automatic differentiation for trsoden.

This package provides the differentiable core used by every learned model:
- Tensor / Tape: dense float64 arrays with a recorded operation tape
- MLP architectures (tanh hidden layers, linear output) and their input gradients
- Adam optimizer
"""

__version__ = "0.1.0"

from .tensor import (
    Tensor,
    Tape,
    Gradients,
    ShapeError,
    NonFiniteError,
    TapeError,
)
from .mlp import (
    Activation,
    MlpSpec,
    ModelParams,
    init_params,
    zero_params,
    mlp_forward,
    mlp_input_jacobian_as_graph,
)
from .adam import AdamState, adam_step

__all__ = [
    'Tensor',
    'Tape',
    'Gradients',
    'ShapeError',
    'NonFiniteError',
    'TapeError',
    'Activation',
    'MlpSpec',
    'ModelParams',
    'init_params',
    'zero_params',
    'mlp_forward',
    'mlp_input_jacobian_as_graph',
    'AdamState',
    'adam_step',
]
