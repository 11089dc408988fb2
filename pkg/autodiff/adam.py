"""
Adam optimizer over lists of numpy parameter arrays.
"""

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple, Union

import numpy as np

from .mlp import ModelParams
from .tensor import NonFiniteError, ShapeError


@dataclass
class AdamState:
    """
    Optimizer state: step counter and moment accumulators.

    Attributes:
        learning_rate: Step size (2e-4 for every shipped experiment)
        beta1: Decay rate of the first moment
        beta2: Decay rate of the second moment
        eps: Denominator floor
        step: Number of updates applied so far
        first_moments: Running mean of gradients, one array per parameter
        second_moments: Running mean of squared gradients
    """
    learning_rate: float = 2e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    first_moments: List[np.ndarray] = field(default_factory=list)
    second_moments: List[np.ndarray] = field(default_factory=list)

    @classmethod
    def for_params(cls, params: Sequence[np.ndarray], learning_rate: float = 2e-4,
                   beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> "AdamState":
        return cls(
            learning_rate=learning_rate,
            beta1=beta1,
            beta2=beta2,
            eps=eps,
            step=0,
            first_moments=[np.zeros_like(p) for p in params],
            second_moments=[np.zeros_like(p) for p in params],
        )


Params = Union[Sequence[np.ndarray], ModelParams]


def adam_step(params: Params, grads: Sequence[np.ndarray],
              state: AdamState) -> Tuple[Params, AdamState]:
    """
    Apply one bias-corrected Adam update.

    Inputs are not modified; new parameter arrays and a new state are
    returned.

    Args:
        params: Parameter arrays (or ModelParams)
        grads: Gradients matching `params` one to one
        state: Current optimizer state

    Returns:
        Tuple of (updated params, updated state)
    """
    arrays = params.arrays() if isinstance(params, ModelParams) else list(params)
    grads = [np.asarray(g, dtype=np.float64) for g in grads]

    if len(grads) != len(arrays):
        raise ShapeError(f"Got {len(grads)} gradients for {len(arrays)} parameters")
    for i, (p, g) in enumerate(zip(arrays, grads)):
        if p.shape != g.shape:
            raise ShapeError(f"Gradient {i} has shape {g.shape}, parameter has {p.shape}")
        if not np.all(np.isfinite(g)):
            raise NonFiniteError(f"Gradient {i} contains NaN or Inf")

    first = state.first_moments or [np.zeros_like(p) for p in arrays]
    second = state.second_moments or [np.zeros_like(p) for p in arrays]
    for name, moments in (("first", first), ("second", second)):
        if len(moments) != len(arrays) or any(m.shape != p.shape for m, p in zip(moments, arrays)):
            raise ShapeError(f"Adam {name}-moment shapes do not match parameter shapes")

    step = state.step + 1
    bias1 = 1.0 - state.beta1 ** step
    bias2 = 1.0 - state.beta2 ** step

    new_params, new_first, new_second = [], [], []
    for p, g, m, v in zip(arrays, grads, first, second):
        m = state.beta1 * m + (1.0 - state.beta1) * g
        v = state.beta2 * v + (1.0 - state.beta2) * (g * g)
        m_hat = m / bias1
        v_hat = v / bias2
        new_params.append(p - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.eps))
        new_first.append(m)
        new_second.append(v)

    new_state = AdamState(
        learning_rate=state.learning_rate,
        beta1=state.beta1,
        beta2=state.beta2,
        eps=state.eps,
        step=step,
        first_moments=new_first,
        second_moments=new_second,
    )
    if isinstance(params, ModelParams):
        return ModelParams.from_arrays(new_params), new_state
    return new_params, new_state
