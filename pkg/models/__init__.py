"""
Learnable vector fields for trsoden.

- ODEN: a tanh MLP f_θ(x) or f_θ(x, t)
- HODEN: separable Hamiltonian K_θ1(p) + V_θ2(q) with field (dK/dp, -dV/dq)
- Checkpoints: JSON header plus little-endian float64 parameter blob
"""

__version__ = "0.1.0"

from .oden import OdenModel, OdenField, oden_field
from .hoden import HodenModel, HodenField, hoden_field, hoden_energy, hamiltonian_values
from .checkpoint import (
    CheckpointError,
    encode_checkpoint,
    decode_checkpoint,
    save_checkpoint,
    load_checkpoint,
)

__all__ = [
    'OdenModel',
    'OdenField',
    'oden_field',
    'HodenModel',
    'HodenField',
    'hoden_field',
    'hoden_energy',
    'hamiltonian_values',
    'CheckpointError',
    'encode_checkpoint',
    'decode_checkpoint',
    'save_checkpoint',
    'load_checkpoint',
]
