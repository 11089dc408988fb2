"""
Ground-truth dynamical systems.

Systems:
- Duffing oscillator dq/dt = p, dp/dt = -αq - βq³ - γp + δcos(ωt + φ)
- Reversible strange attractor dx/dt = 1 + yz, dy/dt = -xz, dz/dt = y² + 2yz
- Linear fields dx/dt = A x (test fixtures and analytic exponents)
- Two linearly coupled damped oscillators (stand-in for measured two-mass data)
"""

from dataclasses import asdict, dataclass
from enum import Enum
from typing import Dict, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from autodiff.tensor import Tensor, columns, concat
from integrators.schemas import SeparableField, VectorField


# ============================================================================
# Duffing oscillator
# ============================================================================

@dataclass(frozen=True)
class DuffingParams:
    """
    Duffing oscillator parameters.

    Attributes:
        alpha: Linear stiffness
        beta: Cubic (non-linear) stiffness
        gamma: Damping
        delta: Drive amplitude
        omega: Drive frequency
        phi: Drive phase
    """
    alpha: float = 1.0
    beta: float = 0.0
    gamma: float = 0.0
    delta: float = 0.0
    omega: float = 1.0
    phi: float = 0.0

    def __post_init__(self):
        values = asdict(self)
        bad = [name for name, v in values.items() if not np.isfinite(v)]
        if bad:
            raise ValueError(f"Duffing parameters must be finite: {bad}")
        if self.omega == 0:
            raise ValueError("Drive frequency omega must be non-zero")

    @property
    def conservative(self) -> bool:
        return self.gamma == 0 and self.delta == 0

    @property
    def reversible(self) -> bool:
        """Reversible under (q, p, t) -> (q, -p, -t + a) for some offset a."""
        return self.gamma == 0

    def reversing_offset(self) -> float:
        """Time offset a = -2φ/ω of the reversing operator for the forced system."""
        return -2.0 * self.phi / self.omega

    @classmethod
    def simple_oscillator(cls) -> "DuffingParams":
        return cls(alpha=1.0)

    @classmethod
    def nonlinear_oscillator(cls) -> "DuffingParams":
        return cls(alpha=-1.0, beta=1.0)

    @classmethod
    def forced_oscillator(cls) -> "DuffingParams":
        return cls(alpha=-0.2, beta=0.2, delta=0.15)

    @classmethod
    def damped_oscillator(cls) -> "DuffingParams":
        return cls(alpha=1.0, gamma=0.1)


def duffing_rhs(q, p, t, params: DuffingParams) -> Tuple:
    """
    Evaluate the Duffing right-hand side.

    Args:
        q: Position (float or array)
        p: Momentum (float or array)
        t: Time (float or array)
        params: Oscillator parameters

    Returns:
        Tuple (dq/dt, dp/dt)
    """
    dq = p
    dp = (-params.alpha * q - params.beta * q ** 3 - params.gamma * p
          + params.delta * np.cos(params.omega * t + params.phi))
    return dq, dp


class DuffingField(SeparableField):
    """Duffing oscillator on (q, p) states."""

    dim = 2

    def __init__(self, params: DuffingParams):
        self.params = params
        self.autonomous = params.delta == 0
        self.separable = params.conservative

    def kinetic_grad(self, p: Tensor, t: np.ndarray) -> Tensor:
        return p

    def potential_grad(self, q: Tensor, t: np.ndarray) -> Tensor:
        return q * self.params.alpha + (q ** 3) * self.params.beta

    def __call__(self, x: Tensor, t: np.ndarray) -> Tensor:
        if self.separable:
            return super().__call__(x, t)
        params = self.params
        q = columns(x, 0, 1)
        p = columns(x, 1, 2)
        dp = (q * -params.alpha - (q ** 3) * params.beta - p * params.gamma
              + params.delta * np.cos(params.omega * t + params.phi))
        return concat([p, dp], axis=1)


# ============================================================================
# Reversible strange attractor
# ============================================================================

def attractor_rhs(x, y, z) -> Tuple:
    """Right-hand side (1 + yz, -xz, y² + 2yz)."""
    return 1.0 + y * z, -x * z, y * y + 2.0 * y * z


class AttractorField(VectorField):
    """Chaotic flow reversible under full negation (x, y, z) -> (-x, -y, -z)."""

    dim = 3

    def __call__(self, state: Tensor, t: np.ndarray) -> Tensor:
        x = columns(state, 0, 1)
        y = columns(state, 1, 2)
        z = columns(state, 2, 3)
        yz = y * z
        return concat([1.0 + yz, -(x * z), y * y + yz * 2.0], axis=1)


# ============================================================================
# Linear fields
# ============================================================================

class LinearField(VectorField):
    """dx/dt = A x."""

    def __init__(self, matrix):
        matrix = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
        if matrix.shape[0] != matrix.shape[1]:
            raise ValueError(f"Linear field needs a square matrix, got {matrix.shape}")
        self.matrix = matrix
        self.dim = matrix.shape[0]

    def __call__(self, x: Tensor, t: np.ndarray) -> Tensor:
        return x @ self.matrix.T


# ============================================================================
# Coupled oscillators
# ============================================================================

@dataclass(frozen=True)
class CoupledOscillatorParams:
    """
    Two masses on springs joined by a coupling spring, with linear damping.

    State order is (q1, q2, p1, p2); unit masses.
    """
    k1: float = 1.0
    k2: float = 1.5
    coupling: float = 0.5
    damping1: float = 0.02
    damping2: float = 0.03


class CoupledOscillatorField(VectorField):
    """Linearly coupled damped oscillator pair on (q1, q2, p1, p2)."""

    dim = 4

    def __init__(self, params: CoupledOscillatorParams):
        self.params = params
        k1, k2, kc = params.k1, params.k2, params.coupling
        stiffness = np.array([[k1 + kc, -kc], [-kc, k2 + kc]])
        damping = np.diag([params.damping1, params.damping2])
        self.matrix = np.block([[np.zeros((2, 2)), np.eye(2)], [-stiffness, -damping]])

    def __call__(self, x: Tensor, t: np.ndarray) -> Tensor:
        return x @ self.matrix.T


# ============================================================================
# System specification
# ============================================================================

class SystemKind(str, Enum):
    """Ground-truth systems available to experiments."""
    DUFFING = "duffing"
    ATTRACTOR = "attractor"
    COUPLED_OSCILLATORS = "coupled_oscillators"


_STATE_DIMS = {
    SystemKind.DUFFING: 2,
    SystemKind.ATTRACTOR: 3,
    SystemKind.COUPLED_OSCILLATORS: 4,
}


class SystemSpec(BaseModel):
    """Which ground-truth system to simulate, with its parameters."""
    kind: SystemKind = SystemKind.DUFFING
    parameters: Dict[str, float] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_parameters(self) -> "SystemSpec":
        if self.kind is SystemKind.ATTRACTOR and self.parameters:
            raise ValueError("The attractor system takes no parameters")
        try:
            self.build_field()
        except TypeError as exc:
            raise ValueError(f"Invalid parameters for {self.kind.value}: {exc}") from exc
        return self

    @property
    def state_dim(self) -> int:
        return _STATE_DIMS[self.kind]

    @property
    def duffing_params(self) -> DuffingParams:
        if self.kind is not SystemKind.DUFFING:
            raise ValueError(f"{self.kind.value} is not a Duffing system")
        return DuffingParams(**self.parameters)

    def build_field(self) -> VectorField:
        if self.kind is SystemKind.DUFFING:
            return DuffingField(DuffingParams(**self.parameters))
        if self.kind is SystemKind.ATTRACTOR:
            return AttractorField()
        return CoupledOscillatorField(CoupledOscillatorParams(**self.parameters))
