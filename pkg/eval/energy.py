"""
Energy functions used to score predicted trajectories.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from dynamics.systems import DuffingParams, SystemKind, SystemSpec
from models.hoden import HodenModel, hamiltonian_values


@dataclass(frozen=True)
class EnergyFunction:
    """
    A scalar energy of phase-space states.

    Attributes:
        name: Label used in reports
        fn: Maps states (count, dim) and times (count,) to energies (count,)
    """
    name: str
    fn: Callable[[np.ndarray, np.ndarray], np.ndarray]

    def __call__(self, states: np.ndarray, times: Optional[np.ndarray] = None) -> np.ndarray:
        states = np.atleast_2d(np.asarray(states, dtype=np.float64))
        if times is None:
            times = np.zeros(states.shape[0])
        return np.asarray(self.fn(states, np.asarray(times, dtype=np.float64)), dtype=np.float64)

    @classmethod
    def oscillator(cls) -> "EnergyFunction":
        """E = q² + p² (simple and damped oscillators)."""
        return cls("q2_plus_p2", lambda x, t: np.sum(x * x, axis=1))

    @classmethod
    def duffing(cls, params: DuffingParams) -> "EnergyFunction":
        """H = p²/2 + αq²/2 + βq⁴/4, drive term excluded."""
        alpha, beta = params.alpha, params.beta

        def hamiltonian(x: np.ndarray, t: np.ndarray) -> np.ndarray:
            q, p = x[:, 0], x[:, 1]
            return 0.5 * p * p + 0.5 * alpha * q * q + 0.25 * beta * q ** 4

        return cls("duffing_hamiltonian", hamiltonian)

    @classmethod
    def from_model(cls, model: HodenModel, calibrate: bool = False) -> "EnergyFunction":
        """Learned energy K_θ1(p) + V_θ2(q) of a HodenModel."""
        return cls("hoden", lambda x, t: hamiltonian_values(model, x, t, calibrate=calibrate))


def energy_for_system(system: SystemSpec) -> Optional[EnergyFunction]:
    """
    Energy used for a ground-truth system, or None when it has none.

    Duffing systems without cubic stiffness use q² + p²; the others use
    their Hamiltonian with the drive excluded.
    """
    if system.kind is not SystemKind.DUFFING:
        return None
    params = system.duffing_params
    if params.beta == 0:
        return EnergyFunction.oscillator()
    return EnergyFunction.duffing(params)
