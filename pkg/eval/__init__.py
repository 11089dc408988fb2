"""
Evaluation module for trsoden.

Provides:
- Energy functions for ground-truth systems and learned Hamiltonians
- Trajectory, energy and per-component MSE with MetricReport JSON
- Forward/backward relative error and Hamiltonian symmetry gap
- Finite-time Lyapunov exponents
"""

__version__ = "0.1.0"

from .energy import EnergyFunction, energy_for_system
from .metrics import (
    MseSummary,
    MetricReport,
    trajectory_mse,
    energy_mse,
    component_mse,
    export_report_json,
    load_report_json,
)
from .symmetry_checks import (
    RelativeError,
    SymmetryGap,
    forward_backward_relative_error,
    hamiltonian_symmetry_gap,
)
from .lyapunov import LyapunovSeries, lyapunov_exponent, ensemble_lyapunov

__all__ = [
    'EnergyFunction',
    'energy_for_system',
    'MseSummary',
    'MetricReport',
    'trajectory_mse',
    'energy_mse',
    'component_mse',
    'export_report_json',
    'load_report_json',
    'RelativeError',
    'SymmetryGap',
    'forward_backward_relative_error',
    'hamiltonian_symmetry_gap',
    'LyapunovSeries',
    'lyapunov_exponent',
    'ensemble_lyapunov',
]
