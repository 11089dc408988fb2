"""
Experiment orchestration for trsoden.

- Configuration and shipped presets
- Data preparation (simulated datasets, real or stand-in recordings)
- Training loop and evaluation
- Report tables
"""

__version__ = "0.1.0"

from .config import (
    ModelKind,
    ModelConfig,
    SolverSettings,
    ReversingConfig,
    TrainingSettings,
    RealDataConfig,
    RunVariant,
    ExperimentConfig,
    load_config,
    load_preset,
    save_config,
)
from .data import ExperimentData, prepare_data, generate_files, load_data, write_data
from .training import TrainingAbortedError, TrainingResult, build_model, train
from .evaluation import predict, evaluate, critical_point_rollouts, CriticalPointResult, CRITICAL_POINTS
from .report import collate_reports, component_table, TWO_MASS_GROUPS

__all__ = [
    'ModelKind',
    'ModelConfig',
    'SolverSettings',
    'ReversingConfig',
    'TrainingSettings',
    'RealDataConfig',
    'RunVariant',
    'ExperimentConfig',
    'load_config',
    'load_preset',
    'save_config',
    'ExperimentData',
    'prepare_data',
    'generate_files',
    'load_data',
    'write_data',
    'TrainingAbortedError',
    'TrainingResult',
    'build_model',
    'train',
    'predict',
    'evaluate',
    'critical_point_rollouts',
    'CriticalPointResult',
    'CRITICAL_POINTS',
    'collate_reports',
    'component_table',
    'TWO_MASS_GROUPS',
]
