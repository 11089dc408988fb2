"""
Data ingestion and export module for trsoden.

This module reads and writes trajectory CSV files and ingests measured
two-mass recordings.
"""

__version__ = "0.1.0"

from .schemas import RealDataSchema, TrajectoryFileError, component_names
from .exporter import (
    export_trajectories_to_csv,
    export_loss_history_to_csv,
    export_lyapunov_to_csv,
    export_table_to_csv,
    export_all_trajectories,
)
from .loader import load_trajectories_csv
from .real_data import Normalization, RealDataset, ingest_real_data, split_record, export_real_data, read_real_data

__all__ = [
    'RealDataSchema',
    'TrajectoryFileError',
    'component_names',
    'export_trajectories_to_csv',
    'export_loss_history_to_csv',
    'export_lyapunov_to_csv',
    'export_table_to_csv',
    'export_all_trajectories',
    'load_trajectories_csv',
    'Normalization',
    'RealDataset',
    'ingest_real_data',
    'split_record',
    'export_real_data',
    'read_real_data',
]
