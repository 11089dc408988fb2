"""
Training and test data of an experiment.

Simulated experiments generate their dataset from the config; the real-data
experiment reads a two-mass recording, or builds the synthetic stand-in when
no file is configured.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from loguru import logger

from dynamics.datasets import generate_dataset, simulate_coupled_record
from ingest.exporter import export_all_trajectories
from ingest.loader import load_trajectories_csv
from ingest.real_data import export_real_data, ingest_real_data, split_record
from integrators.schemas import Trajectory

from .config import ExperimentConfig

TRAIN_FILE = "train.csv"
TRAIN_CLEAN_FILE = "train_clean.csv"
TEST_FILE = "test.csv"
STAND_IN_FILE = "real_data.csv"


@dataclass
class ExperimentData:
    """
    Attributes:
        train: Training trajectories (noisy for simulated data)
        test: Clean test trajectories
        train_clean: Noise-free training trajectories, when known
        metadata: Provenance, e.g. real-data normalization constants
    """
    train: List[Trajectory]
    test: List[Trajectory]
    train_clean: Optional[List[Trajectory]] = None
    metadata: Dict[str, Any] = field(default_factory=dict)


def stand_in_record(config: ExperimentConfig) -> Trajectory:
    """Synthetic two-mass recording for configs without a data file."""
    real = config.real_data
    return simulate_coupled_record(length=real.stand_in_length - 1, dt=config.dataset.dt,
                                   sigma=real.stand_in_sigma, seed=config.dataset.seed)


def prepare_data(config: ExperimentConfig) -> ExperimentData:
    """
    Build the experiment's data in memory.

    Args:
        config: Experiment configuration

    Returns:
        ExperimentData
    """
    real = config.real_data
    if real is None:
        dataset = generate_dataset(config.dataset)
        return ExperimentData(dataset.train_noisy, dataset.test, dataset.train_clean,
                              {'source': 'simulated', 'system': config.dataset.system.kind.value})

    max_len = config.training.max_segment_length
    if real.path is not None:
        split = ingest_real_data(real.path, split_fraction=real.split_fraction, max_len=max_len,
                                 normalize=real.normalize)
        source = real.path
    else:
        logger.info("No recording configured; using the synthetic two-mass stand-in")
        split = split_record(stand_in_record(config), split_fraction=real.split_fraction, max_len=max_len,
                             normalize=real.normalize, source="stand-in")
        source = "stand-in"
    return ExperimentData([split.train], [split.test], None, {'source': source, **split.metadata()})


def write_data(data: ExperimentData, output_dir: Union[str, Path]) -> List[Path]:
    """Write train.csv, train_clean.csv (if known) and test.csv."""
    output_dir = Path(output_dir)
    train_clean = data.train_clean if data.train_clean is not None else data.train
    return export_all_trajectories(data.train, train_clean, data.test, output_dir)


def generate_files(config: ExperimentConfig, output_dir: Union[str, Path]) -> ExperimentData:
    """
    Generate the experiment's data and write it as trajectory files.

    For the real-data experiment without a file, the stand-in recording is
    also written in the recording layout.
    """
    output_dir = Path(output_dir)
    data = prepare_data(config)
    if config.real_data is not None and config.real_data.path is None:
        export_real_data(stand_in_record(config), output_dir / STAND_IN_FILE)
    written = write_data(data, output_dir)
    logger.info(f"Wrote {', '.join(p.name for p in written)} to {output_dir}")
    return data


def load_data(data_dir: Union[str, Path]) -> ExperimentData:
    """Read train.csv and test.csv (and train_clean.csv when present) from a directory."""
    data_dir = Path(data_dir)
    clean_path = data_dir / TRAIN_CLEAN_FILE
    return ExperimentData(
        train=load_trajectories_csv(data_dir / TRAIN_FILE),
        test=load_trajectories_csv(data_dir / TEST_FILE),
        train_clean=load_trajectories_csv(clean_path) if clean_path.exists() else None,
        metadata={'source': str(data_dir)},
    )
