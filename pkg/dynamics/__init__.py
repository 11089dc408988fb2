"""
Ground-truth systems and dataset generation for trsoden.

- Duffing oscillators (conservative, forced, damped regimes)
- Reversible strange attractor
- Coupled damped oscillators (two-mass stand-in data)
- Annulus / axis-uniform initial-state sampling
- Noisy dataset generation and segment splitting
"""

__version__ = "0.1.0"

from .systems import (
    DuffingParams,
    DuffingField,
    duffing_rhs,
    AttractorField,
    attractor_rhs,
    LinearField,
    CoupledOscillatorParams,
    CoupledOscillatorField,
    SystemKind,
    SystemSpec,
)
from .sampling import SamplerKind, SamplerSpec, sample_annulus
from .datasets import (
    NoiseSpec,
    DatasetSpec,
    Dataset,
    generate_dataset,
    simulate,
    add_noise,
    split_trajectories,
    simulate_coupled_record,
    stream_rng,
)

__all__ = [
    'DuffingParams',
    'DuffingField',
    'duffing_rhs',
    'AttractorField',
    'attractor_rhs',
    'LinearField',
    'CoupledOscillatorParams',
    'CoupledOscillatorField',
    'SystemKind',
    'SystemSpec',
    'SamplerKind',
    'SamplerSpec',
    'sample_annulus',
    'NoiseSpec',
    'DatasetSpec',
    'Dataset',
    'generate_dataset',
    'simulate',
    'add_noise',
    'split_trajectories',
    'simulate_coupled_record',
    'stream_rng',
]
