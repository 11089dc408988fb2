"""
Experiment configuration.

An ExperimentConfig describes one experiment end to end: dataset, model,
solver, reversing operator, λ schedule and training protocol. Presets may
list `runs`, each overriding some of those sections; `expand()` turns a
preset into one concrete job per run.
"""

import json
from enum import Enum
from pathlib import Path
from typing import List, Literal, Optional, Union

from pydantic import BaseModel, Field, field_validator, model_validator

from dynamics.datasets import DatasetSpec
from integrators.schemas import SolverConfig, SolverMethod
from losses.schedules import LambdaSchedule
from losses.symmetry import ReversalKind, ReversingOperator

PRESET_DIR = Path(__file__).parent / "presets"
SCHEMA_VERSION = 1


class ModelKind(str, Enum):
    ODEN = "oden"
    HODEN = "hoden"


class ModelConfig(BaseModel):
    """Model family and hidden-layer widths (HODEN: per network)."""
    kind: ModelKind = ModelKind.ODEN
    hidden_dims: List[int] = Field(default_factory=lambda: [1000], min_length=1)
    time_augmented: bool = False

    @field_validator("hidden_dims")
    @classmethod
    def _positive_widths(cls, widths: List[int]) -> List[int]:
        if any(w < 1 for w in widths):
            raise ValueError(f"Hidden widths must be >= 1, got {widths}")
        return widths


class SolverSettings(BaseModel):
    """Integrator; `dt` defaults to the dataset grid step."""
    method: SolverMethod = SolverMethod.RK4
    dt: Optional[float] = Field(None, gt=0)


class ReversingConfig(BaseModel):
    """Reversing operator R, with the time offset a for time-dependent models."""
    kind: ReversalKind = ReversalKind.MOMENTUM_FLIP
    mask: Optional[List[float]] = None
    time_offset: Optional[float] = None

    @model_validator(mode="after")
    def _check_mask(self) -> "ReversingConfig":
        if self.kind is ReversalKind.CUSTOM:
            if not self.mask:
                raise ValueError("A custom reversing operator needs a sign mask")
            if any(abs(s) != 1 for s in self.mask):
                raise ValueError(f"Reversing mask entries must be +1 or -1, got {self.mask}")
        elif self.mask is not None:
            raise ValueError(f"A mask is only allowed for custom operators, got kind {self.kind.value}")
        return self

    def build(self, dim: int) -> ReversingOperator:
        if self.kind is ReversalKind.MOMENTUM_FLIP:
            return ReversingOperator.momentum_flip(dim, self.time_offset)
        if self.kind is ReversalKind.FULL_NEGATION:
            return ReversingOperator.full_negation(dim, self.time_offset)
        return ReversingOperator.custom(self.mask, self.time_offset)


class TrainingSettings(BaseModel):
    """Optimization protocol."""
    epochs: int = Field(5000, ge=0)
    learning_rate: float = Field(2e-4, gt=0)
    batch_size: Optional[int] = Field(None, ge=1)
    max_segment_length: int = Field(10, ge=2)
    log_every: int = Field(100, ge=1)

    @property
    def full_batch(self) -> bool:
        return self.batch_size is None


class RealDataConfig(BaseModel):
    """
    Measured recording used instead of simulated trajectories.

    Without a path, a synthetic two-mass stand-in recording is generated.
    """
    path: Optional[str] = None
    split_fraction: float = Field(0.6, gt=0, lt=1)
    normalize: bool = True
    stand_in_length: int = Field(500, ge=10)
    stand_in_sigma: float = Field(0.01, ge=0)


class RunVariant(BaseModel):
    """One job of a preset; unset sections inherit from the experiment."""
    label: str
    model: Optional[ModelConfig] = None
    solver: Optional[SolverSettings] = None
    reversing: Optional[ReversingConfig] = None
    schedule: Optional[LambdaSchedule] = None


class ExperimentConfig(BaseModel):
    """
    Declarative description of an experiment.

    Attributes:
        schema_version: Config format version (1)
        experiment_id: Identifier used in reports (e.g. "exp1")
        label: Run label of a single job (e.g. "TRS-ODEN(λ=10)")
        dataset: Dataset description (system parameters included)
        model: Model family and architecture
        solver: Integrator and step
        reversing: Reversing operator
        schedule: λ schedule
        training: Optimization protocol
        seed: Training seed (initialization and minibatch order)
        output_dir: Directory for run outputs
        real_data: Recording replacing simulated data, if any
        runs: Jobs of a preset
    """
    schema_version: Literal[1] = SCHEMA_VERSION
    experiment_id: str = "custom"
    label: str = "run"
    dataset: DatasetSpec = Field(default_factory=DatasetSpec)
    model: ModelConfig = Field(default_factory=ModelConfig)
    solver: SolverSettings = Field(default_factory=SolverSettings)
    reversing: ReversingConfig = Field(default_factory=ReversingConfig)
    schedule: LambdaSchedule = Field(default_factory=LambdaSchedule)
    training: TrainingSettings = Field(default_factory=TrainingSettings)
    seed: int = 0
    output_dir: str = "runs"
    real_data: Optional[RealDataConfig] = None
    runs: List[RunVariant] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_jobs(self) -> "ExperimentConfig":
        dim = self.state_dim
        labels = [run.label for run in self.runs]
        if len(set(labels)) != len(labels):
            raise ValueError(f"Run labels must be unique, got {labels}")
        _check_job(self.label, self.model, self.solver, self.reversing, dim)
        for run in self.runs:
            _check_job(
                run.label,
                run.model or self.model,
                run.solver or self.solver,
                run.reversing or self.reversing,
                dim,
            )
        return self

    @property
    def state_dim(self) -> int:
        return self.dataset.system.state_dim

    @property
    def step(self) -> float:
        return self.solver.dt if self.solver.dt is not None else self.dataset.dt

    def solver_config(self) -> SolverConfig:
        return SolverConfig(self.solver.method, self.step)

    def reversing_operator(self) -> ReversingOperator:
        return self.reversing.build(self.state_dim)

    def expand(self) -> List["ExperimentConfig"]:
        """One concrete job per run variant (the config itself when there are none)."""
        if not self.runs:
            return [self]
        jobs = []
        for run in self.runs:
            update = {'label': run.label, 'runs': []}
            for section in ("model", "solver", "reversing", "schedule"):
                override = getattr(run, section)
                if override is not None:
                    update[section] = override
            jobs.append(ExperimentConfig.model_validate({**self.model_dump(), **{
                key: value.model_dump() if isinstance(value, BaseModel) else value
                for key, value in update.items()
            }}))
        return jobs

    def job(self, label: str) -> "ExperimentConfig":
        for job in self.expand():
            if job.label == label:
                return job
        raise ValueError(f"No run labelled {label!r}; available: {[j.label for j in self.expand()]}")


def _check_job(label: str, model: ModelConfig, solver: SolverSettings,
               reversing: ReversingConfig, dim: int) -> None:
    prefix = f"run {label!r}: "
    if solver.method is SolverMethod.LEAPFROG:
        if model.time_augmented:
            raise ValueError(prefix + "leapfrog is not available for time-augmented models")
        if model.kind is ModelKind.ODEN:
            raise ValueError(prefix + "leapfrog needs a separable Hamiltonian model (hoden)")
    if model.kind is ModelKind.HODEN and dim % 2:
        raise ValueError(prefix + f"hoden needs an even state dimension, got {dim}")
    if reversing.kind is ReversalKind.MOMENTUM_FLIP and dim % 2:
        raise ValueError(prefix + f"momentum_flip needs an even state dimension, got {dim}")
    if reversing.kind is ReversalKind.CUSTOM and len(reversing.mask) != dim:
        raise ValueError(prefix + f"reversing mask has {len(reversing.mask)} entries for dimension {dim}")
    if reversing.time_offset is not None and not model.time_augmented:
        raise ValueError(prefix + "a reversing time offset needs a time-augmented model")


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """Load and validate an experiment config JSON file."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Config not found: {path}")
    return ExperimentConfig.model_validate(json.loads(path.read_text()))


def load_preset(name: str) -> ExperimentConfig:
    """Load a shipped preset by name, e.g. "exp1"."""
    path = PRESET_DIR / f"{Path(name).stem}.json"
    if not path.exists():
        available = sorted(p.stem for p in PRESET_DIR.glob("*.json"))
        raise FileNotFoundError(f"Unknown preset {name!r}; available: {available}")
    return load_config(path)


def save_config(config: ExperimentConfig, path: Union[str, Path]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(config.model_dump_json(indent=2))
