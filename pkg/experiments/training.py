"""
Training loop.

Each epoch runs Adam on the combined objective L_ODE + λ L_TRS. Full-batch
training takes one step per epoch over every segment; minibatch training
shuffles the segments with the config seed and takes one step per batch.
Segments of different lengths are batched separately and their losses
combined weighted by segment count, which equals the mean over segments.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger

from autodiff.adam import AdamState, adam_step
from autodiff.tensor import NonFiniteError, Tape
from dynamics.datasets import split_trajectories
from integrators.schemas import Trajectory
from losses.objectives import SegmentBatch, batch_segments, combined_loss
from models.hoden import HodenModel
from models.oden import OdenModel

from .config import ExperimentConfig, ModelKind

Model = Union[OdenModel, HodenModel]

# Random stream identifiers (dataset generation uses 0-2)
INIT_STREAM = 10
SHUFFLE_STREAM = 11

HISTORY_COLUMNS = ['epoch', 'l_ode', 'l_trs', 'total']


class TrainingAbortedError(NonFiniteError):
    """Raised when a loss or gradient becomes NaN/Inf; carries the epoch."""

    def __init__(self, epoch: int, message: str = ""):
        self.epoch = epoch
        super().__init__(message or f"Training aborted at epoch {epoch}: non-finite loss")


@dataclass
class TrainingResult:
    """Trained model and its per-epoch loss history."""
    model: Model
    history: pd.DataFrame
    config: ExperimentConfig

    @property
    def initial_loss(self) -> float:
        """Total loss of the first epoch; NaN when no epoch ran."""
        return float(self.history['total'].iloc[0]) if len(self.history) else float("nan")

    @property
    def final_loss(self) -> float:
        return float(self.history['total'].iloc[-1]) if len(self.history) else float("nan")


def build_model(config: ExperimentConfig) -> Model:
    """Freshly initialized model seeded from `config.seed`."""
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, INIT_STREAM]))
    model_cfg = config.model
    if model_cfg.kind is ModelKind.ODEN:
        return OdenModel.initialize(config.state_dim, model_cfg.hidden_dims, model_cfg.time_augmented, rng)
    return HodenModel.initialize(config.state_dim, model_cfg.hidden_dims, model_cfg.time_augmented, rng)


def time_range(segments: Sequence[Trajectory]) -> Tuple[float, float]:
    """Global time span of the training segments (λ normalization range)."""
    return (float(min(s.times.min() for s in segments)), float(max(s.times.max() for s in segments)))


def _step_groups(segments: List[Trajectory], batch_size: Optional[int],
                 rng: np.random.Generator) -> List[List[SegmentBatch]]:
    if batch_size is None:
        return [batch_segments(segments)]
    order = rng.permutation(len(segments))
    return [
        batch_segments([segments[i] for i in order[start:start + batch_size]])
        for start in range(0, len(segments), batch_size)
    ]


def train(config: ExperimentConfig, trajectories: Sequence[Trajectory],
          model: Optional[Model] = None) -> TrainingResult:
    """
    Train a model on trajectories according to `config`.

    Args:
        config: A single job (see ExperimentConfig.expand)
        trajectories: Training trajectories, split here into segments of at
            most `training.max_segment_length` transitions
        model: Starting model (a fresh seeded model by default)

    Returns:
        TrainingResult with the trained model and loss history

    Raises:
        TrainingAbortedError: a loss or gradient became non-finite
    """
    if config.runs:
        raise ValueError("train() takes a single job; call config.expand() first")
    settings = config.training
    segments = split_trajectories(trajectories, settings.max_segment_length)
    t_range = time_range(segments)
    op = config.reversing_operator()
    schedule = config.schedule
    method = config.solver.method

    model = model if model is not None else build_model(config)
    params = model.parameters()
    state = AdamState.for_params(params, learning_rate=settings.learning_rate)
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, SHUFFLE_STREAM]))

    param_count = int(sum(p.size for p in params))
    logger.info(
        f"Training {config.experiment_id}/{config.label}: {model.kind}, {len(segments)} segments, "
        f"{param_count} parameters, λ={schedule.label()}, {settings.epochs} epochs"
    )

    records = []
    for epoch in range(1, settings.epochs + 1):
        epoch_totals = np.zeros(3)
        for group in _step_groups(segments, settings.batch_size, rng):
            count = sum(len(batch) for batch in group)
            grads = [np.zeros_like(p) for p in params]
            try:
                for batch in group:
                    tape = Tape()
                    terms = combined_loss(batch, model, op, schedule, method, t_range, tape)
                    weight = len(batch) / count
                    for acc, g in zip(grads, tape.backward(terms.total).for_arrays(params)):
                        acc += weight * g
                    values = terms.values()
                    epoch_totals += (len(batch) / len(segments)) * np.array(
                        [values['l_ode'], values['l_trs'], values['total']]
                    )
                params, state = adam_step(params, grads, state)
            except NonFiniteError as exc:
                logger.error(f"Non-finite loss in {config.label} at epoch {epoch}: {exc}")
                raise TrainingAbortedError(epoch) from exc
            model = model.with_parameters(params)
            params = model.parameters()

        records.append({'epoch': epoch, 'l_ode': epoch_totals[0], 'l_trs': epoch_totals[1],
                        'total': epoch_totals[2]})
        if epoch % settings.log_every == 0 or epoch == settings.epochs:
            logger.info(f"[{config.label}] epoch {epoch}: L_ODE={epoch_totals[0]:.6g} "
                        f"L_TRS={epoch_totals[1]:.6g} total={epoch_totals[2]:.6g}")

    history = pd.DataFrame(records, columns=HISTORY_COLUMNS)
    logger.success(f"Finished training {config.experiment_id}/{config.label}")
    return TrainingResult(model=model, history=history, config=config)
