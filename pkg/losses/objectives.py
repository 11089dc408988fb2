"""
Training objectives.

- L_ODE: squared error of the model's rollout against observed states
- L_TRS: squared discrepancy between the reversed forward chain R(x̃) and the
  backward chain x̃_R started at R(x̃(t0)) and stepped with -Δt
- Combined objective L_ODE + λ L_TRS, with per-step λ(t_i) weights for
  time-dependent schedules

Losses are computed on batches of equal-length segments and return scalar
tensors, so `loss.tape.backward(loss)` yields parameter gradients. Every loss
is a sum over steps and a mean over segments.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger

from autodiff.tensor import NonFiniteError, ShapeError, Tape, Tensor, square
from autodiff.tensor import sum as tensor_sum
from integrators.rollout import integrate
from integrators.schemas import SolverConfig, SolverError, SolverMethod, State, Trajectory, VectorField

from .schedules import LambdaSchedule, lambda_value
from .symmetry import ReversingOperator


# ============================================================================
# Segment batches
# ============================================================================

@dataclass
class SegmentBatch:
    """
    Equal-length training segments stacked for batched rollouts.

    Attributes:
        states: Observed states, shape (batch, T + 1, dim)
        times: Time stamps, shape (batch, T + 1)
    """
    states: np.ndarray
    times: np.ndarray

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=np.float64)
        self.times = np.asarray(self.times, dtype=np.float64)
        if self.states.ndim != 3 or self.times.shape != self.states.shape[:2]:
            raise ShapeError(
                f"SegmentBatch needs states (B, T+1, d) and times (B, T+1), "
                f"got {self.states.shape} and {self.times.shape}"
            )
        if self.states.shape[1] < 2:
            raise ShapeError("Segments need at least one transition")

    @classmethod
    def from_trajectories(cls, segments: Sequence[Trajectory]) -> "SegmentBatch":
        lengths = {len(s) for s in segments}
        if len(lengths) != 1:
            raise ShapeError(f"Segments in one batch must share a length, got {sorted(lengths)}")
        return cls(
            states=np.stack([s.states for s in segments]),
            times=np.stack([s.times for s in segments]),
        )

    def __len__(self) -> int:
        return self.states.shape[0]

    @property
    def steps(self) -> int:
        return self.states.shape[1] - 1

    @property
    def dim(self) -> int:
        return self.states.shape[2]

    @property
    def dts(self) -> np.ndarray:
        """Per-segment step sizes, shape (batch, T)."""
        return np.diff(self.times, axis=1)

    @property
    def initial_states(self) -> np.ndarray:
        return self.states[:, 0, :]

    @property
    def initial_times(self) -> np.ndarray:
        return self.times[:, :1]

    def step_sizes(self) -> List[np.ndarray]:
        """Step sizes as a list of (batch, 1) columns, one per transition."""
        dts = self.dts
        return [dts[:, i:i + 1] for i in range(self.steps)]

    def subset(self, indices: Sequence[int]) -> "SegmentBatch":
        indices = np.asarray(indices, dtype=int)
        return SegmentBatch(self.states[indices], self.times[indices])


def batch_segments(segments: Sequence[Trajectory]) -> List[SegmentBatch]:
    """Group segments by length, keeping first-appearance order of lengths."""
    groups: Dict[int, List[Trajectory]] = {}
    for segment in segments:
        groups.setdefault(len(segment), []).append(segment)
    return [SegmentBatch.from_trajectories(group) for group in groups.values()]


# ============================================================================
# Helpers
# ============================================================================

def resolve_field(model) -> VectorField:
    """Accept either a VectorField or a model exposing `.field()`."""
    if isinstance(model, VectorField):
        return model
    if hasattr(model, "field"):
        return model.field()
    raise TypeError(f"Expected a VectorField or a model, got {type(model).__name__}")


def _initial_batch(initial, tape: Tape) -> Tensor:
    if isinstance(initial, Tensor):
        return initial
    if isinstance(initial, State):
        initial = initial.values
    return tape.constant(np.atleast_2d(np.asarray(initial, dtype=np.float64)))


def _squared_norms(a: Tensor, b: Tensor) -> Tensor:
    """Per-sample squared Euclidean distance, shape (batch,)."""
    if a.shape != b.shape:
        raise ShapeError(f"Grid mismatch: {a.shape} vs {b.shape}")
    return tensor_sum(square(a - b), axis=1)


def _weighted_mean(per_step: List[Tensor], weights: Optional[np.ndarray], batch: int) -> Tensor:
    total = None
    for i, term in enumerate(per_step):
        if weights is not None:
            term = term * weights[:, i]
        total = term if total is None else total + term
    return tensor_sum(total) / float(batch)


# ============================================================================
# L_ODE
# ============================================================================

def ode_loss(predicted: Union[Sequence[Tensor], np.ndarray], batch: SegmentBatch) -> Tensor:
    """
    Σ_i ‖x̃(t_{i+1}) - x(t_{i+1})‖², averaged over segments.

    Args:
        predicted: Rollout seeded at the observed initial states, either a
            list of T + 1 (batch, dim) tensors or an array (batch, T + 1, dim)
        batch: Observed segments on the same grid

    Returns:
        Scalar loss tensor

    Raises:
        ShapeError: rollout and observation grids differ
    """
    if not isinstance(predicted, (list, tuple)):
        array = np.asarray(predicted, dtype=np.float64)
        if array.ndim != 3:
            raise ShapeError(f"Predicted states must be (batch, T+1, dim), got {array.shape}")
        tape = Tape(record=False)
        predicted = [tape.constant(array[:, i, :]) for i in range(array.shape[1])]
    if len(predicted) != batch.steps + 1:
        raise ShapeError(f"Rollout has {len(predicted)} states, observations have {batch.steps + 1}")
    per_step = [
        _squared_norms(predicted[i + 1], batch.states[:, i + 1, :]) for i in range(batch.steps)
    ]
    return _weighted_mean(per_step, None, len(batch))


# ============================================================================
# L_TRS
# ============================================================================

def reversal_chains(field: VectorField, x0: Tensor, t0: np.ndarray, dts: Sequence,
                    op: ReversingOperator, method: SolverMethod,
                    forward: Optional[List[Tensor]] = None) -> Tuple[List[Tensor], List[Tensor]]:
    """
    Forward chain x̃ from x0 and backward chain x̃_R from R(x0) with -Δt.

    For non-autonomous fields the backward chain starts at the reflected time
    τ0 = -t0 + a, so its i-th state sits at τ_i = -t_i + a.

    Args:
        field: Vector field
        x0: Initial states (batch, dim)
        t0: Initial times (batch, 1)
        dts: Positive step sizes, one per transition
        op: Reversing operator
        method: Integrator shared by both chains
        forward: Precomputed forward chain to reuse

    Returns:
        Tuple (forward, backward), each a list of T + 1 tensors
    """
    if op.dim != field.dim:
        raise ShapeError(f"Reversing operator acts on dimension {op.dim}, field has {field.dim}")
    t0 = np.asarray(t0, dtype=np.float64)
    if forward is None:
        forward = integrate(field, x0, t0, dts, method)
    tau0 = op.reflect_time(t0) if not field.autonomous else t0
    backward = integrate(field, op(forward[0]), tau0, [-dt for dt in dts], method)
    return forward, backward


def _trs_terms(forward: List[Tensor], backward: List[Tensor], op: ReversingOperator) -> List[Tensor]:
    return [_squared_norms(op(forward[i]), backward[i]) for i in range(1, len(forward))]


def _chain_inputs(initial, steps: int, solver: SolverConfig, initial_time, tape: Optional[Tape]):
    if steps < 1:
        raise ValueError(f"L_TRS needs steps >= 1, got {steps}")
    if solver.step <= 0:
        raise SolverError(f"L_TRS takes the forward step size, got {solver.step}")
    tape = tape if tape is not None else Tape()
    x0 = _initial_batch(initial, tape)
    if isinstance(initial, State) and initial_time is None:
        initial_time = initial.time
    t0 = np.full((x0.shape[0], 1), 0.0 if initial_time is None else initial_time, dtype=np.float64)
    return x0, t0, [solver.step] * steps


def trs_loss(model, initial, steps: int, op: ReversingOperator, solver: SolverConfig,
             initial_time: Optional[float] = None, tape: Optional[Tape] = None) -> Tensor:
    """
    L_TRS for an autonomous model.

    No observed data enters: both chains are the model's own rollouts.

    Args:
        model: Autonomous VectorField or model
        initial: Initial state(s): State, (dim,) or (batch, dim) array, or Tensor
        steps: Transitions per chain
        op: Reversing operator
        solver: Integrator and positive forward step
        initial_time: Start time (defaults to the State's time, else 0)
        tape: Tape to record on (a fresh recording tape by default)

    Returns:
        Scalar loss tensor (sum over steps, mean over the batch)

    Raises:
        SolverError: non-autonomous field, or a non-positive step
    """
    field = resolve_field(model)
    if not field.autonomous:
        raise SolverError("trs_loss needs an autonomous field; use trs_loss_nonautonomous")
    x0, t0, dts = _chain_inputs(initial, steps, solver, initial_time, tape)
    forward, backward = reversal_chains(field, x0, t0, dts, op, solver.method)
    return _weighted_mean(_trs_terms(forward, backward, op), None, x0.shape[0])


def trs_loss_nonautonomous(model, initial, steps: int, op: ReversingOperator, solver: SolverConfig,
                           initial_time: Optional[float] = None, tape: Optional[Tape] = None) -> Tensor:
    """
    L_TRS for a time-dependent model.

    The backward chain runs at reflected times τ_i = -t_i + a, with a taken
    from the operator's time offset (0 when unset).

    Raises:
        SolverError: autonomous field passed
    """
    field = resolve_field(model)
    if field.autonomous:
        raise SolverError("trs_loss_nonautonomous needs a time-dependent field")
    x0, t0, dts = _chain_inputs(initial, steps, solver, initial_time, tape)
    forward, backward = reversal_chains(field, x0, t0, dts, op, solver.method)
    return _weighted_mean(_trs_terms(forward, backward, op), None, x0.shape[0])


# ============================================================================
# Combined objective
# ============================================================================

@dataclass
class LossTerms:
    """
    Components of the combined objective as scalar tensors.

    `trs` is off the gradient path when every λ weight is zero, and None if
    that unweighted backward chain blew up.
    """
    total: Tensor
    ode: Tensor
    trs: Optional[Tensor]

    def values(self) -> Dict[str, float]:
        trs = self.trs.item() if self.trs is not None else float("nan")
        return {'total': self.total.item(), 'l_ode': self.ode.item(), 'l_trs': trs}


def _unweighted_trs(field: VectorField, forward: List[Tensor], t0: np.ndarray, dts: Sequence,
                    op: ReversingOperator, method: SolverMethod, batch: int) -> Optional[Tensor]:
    """L_TRS on a non-recording tape, reported but never differentiated."""
    tape = Tape(record=False)
    detached = [tape.constant(x.value) for x in forward]
    try:
        _, backward = reversal_chains(field, detached[0], t0, dts, op, method, forward=detached)
        return _weighted_mean(_trs_terms(detached, backward, op), None, batch)
    except NonFiniteError as exc:
        logger.debug(f"Unweighted backward chain is non-finite: {exc}")
        return None


def combined_loss(batch: SegmentBatch, model, op: ReversingOperator, schedule: LambdaSchedule,
                  method: SolverMethod = SolverMethod.RK4,
                  t_range: Optional[Tuple[float, float]] = None,
                  tape: Optional[Tape] = None) -> LossTerms:
    """
    L_ODE + λ L_TRS on one batch of segments.

    The forward chain is shared by both terms and seeded at the observed
    initial states. For time-dependent schedules each summand of L_TRS is
    weighted by λ(t_i), t_i being the start time of the transition. When
    every weight is zero the total is exactly L_ODE and the backward chain
    stays off the tape, so it can neither contribute gradients nor abort
    training.

    Args:
        batch: Observed segments
        model: VectorField or model
        op: Reversing operator
        schedule: λ schedule
        method: Integrator
        t_range: Normalization range (t_min, t_max) for time-dependent
            schedules; defaults to the batch's own span
        tape: Tape to record on (a fresh recording tape by default)

    Returns:
        LossTerms with total, ode and trs tensors
    """
    field = resolve_field(model)
    if field.dim != batch.dim:
        raise ShapeError(f"Model dimension {field.dim} does not match data dimension {batch.dim}")
    if op.dim != field.dim:
        raise ShapeError(f"Reversing operator acts on dimension {op.dim}, field has {field.dim}")
    tape = tape if tape is not None else Tape()
    x0 = tape.constant(batch.initial_states)
    t0 = batch.initial_times
    dts = batch.step_sizes()

    weights = None
    if schedule.time_dependent and not schedule.is_zero:
        t_min, t_max = t_range if t_range is not None else (float(batch.times.min()), float(batch.times.max()))
        weights = np.asarray(lambda_value(schedule, batch.times[:, :-1], t_min, t_max), dtype=np.float64)
    inactive = schedule.is_zero or (weights is not None and not np.any(weights))

    forward = integrate(field, x0, t0, dts, method)
    ode = ode_loss(forward, batch)
    if inactive:
        trs = _unweighted_trs(field, forward, t0, dts, op, method, len(batch))
        return LossTerms(total=ode, ode=ode, trs=trs)

    _, backward = reversal_chains(field, x0, t0, dts, op, method, forward=forward)
    trs_terms = _trs_terms(forward, backward, op)
    trs = _weighted_mean(trs_terms, None, len(batch))
    if weights is None:
        return LossTerms(total=ode + trs * schedule.coefficient, ode=ode, trs=trs)
    return LossTerms(total=ode + _weighted_mean(trs_terms, weights, len(batch)), ode=ode, trs=trs)
