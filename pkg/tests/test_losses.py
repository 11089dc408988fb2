"""
Unit tests for reversing operators, λ schedules and the training objectives.
"""

import numpy as np
import pytest
from pydantic import ValidationError

from autodiff.tensor import NonFiniteError, ShapeError, Tape
from dynamics.datasets import simulate
from dynamics.systems import DuffingField, DuffingParams, LinearField
from integrators.schemas import FunctionField, SolverConfig, SolverError, SolverMethod, State, Trajectory
from losses.objectives import (
    SegmentBatch,
    batch_segments,
    combined_loss,
    ode_loss,
    trs_loss,
    trs_loss_nonautonomous,
)
from losses.schedules import LambdaSchedule, lambda_value
from losses.symmetry import ReversalKind, ReversingOperator, apply_reversing
from models.oden import OdenModel

pytestmark = [pytest.mark.unit, pytest.mark.losses]


@pytest.fixture
def drift_field():
    """dx/dt = 1 in one dimension."""
    return FunctionField(lambda x, t: x * 0.0 + 1.0, dim=1)


@pytest.fixture
def resting_batch():
    """One observed segment sitting at 0 on the grid 0, 0.1, 0.2."""
    return SegmentBatch(states=np.zeros((1, 3, 1)), times=np.array([[0.0, 0.1, 0.2]]))


@pytest.fixture
def annulus_states():
    rng = np.random.default_rng(3)
    angles = rng.uniform(0, 2 * np.pi, size=8)
    radii = rng.uniform(0.2, 1.0, size=8)
    return np.stack([radii * np.cos(angles), radii * np.sin(angles)], axis=1)


def segment(states, dt=0.1, t0=0.0):
    states = np.asarray(states, dtype=np.float64)
    return Trajectory(t0 + dt * np.arange(states.shape[0]), states)


class TestReversingOperator:
    def test_momentum_flip_mask(self):
        """Test the momentum flip mask negates the second half."""
        op = ReversingOperator.momentum_flip(4)
        np.testing.assert_array_equal(op.signs, [1.0, 1.0, -1.0, -1.0])
        assert op.kind is ReversalKind.MOMENTUM_FLIP

    def test_full_negation_mask(self):
        """Test full negation negates every component."""
        op = ReversingOperator.full_negation(3)
        np.testing.assert_array_equal(op(np.array([1.0, -2.0, 3.0])), [-1.0, 2.0, -3.0])

    def test_is_an_involution(self):
        """Test applying an operator twice gives the identity."""
        op = ReversingOperator.custom([1.0, -1.0, -1.0])
        x = np.random.default_rng(0).normal(size=(5, 3))
        np.testing.assert_array_equal(op(op(x)), x)

    @pytest.mark.parametrize("mask", [[1.0, 0.5], [], [2.0, -1.0]])
    def test_invalid_mask_rejected(self, mask):
        """Test masks must be non-empty and hold only ±1."""
        with pytest.raises(ValueError):
            ReversingOperator.custom(mask)

    def test_momentum_flip_needs_even_dimension(self):
        """Test the momentum flip needs an even dimension."""
        with pytest.raises(ValueError):
            ReversingOperator.momentum_flip(3)

    def test_dimension_mismatch(self):
        """Test applying an operator to the wrong dimension raises."""
        with pytest.raises(ShapeError):
            ReversingOperator.momentum_flip(2)(np.zeros(4))

    def test_apply_reversing_reflects_time_when_offset_set(self):
        """Test apply_reversing reflects time about the offset."""
        op = ReversingOperator.momentum_flip(2, time_offset=1.0)
        reversed_state = apply_reversing(op, State([1.0, 2.0], time=0.25))
        np.testing.assert_array_equal(reversed_state.values, [1.0, -2.0])
        assert reversed_state.time == pytest.approx(0.75)

    def test_apply_reversing_keeps_time_for_autonomous_use(self):
        """Test apply_reversing keeps time without an offset."""
        reversed_state = apply_reversing(ReversingOperator.momentum_flip(2), State([1.0, 2.0], time=0.25))
        assert reversed_state.time == 0.25

    def test_tensor_input(self):
        """Test operators act on tensors."""
        tape = Tape(record=False)
        out = ReversingOperator.momentum_flip(2)(tape.constant([[0.5, 0.5]]))
        np.testing.assert_array_equal(out.value, [[0.5, -0.5]])


class TestLambdaSchedule:
    def test_constant(self):
        """Test a constant schedule."""
        schedule = LambdaSchedule.constant(10.0)
        assert lambda_value(schedule, 3.0) == 10.0
        np.testing.assert_array_equal(lambda_value(schedule, np.zeros((2, 3))), np.full((2, 3), 10.0))

    def test_linear_in_normalized_time(self):
        """Test a linear schedule in normalized time."""
        schedule = LambdaSchedule.linear(0.5)
        assert lambda_value(schedule, 0.0, 0.0, 10.0) == 0.0
        assert lambda_value(schedule, 5.0, 0.0, 10.0) == pytest.approx(0.25)
        assert lambda_value(schedule, 10.0, 0.0, 10.0) == pytest.approx(0.5)

    def test_linear_is_clipped_outside_range(self):
        """Test linear weights are clipped outside the time range."""
        schedule = LambdaSchedule.linear(1.0)
        np.testing.assert_allclose(lambda_value(schedule, np.array([-1.0, 12.0]), 0.0, 10.0), [0.0, 1.0])

    def test_degenerate_range_rejected(self):
        """Test an empty normalization range is rejected."""
        with pytest.raises(ValueError):
            lambda_value(LambdaSchedule.linear(1.0), 1.0, 2.0, 2.0)

    def test_labels(self):
        """Test schedule labels."""
        assert LambdaSchedule.constant(0.5).label() == "0.5"
        assert LambdaSchedule.linear(1.0).label() == "1t"

    def test_negative_coefficient_rejected(self):
        """Test negative coefficients are rejected."""
        with pytest.raises(ValidationError):
            LambdaSchedule(coefficient=-1.0)

    def test_zero_and_time_dependence_flags(self):
        """Test the zero and time-dependence flags."""
        assert LambdaSchedule().is_zero
        assert not LambdaSchedule.constant(1.0).time_dependent
        assert LambdaSchedule.linear(1.0).time_dependent


class TestSegmentBatch:
    def test_batch_segments_groups_by_length(self):
        """Test segments are grouped into batches by length."""
        segments = [segment(np.zeros((11, 2))), segment(np.ones((11, 2))), segment(np.zeros((6, 2)))]
        batches = batch_segments(segments)
        assert [len(b) for b in batches] == [2, 1]
        assert [b.steps for b in batches] == [10, 5]

    def test_mixed_lengths_rejected(self):
        """Test one batch cannot mix segment lengths."""
        with pytest.raises(ShapeError):
            SegmentBatch.from_trajectories([segment(np.zeros((3, 2))), segment(np.zeros((4, 2)))])

    def test_step_sizes_are_columns(self):
        """Test step sizes come as per-segment columns."""
        batch = SegmentBatch.from_trajectories([segment(np.zeros((4, 2)), dt=0.05)])
        sizes = batch.step_sizes()
        assert len(sizes) == 3
        assert sizes[0].shape == (1, 1)
        np.testing.assert_allclose(sizes[2], 0.05)


class TestOdeLoss:
    def test_exact_prediction_gives_zero(self):
        """Test L_ODE is zero for exact predictions."""
        states = np.random.default_rng(0).normal(size=(3, 5, 2))
        batch = SegmentBatch(states, np.tile(0.1 * np.arange(5), (3, 1)))
        assert ode_loss(states, batch).item() == 0.0

    def test_sum_over_steps_mean_over_segments(self):
        """Test L_ODE sums over steps and averages over segments."""
        observed = np.zeros((2, 3, 1))
        predicted = np.array([[[0.0], [1.0], [2.0]], [[0.0], [0.0], [3.0]]])
        batch = SegmentBatch(observed, np.tile([0.0, 0.1, 0.2], (2, 1)))
        # segment sums 1 + 4 and 0 + 9
        assert ode_loss(predicted, batch).item() == pytest.approx(7.0)

    def test_initial_state_does_not_count(self):
        """Test the initial state does not enter L_ODE."""
        batch = SegmentBatch(np.zeros((1, 2, 1)), np.array([[0.0, 0.1]]))
        predicted = np.array([[[5.0], [0.0]]])
        assert ode_loss(predicted, batch).item() == 0.0

    def test_grid_mismatch_rejected(self):
        """Test predictions on another grid are rejected."""
        batch = SegmentBatch(np.zeros((1, 3, 2)), np.array([[0.0, 0.1, 0.2]]))
        with pytest.raises(ShapeError):
            ode_loss(np.zeros((1, 4, 2)), batch)


class TestTrsLoss:
    @pytest.mark.parametrize("method, params", [
        (SolverMethod.RK4, DuffingParams.simple_oscillator()),
        (SolverMethod.RK4, DuffingParams.nonlinear_oscillator()),
        (SolverMethod.LEAPFROG, DuffingParams.nonlinear_oscillator()),
    ])
    def test_reversible_ground_truth_gives_zero(self, method, params, annulus_states):
        """Test reversible ground-truth fields give zero L_TRS."""
        loss = trs_loss(DuffingField(params), annulus_states, 10, ReversingOperator.momentum_flip(2),
                        SolverConfig(method, 0.1))
        assert loss.item() < 1e-20

    def test_damped_field_is_penalized(self, annulus_states):
        """Test a damped field gives positive L_TRS."""
        field = LinearField([[0.0, 1.0], [-1.0, -0.1]])
        loss = trs_loss(field, annulus_states, 10, ReversingOperator.momentum_flip(2),
                        SolverConfig(SolverMethod.RK4, 0.1))
        assert loss.item() > 1e-6

    def test_hand_computed_drift(self, drift_field):
        """Test L_TRS of a constant drift against a hand computation."""
        # identity is not a reversing map for dx/dt = 1: chains drift apart by 2ih
        loss = trs_loss(drift_field, State([0.0]), 2, ReversingOperator.custom([1.0]),
                        SolverConfig(SolverMethod.RK4, 0.1))
        assert loss.item() == pytest.approx(0.2, rel=1e-12)

    def test_negation_reverses_constant_drift(self, drift_field):
        """Test negation is a reversing map for a constant drift."""
        loss = trs_loss(drift_field, State([0.3]), 5, ReversingOperator.custom([-1.0]),
                        SolverConfig(SolverMethod.RK4, 0.1))
        assert loss.item() < 1e-28

    def test_requires_positive_step(self, drift_field):
        """Test L_TRS needs a positive step."""
        with pytest.raises(SolverError):
            trs_loss(drift_field, State([0.0]), 2, ReversingOperator.custom([1.0]),
                     SolverConfig(SolverMethod.RK4, -0.1))

    def test_requires_steps(self, drift_field):
        """Test L_TRS needs at least one step."""
        with pytest.raises(ValueError):
            trs_loss(drift_field, State([0.0]), 0, ReversingOperator.custom([1.0]), SolverConfig())

    def test_time_dependent_field_rejected(self):
        """Test the autonomous L_TRS rejects forced fields."""
        field = DuffingField(DuffingParams.forced_oscillator())
        with pytest.raises(SolverError):
            trs_loss(field, State([0.1, 0.2]), 3, ReversingOperator.momentum_flip(2), SolverConfig())

    def test_forced_ground_truth_gives_zero_with_reflected_time(self, annulus_states):
        """Test the forced oscillator gives zero L_TRS with reflected time."""
        params = DuffingParams.forced_oscillator()
        op = ReversingOperator.momentum_flip(2, time_offset=params.reversing_offset())
        loss = trs_loss_nonautonomous(DuffingField(params), annulus_states, 10, op,
                                      SolverConfig(SolverMethod.RK4, 0.1), initial_time=1.3)
        assert loss.item() < 1e-20

    def test_phase_shifted_drive_needs_matching_offset(self, annulus_states):
        """Test a phase-shifted drive needs the matching time offset."""
        params = DuffingParams(alpha=-0.2, beta=0.2, delta=0.15, phi=0.7)
        solver = SolverConfig(SolverMethod.RK4, 0.1)
        field = DuffingField(params)
        matched = trs_loss_nonautonomous(
            field, annulus_states, 10, ReversingOperator.momentum_flip(2, params.reversing_offset()), solver)
        unmatched = trs_loss_nonautonomous(
            field, annulus_states, 10, ReversingOperator.momentum_flip(2, 0.0), solver)
        assert matched.item() < 1e-20
        assert unmatched.item() > 1e-8

    def test_autonomous_field_rejected_by_nonautonomous_loss(self, drift_field):
        """Test the time-reflected L_TRS rejects autonomous fields."""
        with pytest.raises(SolverError):
            trs_loss_nonautonomous(drift_field, State([0.0]), 2, ReversingOperator.custom([1.0]),
                                   SolverConfig())

    def test_conjugate_field_has_identical_loss(self, annulus_states):
        """Test L_TRS is unchanged when f is replaced by -R f(R x)."""
        model = OdenModel.initialize(2, [8], rng=np.random.default_rng(12))
        field = model.field()
        op = ReversingOperator.momentum_flip(2)
        # forward and backward chains swap roles under f'(x) = -R f(R x)
        conjugate = FunctionField(lambda x, t: -op(field(op(x), t)), dim=2)
        solver = SolverConfig(SolverMethod.RK4, 0.1)
        original = trs_loss(field, annulus_states, 8, op, solver).item()
        swapped = trs_loss(conjugate, annulus_states, 8, op, solver).item()
        assert original > 1e-8
        assert swapped == pytest.approx(original, rel=1e-12)

    def test_gradient_matches_finite_differences(self, annulus_states):
        """Test L_TRS gradients against central differences."""
        model = OdenModel.initialize(2, [6], rng=np.random.default_rng(8))
        op = ReversingOperator.momentum_flip(2)
        solver = SolverConfig(SolverMethod.RK4, 0.1)
        x0 = annulus_states[:3]

        def loss_value():
            return trs_loss(model, x0, 4, op, solver, tape=Tape(record=False)).item()

        tape = Tape()
        loss = trs_loss(model, x0, 4, op, solver, tape=tape)
        grads = tape.backward(loss).for_arrays(model.parameters())

        h = 1e-6
        for array, analytic in zip(model.parameters(), grads):
            numeric = np.zeros_like(array)
            for idx in np.ndindex(array.shape):
                original = array[idx]
                array[idx] = original + h
                plus = loss_value()
                array[idx] = original - h
                minus = loss_value()
                array[idx] = original
                numeric[idx] = (plus - minus) / (2 * h)
            scale = max(np.max(np.abs(numeric)), 1e-8)
            assert np.max(np.abs(analytic - numeric)) / scale < 1e-3


class TestCombinedLoss:
    def test_zero_schedule_is_exactly_ode_loss(self, drift_field, resting_batch):
        """Test a zero schedule gives exactly L_ODE."""
        terms = combined_loss(resting_batch, drift_field, ReversingOperator.custom([1.0]), LambdaSchedule())
        assert terms.total.item() == terms.ode.item()

    def test_constant_schedule(self, drift_field, resting_batch):
        """Test the total under a constant schedule."""
        terms = combined_loss(resting_batch, drift_field, ReversingOperator.custom([1.0]),
                              LambdaSchedule.constant(10.0))
        assert terms.ode.item() == pytest.approx(0.05, rel=1e-12)
        assert terms.trs.item() == pytest.approx(0.2, rel=1e-12)
        assert terms.total.item() == pytest.approx(0.05 + 10.0 * 0.2, rel=1e-12)

    def test_linear_schedule_weights_each_transition(self, drift_field, resting_batch):
        """Test a linear schedule weights each transition by its start time."""
        terms = combined_loss(resting_batch, drift_field, ReversingOperator.custom([1.0]),
                              LambdaSchedule.linear(1.0), t_range=(0.0, 0.2))
        # transitions start at t = 0 and t = 0.1: weights 0 and 0.5 on 0.04 and 0.16
        assert terms.total.item() == pytest.approx(0.05 + 0.5 * 0.16, rel=1e-12)
        assert terms.values()['l_trs'] == pytest.approx(0.2, rel=1e-12)

    def test_zero_schedule_ignores_diverging_backward_chain(self):
        """Test a zero schedule trains through a diverging backward chain."""
        # dx/dt = x² from -5: forward decays toward 0, the reversed chain blows up
        field = FunctionField(lambda x, t: x * x, dim=1)
        times = 0.1 * np.arange(11)
        batch = SegmentBatch(states=(-5.0 / (1.0 + 5.0 * times)).reshape(1, 11, 1), times=times[None, :])
        op = ReversingOperator.custom([1.0])

        terms = combined_loss(batch, field, op, LambdaSchedule())
        assert terms.total.item() == terms.ode.item()
        assert terms.trs is None
        assert np.isnan(terms.values()['l_trs'])

        with pytest.raises(NonFiniteError):
            combined_loss(batch, field, op, LambdaSchedule.constant(1.0))

    def test_all_zero_linear_weights_skip_backward_chain(self, drift_field, resting_batch):
        """Test all-zero linear weights give exactly L_ODE."""
        terms = combined_loss(resting_batch, drift_field, ReversingOperator.custom([1.0]),
                              LambdaSchedule.linear(1.0), t_range=(0.5, 1.0))
        # transitions start at 0 and 0.1, below t_min, so every weight clips to 0
        assert terms.total.item() == terms.ode.item()
        assert terms.values()['l_trs'] == pytest.approx(0.2, rel=1e-12)

    def test_dimension_mismatch_rejected(self, drift_field):
        """Test a model and batch of different dimensions are rejected."""
        batch = SegmentBatch(np.zeros((1, 3, 2)), np.array([[0.0, 0.1, 0.2]]))
        with pytest.raises(ShapeError):
            combined_loss(batch, drift_field, ReversingOperator.custom([1.0]), LambdaSchedule())

    def test_ground_truth_segments_have_zero_loss(self):
        """Test ground-truth segments give zero combined loss."""
        field = DuffingField(DuffingParams.nonlinear_oscillator())
        x0 = np.array([[0.5, 0.1], [-0.3, 0.4]])
        batch = SegmentBatch.from_trajectories(simulate(field, x0, 10, 0.1))
        terms = combined_loss(batch, field, ReversingOperator.momentum_flip(2), LambdaSchedule.constant(10.0))
        assert terms.total.item() < 1e-20
