"""
Unit tests for ODEN/HODEN models and checkpoints.
"""

import json
import struct

import numpy as np
import pytest

from autodiff.mlp import MlpSpec, ModelParams, init_params, mlp_forward, zero_params
from autodiff.tensor import ShapeError, Tape
from integrators.rollout import rollout
from integrators.schemas import SolverConfig, SolverMethod, State
from models.checkpoint import (
    MAGIC,
    CheckpointError,
    decode_checkpoint,
    encode_checkpoint,
    load_checkpoint,
    save_checkpoint,
)
from models.hoden import HodenModel, hamiltonian_values, hoden_energy, hoden_field
from models.oden import OdenModel, oden_field

pytestmark = [pytest.mark.unit, pytest.mark.models]


def quadratic_net(a: float = 0.01, b: float = -0.6):
    """
    Scalar 1-input net c·(tanh(ax + b) + tanh(-ax + b)) ≈ const + x²/2.

    The odd terms cancel and c is chosen so the curvature at 0 is exactly 1;
    the quartic remainder is of relative size a².
    """
    sech2 = 1.0 - np.tanh(b) ** 2
    curvature = -2.0 * sech2 * np.tanh(b)  # second derivative of tanh at b
    c = 1.0 / (2.0 * a * a * curvature)
    spec = MlpSpec(input_dim=1, hidden_dims=(2,), output_dim=1)
    params = ModelParams(
        weights=[np.array([[a, -a]]), np.array([[c], [c]])],
        biases=[np.array([b, b]), np.array([0.0])],
    )
    return spec, params


@pytest.fixture
def quadratic_hoden():
    """HODEN with K ≈ p²/2 and V ≈ q²/2."""
    spec, kinetic = quadratic_net()
    _, potential = quadratic_net()
    return HodenModel(spec, kinetic, spec, potential, half_dim=1)


@pytest.fixture
def random_hoden():
    return HodenModel.initialize(4, [8], rng=np.random.default_rng(11))


def evaluate(field, values, t=0.0):
    return field.evaluate(State(np.asarray(values, dtype=np.float64), t))


class TestOden:
    def test_zero_weights_give_zero_field(self):
        """Test a zero network gives a zero field."""
        spec = MlpSpec(input_dim=2, hidden_dims=(5,), output_dim=2)
        field = oden_field(OdenModel(spec, zero_params(spec), state_dim=2))
        np.testing.assert_array_equal(evaluate(field, [0.4, -1.2]), [0.0, 0.0])

    def test_time_augmented_depends_on_time(self):
        """Test a time-augmented field depends on time."""
        model = OdenModel.initialize(2, [16], time_augmented=True, rng=np.random.default_rng(0))
        field = model.field()
        assert not field.autonomous
        assert not np.allclose(evaluate(field, [0.3, 0.1], t=0.0), evaluate(field, [0.3, 0.1], t=1.5))

    def test_field_matches_direct_forward(self):
        """Test the ODEN field matches a direct network forward pass."""
        model = OdenModel.initialize(2, [12], time_augmented=True, rng=np.random.default_rng(1))
        x = np.array([[0.2, -0.5], [1.0, 0.3]])
        t = np.array([[0.1], [2.0]])
        tape = Tape(record=False)
        got = model.field()(tape.constant(x), t).value
        direct = mlp_forward(model.spec, model.params, np.hstack([x, t])).value
        np.testing.assert_allclose(got, direct, atol=1e-15, rtol=0)

    def test_network_shape_must_match_state(self):
        """Test the network width must match the state dimension."""
        spec = MlpSpec(input_dim=3, hidden_dims=(4,), output_dim=3)
        with pytest.raises(ShapeError):
            OdenModel(spec, zero_params(spec), state_dim=2)

    def test_wrong_state_width_rejected(self):
        """Test states of the wrong width are rejected."""
        model = OdenModel.initialize(2, [4], rng=np.random.default_rng(0))
        tape = Tape(record=False)
        with pytest.raises(ShapeError):
            model.field()(tape.constant(np.zeros((1, 3))), np.zeros((1, 1)))

    def test_with_parameters_keeps_architecture(self):
        """Test with_parameters keeps the architecture."""
        model = OdenModel.initialize(3, [8, 8], rng=np.random.default_rng(0))
        shifted = model.with_parameters([a + 1.0 for a in model.parameters()])
        assert shifted.spec == model.spec
        np.testing.assert_array_equal(shifted.parameters()[0], model.parameters()[0] + 1.0)

    def test_deterministic_initialization(self):
        """Test one seed gives identical initial weights."""
        a = OdenModel.initialize(2, [10], rng=np.random.default_rng(5))
        b = OdenModel.initialize(2, [10], rng=np.random.default_rng(5))
        for x, y in zip(a.parameters(), b.parameters()):
            np.testing.assert_array_equal(x, y)


class TestHoden:
    def test_zero_nets_give_zero_field_and_energy(self):
        """Test zero networks give a zero field and energy."""
        spec = MlpSpec(input_dim=1, hidden_dims=(3,), output_dim=1)
        model = HodenModel(spec, zero_params(spec), spec, zero_params(spec), half_dim=1)
        np.testing.assert_array_equal(evaluate(hoden_field(model), [0.5, 0.7]), [0.0, 0.0])
        assert hoden_energy(model, State([0.5, 0.7])) == 0.0

    def test_quadratic_nets_give_harmonic_field(self, quadratic_hoden):
        """Test near-quadratic networks give the harmonic field."""
        field = hoden_field(quadratic_hoden)
        for q, p in [(1.0, 0.0), (-0.6, 0.8), (0.3, -1.2), (0.0, 0.5)]:
            np.testing.assert_allclose(evaluate(field, [q, p]), [p, -q], atol=1e-2)

    def test_field_components_are_separable(self, random_hoden):
        """Test dq/dt depends on p only and dp/dt on q only."""
        field = hoden_field(random_hoden)
        base = np.array([0.2, -0.4, 0.6, 0.1])
        moved_q = base + np.array([0.3, -0.2, 0.0, 0.0])
        moved_p = base + np.array([0.0, 0.0, -0.5, 0.25])
        f_base, f_q, f_p = (evaluate(field, x) for x in (base, moved_q, moved_p))
        np.testing.assert_array_equal(f_q[:2], f_base[:2])
        np.testing.assert_array_equal(f_p[2:], f_base[2:])
        assert not np.allclose(f_q[2:], f_base[2:])
        assert not np.allclose(f_p[:2], f_base[:2])

    def test_field_is_symplectic_gradient_of_energy(self, random_hoden):
        """Test the field is the symplectic gradient of the learned energy."""
        field = hoden_field(random_hoden)
        x = np.array([0.3, -0.7, 0.5, 0.2])
        h = 1e-6
        grad = np.zeros(4)
        for i in range(4):
            step = np.zeros(4)
            step[i] = h
            grad[i] = (hoden_energy(random_hoden, x + step) - hoden_energy(random_hoden, x - step)) / (2 * h)
        expected = np.concatenate([grad[2:], -grad[:2]])
        got = evaluate(field, x)
        assert np.max(np.abs(got - expected)) / np.max(np.abs(expected)) < 1e-6

    def test_energy_is_sum_of_networks(self, random_hoden):
        """Test the energy is the kinetic plus the potential network."""
        x = np.array([0.1, 0.2, -0.3, 0.4])
        kinetic = mlp_forward(random_hoden.kinetic_spec, random_hoden.kinetic_params, x[None, 2:]).value[0, 0]
        potential = mlp_forward(random_hoden.potential_spec, random_hoden.potential_params, x[None, :2]).value[0, 0]
        assert hoden_energy(random_hoden, x) == pytest.approx(kinetic + potential, abs=1e-15)

    def test_calibrated_ground_energy_is_zero(self, random_hoden):
        """Test calibration shifts the origin to zero energy."""
        assert hoden_energy(random_hoden, np.zeros(4), calibrate=True) == 0.0
        raw = hamiltonian_values(random_hoden, np.array([[0.5, 0.5, 0.5, 0.5]]))
        calibrated = hamiltonian_values(random_hoden, np.array([[0.5, 0.5, 0.5, 0.5]]), calibrate=True)
        assert calibrated[0] == pytest.approx(raw[0] - hoden_energy(random_hoden, np.zeros(4)))

    def test_odd_state_dimension_rejected(self):
        """Test an odd state dimension is rejected."""
        with pytest.raises(ShapeError):
            HodenModel.initialize(3, [4])

    def test_vector_valued_network_rejected(self):
        """Test vector-valued energy networks are rejected."""
        spec = MlpSpec(input_dim=1, hidden_dims=(3,), output_dim=2)
        with pytest.raises(ShapeError):
            HodenModel(spec, zero_params(spec), spec, zero_params(spec), half_dim=1)

    def test_leapfrog_rollout_conserves_learned_energy(self, quadratic_hoden):
        """Test leapfrog conserves the learned energy of near-quadratic networks."""
        traj = rollout(hoden_field(quadratic_hoden), State([1.0, 0.0]), 200,
                       SolverConfig(SolverMethod.LEAPFROG, 0.1))
        energies = hamiltonian_values(quadratic_hoden, traj.states)
        drift = np.abs(energies - energies[0])
        assert np.max(drift) < 2e-3
        # bounded oscillation, no secular growth
        assert np.max(drift[100:]) < 1.5 * np.max(drift[:100]) + 1e-9

    @pytest.mark.parametrize("seed", range(5))
    def test_random_nets_have_bounded_symplectic_drift(self, seed):
        """Test leapfrog energy drift on random networks is second order and does not grow."""
        model = HodenModel.initialize(2, [8], rng=np.random.default_rng(seed))
        start = State(np.random.default_rng(50 + seed).uniform(-1.0, 1.0, size=2))

        def drift(steps, dt):
            traj = rollout(hoden_field(model), start, steps, SolverConfig(SolverMethod.LEAPFROG, dt))
            energies = hamiltonian_values(model, traj.states)
            return np.abs(energies - energies[0])

        coarse = drift(2000, 0.1)
        fine = drift(400, 0.05)
        head = np.max(coarse[:201])
        # second-order energy error over the same 20 time units
        assert 2.5 < head / np.max(fine) < 5.5
        # no secular growth: the later half stays at the level of the earlier one
        assert np.max(coarse[1000:]) < 10.0 * np.max(coarse[:1000]) + 1e-12

    def test_time_augmented_field_is_not_separable(self):
        """Test a time-augmented HODEN field is not separable."""
        model = HodenModel.initialize(2, [6], time_augmented=True, rng=np.random.default_rng(0))
        field = hoden_field(model)
        assert not field.autonomous
        assert not field.separable
        assert evaluate(field, [0.2, 0.3], t=0.0).shape == (2,)

    def test_with_parameters_splits_networks(self, random_hoden):
        """Test with_parameters splits arrays between the two networks."""
        arrays = random_hoden.parameters()
        rebuilt = random_hoden.with_parameters(arrays)
        for x, y in zip(rebuilt.kinetic_params.arrays(), random_hoden.kinetic_params.arrays()):
            np.testing.assert_array_equal(x, y)
        for x, y in zip(rebuilt.potential_params.arrays(), random_hoden.potential_params.arrays()):
            np.testing.assert_array_equal(x, y)


class TestCheckpoint:
    @pytest.mark.parametrize("model", [
        OdenModel.initialize(2, [5, 3], rng=np.random.default_rng(0)),
        OdenModel.initialize(2, [4], time_augmented=True, rng=np.random.default_rng(1)),
        HodenModel.initialize(4, [6], rng=np.random.default_rng(2)),
        HodenModel.initialize(2, [3, 3], time_augmented=True, rng=np.random.default_rng(3)),
    ])
    def test_round_trip_is_bit_exact(self, model):
        """Test checkpoints round-trip bit for bit."""
        restored, metadata = decode_checkpoint(encode_checkpoint(model, {'seed': 7}))
        assert type(restored) is type(model)
        assert restored.time_augmented == model.time_augmented
        assert restored.state_dim == model.state_dim
        assert metadata == {'seed': 7}
        for x, y in zip(restored.parameters(), model.parameters()):
            assert x.tobytes() == y.tobytes()

    def test_layout(self):
        """Test the checkpoint byte layout."""
        model = OdenModel.initialize(2, [3], rng=np.random.default_rng(0))
        data = encode_checkpoint(model)
        assert data[:8] == MAGIC
        (length,) = struct.unpack("<Q", data[8:16])
        header = json.loads(data[16:16 + length])
        assert header['kind'] == "oden"
        assert header['networks']['field']['hidden_dims'] == [3]
        assert len(data) == 16 + length + 8 * sum(a.size for a in model.parameters())

    def test_bad_magic_rejected(self):
        """Test a blob with the wrong magic is rejected."""
        with pytest.raises(CheckpointError):
            decode_checkpoint(b"NOTACKPT" + b"\x00" * 16)

    def test_truncated_blob_rejected(self):
        """Test a truncated blob is rejected."""
        data = encode_checkpoint(HodenModel.initialize(2, [3], rng=np.random.default_rng(0)))
        with pytest.raises(CheckpointError):
            decode_checkpoint(data[:-8])

    def test_save_and_load(self, tmp_path):
        """Test a checkpoint survives save and load with metadata."""
        model = HodenModel.initialize(2, [4], rng=np.random.default_rng(9))
        path = save_checkpoint(model, tmp_path / "nested" / "model.trsoden", {'label': "HODEN"})
        restored, metadata = load_checkpoint(path)
        assert metadata['label'] == "HODEN"
        np.testing.assert_array_equal(evaluate(restored.field(), [0.1, 0.2]), evaluate(model.field(), [0.1, 0.2]))
