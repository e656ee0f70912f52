"""Tests for the deep encoder state-space model."""

import numpy as np
import pytest

from meta_ssm.autodiff import backward
from meta_ssm.exceptions import ConfigurationError, ShapeError, SizingError
from meta_ssm.model import (
    ArchitectureSpec,
    NeuralSSM,
    Regularization,
    extract_windows,
    loss_nodes,
    ssm_loss,
)
from tests.builders import ModelBuilder, tiny_spec


class TestArchitectureSpec:
    """Test architecture sizes and layer layout."""

    def test_defaults(self):
        """Test H=10, H_p=5, n_z=128 and five hidden layers of 128."""
        spec = ArchitectureSpec()

        assert spec.history_length == 10
        assert spec.horizon == 5
        assert spec.latent_dim == 128
        assert spec.hidden_widths == (128,) * 5
        assert spec.input_dim == 20
        assert spec.encoder_depth == 6

    def test_layer_shapes(self, spec):
        """Test layer order and (fan_out, fan_in) shapes."""
        assert spec.layer_shapes() == {
            "encoder.0.weight": (8, 6),
            "encoder.0.bias": (8,),
            "encoder.1.weight": (4, 8),
            "encoder.1.bias": (4,),
            "transition.weight": (4, 4),
            "output.weight": (2, 4),
        }

    def test_no_hidden_layers(self):
        """Test an empty hidden stack gives a single linear encoder layer."""
        spec = tiny_spec(hidden_widths=())

        assert spec.encoder_depth == 1
        assert spec.layer_shapes()["encoder.0.weight"] == (4, 6)

    def test_rejects_zero_sizes(self):
        """Test every size must be a positive integer."""
        with pytest.raises(ConfigurationError):
            tiny_spec(latent_dim=0)
        with pytest.raises(ConfigurationError):
            tiny_spec(horizon=1.5)

    def test_to_dict(self, spec):
        """Test the plain-dict form lists hidden widths."""
        assert spec.to_dict()["hidden_widths"] == [8]


class TestInitialization:
    """Test Xavier initialization."""

    def test_seeded(self, spec):
        """Test the same seed gives identical weights."""
        first = NeuralSSM.init(spec, 3)
        second = NeuralSSM.init(spec, 3)

        for (_, a), (_, b) in zip(first, second):
            np.testing.assert_array_equal(a, b)

    def test_different_seeds_differ(self, spec):
        """Test seeds change the weights."""
        assert not np.array_equal(
            NeuralSSM.init(spec, 1).transition, NeuralSSM.init(spec, 2).transition
        )

    def test_xavier_bounds_and_zero_biases(self, model):
        """Test weights lie within sqrt(6 / (fan_in + fan_out)) and biases are zero."""
        for name, value in model:
            if name.endswith(".bias"):
                np.testing.assert_array_equal(value, 0.0)
                continue
            fan_out, fan_in = value.shape
            assert np.all(np.abs(value) <= np.sqrt(6.0 / (fan_in + fan_out)))

    def test_xavier_variance(self):
        """Test large weight matrices have variance 2 / (fan_in + fan_out) and zero mean."""
        model = NeuralSSM.init(ArchitectureSpec(), 0)
        for name, value in model:
            if name.endswith(".bias") or value.size < 4096:
                continue
            fan_out, fan_in = value.shape
            assert np.var(value) == pytest.approx(2.0 / (fan_in + fan_out), rel=0.05), name
            assert abs(np.mean(value)) < 0.05 * np.std(value), name

    def test_layer_groups(self, model):
        """Test encoder and head layer names partition the model."""
        assert model.head_layer_names == ["transition.weight", "output.weight"]
        assert set(model.encoder_layer_names) | set(model.head_layer_names) == set(
            model.layer_names
        )
        assert model.parameter_count() == 48 + 8 + 32 + 4 + 16 + 8

    def test_wrong_shape_rejected(self, spec):
        """Test a mis-shaped layer raises ShapeError."""
        with pytest.raises(ShapeError):
            ModelBuilder().with_spec(spec).with_layer("transition.weight", np.eye(3)).build()

    def test_copy_is_independent(self, model):
        """Test copies do not share arrays."""
        clone = model.copy()
        clone.parameters["transition.weight"][0, 0] = 42.0

        assert model.transition[0, 0] != 42.0


class TestForward:
    """Test encoding, prediction and rollouts."""

    def test_encode_linear_without_hidden_layers(self):
        """Test a single-layer encoder is W·vec(Y) + b."""
        spec = tiny_spec(hidden_widths=())
        model = ModelBuilder().with_spec(spec).with_layer("encoder.0.bias", np.arange(4.0)).build()
        history = np.arange(6.0).reshape(3, 2)

        expected = model.parameters["encoder.0.weight"] @ history.reshape(6) + np.arange(4.0)
        np.testing.assert_allclose(model.encode(history), expected)

    def test_rollout_matches_manual_powers(self, model, sine_segment):
        """Test row k equals C_z A_z^k z for the encoded last window."""
        prediction = model.rollout_predict(sine_segment, 6)
        latent = model.encode(sine_segment[-3:])
        for k in range(6):
            expected = model.output_map @ np.linalg.matrix_power(model.transition, k) @ latent
            np.testing.assert_allclose(prediction[k], expected, rtol=1e-10, atol=1e-12)

    def test_predict_is_rollout_prefix(self, model, sine_segment):
        """Test the H_p-step prediction equals the first H_p rollout rows."""
        history = sine_segment[:3]

        np.testing.assert_allclose(
            model.predict(history), model.rollout_predict(history, 2), atol=1e-12
        )

    def test_zero_horizon(self, model, sine_segment):
        """Test a zero-length rollout is an empty (0, n_y) block."""
        assert model.rollout_predict(sine_segment, 0).shape == (0, 2)

    def test_short_context(self, model):
        """Test contexts shorter than H raise SizingError."""
        with pytest.raises(SizingError):
            model.rollout_predict(np.zeros((2, 2)), 4)

    def test_negative_horizon(self, model, sine_segment):
        """Test a negative horizon raises SizingError naming the horizon."""
        with pytest.raises(SizingError) as excinfo:
            model.rollout_predict(sine_segment, -1)

        assert excinfo.value.required == 0
        assert excinfo.value.available == -1

    def test_encode_wrong_window(self, model):
        """Test encode checks the (H, n_y) shape."""
        with pytest.raises(ShapeError):
            model.encode(np.zeros((4, 2)))

    def test_latent_rollout(self, model):
        """Test z_{k+1} = A_z z_k."""
        z0 = np.array([1.0, 0.0, -1.0, 0.5])
        states = model.latent_rollout(z0, 3)

        np.testing.assert_allclose(states[0], model.transition @ z0)
        np.testing.assert_allclose(states[2], model.transition @ states[1])

    def test_latent_contraction(self):
        """Test A_z = 0.5·I halves the latent norm on every step."""
        model = ModelBuilder().with_layer("transition.weight", 0.5 * np.eye(4)).build()
        z0 = np.array([3.0, -1.0, 0.5, 2.0])
        norms = np.linalg.norm(model.latent_rollout(z0, 6), axis=1)

        np.testing.assert_allclose(norms, np.linalg.norm(z0) * 0.5 ** np.arange(1, 7))

    def test_stable_transition_builder(self):
        """Test the builder rescales the spectral radius."""
        model = ModelBuilder().with_stable_transition(0.5).build()

        assert model.spectral_radius() == pytest.approx(0.5)


class TestLoss:
    """Test the multi-step training loss."""

    def test_non_negative(self, model, sine_segment):
        """Test the MSE is never negative."""
        batch = extract_windows(sine_segment, model.spec)

        assert ssm_loss(model, batch) >= 0.0

    def test_matches_explicit_mean(self, model, sine_segment):
        """Test the loss equals the mean over windows of per-step squared errors."""
        batch = extract_windows(sine_segment, model.spec)
        errors = [
            np.sum((model.predict(h) - f) ** 2) / model.spec.horizon
            for h, f in zip(batch.histories, batch.futures)
        ]

        assert ssm_loss(model, batch) == pytest.approx(np.mean(errors), rel=1e-10)

    def test_accepts_sample_list(self, model, sine_segment):
        """Test a list of samples is stacked first."""
        batch = extract_windows(sine_segment, model.spec)

        assert ssm_loss(model, batch.samples()) == pytest.approx(ssm_loss(model, batch))

    def test_regularization_adds_penalties(self, model, sine_segment):
        """Test l1·|A_z| + l2·A_z² is added to the data term."""
        batch = extract_windows(sine_segment, model.spec)
        plain = ssm_loss(model, batch)
        penalized = ssm_loss(model, batch, Regularization(l1=0.1, l2=0.2))
        transition = model.transition
        expected = plain + 0.1 * np.abs(transition).sum() + 0.2 * (transition**2).sum()

        assert penalized == pytest.approx(expected, rel=1e-10)

    def test_gradient_reaches_every_layer(self, model, sine_segment):
        """Test each layer influences the loss."""
        batch = extract_windows(sine_segment, model.spec)
        nodes = model.as_nodes()
        grads = backward(loss_nodes(model.spec, nodes, batch), list(nodes.values()))

        for name in ("encoder.1.weight", "transition.weight", "output.weight"):
            assert np.any(grads[nodes[name]].value != 0.0)

    def test_invariant_to_window_order(self, model, sine_segment):
        """Test reordering the windows of a batch leaves the loss unchanged."""
        batch = extract_windows(sine_segment, model.spec)
        reversed_batch = batch.take(np.arange(len(batch))[::-1])

        assert ssm_loss(model, reversed_batch) == pytest.approx(ssm_loss(model, batch), rel=1e-12)

    def test_gradient_matches_finite_differences(self, model, sine_segment):
        """Test the analytic gradient of every layer against central differences."""
        batch = extract_windows(sine_segment, model.spec)
        regularization = Regularization(l1=0.01, l2=0.02)
        nodes = model.as_nodes()
        grads = backward(
            loss_nodes(model.spec, nodes, batch, regularization), list(nodes.values())
        )
        analytic = np.concatenate([grads[nodes[name]].value.ravel() for name in nodes])

        step = 1e-6
        numeric = []
        for name, value in model:
            for index in np.ndindex(value.shape):
                shifted = []
                for sign in (1.0, -1.0):
                    perturbed = value.copy()
                    perturbed[index] += sign * step
                    shifted.append(
                        ssm_loss(model.with_parameters({name: perturbed}), batch, regularization)
                    )
                numeric.append((shifted[0] - shifted[1]) / (2.0 * step))

        error = np.linalg.norm(analytic - np.array(numeric)) / np.linalg.norm(analytic)
        assert error < 1e-5

    def test_mismatched_batch(self, model):
        """Test windows from another architecture raise ShapeError."""
        other = extract_windows(np.zeros((12, 2)), tiny_spec(history_length=4))
        with pytest.raises(ShapeError):
            ssm_loss(model, other)
