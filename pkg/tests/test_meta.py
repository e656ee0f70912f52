"""Tests for inner adaptation, meta-gradients and meta-training."""

from dataclasses import replace

import numpy as np
import pytest

from meta_ssm.autodiff import leaf
from meta_ssm.config import MetaConfig
from meta_ssm.config.schemas import GradientOrder, LayerSelector, OptimizerKind
from meta_ssm.exceptions import ConfigurationError, SizingError, TaskError
from meta_ssm.meta import (
    Adam,
    GradientDescent,
    Task,
    adapt_inference,
    gradient_steps,
    inner_adapt,
    make_optimizer,
    meta_gradient,
    meta_train,
    outer_step,
    sample_tasks,
    ssm_task,
)
from meta_ssm.model import NeuralSSM, WindowBatch, extract_windows
from tests.builders import SourceDatasetBuilder, ToyTasks, quadratic_loss


def toy_config(**overrides) -> MetaConfig:
    """One inner step at rate 0.1 over every layer."""
    values = {"inner_rate": 0.1, "inner_steps": 1, "batch_size": 2, "outer_rate": 0.1}
    values.update(overrides)
    return MetaConfig(**values)


def tiny_meta_config(**overrides) -> MetaConfig:
    """Desk-scale meta-training settings for the tiny architecture."""
    values = {
        "inner_rate": 0.01,
        "outer_rate": 0.01,
        "inner_steps": 1,
        "batch_size": 2,
        "outer_iterations": 3,
        "context_windows": 2,
        "target_windows": 2,
        "checkpoint_interval": 1,
        "seed": 0,
    }
    values.update(overrides)
    return MetaConfig(**values)


@pytest.fixture(name="model_tasks")
def model_tasks_fixture(model, sine_segment):
    """Two tasks cut from the sine segment."""
    context = extract_windows(sine_segment[:10], model.spec)
    target = extract_windows(sine_segment[10:20], model.spec)
    later = extract_windows(sine_segment[20:], model.spec)
    return [
        ssm_task("early", model, context, target),
        ssm_task("late", model, target, later),
    ]


class TestGradientSteps:
    """Test the shared inner-step loop."""

    def test_one_step_on_quadratic(self):
        """Test w1 = w - β·2(w - c)."""
        weights = {"w": leaf([0.3])}
        adapted = gradient_steps(quadratic_loss(1.0), weights, ["w"], 0.1, 1, False)

        np.testing.assert_allclose(adapted.values()["w"], [0.44])
        assert adapted.losses == [pytest.approx(0.49)]
        assert adapted.steps == 1

    def test_second_order_keeps_graph(self):
        """Test recorded steps stay connected to the initial leaf."""
        weights = {"w": leaf([0.3])}
        adapted = gradient_steps(quadratic_loss(1.0), weights, ["w"], 0.1, 2, True)

        assert adapted.nodes["w"].requires_grad
        assert adapted.nodes["w"].parents
        assert adapted.initial["w"] is weights["w"]

    def test_first_order_makes_fresh_leaves(self):
        """Test first-order steps cut the graph after each step."""
        adapted = gradient_steps(quadratic_loss(1.0), {"w": leaf([0.3])}, ["w"], 0.1, 2, False)

        assert adapted.nodes["w"].parents == ()

    def test_zero_steps(self):
        """Test M = 0 returns the starting weights."""
        weights = {"w": leaf([0.3])}
        adapted = gradient_steps(quadratic_loss(1.0), weights, ["w"], 0.1, 0, True)

        assert adapted.nodes["w"] is weights["w"]
        assert adapted.losses == []


class TestInnerAdapt:
    """Test inner adaptation of the state-space model."""

    def test_second_order_by_default(self, model, sine_segment):
        """Test the configured gradient order decides graph recording."""
        batch = extract_windows(sine_segment, model.spec)
        adapted = inner_adapt(model, model.as_nodes(), batch, tiny_meta_config())

        assert adapted.nodes["transition.weight"].parents

    def test_first_order(self, model, sine_segment):
        """Test first-order adaptation gives leaves."""
        batch = extract_windows(sine_segment, model.spec)
        config = tiny_meta_config(gradient_order=GradientOrder.FIRST)
        adapted = inner_adapt(model, model.as_nodes(), batch, config)

        assert adapted.nodes["transition.weight"].parents == ()

    def test_empty_context(self, model):
        """Test an empty context set raises SizingError."""
        empty = WindowBatch(np.zeros((0, 3, 2)), np.zeros((0, 2, 2)))
        with pytest.raises(SizingError):
            inner_adapt(model, model.as_nodes(), empty, tiny_meta_config())

    @pytest.mark.parametrize(
        ("selector", "frozen_group"),
        [("head-only", "encoder_layer_names"), ("encoder-only", "head_layer_names")],
    )
    def test_frozen_layers_unchanged(self, model, sine_segment, selector, frozen_group):
        """Test layers outside the selector keep their exact values over 100 steps."""
        batch = extract_windows(sine_segment, model.spec)
        config = tiny_meta_config(selector=selector, inner_rate=0.001)
        adapted = adapt_inference(model, batch, 100, config)
        frozen = getattr(model, frozen_group)

        for name in frozen:
            assert adapted.nodes[name] is adapted.initial[name]
            np.testing.assert_array_equal(adapted.values()[name], model.parameters[name])
        for name in adapted.adapted:
            assert not np.array_equal(adapted.values()[name], model.parameters[name])

    def test_inference_zero_steps(self, model, sine_segment):
        """Test zero adaptation steps leave the model as trained."""
        batch = extract_windows(sine_segment, model.spec)
        adapted = adapt_inference(model, batch, 0, tiny_meta_config())

        for name, value in model:
            np.testing.assert_array_equal(adapted.values()[name], value)
        assert adapted.steps == 0

    def test_inference_lowers_context_loss(self, model, sine_segment):
        """Test small steps reduce the context loss."""
        batch = extract_windows(sine_segment, model.spec)
        adapted = adapt_inference(model, batch, 3, tiny_meta_config(inner_rate=0.001))

        assert adapted.losses[-1] < adapted.losses[0]

    def test_to_model(self, model, sine_segment):
        """Test adapted weights rebuild a model of the same architecture."""
        batch = extract_windows(sine_segment, model.spec)
        adapted = adapt_inference(model, batch, 1, tiny_meta_config())
        rebuilt = adapted.to_model(model)

        assert rebuilt.spec == model.spec
        np.testing.assert_array_equal(rebuilt.transition, adapted.values()["transition.weight"])


class TestMetaGradient:
    """Test the outer gradient against closed-form toy tasks."""

    def test_second_order_value(self):
        """Test Σ 2(1 - 2β)²(w - c) over c = ±1 at w = 0.3, β = 0.1."""
        result = meta_gradient({"w": np.array([0.3])}, ToyTasks.symmetric_pair(), toy_config())

        np.testing.assert_allclose(result.grads["w"], [0.768], rtol=1e-10)
        assert result.loss == pytest.approx(1.3952, rel=1e-10)
        assert result.task_losses == [pytest.approx(0.3136), pytest.approx(1.0816)]

    def test_first_order_value(self):
        """Test first order drops the (1 - 2β) Jacobian factor once."""
        config = toy_config(gradient_order="first")
        result = meta_gradient({"w": np.array([0.3])}, ToyTasks.symmetric_pair(), config)

        np.testing.assert_allclose(result.grads["w"], [0.96], rtol=1e-10)
        assert result.loss == pytest.approx(1.3952, rel=1e-10)

    def test_zero_inner_steps_is_supervised(self):
        """Test M = 0 reduces to the plain target-loss gradient."""
        config = toy_config(inner_steps=0)
        result = meta_gradient({"w": np.array([0.3])}, ToyTasks.symmetric_pair(), config)

        np.testing.assert_allclose(result.grads["w"], [1.2], rtol=1e-10)

    def test_workers_give_identical_numbers(self, model, model_tasks):
        """Test threaded task evaluation reduces in task order."""
        config = tiny_meta_config()
        serial = meta_gradient(model.parameters, model_tasks, config, workers=1)
        threaded = meta_gradient(model.parameters, model_tasks, config, workers=2)

        assert serial.loss == threaded.loss
        for name in serial.grads:
            np.testing.assert_array_equal(serial.grads[name], threaded.grads[name])

    def test_failing_task_named(self):
        """Test a task whose loss cannot be formed raises TaskError."""

        def broken(_weights):
            raise SizingError("no windows", required=1, available=0)

        tasks = [Task(name="bad", context_loss=broken, target_loss=broken)]
        with pytest.raises(TaskError) as err:
            meta_gradient({"w": np.array([0.3])}, tasks, toy_config())

        assert err.value.task == "bad"

    def test_outer_step_moves_against_gradient(self, model, model_tasks):
        """Test one SGD outer step applies ω - α·g."""
        config = tiny_meta_config()
        updated, gradient = outer_step(
            model, model_tasks, config, GradientDescent(config.outer_rate)
        )

        np.testing.assert_allclose(
            updated.transition,
            model.transition - 0.01 * gradient.grads["transition.weight"],
        )


class TestMetaTraining:
    """Test the outer training loop."""

    def test_trace(self, source, spec):
        """Test one 1-based trace row per outer iteration."""
        result = meta_train(source, tiny_meta_config(), spec)

        assert [row["iteration"] for row in result.trace] == [1, 2, 3]
        assert all(row["outer_loss"] >= 0 for row in result.trace)
        assert result.iterations == 3

    def test_deterministic(self, source, spec):
        """Test equal seeds give bit-identical weights."""
        first = meta_train(source, tiny_meta_config(), spec)
        second = meta_train(source, tiny_meta_config(), spec)

        for (_, a), (_, b) in zip(first.model, second.model):
            np.testing.assert_array_equal(a, b)

    def test_encoder_only_maml_is_anil(self, source, spec):
        """Test selectors, not method names, decide the weights after 5 outer steps."""
        config = tiny_meta_config(outer_iterations=5)
        anil = meta_train(source, config.for_method("anil"), spec)
        restricted = meta_train(
            source, replace(config.for_method("maml"), selector=LayerSelector.ENCODER_ONLY), spec
        )
        full = meta_train(source, config.for_method("maml"), spec)
        explicit_all = meta_train(source, replace(config, selector=LayerSelector.ALL), spec)

        for (_, a), (_, b) in zip(anil.model, restricted.model):
            np.testing.assert_array_equal(a, b)
        for (_, a), (_, b) in zip(full.model, explicit_all.model):
            np.testing.assert_array_equal(a, b)
        assert anil.trace[-1]["outer_loss"] == restricted.trace[-1]["outer_loss"]
        assert not np.array_equal(anil.model.transition, full.model.transition)

    def test_outer_loss_decreases(self, source, spec):
        """Test 50 outer iterations lower the meta loss on a fixed task batch."""
        config = tiny_meta_config(outer_iterations=50, optimizer="adam")
        initial = NeuralSSM.init(spec, config.seed)
        tasks = sample_tasks(initial, source, config, 0)
        result = meta_train(source, config, spec)

        before = meta_gradient(initial.parameters, tasks, config).loss
        after = meta_gradient(result.model.parameters, tasks, config).loss
        assert after < before

    def test_resume_matches_uninterrupted_run(self, source, spec):
        """Test stopping after two iterations and resuming changes nothing."""
        full = meta_train(source, tiny_meta_config(), spec)
        partial = meta_train(source, tiny_meta_config(outer_iterations=2), spec)
        resumed = meta_train(
            source,
            tiny_meta_config(),
            spec,
            initial=partial.model,
            start_iteration=2,
            trace=partial.trace,
        )

        assert [row["outer_loss"] for row in resumed.trace] == [
            row["outer_loss"] for row in full.trace
        ]
        for (_, a), (_, b) in zip(full.model, resumed.model):
            np.testing.assert_array_equal(a, b)

    def test_checkpoint_callback(self, source, spec):
        """Test the callback fires every checkpoint_interval iterations."""
        calls = []
        meta_train(
            source,
            tiny_meta_config(outer_iterations=4, checkpoint_interval=2),
            spec,
            callback=lambda done, model, trace: calls.append((done, len(trace))),
        )

        assert calls == [(2, 2), (4, 4)]

    def test_zero_iterations(self, source, spec):
        """Test T = 0 returns the initialization and an empty trace."""
        result = meta_train(source, tiny_meta_config(outer_iterations=0), spec)

        assert result.trace == []
        assert result.iterations == 0

    def test_adam_trains(self, source, spec):
        """Test the adaptive-moment optimizer runs the loop."""
        result = meta_train(source, tiny_meta_config(optimizer="adam"), spec)

        assert len(result.trace) == 3


class TestTaskSampling:
    """Test per-iteration task sampling."""

    def test_batch_larger_than_source(self, model, source):
        """Test B > N_s raises SizingError."""
        with pytest.raises(SizingError):
            sample_tasks(model, source, tiny_meta_config(batch_size=5), 0)

    def test_short_trajectory(self, model):
        """Test a trajectory too short for its segments raises TaskError."""
        short = SourceDatasetBuilder().with_t_final_range(0.1, 0.2).build()
        with pytest.raises(TaskError):
            sample_tasks(model, short, tiny_meta_config(), 0)

    def test_same_iteration_same_tasks(self, model, source):
        """Test each iteration draws from its own seeded stream."""
        first = sample_tasks(model, source, tiny_meta_config(), 5)
        second = sample_tasks(model, source, tiny_meta_config(), 5)

        assert [t.name for t in first] == [t.name for t in second]
        assert len({t.name for t in first}) == 2


class TestOptimizers:
    """Test outer-loop update rules."""

    def test_gradient_descent(self):
        """Test ω - rate·g."""
        updated = GradientDescent(0.5).step({"w": np.array([1.0])}, {"w": np.array([2.0])})

        np.testing.assert_allclose(updated["w"], [0.0])

    def test_adam_first_step_is_signed_rate(self):
        """Test the bias-corrected first step has magnitude ≈ rate."""
        updated = Adam(0.01).step(
            {"w": np.array([1.0, 1.0])}, {"w": np.array([3.0, -0.5])}
        )

        np.testing.assert_allclose(updated["w"], [0.99, 1.01], rtol=1e-6)

    def test_inputs_not_modified(self):
        """Test optimizers return new arrays."""
        params = {"w": np.array([1.0])}
        Adam(0.1).step(params, {"w": np.array([1.0])})

        np.testing.assert_array_equal(params["w"], [1.0])

    def test_missing_gradient_keeps_value(self):
        """Test layers without a gradient are copied unchanged."""
        params = {"w": np.array([1.0]), "v": np.array([2.0])}
        updated = GradientDescent(0.1).step(params, {"w": np.array([1.0])})

        np.testing.assert_allclose(updated["v"], [2.0])

    def test_make_optimizer(self):
        """Test the factory honours the configured kind."""
        assert isinstance(make_optimizer("adam", 0.1), Adam)
        assert isinstance(make_optimizer(OptimizerKind.SGD, 0.1), GradientDescent)


class TestMethodSelectors:
    """Test meta method names map to layer selectors."""

    @pytest.mark.parametrize(
        ("method", "selector"),
        [
            ("maml", LayerSelector.ALL),
            ("anil-r", LayerSelector.HEAD_ONLY),
            ("anil", LayerSelector.ENCODER_ONLY),
        ],
    )
    def test_for_method(self, method, selector):
        """Test the default mapping."""
        assert MetaConfig().for_method(method).selector is selector

    def test_anil_keeps_explicit_head_only(self):
        """Test anil honours an explicitly configured head-only selector."""
        config = MetaConfig(selector="head-only")

        assert config.for_method("anil").selector is LayerSelector.HEAD_ONLY

    def test_baseline_is_not_meta(self):
        """Test a baseline name raises ConfigurationError."""
        with pytest.raises(ConfigurationError):
            MetaConfig().for_method("ssm")
