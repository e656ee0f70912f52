"""Outer-loop meta-gradient and update."""

from __future__ import annotations

import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from ..autodiff import Node, backward, leaf
from ..config.schemas import GradientOrder, LayerSelector, MetaConfig
from ..exceptions import MetaSSMError, TaskError
from ..model import NeuralSSM, Regularization, WindowBatch
from ..types import Tensor
from ..utils.parallel import ordered_map
from .inner import LossFn, context_loss_fn, gradient_steps
from .optimizers import Optimizer

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class Task:
    """Context and target losses of one task."""

    name: str
    context_loss: LossFn
    target_loss: LossFn


@dataclass(frozen=True)
class MetaGradient:
    """Summed outer loss and its gradient w.r.t. the initial weights."""

    loss: float
    grads: dict[str, Tensor]
    task_losses: list[float]


def ssm_task(
    name: str,
    model: NeuralSSM,
    context: WindowBatch,
    target: WindowBatch,
    regularization: Regularization | None = None,
) -> Task:
    """Task whose losses are `ssm_loss` on its context and target windows."""
    return Task(
        name=name,
        context_loss=context_loss_fn(model, context, regularization),
        target_loss=context_loss_fn(model, target, regularization),
    )


def _task_gradient(
    parameters: Mapping[str, Tensor],
    task: Task,
    names: Sequence[str],
    config: MetaConfig,
) -> tuple[float, dict[str, Tensor]]:
    # Fresh leaves per task: graphs are never shared between workers.
    initial: dict[str, Node] = {
        name: leaf(value, name=name) for name, value in parameters.items()
    }
    second_order = config.gradient_order is GradientOrder.SECOND
    try:
        adapted = gradient_steps(
            task.context_loss,
            initial,
            names,
            config.inner_rate,
            config.inner_steps,
            create_graph=second_order,
        )
        loss = task.target_loss(adapted.nodes)
    except MetaSSMError as err:
        raise TaskError(
            f"Task {task.name} is unusable: {err.message}", task=task.name
        ) from err

    # First order stops gradients at the adapted weights.
    wrt_map = initial if second_order else adapted.nodes
    wrt = [wrt_map[name] for name in parameters]
    grads = backward(loss, wrt, create_graph=False)
    return loss.item(), {
        name: grads[node].value for name, node in zip(parameters, wrt)
    }


def meta_gradient(
    parameters: Mapping[str, Tensor],
    tasks: Sequence[Task],
    config: MetaConfig,
    workers: int = 1,
) -> MetaGradient:
    """Gradient of Σ_b ℓ(T_b; ω_M^b) with respect to the initial weights.

    Per-task results are reduced left to right in task order, so any worker
    count gives the same numbers.
    """
    names = LayerSelector(config.selector).resolve(list(parameters))
    results = ordered_map(
        lambda task: _task_gradient(parameters, task, names, config),
        tasks,
        workers=workers,
    )
    total = {name: np.zeros_like(value) for name, value in parameters.items()}
    task_losses = []
    for task_loss, task_grads in results:
        task_losses.append(task_loss)
        for name in total:
            total[name] = total[name] + task_grads[name]
    return MetaGradient(
        loss=float(sum(task_losses)), grads=total, task_losses=task_losses
    )


def outer_step(
    model: NeuralSSM,
    tasks: Sequence[Task],
    config: MetaConfig,
    optimizer: Optimizer,
    workers: int = 1,
) -> tuple[NeuralSSM, MetaGradient]:
    """One meta-update of the initial weights over a batch of tasks."""
    gradient = meta_gradient(model.parameters, tasks, config, workers=workers)
    updated = optimizer.step(model.parameters, gradient.grads)
    _LOGGER.debug(
        "Outer step over %d tasks: loss %.6g", len(tasks), gradient.loss
    )
    return NeuralSSM(model.spec, updated), gradient
