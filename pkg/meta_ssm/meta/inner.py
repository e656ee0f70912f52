"""Inner-loop adaptation.

The inner loop runs M full-batch gradient steps on the context loss, updating
only the selected layers. In second-order mode the steps are recorded on the
graph so the adapted weights stay differentiable functions of the initial
ones; in first-order mode each step produces fresh leaves.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field

from ..autodiff import Node, backward, leaf, scale_by, sub
from ..config.schemas import GradientOrder, LayerSelector, MetaConfig
from ..exceptions import SizingError
from ..model import NeuralSSM, Regularization, WindowBatch, loss_nodes
from ..types import Tensor

_LOGGER = logging.getLogger(__name__)

# Scalar loss of a name -> weight mapping
LossFn = Callable[[Mapping[str, Node]], Node]


@dataclass
class AdaptedWeights:
    """Per-layer weights ω_m after m inner steps.

    `initial` keeps the nodes the adaptation started from. Layers outside
    `adapted` are the very same node objects in both maps.
    """

    nodes: dict[str, Node]
    initial: dict[str, Node]
    adapted: tuple[str, ...]
    losses: list[float] = field(default_factory=list)

    @property
    def steps(self) -> int:
        """Number of inner steps taken."""
        return len(self.losses)

    def values(self) -> dict[str, Tensor]:
        """Layer values in order."""
        return {name: node.value for name, node in self.nodes.items()}

    def to_model(self, base: NeuralSSM) -> NeuralSSM:
        """A model with `base`'s architecture and these weights."""
        return NeuralSSM(base.spec, {n: v.copy() for n, v in self.values().items()})


def gradient_steps(
    loss_fn: LossFn,
    weights: Mapping[str, Node],
    names: Sequence[str],
    rate: float,
    steps: int,
    create_graph: bool,
) -> AdaptedWeights:
    """Run `steps` gradient steps of `loss_fn` on the layers in `names`.

    The loss value before each step is recorded.
    """
    initial = dict(weights)
    current = dict(weights)
    losses: list[float] = []
    for _ in range(steps):
        loss = loss_fn(current)
        losses.append(loss.item())
        wrt = [current[name] for name in names]
        if not wrt:
            continue
        grads = backward(loss, wrt, create_graph=create_graph)
        for name, node in zip(names, wrt):
            if create_graph:
                current[name] = sub(node, scale_by(rate, grads[node]))
            else:
                current[name] = leaf(node.value - rate * grads[node].value, name=name)
    return AdaptedWeights(
        nodes=current, initial=initial, adapted=tuple(names), losses=losses
    )


def context_loss_fn(
    model: NeuralSSM, batch: WindowBatch, regularization: Regularization | None
) -> LossFn:
    """Bind `ssm_loss` on `batch` to a weight mapping."""

    def loss_fn(weights: Mapping[str, Node]) -> Node:
        return loss_nodes(model.spec, weights, batch, regularization)

    return loss_fn


def inner_adapt(
    model: NeuralSSM,
    weights: Mapping[str, Node],
    context: WindowBatch,
    config: MetaConfig,
    regularization: Regularization | None = None,
    create_graph: bool | None = None,
) -> AdaptedWeights:
    """Adapt `weights` to a context set with M steps at β_in.

    `create_graph` defaults to the configured gradient order.

    Raises:
        SizingError: if the context set is empty
    """
    if len(context) == 0:
        raise SizingError("inner_adapt needs a non-empty context", required=1, available=0)
    if create_graph is None:
        create_graph = config.gradient_order is GradientOrder.SECOND
    names = LayerSelector(config.selector).resolve(list(weights))
    return gradient_steps(
        context_loss_fn(model, context, regularization),
        weights,
        names,
        config.inner_rate,
        config.inner_steps,
        create_graph,
    )


def adapt_inference(
    model: NeuralSSM,
    context: WindowBatch,
    steps: int,
    config: MetaConfig,
    regularization: Regularization | None = None,
) -> AdaptedWeights:
    """Adapt a trained model to a query context; first-order only.

    Returns the starting weights unchanged when `steps` is 0.

    Raises:
        SizingError: if the context set is empty
    """
    if len(context) == 0:
        raise SizingError(
            "adapt_inference needs a non-empty context", required=1, available=0
        )
    weights = model.as_nodes(requires_grad=True)
    names = LayerSelector(config.selector).resolve(list(weights))
    adapted = gradient_steps(
        context_loss_fn(model, context, regularization),
        weights,
        names,
        config.inner_rate,
        steps,
        create_graph=False,
    )
    if adapted.losses:
        _LOGGER.debug(
            "Adapted %s over %d steps: context loss %.6g -> %.6g",
            config.selector,
            steps,
            adapted.losses[0],
            adapted.losses[-1],
        )
    return adapted
