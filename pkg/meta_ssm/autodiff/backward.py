"""Reverse-mode gradient computation."""

from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np

from ..exceptions import GraphError, ShapeError
from ..types import Tensor
from .graph import Node, OpKind, apply, constant, get_op, topological_order

_LOGGER = logging.getLogger(__name__)

# Parameter node -> gradient node of the same shape
GradientMap = dict[Node, Node]


def backward(
    loss: Node, wrt: Sequence[Node], create_graph: bool = False
) -> GradientMap:
    """Compute d(loss)/d(w) for every node in `wrt`.

    The backward pass is replayed as primitive ops. With `create_graph=False`
    every intermediate is a constant, so nothing new is recorded. With
    `create_graph=True` the gradients keep their dependency on the inputs and a
    later `backward` through them yields second-order derivatives.

    Node values are never modified. Nodes in `wrt` that the loss does not
    depend on get a zero gradient.

    Only the part of the graph between `loss` and `wrt` is visited: nodes in
    `wrt` are treated as inputs, so their own history is never walked, and
    branches that reach no node in `wrt` are skipped. A node in `wrt` that is
    an ancestor of another one only receives the gradient flowing around it.

    Raises:
        ShapeError: if `loss` is not scalar
        GraphError: if a node in `wrt` does not require a gradient
    """
    if loss.shape != ():
        raise ShapeError(
            "backward requires a scalar loss", op="backward", shapes=[loss.shape]
        )
    for node in wrt:
        if not node.requires_grad:
            raise GraphError(
                "Gradient requested for a node that does not require grad",
                node=repr(node),
            )

    grads: dict[int, Node] = {}
    if loss.requires_grad:
        targets = {id(node) for node in wrt}
        order = topological_order(loss, stop=targets)
        relevant = set(targets)
        for node in order:
            if any(id(parent) in relevant for parent in node.parents):
                relevant.add(id(node))

        grads[id(loss)] = constant(1.0)
        visited = 0
        for node in reversed(order):
            grad = grads.get(id(node))
            if (
                grad is None
                or id(node) in targets
                or id(node) not in relevant
                or node.op is None
            ):
                continue
            visited += 1
            if create_graph:
                inputs: Sequence[Node] = node.parents
            else:
                inputs = [parent.detach() for parent in node.parents]
                grad = grad.detach()
            needs = [id(parent) in relevant for parent in node.parents]
            parent_grads = get_op(node.op).backward(inputs, grad, node.attrs, needs)
            for parent, parent_grad, need in zip(node.parents, parent_grads, needs):
                if not need or parent_grad is None:
                    continue
                previous = grads.get(id(parent))
                grads[id(parent)] = (
                    parent_grad
                    if previous is None
                    else apply(OpKind.ADD, [previous, parent_grad])
                )
        _LOGGER.debug(
            "Backward visited %d of %d reachable nodes", visited, len(order)
        )

    result: GradientMap = {}
    for node in wrt:
        grad = grads.get(id(node))
        if grad is None:
            _LOGGER.debug("No path from loss to %r; gradient is zero", node)
            grad = constant(np.zeros(node.shape))
        result[node] = grad
    return result


def gradient_values(loss: Node, wrt: Sequence[Node]) -> list[Tensor]:
    """First-order gradients of `loss` as plain arrays, in `wrt` order."""
    grads = backward(loss, wrt)
    return [grads[node].value for node in wrt]
