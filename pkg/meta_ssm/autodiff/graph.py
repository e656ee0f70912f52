"""Graph nodes and op dispatch for reverse-mode differentiation."""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from collections.abc import Collection, Mapping, Sequence
from enum import StrEnum
from typing import Any, ClassVar

import numpy as np

from ..exceptions import NumericError, ShapeError
from ..types import Tensor

_LOGGER = logging.getLogger(__name__)


class OpKind(StrEnum):
    """Primitive operations understood by the graph."""

    MATMUL = "matmul"
    TRANSPOSE = "transpose"
    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    SCALE = "scale"
    RELU = "relu"
    ABS = "abs"
    SQUARE = "square"
    SUM = "sum"
    MEAN = "mean"
    SLICE = "slice"
    EMBED = "embed"
    CONCAT = "concat"
    RESHAPE = "reshape"


class Node:
    """A value in the computation graph.

    A node is either a leaf (no op, no parents) or the output of one primitive
    applied to its parents. Parents are only recorded when at least one of them
    requires a gradient, so constant sub-expressions never retain a graph.
    """

    __slots__ = ("attrs", "name", "op", "parents", "requires_grad", "value")

    def __init__(
        self,
        value: Tensor,
        op: OpKind | None = None,
        parents: tuple[Node, ...] = (),
        attrs: Mapping[str, Any] | None = None,
        requires_grad: bool = False,
        name: str | None = None,
    ) -> None:
        """Initialize a node around an already validated float64 array."""
        self.value = value
        self.op = op
        self.parents = parents
        self.attrs = dict(attrs or {})
        self.requires_grad = requires_grad
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        """Return the shape of the node's value."""
        return tuple(self.value.shape)

    def item(self) -> float:
        """Return the value of a single-element node as a float."""
        if self.value.size != 1:
            raise ShapeError(
                "item() requires a single-element node", op="item", shapes=[self.shape]
            )
        return float(self.value.reshape(()))

    def detach(self) -> Node:
        """Return a constant node sharing this node's value."""
        return Node(self.value, name=self.name)

    def __repr__(self) -> str:
        """Return a short description of the node."""
        label = self.name or (self.op.value if self.op else "leaf")
        return f"Node({label}, shape={self.shape}, requires_grad={self.requires_grad})"


def _as_tensor(value: Any) -> Tensor:
    array = np.array(value, dtype=np.float64)
    if not np.all(np.isfinite(array)):
        raise NumericError("Tensor contains non-finite entries", shape=array.shape)
    if any(dim <= 0 for dim in array.shape):
        raise ShapeError(
            "Tensor dimensions must be positive", op="tensor", shapes=[array.shape]
        )
    return array


def leaf(value: Any, requires_grad: bool = True, name: str | None = None) -> Node:
    """Create a leaf node holding a copy of `value` as float64."""
    return Node(_as_tensor(value), requires_grad=requires_grad, name=name)


def constant(value: Any, name: str | None = None) -> Node:
    """Create a leaf node that never receives a gradient."""
    return leaf(value, requires_grad=False, name=name)


class Op(ABC):
    """A primitive with a shape rule, a forward value and a recorded backward."""

    kind: ClassVar[OpKind]
    arity: ClassVar[int | None] = None  # None means variadic

    def check(self, shapes: Sequence[tuple[int, ...]], attrs: Mapping[str, Any]) -> None:
        """Raise ShapeError if `shapes` violate the op's shape rule."""

    @abstractmethod
    def forward(self, values: Sequence[Tensor], attrs: Mapping[str, Any]) -> Tensor:
        """Compute the op's value."""

    @abstractmethod
    def backward(
        self,
        inputs: Sequence[Node],
        grad: Node,
        attrs: Mapping[str, Any],
        needs: Sequence[bool],
    ) -> list[Node | None]:
        """Return one gradient node per input, built from primitive ops.

        Entries whose `needs` flag is False may be None.
        """

    def shape_error(self, detail: str, shapes: Sequence[tuple[int, ...]]) -> ShapeError:
        """Build a ShapeError naming this op and the offending shapes."""
        rendered = " and ".join(str(tuple(s)) for s in shapes)
        return ShapeError(
            f"{self.kind.value}: {detail} (got {rendered})",
            op=self.kind.value,
            shapes=shapes,
        )


_OPS: dict[OpKind, Op] = {}


def register_op(cls: type[Op]) -> type[Op]:
    """Class decorator adding an op to the dispatch table."""
    _OPS[cls.kind] = cls()
    return cls


def get_op(kind: OpKind | str) -> Op:
    """Return the registered op for `kind`."""
    return _OPS[OpKind(kind)]


def apply(kind: OpKind | str, inputs: Sequence[Node], **attrs: Any) -> Node:
    """Apply a primitive op to `inputs`, recording the dependency if needed.

    Raises:
        ShapeError: if the inputs violate the op's shape rule
        NumericError: if the result contains NaN or Inf
    """
    op = get_op(kind)
    shapes = [node.shape for node in inputs]
    if op.arity is not None and len(inputs) != op.arity:
        raise op.shape_error(f"expects {op.arity} inputs", shapes)
    if not inputs:
        raise op.shape_error("expects at least one input", shapes)
    op.check(shapes, attrs)

    with np.errstate(all="ignore"):
        value = np.asarray(op.forward([node.value for node in inputs], attrs))
    if not np.all(np.isfinite(value)):
        raise NumericError(
            f"{op.kind.value} produced non-finite values",
            op=op.kind.value,
            shapes=shapes,
        )

    requires_grad = any(node.requires_grad for node in inputs)
    return Node(
        value.astype(np.float64, copy=False),
        op=op.kind,
        parents=tuple(inputs) if requires_grad else (),
        attrs=attrs,
        requires_grad=requires_grad,
    )


def topological_order(
    root: Node, stop: Collection[int] = frozenset()
) -> list[Node]:
    """Return the gradient-carrying nodes reachable from `root`, inputs first.

    Nodes whose id is in `stop` are included but their parents are not
    expanded.
    """
    order: list[Node] = []
    visited: set[int] = set()
    stack: list[tuple[Node, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        if id(node) in stop:
            continue
        for parent in reversed(node.parents):
            if parent.requires_grad and id(parent) not in visited:
                stack.append((parent, False))
    return order
