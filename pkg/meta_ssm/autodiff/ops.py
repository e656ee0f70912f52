"""Primitive ops and their recorded backward rules.

Each backward rule is written in terms of other primitives through `apply`, so
that when gradients are requested with `create_graph=True` the gradient
computation itself becomes part of the graph and can be differentiated again.
Only scalar-times-tensor broadcasting exists; every other shape mismatch is an
error.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from math import prod
from typing import Any

import numpy as np

from ..types import Tensor
from .graph import Node, Op, OpKind, apply, constant, register_op


def matmul(a: Node, b: Node) -> Node:
    """Matrix product of two 2-D nodes."""
    return apply(OpKind.MATMUL, [a, b])


def transpose(x: Node) -> Node:
    """Transpose of a 2-D node."""
    return apply(OpKind.TRANSPOSE, [x])


def add(a: Node, b: Node) -> Node:
    """Elementwise sum of equally shaped nodes."""
    return apply(OpKind.ADD, [a, b])


def sub(a: Node, b: Node) -> Node:
    """Elementwise difference of equally shaped nodes."""
    return apply(OpKind.SUB, [a, b])


def mul(a: Node, b: Node) -> Node:
    """Elementwise product of equally shaped nodes."""
    return apply(OpKind.MUL, [a, b])


def scale(s: Node, x: Node) -> Node:
    """Scalar node times tensor node."""
    return apply(OpKind.SCALE, [s, x])


def scale_by(factor: float, x: Node) -> Node:
    """Python float times tensor node."""
    return scale(constant(factor), x)


def relu(x: Node) -> Node:
    """Rectified linear unit; the subgradient at zero is zero."""
    return apply(OpKind.RELU, [x])


def absolute(x: Node) -> Node:
    """Elementwise absolute value; the subgradient at zero is zero."""
    return apply(OpKind.ABS, [x])


def square(x: Node) -> Node:
    """Elementwise square."""
    return apply(OpKind.SQUARE, [x])


def reduce_sum(x: Node) -> Node:
    """Sum of all entries, as a scalar node."""
    return apply(OpKind.SUM, [x])


def reduce_mean(x: Node) -> Node:
    """Mean of all entries, as a scalar node."""
    return apply(OpKind.MEAN, [x])


def take(x: Node, bounds: Sequence[tuple[int, int]]) -> Node:
    """Contiguous slice given (start, stop) bounds for the leading axes."""
    return apply(OpKind.SLICE, [x], bounds=tuple(tuple(b) for b in bounds))


def embed(x: Node, shape: Sequence[int], bounds: Sequence[tuple[int, int]]) -> Node:
    """Place `x` into a zero tensor of `shape` at `bounds` (adjoint of take)."""
    return apply(
        OpKind.EMBED,
        [x],
        shape=tuple(shape),
        bounds=tuple(tuple(b) for b in bounds),
    )


def concatenate(nodes: Sequence[Node], axis: int = 0) -> Node:
    """Concatenate nodes along `axis`."""
    return apply(OpKind.CONCAT, list(nodes), axis=axis)


def reshape(x: Node, shape: Sequence[int]) -> Node:
    """Reshape preserving row-major order."""
    return apply(OpKind.RESHAPE, [x], shape=tuple(shape))


def _index(bounds: Sequence[tuple[int, int]]) -> tuple[slice, ...]:
    return tuple(slice(start, stop) for start, stop in bounds)


def _check_bounds(
    op: Op, shape: tuple[int, ...], bounds: Sequence[tuple[int, int]]
) -> None:
    if len(bounds) > len(shape):
        raise op.shape_error(f"{len(bounds)} bounds for rank {len(shape)}", [shape])
    for axis, (start, stop) in enumerate(bounds):
        if not 0 <= start < stop <= shape[axis]:
            raise op.shape_error(
                f"bounds ({start}, {stop}) out of range on axis {axis}", [shape]
            )


@register_op
class MatMul(Op):
    """(m, k) @ (k, n) -> (m, n)."""

    kind = OpKind.MATMUL
    arity = 2

    def check(self, shapes: Sequence[tuple[int, ...]], attrs: Mapping[str, Any]) -> None:
        """Both operands 2-D with matching inner dimension."""
        a, b = shapes
        if len(a) != 2 or len(b) != 2 or a[1] != b[0]:
            raise self.shape_error("operands must be (m, k) and (k, n)", shapes)

    def forward(self, values: Sequence[Tensor], attrs: Mapping[str, Any]) -> Tensor:
        """Matrix product."""
        return values[0] @ values[1]

    def backward(
        self,
        inputs: Sequence[Node],
        grad: Node,
        attrs: Mapping[str, Any],
        needs: Sequence[bool],
    ) -> list[Node | None]:
        """dA = G Bᵀ, dB = Aᵀ G."""
        a, b = inputs
        return [
            matmul(grad, transpose(b)) if needs[0] else None,
            matmul(transpose(a), grad) if needs[1] else None,
        ]


@register_op
class Transpose(Op):
    """Swap the two axes of a matrix."""

    kind = OpKind.TRANSPOSE
    arity = 1

    def check(self, shapes: Sequence[tuple[int, ...]], attrs: Mapping[str, Any]) -> None:
        """Operand must be 2-D."""
        if len(shapes[0]) != 2:
            raise self.shape_error("operand must be 2-D", shapes)

    def forward(self, values: Sequence[Tensor], attrs: Mapping[str, Any]) -> Tensor:
        """Transposed copy."""
        return values[0].T.copy()

    def backward(
        self,
        inputs: Sequence[Node],
        grad: Node,
        attrs: Mapping[str, Any],
        needs: Sequence[bool],
    ) -> list[Node | None]:
        """Transpose the incoming gradient."""
        return [transpose(grad)]


class _SameShapeBinary(Op):
    arity = 2

    def check(self, shapes: Sequence[tuple[int, ...]], attrs: Mapping[str, Any]) -> None:
        """Operands must have identical shapes."""
        if shapes[0] != shapes[1]:
            raise self.shape_error("operand shapes must match", shapes)


@register_op
class Add(_SameShapeBinary):
    """a + b."""

    kind = OpKind.ADD

    def forward(self, values: Sequence[Tensor], attrs: Mapping[str, Any]) -> Tensor:
        """Elementwise sum."""
        return values[0] + values[1]

    def backward(
        self,
        inputs: Sequence[Node],
        grad: Node,
        attrs: Mapping[str, Any],
        needs: Sequence[bool],
    ) -> list[Node | None]:
        """Pass the gradient through to both operands."""
        return [grad, grad]


@register_op
class Sub(_SameShapeBinary):
    """a - b."""

    kind = OpKind.SUB

    def forward(self, values: Sequence[Tensor], attrs: Mapping[str, Any]) -> Tensor:
        """Elementwise difference."""
        return values[0] - values[1]

    def backward(
        self,
        inputs: Sequence[Node],
        grad: Node,
        attrs: Mapping[str, Any],
        needs: Sequence[bool],
    ) -> list[Node | None]:
        """Gradient for a, negated gradient for b."""
        return [grad, scale_by(-1.0, grad) if needs[1] else None]


@register_op
class Mul(_SameShapeBinary):
    """a * b (elementwise)."""

    kind = OpKind.MUL

    def forward(self, values: Sequence[Tensor], attrs: Mapping[str, Any]) -> Tensor:
        """Elementwise product."""
        return values[0] * values[1]

    def backward(
        self,
        inputs: Sequence[Node],
        grad: Node,
        attrs: Mapping[str, Any],
        needs: Sequence[bool],
    ) -> list[Node | None]:
        """Product rule."""
        a, b = inputs
        return [
            mul(grad, b) if needs[0] else None,
            mul(grad, a) if needs[1] else None,
        ]


@register_op
class Scale(Op):
    """Scalar s times tensor x."""

    kind = OpKind.SCALE
    arity = 2

    def check(self, shapes: Sequence[tuple[int, ...]], attrs: Mapping[str, Any]) -> None:
        """First operand must be a scalar."""
        if shapes[0] != ():
            raise self.shape_error("first operand must be a scalar", shapes)

    def forward(self, values: Sequence[Tensor], attrs: Mapping[str, Any]) -> Tensor:
        """Scalar product."""
        return values[0] * values[1]

    def backward(
        self,
        inputs: Sequence[Node],
        grad: Node,
        attrs: Mapping[str, Any],
        needs: Sequence[bool],
    ) -> list[Node | None]:
        """ds = sum(G * x), dx = s G."""
        s, x = inputs
        return [
            reduce_sum(mul(grad, x)) if needs[0] else None,
            scale(s, grad) if needs[1] else None,
        ]


class _Elementwise(Op):
    arity = 1

    def local_slope(self, x: Tensor) -> Tensor:
        """Derivative of the elementwise map, treated as a constant."""
        raise NotImplementedError

    def backward(
        self,
        inputs: Sequence[Node],
        grad: Node,
        attrs: Mapping[str, Any],
        needs: Sequence[bool],
    ) -> list[Node | None]:
        """Multiply the gradient by the constant local slope."""
        return [mul(grad, constant(self.local_slope(inputs[0].value)))]


@register_op
class Relu(_Elementwise):
    """max(x, 0)."""

    kind = OpKind.RELU

    def forward(self, values: Sequence[Tensor], attrs: Mapping[str, Any]) -> Tensor:
        """Clamp negatives to zero."""
        return np.maximum(values[0], 0.0)

    def local_slope(self, x: Tensor) -> Tensor:
        """Step function, zero at the kink."""
        return (x > 0.0).astype(np.float64)


@register_op
class Abs(_Elementwise):
    """|x|."""

    kind = OpKind.ABS

    def forward(self, values: Sequence[Tensor], attrs: Mapping[str, Any]) -> Tensor:
        """Absolute value."""
        return np.abs(values[0])

    def local_slope(self, x: Tensor) -> Tensor:
        """Sign, zero at the kink."""
        return np.sign(x)


@register_op
class Square(Op):
    """x²."""

    kind = OpKind.SQUARE
    arity = 1

    def forward(self, values: Sequence[Tensor], attrs: Mapping[str, Any]) -> Tensor:
        """Elementwise square."""
        return values[0] * values[0]

    def backward(
        self,
        inputs: Sequence[Node],
        grad: Node,
        attrs: Mapping[str, Any],
        needs: Sequence[bool],
    ) -> list[Node | None]:
        """2 x G, kept differentiable in x."""
        return [mul(scale_by(2.0, inputs[0]), grad)]


@register_op
class Sum(Op):
    """Sum of all entries."""

    kind = OpKind.SUM
    arity = 1

    def forward(self, values: Sequence[Tensor], attrs: Mapping[str, Any]) -> Tensor:
        """Full reduction."""
        return np.asarray(values[0].sum())

    def backward(
        self,
        inputs: Sequence[Node],
        grad: Node,
        attrs: Mapping[str, Any],
        needs: Sequence[bool],
    ) -> list[Node | None]:
        """Spread the scalar gradient over the input shape."""
        return [scale(grad, constant(np.ones(inputs[0].shape)))]


@register_op
class Mean(Op):
    """Mean of all entries."""

    kind = OpKind.MEAN
    arity = 1

    def forward(self, values: Sequence[Tensor], attrs: Mapping[str, Any]) -> Tensor:
        """Full reduction divided by the entry count."""
        return np.asarray(values[0].mean())

    def backward(
        self,
        inputs: Sequence[Node],
        grad: Node,
        attrs: Mapping[str, Any],
        needs: Sequence[bool],
    ) -> list[Node | None]:
        """Spread grad / n over the input shape."""
        shape = inputs[0].shape
        return [scale(grad, constant(np.full(shape, 1.0 / prod(shape))))]


@register_op
class Slice(Op):
    """Contiguous sub-block."""

    kind = OpKind.SLICE
    arity = 1

    def check(self, shapes: Sequence[tuple[int, ...]], attrs: Mapping[str, Any]) -> None:
        """Bounds must be non-empty and in range."""
        _check_bounds(self, shapes[0], attrs["bounds"])

    def forward(self, values: Sequence[Tensor], attrs: Mapping[str, Any]) -> Tensor:
        """Copy of the selected block."""
        return values[0][_index(attrs["bounds"])].copy()

    def backward(
        self,
        inputs: Sequence[Node],
        grad: Node,
        attrs: Mapping[str, Any],
        needs: Sequence[bool],
    ) -> list[Node | None]:
        """Scatter the gradient back into a zero tensor."""
        return [embed(grad, inputs[0].shape, attrs["bounds"])]


@register_op
class Embed(Op):
    """Zero tensor with a block set from the input."""

    kind = OpKind.EMBED
    arity = 1

    def check(self, shapes: Sequence[tuple[int, ...]], attrs: Mapping[str, Any]) -> None:
        """The input must exactly fill the target block."""
        target = tuple(attrs["shape"])
        bounds = attrs["bounds"]
        _check_bounds(self, target, bounds)
        block = tuple(stop - start for start, stop in bounds) + target[len(bounds) :]
        if block != shapes[0]:
            raise self.shape_error(f"input does not fill block {block}", shapes)

    def forward(self, values: Sequence[Tensor], attrs: Mapping[str, Any]) -> Tensor:
        """Zero tensor with the block filled in."""
        out = np.zeros(attrs["shape"])
        out[_index(attrs["bounds"])] = values[0]
        return out

    def backward(
        self,
        inputs: Sequence[Node],
        grad: Node,
        attrs: Mapping[str, Any],
        needs: Sequence[bool],
    ) -> list[Node | None]:
        """Read the block back out of the gradient."""
        return [take(grad, attrs["bounds"])]


@register_op
class Concat(Op):
    """Concatenation along one axis."""

    kind = OpKind.CONCAT
    arity = None

    def check(self, shapes: Sequence[tuple[int, ...]], attrs: Mapping[str, Any]) -> None:
        """Ranks equal; all dims except `axis` equal."""
        axis = attrs["axis"]
        first = shapes[0]
        if not 0 <= axis < len(first):
            raise self.shape_error(f"axis {axis} out of range", shapes)
        for shape in shapes[1:]:
            if len(shape) != len(first) or any(
                d != e for i, (d, e) in enumerate(zip(shape, first)) if i != axis
            ):
                raise self.shape_error(
                    f"shapes must agree except on axis {axis}", shapes
                )

    def forward(self, values: Sequence[Tensor], attrs: Mapping[str, Any]) -> Tensor:
        """Joined array."""
        return np.concatenate(values, axis=attrs["axis"])

    def backward(
        self,
        inputs: Sequence[Node],
        grad: Node,
        attrs: Mapping[str, Any],
        needs: Sequence[bool],
    ) -> list[Node | None]:
        """Split the gradient back into per-input blocks."""
        axis = attrs["axis"]
        grads: list[Node | None] = []
        offset = 0
        for node, need in zip(inputs, needs):
            width = node.shape[axis]
            if need:
                bounds = [(0, d) for d in grad.shape[:axis]]
                bounds.append((offset, offset + width))
                grads.append(take(grad, bounds))
            else:
                grads.append(None)
            offset += width
        return grads


@register_op
class Reshape(Op):
    """Row-major reshape."""

    kind = OpKind.RESHAPE
    arity = 1

    def check(self, shapes: Sequence[tuple[int, ...]], attrs: Mapping[str, Any]) -> None:
        """Element counts must agree."""
        target = tuple(attrs["shape"])
        if prod(target) != prod(shapes[0]) or any(d <= 0 for d in target):
            raise self.shape_error(f"cannot reshape to {target}", shapes)

    def forward(self, values: Sequence[Tensor], attrs: Mapping[str, Any]) -> Tensor:
        """Reshaped copy."""
        return values[0].reshape(attrs["shape"]).copy()

    def backward(
        self,
        inputs: Sequence[Node],
        grad: Node,
        attrs: Mapping[str, Any],
        needs: Sequence[bool],
    ) -> list[Node | None]:
        """Reshape the gradient back."""
        return [reshape(grad, inputs[0].shape)]
