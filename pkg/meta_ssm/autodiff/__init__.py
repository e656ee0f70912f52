"""Reverse-mode automatic differentiation over dense float64 tensors."""

from __future__ import annotations

from .backward import GradientMap, backward, gradient_values
from .graph import Node, OpKind, apply, constant, leaf, topological_order
from .ops import (
    absolute,
    add,
    concatenate,
    embed,
    matmul,
    mul,
    reduce_mean,
    reduce_sum,
    relu,
    reshape,
    scale,
    scale_by,
    square,
    sub,
    take,
    transpose,
)

__all__ = [
    "GradientMap",
    "Node",
    "OpKind",
    "absolute",
    "add",
    "apply",
    "backward",
    "concatenate",
    "constant",
    "embed",
    "gradient_values",
    "leaf",
    "matmul",
    "mul",
    "reduce_mean",
    "reduce_sum",
    "relu",
    "reshape",
    "scale",
    "scale_by",
    "square",
    "sub",
    "take",
    "topological_order",
    "transpose",
]
