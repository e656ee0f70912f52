"""Differentiable forward pass over graph nodes.

Weights are passed as a name -> Node mapping so the same code serves plain
evaluation (constant nodes), first-order training (leaf nodes) and
second-order meta-training (nodes produced by earlier inner-loop updates).
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np

from ..autodiff import (
    Node,
    absolute,
    add,
    concatenate,
    constant,
    matmul,
    reduce_sum,
    relu,
    reshape,
    scale_by,
    square,
    sub,
    transpose,
)
from ..const import ENCODER_PREFIX, OUTPUT_LAYER, TRANSITION_LAYER
from ..exceptions import ShapeError, SizingError
from .architecture import ArchitectureSpec
from .windows import WindowBatch

WeightMap = Mapping[str, Node]


@dataclass(frozen=True)
class Regularization:
    """Optional penalties on A_z: l1·‖A_z‖₁ + l2·‖A_z‖₂²."""

    l1: float = 0.0
    l2: float = 0.0


def encode_nodes(spec: ArchitectureSpec, weights: WeightMap, inputs: Node) -> Node:
    """Map flattened histories (N, H·n_y) to latent states (N, n_z).

    Hidden layers use ReLU; the final layer is linear.
    """
    if len(inputs.shape) != 2 or inputs.shape[1] != spec.input_dim:
        raise ShapeError(
            f"Encoder input must be (N, {spec.input_dim})",
            op="encode",
            shapes=[inputs.shape],
        )
    ones = constant(np.ones((inputs.shape[0], 1)))
    hidden = inputs
    last = spec.encoder_depth - 1
    for index in range(spec.encoder_depth):
        weight = weights[f"{ENCODER_PREFIX}.{index}.weight"]
        bias = weights[f"{ENCODER_PREFIX}.{index}.bias"]
        bias_rows = matmul(ones, reshape(bias, (1, bias.shape[0])))
        hidden = add(matmul(hidden, transpose(weight)), bias_rows)
        if index < last:
            hidden = relu(hidden)
    return hidden


def decode_steps(weights: WeightMap, latent: Node, steps: int) -> list[Node]:
    """Outputs C_z A_z^k z for k = 0..steps-1, each (N, n_y)."""
    transition_t = transpose(weights[TRANSITION_LAYER])
    output_t = transpose(weights[OUTPUT_LAYER])
    outputs = []
    state = latent
    for step in range(steps):
        if step:
            state = matmul(state, transition_t)
        outputs.append(matmul(state, output_t))
    return outputs


def predict_nodes(spec: ArchitectureSpec, weights: WeightMap, inputs: Node) -> Node:
    """H_p-step predictions, flattened time-major to (N, H_p·n_y)."""
    latent = encode_nodes(spec, weights, inputs)
    return concatenate(decode_steps(weights, latent, spec.horizon), axis=1)


def loss_nodes(
    spec: ArchitectureSpec,
    weights: WeightMap,
    batch: WindowBatch,
    regularization: Regularization | None = None,
) -> Node:
    """Multi-step MSE averaged over the batch, plus optional A_z penalties.

    Per window the loss is (1/H_p)·Σ_k ‖y_{t+k} − ŷ_{t+k}‖².

    Raises:
        SizingError: on an empty batch
    """
    count = len(batch)
    if count == 0:
        raise SizingError("ssm_loss needs at least one window", required=1, available=0)
    if batch.histories.shape[1:] != (spec.history_length, spec.output_dim) or (
        batch.futures.shape[1:] != (spec.horizon, spec.output_dim)
    ):
        raise ShapeError(
            "Window batch does not match the architecture",
            op="ssm_loss",
            shapes=[batch.histories.shape, batch.futures.shape],
        )

    inputs = constant(batch.histories.reshape(count, spec.input_dim))
    targets = constant(batch.futures.reshape(count, spec.horizon * spec.output_dim))
    residual = sub(predict_nodes(spec, weights, inputs), targets)
    loss = scale_by(1.0 / (count * spec.horizon), reduce_sum(square(residual)))

    regularization = regularization or Regularization()
    transition = weights[TRANSITION_LAYER]
    if regularization.l1:
        loss = add(loss, scale_by(regularization.l1, reduce_sum(absolute(transition))))
    if regularization.l2:
        loss = add(loss, scale_by(regularization.l2, reduce_sum(square(transition))))
    return loss
