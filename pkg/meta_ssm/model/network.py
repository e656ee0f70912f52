"""Deep encoder neural state-space model."""

from __future__ import annotations

import logging
from collections.abc import Iterator, Mapping
from dataclasses import dataclass

import numpy as np

from ..autodiff import Node, constant, leaf
from ..const import ENCODER_PREFIX, OUTPUT_LAYER, TRANSITION_LAYER
from ..exceptions import ShapeError, SizingError
from ..types import Tensor
from .architecture import ArchitectureSpec
from .forward import Regularization, encode_nodes, loss_nodes, predict_nodes
from .windows import WindowBatch, WindowSample

_LOGGER = logging.getLogger(__name__)


@dataclass
class NeuralSSM:
    """Ordered layers ω = (encoder affine layers, A_z, C_z) plus the architecture."""

    spec: ArchitectureSpec
    parameters: dict[str, Tensor]

    def __post_init__(self) -> None:
        """Validate layer names and shapes against the architecture."""
        expected = self.spec.layer_shapes()
        if list(self.parameters) != list(expected):
            raise ShapeError(
                "Layer names do not match the architecture",
                op="neural_ssm",
                expected=list(expected),
                got=list(self.parameters),
            )
        for name, shape in expected.items():
            value = np.asarray(self.parameters[name], dtype=np.float64)
            if value.shape != shape:
                raise ShapeError(
                    f"Layer {name} has the wrong shape",
                    op="neural_ssm",
                    shapes=[shape, value.shape],
                )
            self.parameters[name] = value

    @classmethod
    def init(cls, spec: ArchitectureSpec, seed: int) -> NeuralSSM:
        """Xavier-uniform weights, zero biases, deterministic in `seed`.

        Every weight of shape (fan_out, fan_in) is drawn from U(-a, a) with
        a = sqrt(6 / (fan_in + fan_out)).
        """
        rng = np.random.default_rng(seed)
        parameters: dict[str, Tensor] = {}
        for name, shape in spec.layer_shapes().items():
            if len(shape) == 1:
                parameters[name] = np.zeros(shape)
                continue
            fan_out, fan_in = shape
            bound = np.sqrt(6.0 / (fan_in + fan_out))
            parameters[name] = rng.uniform(-bound, bound, size=shape)
        _LOGGER.debug(
            "Initialized model with %d layers (seed=%d)", len(parameters), seed
        )
        return cls(spec=spec, parameters=parameters)

    def __iter__(self) -> Iterator[tuple[str, Tensor]]:
        """Iterate (name, tensor) pairs in layer order."""
        return iter(self.parameters.items())

    @property
    def layer_names(self) -> list[str]:
        """Layer names in order."""
        return list(self.parameters)

    @property
    def encoder_layer_names(self) -> list[str]:
        """Names of encoder weights and biases."""
        return [n for n in self.parameters if n.startswith(f"{ENCODER_PREFIX}.")]

    @property
    def head_layer_names(self) -> list[str]:
        """Names of A_z and C_z."""
        return [TRANSITION_LAYER, OUTPUT_LAYER]

    @property
    def transition(self) -> Tensor:
        """A_z."""
        return self.parameters[TRANSITION_LAYER]

    @property
    def output_map(self) -> Tensor:
        """C_z."""
        return self.parameters[OUTPUT_LAYER]

    def parameter_count(self) -> int:
        """Total number of scalar parameters."""
        return int(sum(p.size for p in self.parameters.values()))

    def spectral_radius(self) -> float:
        """Largest eigenvalue magnitude of A_z."""
        return float(np.max(np.abs(np.linalg.eigvals(self.transition))))

    def copy(self) -> NeuralSSM:
        """Deep copy."""
        return NeuralSSM(
            self.spec, {name: value.copy() for name, value in self.parameters.items()}
        )

    def with_parameters(self, values: Mapping[str, Tensor]) -> NeuralSSM:
        """New model with the given layers replaced."""
        merged = {name: values.get(name, value) for name, value in self}
        return NeuralSSM(self.spec, {n: np.array(v) for n, v in merged.items()})

    def as_nodes(self, requires_grad: bool = True) -> dict[str, Node]:
        """One graph leaf per layer."""
        if requires_grad:
            return {name: leaf(value, name=name) for name, value in self}
        return {name: constant(value, name=name) for name, value in self}

    def _history_input(self, history: Tensor) -> Node:
        history = np.asarray(history, dtype=np.float64)
        expected = (self.spec.history_length, self.spec.output_dim)
        if history.shape != expected:
            raise ShapeError(
                f"History must be {expected}", op="encode", shapes=[history.shape]
            )
        return constant(history.reshape(1, self.spec.input_dim))

    def encode(self, history: Tensor) -> Tensor:
        """Latent state z_t = f_enc(Y_{t-H:t}) for one (H, n_y) window."""
        latent = encode_nodes(
            self.spec, self.as_nodes(requires_grad=False), self._history_input(history)
        )
        return latent.value[0]

    def latent_rollout(self, z0: Tensor, steps: int) -> Tensor:
        """z_1..z_steps with z_{k+1} = A_z z_k, as a (steps, n_z) block."""
        if steps < 0:
            raise SizingError("steps must be non-negative", required=0, available=steps)
        out = np.empty((steps, self.spec.latent_dim))
        state = np.asarray(z0, dtype=np.float64)
        for step in range(steps):
            state = self.transition @ state
            out[step] = state
        return out

    def predict(self, history: Tensor) -> Tensor:
        """ŷ_t..ŷ_{t+H_p-1} for one history window, as (H_p, n_y)."""
        flat = predict_nodes(
            self.spec, self.as_nodes(requires_grad=False), self._history_input(history)
        )
        return flat.value.reshape(self.spec.horizon, self.spec.output_dim)

    def rollout_predict(self, context: Tensor, horizon: int) -> Tensor:
        """Encode the last H context samples once and roll forward linearly.

        Row k of the result is C_z A_z^k z, where z encodes the final H samples
        of `context`; the encoder is never re-invoked.

        Raises:
            SizingError: if the context holds fewer than H samples or the
                horizon is negative
        """
        context = np.asarray(context, dtype=np.float64)
        if context.ndim != 2 or context.shape[0] < self.spec.history_length:
            raise SizingError(
                "Context shorter than the history window",
                required=self.spec.history_length,
                available=context.shape[0] if context.ndim else 0,
            )
        if horizon < 0:
            raise SizingError(
                "Prediction horizon must not be negative",
                required=0,
                available=horizon,
            )
        out = np.empty((horizon, self.spec.output_dim))
        if horizon == 0:
            return out
        state = self.encode(context[-self.spec.history_length :])
        for step in range(horizon):
            if step:
                state = self.transition @ state
            out[step] = self.output_map @ state
        return out


def ssm_loss(
    model: NeuralSSM,
    batch: WindowBatch | list[WindowSample],
    regularization: Regularization | None = None,
) -> float:
    """Batch-mean multi-step MSE of `model` on `batch`."""
    if isinstance(batch, list):
        batch = WindowBatch.from_samples(batch)
    loss = loss_nodes(
        model.spec, model.as_nodes(requires_grad=False), batch, regularization
    )
    return loss.item()
