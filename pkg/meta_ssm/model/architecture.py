"""Architecture description of the deep encoder state-space model."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from ..const import (
    DEFAULT_HIDDEN_LAYERS,
    DEFAULT_HIDDEN_WIDTH,
    DEFAULT_HISTORY_LENGTH,
    DEFAULT_LATENT_DIM,
    DEFAULT_OUTPUT_DIM,
    DEFAULT_PREDICTION_HORIZON,
    ENCODER_PREFIX,
    OUTPUT_LAYER,
    TRANSITION_LAYER,
)
from ..exceptions import ConfigurationError


def _positive_int(name: str, value: Any) -> None:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ConfigurationError(
            f"{name} must be an integer, got {type(value).__name__}",
            config_key=name,
            config_value=value,
        )
    if value < 1:
        raise ConfigurationError(
            f"{name} must be at least 1, got {value}",
            config_key=name,
            config_value=value,
        )


@dataclass(frozen=True)
class ArchitectureSpec:
    """Window sizes and layer widths of the network."""

    history_length: int = DEFAULT_HISTORY_LENGTH
    horizon: int = DEFAULT_PREDICTION_HORIZON
    output_dim: int = DEFAULT_OUTPUT_DIM
    latent_dim: int = DEFAULT_LATENT_DIM
    hidden_widths: tuple[int, ...] = field(
        default=(DEFAULT_HIDDEN_WIDTH,) * DEFAULT_HIDDEN_LAYERS
    )

    def __post_init__(self) -> None:
        """Validate sizes after initialization."""
        object.__setattr__(self, "hidden_widths", tuple(self.hidden_widths))
        _positive_int("history_length", self.history_length)
        _positive_int("horizon", self.horizon)
        _positive_int("output_dim", self.output_dim)
        _positive_int("latent_dim", self.latent_dim)
        for width in self.hidden_widths:
            _positive_int("hidden_widths", width)

    @property
    def input_dim(self) -> int:
        """Width of the flattened history window, H·n_y."""
        return self.history_length * self.output_dim

    @property
    def encoder_widths(self) -> list[int]:
        """Widths from the encoder input through to the latent state."""
        return [self.input_dim, *self.hidden_widths, self.latent_dim]

    @property
    def encoder_depth(self) -> int:
        """Number of affine encoder layers."""
        return len(self.hidden_widths) + 1

    def layer_shapes(self) -> dict[str, tuple[int, ...]]:
        """Ordered parameter names and shapes (fan_out, fan_in) for weights."""
        shapes: dict[str, tuple[int, ...]] = {}
        widths = self.encoder_widths
        for index in range(self.encoder_depth):
            fan_in, fan_out = widths[index], widths[index + 1]
            shapes[f"{ENCODER_PREFIX}.{index}.weight"] = (fan_out, fan_in)
            shapes[f"{ENCODER_PREFIX}.{index}.bias"] = (fan_out,)
        shapes[TRANSITION_LAYER] = (self.latent_dim, self.latent_dim)
        shapes[OUTPUT_LAYER] = (self.output_dim, self.latent_dim)
        return shapes

    def to_dict(self) -> dict[str, Any]:
        """Plain-dict form for config files."""
        return {
            "history_length": self.history_length,
            "horizon": self.horizon,
            "output_dim": self.output_dim,
            "latent_dim": self.latent_dim,
            "hidden_widths": list(self.hidden_widths),
        }
