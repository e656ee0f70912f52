"""Deep encoder neural state-space model."""

from __future__ import annotations

from .architecture import ArchitectureSpec
from .forward import (
    Regularization,
    WeightMap,
    decode_steps,
    encode_nodes,
    loss_nodes,
    predict_nodes,
)
from .network import NeuralSSM, ssm_loss
from .windows import WindowBatch, WindowSample, extract_windows, window_at

__all__ = [
    "ArchitectureSpec",
    "NeuralSSM",
    "Regularization",
    "WeightMap",
    "WindowBatch",
    "WindowSample",
    "decode_steps",
    "encode_nodes",
    "extract_windows",
    "loss_nodes",
    "predict_nodes",
    "ssm_loss",
    "window_at",
]
