"""Sum-squared-error metrics and median aggregation."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from ..exceptions import ShapeError, SizingError
from ..types import Tensor


def _check_pair(predicted: Tensor, truth: Tensor) -> tuple[Tensor, Tensor]:
    predicted = np.asarray(predicted, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if predicted.shape != truth.shape or predicted.ndim != 2:
        raise ShapeError(
            "Predicted and true blocks must be equal (T, d) shapes",
            op="sse",
            shapes=[predicted.shape, truth.shape],
        )
    return predicted, truth


def sse(predicted: Tensor, truth: Tensor) -> float:
    """Σ_t ‖predicted_t − truth_t‖²."""
    predicted, truth = _check_pair(predicted, truth)
    return float(np.sum(np.square(predicted - truth)))


@dataclass(frozen=True)
class SSECurve:
    """Cumulative SSE after each prediction step."""

    values: Tensor

    @classmethod
    def from_blocks(cls, predicted: Tensor, truth: Tensor) -> SSECurve:
        """Accumulate per-step squared errors."""
        predicted, truth = _check_pair(predicted, truth)
        per_step = np.sum(np.square(predicted - truth), axis=1)
        return cls(values=np.cumsum(per_step))

    def __len__(self) -> int:
        """Number of steps."""
        return int(self.values.shape[0])

    @property
    def total(self) -> float:
        """Final cumulative value; 0 for an empty curve."""
        return float(self.values[-1]) if len(self) else 0.0


def lower_median(values: Sequence[float]) -> float:
    """Middle order statistic; the lower of the two middles for even counts.

    Raises:
        SizingError: on an empty sequence
    """
    if not values:
        raise SizingError("Median of an empty list", required=1, available=0)
    ordered = sorted(values)
    return float(ordered[(len(ordered) - 1) // 2])
