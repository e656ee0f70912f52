"""Type definitions shared across the package."""

from __future__ import annotations

from typing import Protocol, TypedDict

import numpy as np
from numpy.typing import NDArray

# Shape-tagged array of 64-bit reals; the sole numeric carrier across the stack.
Tensor = NDArray[np.float64]


class TraceRow(TypedDict):
    """One line of a training trace."""

    iteration: int
    outer_loss: float
    wall_time_ms: float


class ReportRow(TypedDict):
    """One line of the long-format SSE report."""

    method: str
    context_size: int
    adapt_steps: int
    median_sse: float
    run_id: int
    sse: float


class DatasetSummary(TypedDict):
    """Summary printed after dataset generation."""

    n_systems: int
    theta_low: float
    theta_high: float
    dt: float
    min_length: int
    max_length: int
    mean_length: float


class Predictor(Protocol):
    """Anything that rolls a prediction forward from a context prefix."""

    def rollout_predict(self, context: Tensor, horizon: int) -> Tensor:
        """Return a (horizon, n_y) block predicted from the end of `context`."""
        ...
