"""History/future window samples cut from output trajectories."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..exceptions import ShapeError, SizingError
from ..types import Tensor
from .architecture import ArchitectureSpec


@dataclass(frozen=True)
class WindowSample:
    """Past window Y_{t-H:t} and the following H_p outputs."""

    history: Tensor
    future: Tensor


@dataclass(frozen=True)
class WindowBatch:
    """Stacked windows: histories (N, H, n_y) and futures (N, H_p, n_y)."""

    histories: Tensor
    futures: Tensor

    def __post_init__(self) -> None:
        """Validate stacking after initialization."""
        if self.histories.ndim != 3 or self.futures.ndim != 3:
            raise ShapeError(
                "Window batches must be rank 3",
                op="window_batch",
                shapes=[self.histories.shape, self.futures.shape],
            )
        if (
            self.histories.shape[0] != self.futures.shape[0]
            or self.histories.shape[2] != self.futures.shape[2]
        ):
            raise ShapeError(
                "History and future blocks disagree",
                op="window_batch",
                shapes=[self.histories.shape, self.futures.shape],
            )

    def __len__(self) -> int:
        """Number of windows."""
        return int(self.histories.shape[0])

    @classmethod
    def from_samples(cls, samples: Sequence[WindowSample]) -> WindowBatch:
        """Stack individual samples."""
        if not samples:
            raise SizingError("Cannot stack an empty window list", required=1, available=0)
        return cls(
            histories=np.stack([s.history for s in samples]),
            futures=np.stack([s.future for s in samples]),
        )

    def samples(self) -> list[WindowSample]:
        """Split back into individual samples."""
        return [
            WindowSample(self.histories[i], self.futures[i]) for i in range(len(self))
        ]

    def take(self, indices: Sequence[int] | Tensor) -> WindowBatch:
        """Select a subset (or permutation) of windows."""
        index = np.asarray(indices, dtype=np.int64)
        return WindowBatch(self.histories[index], self.futures[index])


def extract_windows(segment: Tensor, spec: ArchitectureSpec) -> WindowBatch:
    """Every stride-1 window in a consecutive output segment.

    Raises:
        SizingError: if the segment is shorter than H + H_p samples
    """
    span = spec.history_length + spec.horizon
    segment = np.asarray(segment, dtype=np.float64)
    if segment.ndim != 2 or segment.shape[1] != spec.output_dim:
        raise ShapeError(
            "Segment must be (length, n_y)",
            op="extract_windows",
            shapes=[segment.shape],
        )
    if segment.shape[0] < span:
        raise SizingError(
            f"Segment of {segment.shape[0]} samples holds no window of {span}",
            required=span,
            available=segment.shape[0],
        )
    # (count, n_y, span) -> (count, span, n_y)
    windows = sliding_window_view(segment, span, axis=0).transpose(0, 2, 1)
    return WindowBatch(
        histories=windows[:, : spec.history_length].copy(),
        futures=windows[:, spec.history_length :].copy(),
    )


def window_at(trajectory_outputs: Tensor, start: int, spec: ArchitectureSpec) -> WindowSample:
    """The window whose history begins at sample `start`."""
    mid = start + spec.history_length
    return WindowSample(
        history=trajectory_outputs[start:mid].copy(),
        future=trajectory_outputs[mid : mid + spec.horizon].copy(),
    )
