"""Context/target partitioning of trajectories.

Sizes are counted in loss windows: k windows of history H and horizon H_p
span k + H + H_p - 1 consecutive samples.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import StrEnum

import numpy as np

from ..const import DEFAULT_HISTORY_LENGTH, DEFAULT_PREDICTION_HORIZON
from ..exceptions import ConfigurationError, SizingError
from ..types import Tensor
from .dataset import Trajectory

_LOGGER = logging.getLogger(__name__)


class PartitionMode(StrEnum):
    """How context and target segments are placed."""

    TRAIN = "train"
    INFERENCE = "inference"


@dataclass(frozen=True)
class ContextTargetSplit:
    """Consecutive context and target segments of one trajectory."""

    context: Tensor
    target: Tensor
    mode: PartitionMode
    context_start: int
    target_start: int


def segment_length(windows: int, history_length: int, horizon: int) -> int:
    """Number of consecutive samples spanned by `windows` loss windows."""
    return windows + history_length + horizon - 1


def windows_in(points: int, history_length: int, horizon: int) -> int:
    """Number of loss windows contained in `points` consecutive samples."""
    return max(0, points - history_length - horizon + 1)


def partition(
    trajectory: Trajectory,
    mode: PartitionMode | str,
    context_windows: int,
    target_windows: int,
    seed: int | np.random.Generator = 0,
    history_length: int = DEFAULT_HISTORY_LENGTH,
    horizon: int = DEFAULT_PREDICTION_HORIZON,
) -> ContextTargetSplit:
    """Split a trajectory into context and target segments.

    In train mode both segments are placed independently and uniformly at
    random; the target need not follow the context. In inference mode the
    context is the trajectory prefix and the target is the segment right after.

    Raises:
        SizingError: if the trajectory cannot hold the requested segments
    """
    mode = PartitionMode(mode)
    if context_windows < 1 or target_windows < 1:
        raise ConfigurationError(
            "context and target must each hold at least one window",
            config_key="windows",
            config_value=(context_windows, target_windows),
        )

    context_len = segment_length(context_windows, history_length, horizon)
    target_len = segment_length(target_windows, history_length, horizon)
    available = trajectory.length
    required = (
        context_len + target_len
        if mode is PartitionMode.INFERENCE
        else max(context_len, target_len)
    )
    if available < required:
        raise SizingError(
            f"Trajectory too short for {mode.value} partition: "
            f"requires {required} samples, has {available}",
            required=required,
            available=available,
        )

    if mode is PartitionMode.INFERENCE:
        context_start, target_start = 0, context_len
    else:
        rng = (
            seed
            if isinstance(seed, np.random.Generator)
            else np.random.default_rng(seed)
        )
        context_start = int(rng.integers(0, available - context_len + 1))
        target_start = int(rng.integers(0, available - target_len + 1))

    _LOGGER.debug(
        "Partitioned %d samples: context [%d, %d), target [%d, %d)",
        available,
        context_start,
        context_start + context_len,
        target_start,
        target_start + target_len,
    )
    return ContextTargetSplit(
        context=trajectory.segment(context_start, context_start + context_len),
        target=trajectory.segment(target_start, target_start + target_len),
        mode=mode,
        context_start=context_start,
        target_start=target_start,
    )
