"""Van der Pol system family, datasets and partitioning."""

from __future__ import annotations

from .dataset import (
    SourceDataset,
    Standardizer,
    SystemParams,
    Trajectory,
    generate_query,
    generate_source_dataset,
    sample_params,
)
from .partition import (
    ContextTargetSplit,
    PartitionMode,
    partition,
    segment_length,
    windows_in,
)
from .vdp import integrate, rk4_step, simulate, step_count, vdp_derivative

__all__ = [
    "ContextTargetSplit",
    "PartitionMode",
    "SourceDataset",
    "Standardizer",
    "SystemParams",
    "Trajectory",
    "generate_query",
    "generate_source_dataset",
    "integrate",
    "partition",
    "rk4_step",
    "sample_params",
    "segment_length",
    "simulate",
    "step_count",
    "vdp_derivative",
    "windows_in",
]
