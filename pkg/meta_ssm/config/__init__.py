"""Experiment configuration."""

from .loader import (
    apply_overrides,
    default_output_root,
    dump_config,
    load_config,
    parse_override,
    read_config_file,
)
from .schemas import (
    BaselineConfig,
    DataConfig,
    ExperimentConfig,
    GradientOrder,
    GridSpec,
    LayerSelector,
    LossConfig,
    MetaConfig,
    OptimizerKind,
    QueryConfig,
    RunConfig,
)

__all__ = [
    "BaselineConfig",
    "DataConfig",
    "ExperimentConfig",
    "GradientOrder",
    "GridSpec",
    "LayerSelector",
    "LossConfig",
    "MetaConfig",
    "OptimizerKind",
    "QueryConfig",
    "RunConfig",
    "apply_overrides",
    "default_output_root",
    "dump_config",
    "load_config",
    "parse_override",
    "read_config_file",
]
