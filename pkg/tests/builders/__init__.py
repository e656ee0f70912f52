"""Test data builders for the meta-learning pipeline."""

from .config_builder import TINY_DOCUMENT, ExperimentConfigBuilder
from .model_builder import ModelBuilder, tiny_spec
from .presets import ToyTasks, quadratic_loss
from .trajectory_builder import SourceDatasetBuilder, TrajectoryBuilder

__all__ = [
    "TINY_DOCUMENT",
    "ExperimentConfigBuilder",
    "ModelBuilder",
    "SourceDatasetBuilder",
    "ToyTasks",
    "TrajectoryBuilder",
    "quadratic_loss",
    "tiny_spec",
]
