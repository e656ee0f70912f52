"""Meta-learned deep-encoder neural state-space models.

Source systems from a parametrised van der Pol family are used to
meta-learn an encoder/latent-dynamics/decoder model that adapts to a new
query system from a short context of its outputs.
"""

from __future__ import annotations

from .config import ExperimentConfig, load_config
from .exceptions import (
    ConfigurationError,
    DivergenceError,
    GraphError,
    MetaSSMError,
    MissingArtifactError,
    NumericError,
    PersistenceError,
    ShapeError,
    SizingError,
    TaskError,
)
from .model import ArchitectureSpec, NeuralSSM
from .runner import ExperimentRunner

__version__ = "0.1.0"

__all__ = [
    "ArchitectureSpec",
    "ConfigurationError",
    "DivergenceError",
    "ExperimentConfig",
    "ExperimentRunner",
    "GraphError",
    "MetaSSMError",
    "MissingArtifactError",
    "NeuralSSM",
    "NumericError",
    "PersistenceError",
    "ShapeError",
    "SizingError",
    "TaskError",
    "__version__",
    "load_config",
]
