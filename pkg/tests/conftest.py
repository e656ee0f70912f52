"""Global test fixtures for the meta-learning pipeline."""

import numpy as np
import pytest

from meta_ssm.utils import reset_performance_metrics

from tests.builders import (
    ExperimentConfigBuilder,
    ModelBuilder,
    SourceDatasetBuilder,
    TrajectoryBuilder,
    tiny_spec,
)


@pytest.fixture(autouse=True)
def reset_metrics():
    """Reset performance counters before each test to ensure test isolation."""
    reset_performance_metrics()
    yield


@pytest.fixture(autouse=True)
def isolated_output_root(monkeypatch, tmp_path):
    """Point the default output root at a temporary directory."""
    monkeypatch.setenv("META_SSM_OUTPUT_ROOT", str(tmp_path / "default-root"))


@pytest.fixture(name="spec")
def spec_fixture():
    """Tiny architecture shared by model tests."""
    return tiny_spec()


@pytest.fixture(name="model")
def model_fixture(spec):
    """Freshly initialized tiny model."""
    return ModelBuilder().with_spec(spec).with_seed(0).build()


@pytest.fixture(name="trajectory")
def trajectory_fixture():
    """Short simulated trajectory (21 samples)."""
    return TrajectoryBuilder().build()


@pytest.fixture(name="source")
def source_fixture():
    """Four short source systems."""
    return SourceDatasetBuilder().build()


@pytest.fixture(name="sine_segment")
def sine_segment_fixture():
    """Smooth two-channel segment of 30 samples."""
    t = np.linspace(0.0, 3.0, 30)
    return np.stack([np.sin(t), np.cos(t)], axis=1)


@pytest.fixture(name="config_builder")
def config_builder_fixture(tmp_path):
    """Tiny experiment config writing into a temporary directory."""
    return ExperimentConfigBuilder().with_output_dir(tmp_path / "run")
