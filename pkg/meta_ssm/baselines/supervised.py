"""Single-loop supervised baselines: SSM, All-NoAdapt-SSM and Xfer-SSM."""

from __future__ import annotations

import logging
import time
from collections.abc import Sequence
from dataclasses import dataclass, field, replace

import numpy as np

from ..autodiff import backward
from ..config.schemas import BaselineConfig, LayerSelector, MetaConfig
from ..exceptions import ConfigurationError, SizingError
from ..meta import AdaptedWeights, adapt_inference, make_optimizer
from ..model import (
    ArchitectureSpec,
    NeuralSSM,
    Regularization,
    WindowBatch,
    extract_windows,
    loss_nodes,
)
from ..systems import SourceDataset, Trajectory
from ..systems.partition import windows_in
from ..types import Tensor, TraceRow
from ..utils.performance import performance_monitor

_LOGGER = logging.getLogger(__name__)


@dataclass
class SupervisedResult:
    """Trained model and its per-step loss trace."""

    model: NeuralSSM
    trace: list[TraceRow] = field(default_factory=list)


class WindowPool:
    """Every loss window of a set of output segments, addressed by a flat index."""

    def __init__(self, segments: Sequence[Tensor], spec: ArchitectureSpec) -> None:
        """Index the windows of every segment; short segments contribute none."""
        self.spec = spec
        self.segments = [np.asarray(s, dtype=np.float64) for s in segments]
        counts = [windows_in(len(s), spec.history_length, spec.horizon) for s in self.segments]
        self.offsets = np.cumsum([0, *counts])

    def __len__(self) -> int:
        """Total number of windows."""
        return int(self.offsets[-1])

    def gather(self, indices: Tensor) -> WindowBatch:
        """Windows at the given flat indices."""
        span = self.spec.history_length + self.spec.horizon
        owners = np.searchsorted(self.offsets, indices, side="right") - 1
        windows = np.stack(
            [
                self.segments[owner][start : start + span]
                for owner, start in zip(owners, indices - self.offsets[owners])
            ]
        )
        return WindowBatch(
            histories=windows[:, : self.spec.history_length],
            futures=windows[:, self.spec.history_length :],
        )


def _outputs(item: Trajectory | Tensor) -> Tensor:
    return item.outputs if isinstance(item, Trajectory) else np.asarray(item)


@performance_monitor("train_supervised")
def train_supervised(
    data: Sequence[Trajectory | Tensor],
    config: BaselineConfig,
    spec: ArchitectureSpec,
    regularization: Regularization | None = None,
    initial: NeuralSSM | None = None,
) -> SupervisedResult:
    """Mini-batch gradient descent on windows drawn uniformly from `data`.

    Each step draws `batch_size` windows with replacement from the pooled
    windows of every trajectory (or raw output segment). Step k uses the RNG
    stream keyed by (seed, k).

    Raises:
        SizingError: if `data` holds no complete window
    """
    pool = WindowPool([_outputs(item) for item in data], spec)
    if len(pool) == 0:
        raise SizingError(
            "Training data holds no complete window",
            required=spec.history_length + spec.horizon,
            available=max((len(s) for s in pool.segments), default=0),
        )
    steps = config.training_steps or 0
    model = initial.copy() if initial is not None else NeuralSSM.init(spec, config.seed)
    optimizer = make_optimizer(config.optimizer, config.learning_rate)
    trace: list[TraceRow] = []

    _LOGGER.info(
        "Training %s for %d steps on %d windows", config.method, steps, len(pool)
    )
    for step in range(steps):
        started = time.perf_counter()
        rng = np.random.default_rng([config.seed, step])
        batch = pool.gather(rng.integers(0, len(pool), size=config.batch_size))
        weights = model.as_nodes(requires_grad=True)
        loss = loss_nodes(spec, weights, batch, regularization)
        grads = backward(loss, list(weights.values()))
        model = NeuralSSM(
            spec,
            optimizer.step(
                model.parameters,
                {name: grads[node].value for name, node in weights.items()},
            ),
        )
        trace.append(
            {
                "iteration": step + 1,
                "outer_loss": loss.item(),
                "wall_time_ms": (time.perf_counter() - started) * 1000.0,
            }
        )
    if trace:
        _LOGGER.info(
            "Finished %s: loss %.6g -> %.6g",
            config.method,
            trace[0]["outer_loss"],
            trace[-1]["outer_loss"],
        )
    return SupervisedResult(model=model, trace=trace)


def adapt_all_layers(
    model: NeuralSSM,
    context: WindowBatch,
    steps: int,
    meta: MetaConfig,
    regularization: Regularization | None = None,
) -> AdaptedWeights:
    """Fine-tune every layer on a query context at the inner rate."""
    return adapt_inference(
        model, context, steps, replace(meta, selector=LayerSelector.ALL), regularization
    )


@dataclass
class TransferResult:
    """Source-trained model and its query adaptation."""

    source: SupervisedResult
    adapted: AdaptedWeights

    @property
    def model(self) -> NeuralSSM:
        """The adapted model."""
        return self.adapted.to_model(self.source.model)


def transfer_pipeline(
    source: SourceDataset,
    query_context: Tensor,
    config: BaselineConfig,
    meta: MetaConfig,
    spec: ArchitectureSpec,
    regularization: Regularization | None = None,
) -> TransferResult:
    """Train on every source trajectory, then adapt all layers to the query."""
    trained = train_supervised(source.trajectories, config, spec, regularization)
    context = extract_windows(query_context, spec)
    adapted = adapt_all_layers(
        trained.model, context, config.adaptation_steps or 0, meta, regularization
    )
    return TransferResult(source=trained, adapted=adapted)


def train_all_noadapt(
    source: SourceDataset,
    query_context: Tensor,
    config: BaselineConfig,
    spec: ArchitectureSpec,
    regularization: Regularization | None = None,
) -> SupervisedResult:
    """Train on pooled source trajectories and the query context."""
    if config.adaptation_steps:
        raise ConfigurationError(
            "all-noadapt never adapts",
            config_key="baseline.adaptation_steps",
            config_value=config.adaptation_steps,
        )
    return train_supervised(
        [*source.trajectories, query_context], config, spec, regularization
    )


def train_query_only(
    query_context: Tensor,
    config: BaselineConfig,
    spec: ArchitectureSpec,
    regularization: Regularization | None = None,
) -> SupervisedResult:
    """Train on the query context alone."""
    return train_supervised([query_context], config, spec, regularization)
