"""Meta-training over a source dataset."""

from __future__ import annotations

import logging
import time
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from ..config.schemas import MetaConfig, OptimizerKind
from ..exceptions import SizingError, TaskError
from ..model import ArchitectureSpec, NeuralSSM, Regularization, extract_windows
from ..systems import PartitionMode, SourceDataset, partition
from ..types import TraceRow
from ..utils.performance import performance_monitor
from .optimizers import make_optimizer
from .outer import Task, outer_step, ssm_task

_LOGGER = logging.getLogger(__name__)

# Called with (completed iterations, model, trace so far)
CheckpointCallback = Callable[[int, NeuralSSM, list[TraceRow]], None]


@dataclass
class MetaTrainingResult:
    """Final weights ω_∞ plus the per-iteration outer-loss trace."""

    model: NeuralSSM
    trace: list[TraceRow] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        """Outer iterations completed, counting any resumed prefix."""
        return self.trace[-1]["iteration"] if self.trace else 0


def iteration_rng(seed: int, iteration: int) -> np.random.Generator:
    """RNG stream for one outer iteration, independent of earlier ones."""
    return np.random.default_rng([seed, iteration])


def sample_tasks(
    model: NeuralSSM,
    source: SourceDataset,
    config: MetaConfig,
    iteration: int,
    regularization: Regularization | None = None,
) -> list[Task]:
    """Draw B distinct trajectories and partition each in train mode.

    Raises:
        SizingError: if B exceeds the number of source systems
        TaskError: if a drawn trajectory is too short for its partition
    """
    if config.batch_size > len(source):
        raise SizingError(
            f"Meta-batch of {config.batch_size} exceeds {len(source)} source systems",
            required=config.batch_size,
            available=len(source),
        )
    spec = model.spec
    rng = iteration_rng(config.seed, iteration)
    indices = rng.choice(len(source), size=config.batch_size, replace=False)
    tasks = []
    for index in indices:
        name = f"trajectory {int(index)}"
        try:
            split = partition(
                source.trajectories[int(index)],
                PartitionMode.TRAIN,
                config.context_windows,
                config.target_windows,
                seed=rng,
                history_length=spec.history_length,
                horizon=spec.horizon,
            )
        except SizingError as err:
            raise TaskError(
                f"Task {name} is unusable: {err.message}",
                task=name,
                required=err.required,
                available=err.available,
            ) from err
        tasks.append(
            ssm_task(
                name,
                model,
                extract_windows(split.context, spec),
                extract_windows(split.target, spec),
                regularization,
            )
        )
    return tasks


@performance_monitor("meta_train")
def meta_train(
    source: SourceDataset,
    config: MetaConfig,
    spec: ArchitectureSpec,
    regularization: Regularization | None = None,
    initial: NeuralSSM | None = None,
    start_iteration: int = 0,
    trace: list[TraceRow] | None = None,
    callback: CheckpointCallback | None = None,
    workers: int = 1,
) -> MetaTrainingResult:
    """Meta-train a model on the source systems.

    Each outer iteration samples B tasks, adapts per task and applies one
    outer step. Resuming passes the checkpointed model as `initial`, the
    number of completed iterations as `start_iteration` and the stored trace;
    task sampling then continues exactly as in an uninterrupted run.

    Raises:
        SizingError: if the source set is empty or smaller than B
    """
    if len(source) == 0:
        raise SizingError("meta_train needs source systems", required=1, available=0)
    model = initial.copy() if initial is not None else NeuralSSM.init(spec, config.seed)
    history = list(trace or [])
    optimizer = make_optimizer(config.optimizer, config.outer_rate)
    if start_iteration and config.optimizer is OptimizerKind.ADAM:
        _LOGGER.warning(
            "Resuming at iteration %d with fresh adaptive-moment state",
            start_iteration,
        )

    _LOGGER.info(
        "Meta-training (%s, %s order) for %d iterations on %d systems",
        config.selector,
        config.gradient_order,
        config.outer_iterations - start_iteration,
        len(source),
    )
    for iteration in range(start_iteration, config.outer_iterations):
        started = time.perf_counter()
        tasks = sample_tasks(model, source, config, iteration, regularization)
        model, gradient = outer_step(model, tasks, config, optimizer, workers=workers)
        history.append(
            {
                "iteration": iteration + 1,
                "outer_loss": gradient.loss,
                "wall_time_ms": (time.perf_counter() - started) * 1000.0,
            }
        )
        _LOGGER.debug("Iteration %d: outer loss %.6g", iteration + 1, gradient.loss)
        completed = iteration + 1
        if (
            callback is not None
            and config.checkpoint_interval
            and completed % config.checkpoint_interval == 0
        ):
            callback(completed, model, history)

    if history:
        _LOGGER.info(
            "Meta-training finished: outer loss %.6g -> %.6g",
            history[0]["outer_loss"],
            history[-1]["outer_loss"],
        )
    return MetaTrainingResult(model=model, trace=history)
