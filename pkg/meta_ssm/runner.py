"""Experiment orchestration behind the command-line interface.

The runner owns the output layout and wires datasets, training methods,
checkpoints and evaluation together; every numeric step is delegated to the
domain packages.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .baselines import train_all_noadapt, train_query_only, train_supervised
from .config import ExperimentConfig, GridSpec
from .const import (
    ADAPTED_CHECKPOINT_FILENAME,
    CHECKPOINT_FILENAME,
    CURVES_CSV_FILENAME,
    DATASET_CSV_FILENAME,
    DATASET_FILENAME,
    DEFAULT_X0_HIGH,
    DEFAULT_X0_LOW,
    META_METHODS,
    METHOD_ALL_NOADAPT,
    METHOD_SSM,
    MODE_FIG3,
    MODE_TABLE1,
    PREDICTIONS_CSV_FILENAME,
    REPORT_CSV_FILENAME,
    REPORT_TEXT_FILENAME,
    TRACE_FILENAME,
)
from .data import (
    Checkpoint,
    DatasetFile,
    export_csv,
    load_checkpoint,
    load_dataset,
    save_checkpoint,
    save_dataset,
)
from .evaluation import (
    MethodPredictor,
    RolloutResult,
    SSECell,
    SSEReport,
    compare_rollouts,
    read_trace_csv,
    run_grid,
    write_curves_csv,
    write_predictions_csv,
    write_report_csv,
    write_report_text,
    write_summary_text,
    write_trace_csv,
)
from .exceptions import ConfigurationError, SizingError
from .meta import AdaptedWeights, meta_train
from .model import NeuralSSM
from .systems import (
    SourceDataset,
    Standardizer,
    Trajectory,
    generate_query,
    generate_source_dataset,
    step_count,
)
from .types import Tensor, TraceRow
from .utils.error_handling import validation_stage

_LOGGER = logging.getLogger(__name__)


@dataclass
class TrainingOutcome:
    """What a `train` run wrote."""

    checkpoint: Checkpoint
    trace: list[TraceRow]
    checkpoint_path: Path
    trace_path: Path


class ExperimentRunner:
    """Runs pipeline stages for one resolved experiment config."""

    def __init__(self, config: ExperimentConfig, output_dir: Path) -> None:
        """Initialize the runner.

        Args:
            config: Fully validated experiment configuration
            output_dir: Root directory for every artifact
        """
        self.config = config
        self.output_dir = output_dir
        self.digest = config.digest()

    # Layout

    @property
    def dataset_path(self) -> Path:
        """Default dataset file."""
        return self.output_dir / DATASET_FILENAME

    def checkpoint_path(self, method: str) -> Path:
        """Default checkpoint of a trained method."""
        return self.output_dir / method / CHECKPOINT_FILENAME

    def trace_path(self, method: str) -> Path:
        """Training trace of a method."""
        return self.output_dir / method / TRACE_FILENAME

    def adapted_path(self, method: str) -> Path:
        """Adapted checkpoint of a method."""
        return self.output_dir / method / ADAPTED_CHECKPOINT_FILENAME

    def evaluation_dir(self, mode: str) -> Path:
        """Report directory of an evaluation mode."""
        return self.output_dir / mode

    # Data

    def generate(self, path: Path | None = None, csv: bool = False) -> DatasetFile:
        """Simulate the source systems and write the dataset file."""
        data = self.config.data
        dataset = generate_source_dataset(
            n_systems=data.n_systems,
            theta_range=data.theta_range,
            seed=data.seed,
            dt=data.dt,
            t_final_range=data.t_final_range,
            workers=self.config.run.workers,
        )
        standardizer = Standardizer.fit(dataset.trajectories) if data.standardize else None
        record = DatasetFile(dataset=dataset, digest=self.digest, standardizer=standardizer)
        path = path or self.dataset_path
        save_dataset(record, path)
        if csv or self.config.run.export_csv:
            export_csv(
                dataset.trajectories,
                path.with_name(DATASET_CSV_FILENAME),
                self.digest,
            )
        return record

    def load_source(self, path: Path | None = None) -> DatasetFile:
        """Load the dataset and convert it to training units."""
        record = load_dataset(path or self.dataset_path)
        if record.standardizer is not None:
            dataset = record.dataset
            record = DatasetFile(
                dataset=SourceDataset(
                    trajectories=[record.standardizer.apply(t) for t in dataset.trajectories],
                    theta_range=dataset.theta_range,
                    seed=dataset.seed,
                ),
                digest=record.digest,
                standardizer=record.standardizer,
            )
        return record

    def query(
        self,
        points: int,
        x0: tuple[float, float] | None = None,
    ) -> Trajectory:
        """Simulate the query system, lengthened to at least `points` samples."""
        query = self.config.query
        dt = self.config.data.dt
        t_final = query.t_final
        if step_count(t_final, dt) + 1 < points:
            t_final = (points - 1) * dt
            _LOGGER.info(
                "Query lengthened from %.2fs to %.2fs to cover %d points",
                query.t_final,
                t_final,
                points,
            )
        return generate_query(
            theta=query.theta,
            x0=query.x0 if x0 is None else x0,
            t_final=t_final,
            dt=dt,
        )

    def query_context(self, standardizer: Standardizer | None) -> Tensor:
        """First `context_points` samples of the configured query, in training units."""
        points = self.config.query.context_points
        context = self.query(points).outputs[:points]
        return context if standardizer is None else standardizer.transform(context)

    # Training

    def train(
        self, method: str, dataset_path: Path | None = None, resume: bool = False
    ) -> TrainingOutcome:
        """Train `method` and write its checkpoint and trace.

        ssm trains on the query context alone and never reads the dataset.

        Raises:
            ConfigurationError: if `resume` is requested for a baseline
            MissingArtifactError: if the dataset file does not exist
        """
        if resume and method not in META_METHODS:
            raise ConfigurationError(
                "Only meta-learning methods can resume",
                config_key="method",
                config_value=method,
            )
        if method == METHOD_SSM:
            checkpoint, trace = self._train_baseline(method, None)
        else:
            record = self.load_source(dataset_path)
            if method in META_METHODS:
                checkpoint, trace = self._train_meta(method, record, resume)
            else:
                checkpoint, trace = self._train_baseline(method, record)
        checkpoint_path = self.checkpoint_path(method)
        trace_path = self.trace_path(method)
        self._write_training(checkpoint, trace)
        return TrainingOutcome(checkpoint, trace, checkpoint_path, trace_path)

    def _train_meta(
        self, method: str, record: DatasetFile, resume: bool
    ) -> tuple[Checkpoint, list[TraceRow]]:
        config = self.config
        meta = config.meta.for_method(method)
        with validation_stage():
            if meta.batch_size > len(record.dataset):
                raise SizingError(
                    f"meta.batch_size {meta.batch_size} exceeds "
                    f"{len(record.dataset)} source systems",
                    required=meta.batch_size,
                    available=len(record.dataset),
                )

        initial, start, trace = None, 0, []
        checkpoint_path = self.checkpoint_path(method)
        if resume and checkpoint_path.is_file():
            stored = load_checkpoint(checkpoint_path)
            if stored.digest != self.digest:
                _LOGGER.warning(
                    "Resuming %s from a checkpoint written under config %s",
                    method,
                    stored.digest,
                )
            initial, start = stored.model, stored.iteration
            trace = [
                row
                for row in read_trace_csv(self.trace_path(method))
                if row["iteration"] <= start
            ]
            _LOGGER.info("Resuming %s at iteration %d", method, start)
        elif resume:
            _LOGGER.warning(
                "No checkpoint at %s; training %s from scratch", checkpoint_path, method
            )

        def save(completed: int, model: NeuralSSM, history: list[TraceRow]) -> None:
            self._write_training(
                Checkpoint(model, method, self.digest, completed, record.standardizer),
                history,
            )

        result = meta_train(
            record.dataset,
            meta,
            config.architecture,
            regularization=config.loss.regularization(),
            initial=initial,
            start_iteration=start,
            trace=trace,
            callback=save,
            workers=config.run.workers,
        )
        checkpoint = Checkpoint(
            result.model,
            method,
            self.digest,
            max(start, meta.outer_iterations),
            record.standardizer,
        )
        return checkpoint, result.trace

    def _train_baseline(
        self, method: str, record: DatasetFile | None
    ) -> tuple[Checkpoint, list[TraceRow]]:
        config = self.config
        spec = config.architecture
        regularization = config.loss.regularization()
        baseline = config.baseline.for_method(
            method, config.meta, config.query.adaptation_steps
        )
        standardizer = record.standardizer if record is not None else None
        if record is None:
            trained = train_query_only(
                self.query_context(None), baseline, spec, regularization
            )
        elif method == METHOD_ALL_NOADAPT:
            trained = train_all_noadapt(
                record.dataset,
                self.query_context(standardizer),
                baseline,
                spec,
                regularization,
            )
        else:
            trained = train_supervised(
                record.dataset.trajectories, baseline, spec, regularization
            )
        checkpoint = Checkpoint(
            trained.model,
            method,
            self.digest,
            baseline.training_steps or 0,
            standardizer,
        )
        return checkpoint, trained.trace

    def _query_fitter(self, method: str) -> Callable[[Tensor], NeuralSSM]:
        """Train `method` from scratch on a query context in training units."""
        config = self.config
        spec = config.architecture
        regularization = config.loss.regularization()
        baseline = config.baseline.for_method(
            method, config.meta, config.query.adaptation_steps
        )
        source = self.load_source().dataset if method == METHOD_ALL_NOADAPT else None

        def fit(context: Tensor) -> NeuralSSM:
            if source is None:
                return train_query_only(context, baseline, spec, regularization).model
            return train_all_noadapt(
                source, context, baseline, spec, regularization
            ).model

        _LOGGER.info("Grid refits %s on every query context", method)
        return fit

    def _write_training(self, checkpoint: Checkpoint, trace: list[TraceRow]) -> None:
        save_checkpoint(checkpoint, self.checkpoint_path(checkpoint.method))
        write_trace_csv(trace, self.trace_path(checkpoint.method), self.digest)

    # Adaptation and evaluation

    def predictor(self, checkpoint: Checkpoint) -> MethodPredictor:
        """Evaluation wrapper of a loaded checkpoint."""
        return MethodPredictor(
            method=checkpoint.method,
            model=checkpoint.model,
            meta=self.config.meta,
            standardizer=checkpoint.standardizer,
            regularization=self.config.loss.regularization(),
        )

    def adapt(
        self, checkpoint_path: Path, steps: int | None = None
    ) -> tuple[Checkpoint, AdaptedWeights | None, Path]:
        """Adapt a checkpoint to the query context and save the result."""
        stored = load_checkpoint(checkpoint_path)
        steps = self.config.query.adaptation_steps if steps is None else steps
        points = self.config.query.context_points
        context = self.query(points).outputs[:points]
        predictor, adapted = self.predictor(stored).adapt(context, steps)
        if adapted is None:
            _LOGGER.warning("%s does not adapt; checkpoint copied unchanged", stored.method)
        result = Checkpoint(
            predictor.model, stored.method, self.digest, stored.iteration, stored.standardizer
        )
        path = self.adapted_path(stored.method)
        save_checkpoint(result, path)
        return result, adapted, path

    def load_predictors(
        self, methods: list[str], overrides: dict[str, Path] | None = None
    ) -> dict[str, MethodPredictor]:
        """Load one checkpoint per method, explicit paths first."""
        overrides = overrides or {}
        predictors = {}
        for method in methods:
            checkpoint = load_checkpoint(overrides.get(method, self.checkpoint_path(method)))
            if checkpoint.method != method:
                raise ConfigurationError(
                    f"Checkpoint for {method} was trained as {checkpoint.method}",
                    config_key="checkpoint",
                    config_value=method,
                )
            predictors[method] = self.predictor(checkpoint)
        return predictors

    def evaluate_fig3(
        self, methods: list[str], overrides: dict[str, Path] | None = None
    ) -> tuple[dict[str, RolloutResult], SSEReport, Path]:
        """Long-horizon comparison on the configured query; writes curves."""
        query_config = self.config.query
        predictors = self.load_predictors(methods, overrides)
        points, horizon = query_config.context_points, query_config.horizon
        query = self.query(points + horizon)
        steps = query_config.adaptation_steps
        results = compare_rollouts(
            predictors,
            query,
            points,
            horizon,
            adapters={
                m: (lambda context, p=p: p.adapt(context, steps)[0])
                for m, p in predictors.items()
            },
        )
        report = SSEReport(
            cells=[SSECell(m, points, steps, [r.sse]) for m, r in results.items()]
        )
        directory = self.evaluation_dir(MODE_FIG3)
        write_curves_csv(results, directory / CURVES_CSV_FILENAME, self.digest)
        write_predictions_csv(results, directory / PREDICTIONS_CSV_FILENAME, self.digest)
        write_report_csv(report, directory / REPORT_CSV_FILENAME, self.digest)
        write_summary_text(results, directory / REPORT_TEXT_FILENAME, self.digest)
        return results, report, directory

    def evaluate_table1(
        self, grid: GridSpec, overrides: dict[str, Path] | None = None
    ) -> tuple[SSEReport, Path]:
        """Context-size by adaptation-steps grid over randomized queries.

        ssm and all-noadapt checkpoints were fitted to the configured query,
        so in the grid they are refitted to every query's own context.
        """
        predictors = self.load_predictors(list(grid.methods), overrides)
        for method, predictor in predictors.items():
            if method in (METHOD_SSM, METHOD_ALL_NOADAPT):
                predictors[method] = replace(
                    predictor, refit=self._query_fitter(method)
                )
        horizon = self.config.query.horizon
        points = max(grid.context_sizes) + horizon

        def generator(rng: np.random.Generator) -> Trajectory:
            x0 = rng.uniform(DEFAULT_X0_LOW, DEFAULT_X0_HIGH, size=2)
            return self.query(points, x0=(float(x0[0]), float(x0[1])))

        report = run_grid(
            predictors, generator, grid, horizon, workers=self.config.run.workers
        )
        directory = self.evaluation_dir(MODE_TABLE1)
        write_report_csv(report, directory / REPORT_CSV_FILENAME, self.digest)
        write_report_text(report, directory / REPORT_TEXT_FILENAME, self.digest)
        return report, directory
