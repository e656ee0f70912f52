"""Context-size by adaptation-steps grid with median-over-queries cells."""

from __future__ import annotations

import logging
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from itertools import product

import numpy as np
import pandas as pd

from ..config.schemas import GridSpec
from ..exceptions import MissingArtifactError
from ..systems import Trajectory
from ..types import ReportRow
from ..utils.parallel import ordered_map
from ..utils.performance import performance_monitor
from .metrics import lower_median
from .predictors import MethodPredictor, adapts
from .rollout import evaluate_rollout

_LOGGER = logging.getLogger(__name__)

REPORT_COLUMNS = ["method", "context_size", "adapt_steps", "median_sse", "run_id", "sse"]

# Query trajectory for a run, given that run's RNG stream
QueryGenerator = Callable[[np.random.Generator], Trajectory]


@dataclass
class SSECell:
    """Per-run SSEs of one (method, context size, adaptation steps) cell."""

    method: str
    context_size: int
    adapt_steps: int
    sses: list[float] = field(default_factory=list)

    @property
    def median(self) -> float:
        """Lower-median SSE over runs."""
        return lower_median(self.sses)


@dataclass
class SSEReport:
    """All grid cells in method, size, steps order."""

    cells: list[SSECell] = field(default_factory=list)

    def rows(self) -> list[ReportRow]:
        """Long-format rows, one per run."""
        return [
            {
                "method": cell.method,
                "context_size": cell.context_size,
                "adapt_steps": cell.adapt_steps,
                "median_sse": cell.median,
                "run_id": run_id,
                "sse": value,
            }
            for cell in self.cells
            for run_id, value in enumerate(cell.sses)
        ]

    def to_frame(self) -> pd.DataFrame:
        """Long-format table."""
        return pd.DataFrame(self.rows(), columns=REPORT_COLUMNS)

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> SSEReport:
        """Rebuild cells from a long-format table, preserving row order."""
        cells: dict[tuple[str, int, int], SSECell] = {}
        for row in frame.itertuples(index=False):
            key = (str(row.method), int(row.context_size), int(row.adapt_steps))
            cells.setdefault(key, SSECell(*key)).sses.append(float(row.sse))
        return cls(cells=list(cells.values()))

    def medians(self) -> pd.DataFrame:
        """Method by (context size, steps) table of medians."""
        frame = pd.DataFrame(
            [
                {
                    "method": c.method,
                    "context_size": c.context_size,
                    "adapt_steps": c.adapt_steps,
                    "median_sse": c.median,
                }
                for c in self.cells
            ]
        )
        return frame.pivot(
            index="method", columns=["context_size", "adapt_steps"], values="median_sse"
        ).reindex(list(dict.fromkeys(c.method for c in self.cells)))


def grid_queries(
    generator: QueryGenerator, grid: GridSpec
) -> list[Trajectory]:
    """One query per run, shared by every cell so methods are compared pairwise."""
    return [generator(np.random.default_rng([grid.seed, run])) for run in range(grid.query_runs)]


@performance_monitor("run_grid")
def run_grid(
    predictors: Mapping[str, MethodPredictor],
    query_generator: QueryGenerator,
    grid: GridSpec,
    horizon: int,
    workers: int = 1,
) -> SSEReport:
    """Median SSE for every (method, context size, adaptation steps) cell.

    Methods that do not adapt are evaluated once per context size and the
    result is reported under every step count.

    Raises:
        MissingArtifactError: if a grid method has no predictor
    """
    for method in grid.methods:
        if method not in predictors:
            raise MissingArtifactError(
                f"No checkpoint for method {method}", method=method
            )
    queries = grid_queries(query_generator, grid)
    cells = [
        SSECell(method, size, steps)
        for method, size, steps in product(
            grid.methods, grid.context_sizes, grid.adaptation_steps
        )
    ]

    def evaluate(job: tuple[str, int, int, int]) -> float:
        method, size, steps, run = job
        predictor = predictors[method]
        result = evaluate_rollout(
            predictor,
            queries[run],
            size,
            horizon,
            adapter=lambda context: predictor.adapt(context, steps)[0],
        )
        return result.sse

    # Non-adapting methods give identical numbers for every step count.
    jobs = []
    for cell in cells:
        steps = cell.adapt_steps if adapts(cell.method) else grid.adaptation_steps[0]
        jobs.extend((cell.method, cell.context_size, steps, run) for run in range(grid.query_runs))
    unique = list(dict.fromkeys(jobs))
    _LOGGER.info(
        "Evaluating %d grid cells (%d rollouts, %d workers)",
        len(cells),
        len(unique),
        workers,
    )
    scores = dict(zip(unique, ordered_map(evaluate, unique, workers=workers)))
    for cell, start in zip(cells, range(0, len(jobs), grid.query_runs)):
        cell.sses = [scores[job] for job in jobs[start : start + grid.query_runs]]
    return SSEReport(cells=cells)
