"""Report, curve, prediction and trace files.

Every file starts with a `# config_digest=<digest>` line; readers skip it.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping, Sequence
from pathlib import Path

import numpy as np
import pandas as pd

from ..const import METHOD_DISPLAY_NAMES
from ..exceptions import MissingArtifactError, PersistenceError
from ..types import TraceRow
from .grid import REPORT_COLUMNS, SSEReport
from .rollout import RolloutResult

_LOGGER = logging.getLogger(__name__)

TRACE_COLUMNS = ["iteration", "outer_loss", "wall_time_ms"]
DIGEST_PREFIX = "# config_digest="


def _write_frame(frame: pd.DataFrame, path: Path, digest: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as handle:
            handle.write(f"{DIGEST_PREFIX}{digest}\n")
            frame.to_csv(handle, index=False, float_format="%.17g")
    except OSError as err:
        raise PersistenceError(
            f"Cannot write {path}: {err.strerror}", path=str(path)
        ) from err


def _write_text(text: str, path: Path, digest: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(f"{DIGEST_PREFIX}{digest}\n{text}\n", encoding="utf-8")
    except OSError as err:
        raise PersistenceError(
            f"Cannot write {path}: {err.strerror}", path=str(path)
        ) from err


def read_digest(path: Path) -> str:
    """Config digest from the first line of a written file."""
    with path.open(encoding="utf-8") as handle:
        first = handle.readline().strip()
    return first[len(DIGEST_PREFIX) :] if first.startswith(DIGEST_PREFIX) else ""


def display_name(method: str) -> str:
    """Human-readable method name."""
    return METHOD_DISPLAY_NAMES.get(method, method)


def write_report_csv(report: SSEReport, path: Path, digest: str) -> None:
    """Long-format report: one row per (cell, run)."""
    _write_frame(report.to_frame(), path, digest)
    _LOGGER.info("Wrote %d report cells to %s", len(report.cells), path)


def read_report_csv(path: Path) -> SSEReport:
    """Load a report written by `write_report_csv`.

    Raises:
        MissingArtifactError: if the file does not exist
        PersistenceError: if required columns are missing
    """
    if not path.is_file():
        raise MissingArtifactError(f"Report not found: {path}", path=str(path))
    frame = pd.read_csv(path, comment="#")
    missing = [c for c in REPORT_COLUMNS if c not in frame.columns]
    if missing:
        raise PersistenceError(
            f"Report is missing columns: {', '.join(missing)}", path=str(path)
        )
    return SSEReport.from_frame(frame)


def render_table(report: SSEReport) -> str:
    """Aligned text grid of median SSEs, one row per method."""
    medians = report.medians()
    medians.index = [display_name(m) for m in medians.index]
    medians.columns = [f"{size}/{steps}" for size, steps in medians.columns]
    medians.index.name = "method \\ size/steps"
    return medians.to_string(float_format=lambda v: f"{v:.2e}")


def write_report_text(report: SSEReport, path: Path, digest: str) -> None:
    """Human-readable aligned median table."""
    _write_text(render_table(report), path, digest)


def curves_frame(results: Mapping[str, RolloutResult]) -> pd.DataFrame:
    """Per-step cumulative SSE, one column per method."""
    horizon = max((len(r.curve) for r in results.values()), default=0)
    frame = pd.DataFrame({"step": np.arange(1, horizon + 1)})
    for method, result in results.items():
        frame[method] = result.curve.values
    return frame


def write_curves_csv(
    results: Mapping[str, RolloutResult], path: Path, digest: str
) -> None:
    """Per-step SSE curves for external plotting."""
    _write_frame(curves_frame(results), path, digest)


def predictions_frame(results: Mapping[str, RolloutResult]) -> pd.DataFrame:
    """Long-format predicted and true states per method and step."""
    frames = []
    for method, result in results.items():
        steps = np.arange(1, len(result.curve) + 1)
        frames.append(
            pd.DataFrame(
                {
                    "method": method,
                    "step": steps,
                    "x1_pred": result.predicted[:, 0],
                    "x2_pred": result.predicted[:, 1],
                    "x1_true": result.truth[:, 0],
                    "x2_true": result.truth[:, 1],
                }
            )
        )
    if not frames:
        return pd.DataFrame()
    return pd.concat(frames, ignore_index=True)


def write_predictions_csv(
    results: Mapping[str, RolloutResult], path: Path, digest: str
) -> None:
    """Predicted state blocks next to the truth."""
    _write_frame(predictions_frame(results), path, digest)


def summary_text(results: Mapping[str, RolloutResult]) -> str:
    """Aligned total-SSE table of a rollout comparison."""
    frame = pd.DataFrame(
        {
            "method": [display_name(m) for m in results],
            "sse": [r.sse for r in results.values()],
        }
    )
    return frame.to_string(index=False, float_format=lambda v: f"{v:.4e}")


def write_summary_text(
    results: Mapping[str, RolloutResult], path: Path, digest: str
) -> None:
    """Total-SSE table of a rollout comparison."""
    _write_text(summary_text(results), path, digest)


def write_trace_csv(trace: Sequence[TraceRow], path: Path, digest: str) -> None:
    """Training trace: iteration, outer_loss, wall_time_ms.

    wall_time_ms is measured time, so unlike every other artifact a trace
    is not byte-identical across repeated runs of one config.
    """
    _write_frame(pd.DataFrame(list(trace), columns=TRACE_COLUMNS), path, digest)


def read_trace_csv(path: Path) -> list[TraceRow]:
    """Load a trace written by `write_trace_csv`; missing file gives []."""
    if not path.is_file():
        return []
    frame = pd.read_csv(path, comment="#")
    return [
        {
            "iteration": int(row.iteration),
            "outer_loss": float(row.outer_loss),
            "wall_time_ms": float(row.wall_time_ms),
        }
        for row in frame.itertuples(index=False)
    ]
