"""SSE metrics, rollout evaluation and the evaluation grid."""

from .grid import (
    REPORT_COLUMNS,
    QueryGenerator,
    SSECell,
    SSEReport,
    grid_queries,
    run_grid,
)
from .metrics import SSECurve, lower_median, sse
from .predictors import MethodPredictor, adapts
from .reporting import (
    curves_frame,
    display_name,
    predictions_frame,
    read_digest,
    read_report_csv,
    read_trace_csv,
    render_table,
    summary_text,
    write_curves_csv,
    write_predictions_csv,
    write_report_csv,
    write_report_text,
    write_summary_text,
    write_trace_csv,
)
from .rollout import Adapter, RolloutResult, compare_rollouts, evaluate_rollout

__all__ = [
    "REPORT_COLUMNS",
    "Adapter",
    "MethodPredictor",
    "QueryGenerator",
    "RolloutResult",
    "SSECell",
    "SSECurve",
    "SSEReport",
    "adapts",
    "compare_rollouts",
    "curves_frame",
    "display_name",
    "evaluate_rollout",
    "grid_queries",
    "lower_median",
    "predictions_frame",
    "read_digest",
    "read_report_csv",
    "read_trace_csv",
    "render_table",
    "run_grid",
    "sse",
    "summary_text",
    "write_curves_csv",
    "write_predictions_csv",
    "write_report_csv",
    "write_report_text",
    "write_summary_text",
    "write_trace_csv",
]
