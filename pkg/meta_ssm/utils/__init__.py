"""Utility modules for the meta-learning pipeline."""

from __future__ import annotations

# Import from error_handling module
from .error_handling import exit_code_for, handle_command_errors, validation_stage

# Import from parallel module
from .parallel import ordered_map

# Import from performance module
from .performance import (
    get_performance_metrics,
    performance_monitor,
    reset_performance_metrics,
)

__all__ = [
    "exit_code_for",
    "get_performance_metrics",
    "handle_command_errors",
    "ordered_map",
    "performance_monitor",
    "reset_performance_metrics",
    "validation_stage",
]
