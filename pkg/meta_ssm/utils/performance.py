"""Performance monitoring utilities for long-running pipeline stages."""

from __future__ import annotations

import logging
import threading
import time
from collections.abc import Callable
from datetime import UTC, datetime
from functools import wraps
from typing import Any, ParamSpec, TypeVar, cast

_LOGGER = logging.getLogger(__name__)

P = ParamSpec("P")
T = TypeVar("T")

# Slow-operation thresholds in seconds
SLOW_OPERATION_SECONDS = 60.0
NOTABLE_OPERATION_SECONDS = 5.0

_LOCK = threading.Lock()
_PERFORMANCE_METRICS: dict[str, int | float | datetime] = {
    "operations": 0,
    "errors": 0,
    "total_duration": 0.0,
    "last_reset": datetime.now(UTC),
}


def _record(duration: float, failed: bool) -> None:
    with _LOCK:
        operations = cast(int, _PERFORMANCE_METRICS["operations"])
        errors = cast(int, _PERFORMANCE_METRICS["errors"])
        total_duration = cast(float, _PERFORMANCE_METRICS["total_duration"])
        _PERFORMANCE_METRICS["operations"] = operations + 1
        _PERFORMANCE_METRICS["errors"] = errors + int(failed)
        _PERFORMANCE_METRICS["total_duration"] = total_duration + duration


def performance_monitor(
    func_name: str = "",
) -> Callable[[Callable[P, T]], Callable[P, T]]:
    """Decorator to time a pipeline stage and log slow runs.

    Args:
        func_name: Name to use for logging (defaults to function name)
    """

    def decorator(func: Callable[P, T]) -> Callable[P, T]:
        @wraps(func)
        def wrapper(*args: P.args, **kwargs: P.kwargs) -> T:
            name = func_name or func.__name__
            start_time = time.perf_counter()
            try:
                result = func(*args, **kwargs)
            except Exception as err:
                duration = time.perf_counter() - start_time
                _record(duration, failed=True)
                _LOGGER.error(
                    "Performance: %s failed after %.2fs: %s", name, duration, err
                )
                raise

            duration = time.perf_counter() - start_time
            _record(duration, failed=False)
            if duration > SLOW_OPERATION_SECONDS:
                _LOGGER.info("Performance: %s took %.1fs (slow operation)", name, duration)
            elif duration > NOTABLE_OPERATION_SECONDS:
                _LOGGER.debug("Performance: %s took %.2fs", name, duration)
            return result

        return wrapper

    return decorator


def get_performance_metrics() -> dict[str, Any]:
    """Get current performance metrics.

    Returns:
        Dictionary containing performance statistics
    """
    with _LOCK:
        operations = cast(int, _PERFORMANCE_METRICS["operations"])
        errors = cast(int, _PERFORMANCE_METRICS["errors"])
        total_duration = cast(float, _PERFORMANCE_METRICS["total_duration"])
        last_reset = cast(datetime, _PERFORMANCE_METRICS["last_reset"])

    uptime = (datetime.now(UTC) - last_reset).total_seconds()
    return {
        "total_operations": operations,
        "total_errors": errors,
        "average_duration": round(total_duration / operations, 3)
        if operations
        else 0.0,
        "total_duration": round(total_duration, 2),
        "error_rate": round(errors / operations * 100, 1) if operations else 0,
        "uptime_seconds": round(uptime),
    }


def reset_performance_metrics() -> None:
    """Reset all performance metrics to zero."""
    with _LOCK:
        _PERFORMANCE_METRICS.update(
            operations=0,
            errors=0,
            total_duration=0.0,
            last_reset=datetime.now(UTC),
        )
