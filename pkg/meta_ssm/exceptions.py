"""Exception classes carrying debug context.

Every error captures keyword context so that failures deep inside a training
run can be traced back to the operation, shapes or file involved.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from typing import Any

_LOGGER = logging.getLogger(__name__)


class MetaSSMError(Exception):
    """Base exception class with debug context support."""

    def __init__(self, message: str, **context: Any) -> None:
        """Initialize error with message and context.

        Args:
            message: Human-readable error message
            **context: Additional context information for debugging
        """
        super().__init__(message)
        self.message = message
        self.context = context

        self._log_error()

    def __str__(self) -> str:
        """Return formatted error message with context."""
        if not self.context:
            return self.message

        safe_context = {}
        for key, value in self.context.items():
            text = str(value)
            safe_context[key] = f"{text[:97]}..." if len(text) > 100 else text

        context_str = ", ".join(f"{k}={v}" for k, v in safe_context.items())
        return f"{self.message} (Context: {context_str})"

    def _log_error(self) -> None:
        """Log error with full context for debugging."""
        if self.context:
            _LOGGER.debug(
                "%s: %s | Context: %s",
                type(self).__name__,
                self.message,
                self.context,
            )
        else:
            _LOGGER.debug("%s: %s", type(self).__name__, self.message)


class ShapeError(MetaSSMError):
    """Shape rule violation in an op or a model call."""

    def __init__(
        self,
        message: str,
        op: str | None = None,
        shapes: Sequence[tuple[int, ...]] | None = None,
        **context: Any,
    ) -> None:
        """Initialize shape error naming the op and the offending shapes."""
        super().__init__(
            message,
            op=op,
            shapes=[tuple(s) for s in shapes] if shapes is not None else None,
            **context,
        )
        self.op = op
        self.shapes = shapes


class NumericError(MetaSSMError):
    """Non-finite values produced or consumed by a computation."""


class GraphError(MetaSSMError):
    """Misuse of the differentiation graph (e.g. a constant passed as `wrt`)."""


class DivergenceError(NumericError):
    """Simulated state left the admissible magnitude bound."""

    def __init__(
        self,
        message: str,
        step: int | None = None,
        magnitude: float | None = None,
        **context: Any,
    ) -> None:
        """Initialize divergence error with the failing step."""
        super().__init__(message, step=step, magnitude=magnitude, **context)
        self.step = step


class SizingError(MetaSSMError):
    """A sequence or collection is too small for the requested layout."""

    def __init__(
        self,
        message: str,
        required: int | None = None,
        available: int | None = None,
        **context: Any,
    ) -> None:
        """Initialize sizing error with required vs. available sizes."""
        super().__init__(message, required=required, available=available, **context)
        self.required = required
        self.available = available


class ConfigurationError(MetaSSMError):
    """Configuration-related errors."""

    def __init__(
        self,
        message: str,
        config_key: str | None = None,
        config_value: Any = None,
        **context: Any,
    ) -> None:
        """Initialize configuration error."""
        super().__init__(
            message, config_key=config_key, config_value=config_value, **context
        )
        self.config_key = config_key


class PersistenceError(MetaSSMError):
    """Dataset or checkpoint file could not be read or written."""

    def __init__(
        self,
        message: str,
        path: str | None = None,
        **context: Any,
    ) -> None:
        """Initialize persistence error with the file path."""
        super().__init__(message, path=path, **context)
        self.path = path


class MissingArtifactError(PersistenceError):
    """A named checkpoint or dataset does not exist."""


class TaskError(MetaSSMError):
    """One task of a meta-batch could not be evaluated."""

    def __init__(self, message: str, task: str | None = None, **context: Any) -> None:
        """Initialize task error naming the failing task."""
        super().__init__(message, task=task, **context)
        self.task = task
