"""Centralized error handling for command entry points."""

from __future__ import annotations

import logging
from collections.abc import Callable, Iterator
from contextlib import contextmanager
from functools import wraps
from typing import ParamSpec

from ..const import EXIT_OK, EXIT_RUNTIME_ERROR, EXIT_VALIDATION_ERROR
from ..exceptions import ConfigurationError, MetaSSMError, ShapeError, SizingError

_LOGGER = logging.getLogger(__name__)

P = ParamSpec("P")


@contextmanager
def validation_stage() -> Iterator[None]:
    """Treat shape and sizing failures inside the block as validation errors.

    Commands wrap their up-front checks in this block so that an impossible
    layout is reported before any work starts.
    """
    try:
        yield
    except (ShapeError, SizingError) as err:
        raise ConfigurationError(str(err), **err.context) from err


def exit_code_for(err: BaseException) -> int:
    """Map an exception to a process exit code."""
    if isinstance(err, ConfigurationError):
        return EXIT_VALIDATION_ERROR
    return EXIT_RUNTIME_ERROR


def handle_command_errors(
    log_errors: bool = True,
) -> Callable[[Callable[P, int | None]], Callable[P, int]]:
    """Decorator converting raised errors into exit codes.

    Args:
        log_errors: Whether to log the error message (True by default)

    Returns:
        Decorated command returning 0 on success, 2 on validation errors and
        3 on runtime or numeric errors
    """

    def decorator(func: Callable[P, int | None]) -> Callable[P, int]:
        @wraps(func)
        def wrapper(*args: P.args, **kwargs: P.kwargs) -> int:
            _LOGGER.debug("Starting %s", func.__name__)
            try:
                result = func(*args, **kwargs)
            except MetaSSMError as err:
                code = exit_code_for(err)
                if log_errors:
                    _LOGGER.error("%s failed: %s", func.__name__, err)
                _LOGGER.debug(
                    "Error in %s (type: %s, exit code %d)",
                    func.__name__,
                    type(err).__name__,
                    code,
                    exc_info=True,
                )
                return code
            except Exception as err:  # noqa: BLE001
                _LOGGER.error(
                    "Unexpected error in %s: %s (type: %s)",
                    func.__name__,
                    err,
                    type(err).__name__,
                    exc_info=True,
                )
                return EXIT_RUNTIME_ERROR
            _LOGGER.debug("Successfully completed %s", func.__name__)
            return EXIT_OK if result is None else result

        return wrapper

    return decorator
