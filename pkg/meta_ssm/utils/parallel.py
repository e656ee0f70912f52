"""Ordered worker-pool helpers."""

from __future__ import annotations

import logging
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

_LOGGER = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(
    func: Callable[[T], R],
    items: Iterable[T],
    workers: int = 1,
    max_concurrent: int | None = None,
) -> list[R]:
    """Apply `func` to every item, returning results in input order.

    Items are submitted in batches of `max_concurrent` (defaults to
    `workers`). With `workers <= 1` everything runs serially on the calling
    thread. Callers reduce the returned list left to right, so the worker
    count never changes a reported number.

    Args:
        func: Function applied to each item
        items: Inputs
        workers: Thread count
        max_concurrent: Items in flight per batch

    Returns:
        List of results in the same order as `items`
    """
    pending = list(items)
    if workers <= 1 or len(pending) <= 1:
        return [func(item) for item in pending]

    batch_size = max_concurrent or workers
    results: list[R] = []
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for start in range(0, len(pending), batch_size):
            batch = pending[start : start + batch_size]
            results.extend(pool.map(func, batch))
    _LOGGER.debug("Mapped %d items over %d workers", len(pending), workers)
    return results
