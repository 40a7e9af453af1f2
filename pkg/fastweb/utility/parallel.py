"""Ordered map over work items, serial or on a process pool."""

from __future__ import annotations

import logging
import multiprocessing as mp
from collections.abc import Callable, Iterable
from typing import TypeVar

T = TypeVar("T")
R = TypeVar("R")

logger = logging.getLogger(__name__)


def ordered_map(func: Callable[[T], R], items: Iterable[T], threads: int = 1) -> list[R]:
    """Apply ``func`` to every item, results in input order.

    With ``threads > 1`` the items are distributed over a process pool.
    Callers split their work into a fixed set of items that does not depend
    on ``threads``, so the results are the same for every pool size.

    Args:
        func: Picklable top-level callable
        items: Work items
        threads: Number of worker processes; 1 runs in this process

    Returns:
        List of results, one per item, in the order of ``items``
    """
    work = list(items)
    if threads <= 1 or len(work) <= 1:
        return [func(item) for item in work]
    processes = min(threads, len(work))
    logger.debug("mapping %d work items on %d processes", len(work), processes)
    with mp.Pool(processes=processes) as pool:
        return pool.map(func, work)


def row_blocks(ny: int, rows_per_block: int) -> list[tuple[int, int]]:
    """Fixed ``[start, stop)`` row ranges covering ``0..ny``."""
    if rows_per_block < 1:
        raise ValueError(f"rows_per_block must be at least 1, got {rows_per_block}")
    return [(start, min(start + rows_per_block, ny)) for start in range(0, ny, rows_per_block)]
