from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Sequence


def default_workers() -> int:
    return os.cpu_count() or 1


def map_ordered(func: Callable[..., Any], items: Sequence[Any], workers: int | None, *args: Any) -> list[Any]:
    """``[func(item, *args) for item in items]``, optionally across processes.

    Results keep input order, so output never depends on the worker count.
    """
    workers = default_workers() if workers is None else workers
    if workers <= 1 or len(items) < 2:
        return [func(item, *args) for item in items]
    chunk = max(1, len(items) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items, *[[a] * len(items) for a in args], chunksize=chunk))
