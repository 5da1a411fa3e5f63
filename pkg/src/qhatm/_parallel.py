"""Thread-count selection and an order-preserving parallel map.

Every task is independent and results are collected in submission order, so
output never depends on how many threads ran.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Optional, TypeVar

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "QHATM_NUM_THREADS"


def thread_count(override: Optional[int] = None) -> int:
    """Threads to use: ``override``, else ``$QHATM_NUM_THREADS``, else all CPUs."""
    if override is not None:
        return max(1, int(override))
    raw = os.environ.get(THREADS_ENV, "").strip()
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return os.cpu_count() or 1


def pmap(fn: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> list[R]:
    items = list(items)
    workers = min(thread_count(threads), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
