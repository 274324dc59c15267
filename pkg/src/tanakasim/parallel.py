"""Chunked execution over path indices.

Chunk boundaries depend only on the path count and chunk size, and every
path draws from its own stream, so results are identical for any thread
count.  ``TANAKASIM_THREADS`` sets the default pool size (unset: all CPUs).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

T = TypeVar("T")

THREADS_ENV = "TANAKASIM_THREADS"


def default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "").strip()
    if raw:
        n = int(raw)
        if n < 1:
            raise ValueError(f"{THREADS_ENV} must be a positive integer")
        return n
    return os.cpu_count() or 1


def chunk_bounds(n: int, size: int) -> list[tuple[int, int]]:
    return [(s, min(s + size, n)) for s in range(0, n, size)]


def map_chunks(fn: Callable[[int, int], T], n: int, size: int, threads: int | None = None) -> list[T]:
    """Apply ``fn(start, stop)`` to consecutive index chunks, results in chunk order."""
    bounds = chunk_bounds(n, size)
    threads = default_threads() if threads is None else threads
    if threads <= 1 or len(bounds) <= 1:
        return [fn(a, b) for a, b in bounds]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda ab: fn(*ab), bounds))
