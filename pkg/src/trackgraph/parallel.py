"""Deterministic per-source parallelism.

Sources are split into fixed-size blocks regardless of the worker count.
Each block is reduced in source order and block results are returned in
block order, so floating-point sums are bit-identical for any number of
workers.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Sequence

THREADS_ENV = "TRACKGRAPH_THREADS"
BLOCK = 64
# below this many sources a process pool costs more than it saves
MIN_PARALLEL_SOURCES = 1024

_shared: Any = None


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    if n <= 0:
        return os.cpu_count() or 1
    return n


def _init(shared: Any) -> None:
    global _shared
    _shared = shared


def _call(args: tuple[Callable, int, int]) -> Any:
    fn, lo, hi = args
    return fn(_shared, lo, hi)


def map_blocks(fn: Callable[[Any, int, int], Any], n: int, shared: Any) -> list[Any]:
    """Apply ``fn(shared, lo, hi)`` to consecutive source blocks of ``range(n)``."""
    blocks = [(lo, min(lo + BLOCK, n)) for lo in range(0, n, BLOCK)]
    workers = worker_count()
    if workers == 1 or n < MIN_PARALLEL_SOURCES:
        return [fn(shared, lo, hi) for lo, hi in blocks]
    with ProcessPoolExecutor(max_workers=workers, initializer=_init, initargs=(shared,)) as pool:
        return list(pool.map(_call, [(fn, lo, hi) for lo, hi in blocks]))


def ordered_sum(partials: Sequence[Sequence[float]], size: int) -> list[float]:
    total = [0.0] * size
    for part in partials:
        for i, x in enumerate(part):
            total[i] += x
    return total
