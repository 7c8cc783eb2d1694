"""Counter-based random streams.

Each shard of a Monte-Carlo run gets its own Philox generator keyed by
``(seed, shard)``.  Shards are a fixed partition of the sample count, so the
estimate does not depend on how many threads run them.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

import numpy as np

T = TypeVar("T")

SHARD_SIZE = 1 << 17
_MASK64 = (1 << 64) - 1


def stream(seed: int, shard: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[seed & _MASK64, shard & _MASK64]))


def shard_sizes(samples: int, shard_size: int = SHARD_SIZE) -> list[int]:
    full, rest = divmod(samples, shard_size)
    return [shard_size] * full + ([rest] if rest else [])


def max_threads() -> int:
    """Thread cap from ``LOCALIZE_THREADS`` (default: CPU count)."""
    raw = os.environ.get("LOCALIZE_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def map_shards(fn: Callable[[np.random.Generator, int], T], seed: int, samples: int) -> list[T]:
    """Run ``fn(generator, size)`` on every shard; results come back in shard order."""
    sizes = shard_sizes(samples)
    jobs = [(stream(seed, i), size) for i, size in enumerate(sizes)]
    workers = min(max_threads(), len(jobs))
    if workers <= 1:
        return [fn(g, size) for g, size in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))
