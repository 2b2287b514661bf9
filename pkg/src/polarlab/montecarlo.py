"""Seeded Monte Carlo plumbing: per-trial random streams and chunked execution.

Each trial draws from its own generator seeded by ``(master seed, stream id,
trial index)``. Trials are processed in fixed-size chunks whose results are
concatenated in trial order, so results do not depend on the thread count.
"""

from __future__ import annotations

import os
import zlib
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

CHUNK = 256


def stream_id(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))


def trial_rng(seed: int, stream: str, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), stream_id(stream), int(trial)])))


def default_threads() -> int:
    env = os.environ.get("POLARLAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def run_chunked(fn: Callable[[int, int], object], trials: int, threads: int | None = None, chunk: int = CHUNK) -> list:
    """Call ``fn(start, stop)`` over consecutive trial ranges; results in trial order."""
    bounds = [(s, min(s + chunk, trials)) for s in range(0, trials, chunk)]
    threads = threads or default_threads()
    if threads <= 1 or len(bounds) <= 1:
        return [fn(a, b) for a, b in bounds]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda ab: fn(*ab), bounds))


def binomial_se(errors: int, trials: int) -> float:
    if trials <= 0:
        return float("nan")
    p = errors / trials
    return float(np.sqrt(p * (1.0 - p) / trials))
