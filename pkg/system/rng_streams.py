# -*- coding: utf-8 -*-
# ! python3

# Developed by: Envelopes Lab contributors
# Created: 19.10.2026
# Updated: 19.10.2026

"""
Counter-based random streams.

Trial `i` of a run always draws from chunk `i // CHUNK_SIZE`. Each chunk
owns a Philox generator keyed by the run seed whose 256-bit counter starts
at a block reserved for (lane, chunk), so chunks never overlap and can be
generated in any order, on any number of threads, with identical output.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Iterator, TypeVar

import numpy as np
import psutil

from config import config
from system.exception_handler import UsageError

CHUNK_SIZE: int = 1 << 16
SEED_MASK: int = (1 << 64) - 1

T = TypeVar('T')


def check_seed(seed: int) -> int:
    if not isinstance(seed, (int, np.integer)) or seed < 0 or seed > SEED_MASK:
        raise UsageError("Seed must be an unsigned 64-bit integer", seed=seed)
    return int(seed)


def chunk_generator(seed: int, chunk_index: int, lane: int = 0) -> np.random.Generator:
    """
    Returns the generator for one chunk of trials.

    Args:
        seed (int): Unsigned 64-bit run seed.
        chunk_index (int): Index of the chunk within the lane.
        lane (int): Independent stream family (pair index, sub-experiment).

    Returns:
        np.random.Generator: Philox-backed generator.
    """
    bit_generator = np.random.Philox(
        key=check_seed(seed),
        counter=[0, 0, chunk_index, lane],
    )
    return np.random.Generator(bit_generator)


def chunk_sizes(n: int) -> Iterator[tuple[int, int]]:
    """Yields (chunk_index, size) covering n trials."""
    full, rest = divmod(n, CHUNK_SIZE)
    for index in range(full):
        yield index, CHUNK_SIZE
    if rest:
        yield full, rest


def resolve_threads(threads: int | None = None) -> int:
    """Thread count from the argument, else `simulation.threads` (0 means physical cores)."""
    if threads is None:
        threads = int(config.get('simulation.threads', 1))
    if threads <= 0:
        threads = psutil.cpu_count(logical=False) or 1
    return threads


def ordered_map(func: Callable[..., T], items: Iterable, threads: int | None = None) -> list[T]:
    """
    Maps func over items, preserving input order whatever the thread count.
    """
    items = list(items)
    threads = resolve_threads(threads)
    if threads == 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(func, items))
