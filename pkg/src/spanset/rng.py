"""Seeding and substreams.

Every random object in the package is drawn from a Philox (counter-based)
bit generator keyed by a 64-bit integer. Replicate ``r`` of an experiment with
master seed ``s`` is keyed by ``mix64(s, r)``, so a replicate's draws do not
depend on how replicates are scheduled across workers.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(z: int) -> int:
    """SplitMix64 finalizer (Stafford variant 13) on a 64-bit integer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def mix64(seed: int, index: int) -> int:
    """Substream key for replicate `index` of master `seed`."""
    return splitmix64((seed & MASK64) + ((index + 1) * _GOLDEN & MASK64))


def bit_generator(seed: int) -> np.random.Philox:
    return np.random.Philox(key=int(seed) & MASK64)


def generator(seed: int) -> np.random.Generator:
    return np.random.Generator(bit_generator(seed))


def substream(seed: int, index: int) -> np.random.Generator:
    return generator(mix64(seed, index))


def replicate_seeds(seed: int, n: int) -> list[int]:
    return [mix64(seed, r) for r in range(n)]


def map_ordered(fn: Callable[[int], T], items: Sequence, threads: int = 1) -> list[T]:
    """fn over items, results in input order whatever the worker count."""
    if threads is None or threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))
