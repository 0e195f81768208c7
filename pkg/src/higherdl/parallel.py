"""Chunked maps over element tables with deterministic, order-preserving merge."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

CHUNK = 1 << 15


def chunked_map(fn: Callable[[np.ndarray], np.ndarray], arr: np.ndarray, workers: int = 1,
                chunk: int = CHUNK) -> np.ndarray:
    """Apply ``fn`` to consecutive slices of ``arr`` and concatenate in order.

    The result never depends on ``workers``: chunks are merged by position.
    """
    n = len(arr)
    if n <= chunk:
        return fn(arr)
    bounds = [(i, min(i + chunk, n)) for i in range(0, n, chunk)]
    if workers <= 1:
        parts = [fn(arr[a:b]) for a, b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(lambda ab: fn(arr[ab[0]:ab[1]]), bounds))
    return np.concatenate(parts, axis=0)
