from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence


def parallel_map(fn: Callable, items: Sequence, workers: int = 1) -> list:
    """Ordered map; threads only help because the numeric kernels release the GIL."""
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
