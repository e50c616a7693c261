"""Order-preserving parallel map for independent sweep points."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def default_threads() -> int:
    return max(1, os.cpu_count() or 1)


def pmap(func: Callable[[T], R], items: Iterable[T], threads: int | None = None) -> list[R]:
    """``[func(x) for x in items]`` evaluated on up to ``threads`` workers.

    Results come back in input order, so the output does not depend on the
    thread count. numpy releases the GIL inside its kernels, which is where
    the sweeps spend their time.
    """
    items = list(items)
    n = default_threads() if threads is None else int(threads)
    if n < 1:
        raise ValueError("threads must be >= 1")
    if n == 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(func, items))
