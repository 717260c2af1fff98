"""Worker-pool helper shared by the sweeps.

Dense LAPACK calls release the GIL, so a thread pool is enough.  Results come
back in submission order, which keeps every reducer deterministic.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "COUETTE_THREADS"


def worker_count(requested: Optional[int] = None) -> int:
    cap = os.environ.get(THREADS_ENV)
    n = requested or os.cpu_count() or 1
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


def ordered_map(func: Callable[[T], R], items: Iterable[T], workers: Optional[int] = None) -> List[R]:
    items = list(items)
    n = min(worker_count(workers), len(items) or 1)
    if n == 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(func, items))
