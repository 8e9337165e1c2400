from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def worker_count(threads: int | None = None) -> int:
    """Explicit ``threads``, else the ``THREADS`` environment variable, else 1."""
    if threads is None:
        threads = int(os.environ.get("THREADS", "1") or 1)
    return max(1, int(threads))


def ordered_map(fn, items, threads: int | None = None) -> list:
    """``[fn(x) for x in items]``, optionally on a thread pool; output order follows input."""
    items = list(items)
    workers = min(worker_count(threads), max(1, len(items)))
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
