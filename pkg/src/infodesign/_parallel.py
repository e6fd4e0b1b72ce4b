"""Fixed-chunk execution so that results never depend on the worker count."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

CHUNK = 25


def default_threads():
    env = os.environ.get("INFODESIGN_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def chunk_slices(total, size=CHUNK):
    return [slice(a, min(a + size, total)) for a in range(0, total, size)]


def run_chunks(fn, slices, threads=None):
    """Apply ``fn`` to each slice; output order follows ``slices``."""
    threads = default_threads() if threads is None else max(1, int(threads))
    if threads == 1 or len(slices) == 1:
        return [fn(s) for s in slices]
    with ThreadPoolExecutor(max_workers=min(threads, len(slices))) as pool:
        return list(pool.map(fn, slices))
