"""Order-preserving parallel map."""

from __future__ import annotations

import multiprocessing


def run_ordered(fn, items, jobs: int = 1) -> list:
    """Apply fn to each item, in input order, with jobs worker processes.

    jobs <= 1 runs inline. Workers fork, so fn and items must be picklable
    only in the parallel case; results come back in input order either way.
    """
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    ctx = multiprocessing.get_context("fork")
    with ctx.Pool(min(jobs, len(items))) as pool:
        return pool.map(fn, items)
