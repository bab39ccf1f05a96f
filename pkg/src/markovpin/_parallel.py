import os
from concurrent.futures import ThreadPoolExecutor

WORKERS_ENV = "MARKOVPIN_WORKERS"


def worker_count(workers=None) -> int:
    if workers is None:
        workers = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(workers)
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {workers!r}") from None
    return max(1, n)


def map_ordered(func, items, workers=None):
    """``list(map(func, items))``, fanned out over threads when asked.

    Results come back in input order whatever the completion order. The
    numba kernels release the GIL, so threads do run in parallel.
    """
    items = list(items)
    n = worker_count(workers)
    if n == 1 or len(items) < 2:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(func, items))
