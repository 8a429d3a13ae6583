import os
from concurrent.futures import ThreadPoolExecutor


def thread_cap() -> int:
    try:
        n = int(os.environ.get("MULTCOVER_THREADS", "1"))
    except ValueError:
        n = 1
    return max(1, n)


def ordered_map(fn, items):
    """map() that may fan out over threads; results always come back in input order."""
    items = list(items)
    n = thread_cap()
    if n == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
