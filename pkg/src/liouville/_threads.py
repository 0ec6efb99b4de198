"""Thread-pool helper honouring the LIOUVILLE_THREADS cap."""
import os
from concurrent.futures import ThreadPoolExecutor


def max_workers():
    raw = os.environ.get("LIOUVILLE_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = os.cpu_count() or 1
    return max(1, n)


def ordered_map(func, items):
    """Map ``func`` over ``items``; results keep input order."""
    items = list(items)
    n = max_workers()
    if n == 1 or len(items) < 2:
        return [func(it) for it in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(func, items))
