"""
Ordered parallel map for independent work items.

Schedule samples, sweep points and potential samples are independent; they
run on a thread pool whose size comes from ``POTLAB['WORKERS']``. Results
always come back in input order, so reports and CSV rows are deterministic
whatever the worker count.
"""

from concurrent.futures import ThreadPoolExecutor

from .defaults import get_default


def ordered_map(fn, items, workers=None):
    """
    Apply ``fn`` to every item and return the results in input order.

    Args:
        fn (callable): Function of one argument.
        items (iterable): Work items.
        workers (int, optional): Pool size; ``POTLAB['WORKERS']`` when omitted.
            A value of 1 runs serially in the calling thread.

    Returns:
        list: ``[fn(item) for item in items]``.
    """
    items = list(items)
    workers = workers if workers is not None else get_default('WORKERS', 1)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
