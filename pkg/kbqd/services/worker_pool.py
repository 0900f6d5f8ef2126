import logging
import os
import threading
from concurrent.futures import ThreadPoolExecutor

logger = logging.getLogger(__name__)

_default_workers = None
_lock = threading.Lock()


def set_default_workers(workers):
    """Process-wide worker count used when callers pass workers=None."""
    global _default_workers
    with _lock:
        _default_workers = None if workers is None else max(1, int(workers))


def resolve_workers(workers=None):
    if workers is not None:
        return max(1, int(workers))
    if _default_workers is not None:
        return _default_workers
    return os.cpu_count() or 1


class WorkerPool:
    """
    Ordered parallel map over independent work items.

    Results come back in submission order and every item carries its own
    random stream, so output does not depend on the number of workers.
    """

    def __init__(self, workers=None, name='kbqd'):
        self.workers = resolve_workers(workers)
        self.name = name

    def map(self, func, items):
        items = list(items)
        if self.workers == 1 or len(items) <= 1:
            return [func(item) for item in items]
        logger.debug(f"🧵 [{self.name}] {len(items)} tasks on {self.workers} threads")
        with ThreadPoolExecutor(max_workers=min(self.workers, len(items)),
                                thread_name_prefix=self.name) as executor:
            return list(executor.map(func, items))
