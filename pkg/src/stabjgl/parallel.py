"""Order-preserving task mapping over an optional executor."""

from __future__ import annotations

from concurrent.futures import Executor, ProcessPoolExecutor
from contextlib import contextmanager


def map_tasks(fn, tasks, executor: Executor | None = None) -> list:
    """``[fn(*t) for t in tasks]``, on ``executor`` when one is given.

    Results come back in task order whatever the pool size, so reductions
    over them are deterministic.
    """
    tasks = list(tasks)
    if executor is None:
        return [fn(*t) for t in tasks]
    futures = [executor.submit(fn, *t) for t in tasks]
    return [f.result() for f in futures]


@contextmanager
def worker_pool(n_workers: int):
    """Yield a process pool of ``n_workers``, or ``None`` (serial) for one worker."""
    if n_workers is None or n_workers <= 1:
        yield None
        return
    with ProcessPoolExecutor(max_workers=int(n_workers)) as pool:
        yield pool
