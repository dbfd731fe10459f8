"""Process pools for independent simulations and objective evaluations."""

import logging
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import Executor, ProcessPoolExecutor, as_completed
from typing import Any, TypeVar

from simlob.config import get_config

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def resolve_workers(workers: int | None) -> int:
    """Explicit worker count, else Config.workers."""
    if workers is None:
        return get_config().workers
    return max(1, workers)


class WorkerPool:
    """Reusable pool whose `map` returns results in item order.

    With one worker everything runs in-process, initializer included. `fn` and `initializer`
    must be picklable module-level callables when workers > 1.

    Usage:
        with WorkerPool(4, initializer=setup, initargs=(state,)) as pool:
            results = pool.map(evaluate, jobs)
    """

    def __init__(
        self,
        workers: int | None = None,
        initializer: Callable[..., Any] | None = None,
        initargs: tuple = (),
    ):
        self.workers = resolve_workers(workers)
        self._initializer = initializer
        self._initargs = initargs
        self._executor: Executor | None = None

    def __enter__(self) -> "WorkerPool":
        if self.workers == 1:
            if self._initializer is not None:
                self._initializer(*self._initargs)
        else:
            logger.debug("Starting %d worker processes", self.workers)
            self._executor = ProcessPoolExecutor(
                max_workers=self.workers,
                initializer=self._initializer,
                initargs=self._initargs,
            )
        return self

    def __exit__(self, *exc_info) -> None:
        if self._executor is not None:
            self._executor.shutdown()
            self._executor = None

    def map(
        self,
        fn: Callable[[T], R],
        items: Iterable[T],
        on_done: Callable[[int, R], None] | None = None,
    ) -> list[R]:
        """Apply `fn` to every item; `on_done(index, result)` fires as results arrive."""
        items = list(items)
        if self._executor is None:
            results = []
            for i, item in enumerate(items):
                results.append(fn(item))
                if on_done is not None:
                    on_done(i, results[-1])
            return results

        results: list[Any] = [None] * len(items)
        futures = {self._executor.submit(fn, item): i for i, item in enumerate(items)}
        for future in as_completed(futures):
            i = futures[future]
            results[i] = future.result()
            if on_done is not None:
                on_done(i, results[i])
        return results


def parallel_map(
    fn: Callable[[T], R],
    items: Sequence[T] | Iterable[T],
    workers: int | None = None,
    on_done: Callable[[int, R], None] | None = None,
) -> list[R]:
    """One-shot WorkerPool.map, never starting more workers than items."""
    items = list(items)
    n_workers = min(resolve_workers(workers), max(1, len(items)))
    with WorkerPool(n_workers) as pool:
        return pool.map(fn, items, on_done=on_done)
