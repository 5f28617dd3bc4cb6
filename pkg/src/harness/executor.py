"""Parallel trial execution.

A study of N trials is split into chunks of ``chunk_size`` consecutive
trials. Chunks run concurrently, bounded by a semaphore, either inline
(one thread) or on a process pool. Results come back in chunk order, so a
study's merged result does not depend on scheduling or on the number of
workers.
"""

import asyncio
import time
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import reduce
from typing import Any, Protocol, TypeVar
import sys

if sys.version_info >= (3, 11):
    from typing import Self
else:
    from typing_extensions import Self

from src.config import RunnerConfig
from src.harness.progress import ProgressMonitor
from src.log_config import bind_run_context, get_logger, unbind_run_context

logger = get_logger(__name__)

T = TypeVar("T")

ChunkFunction = Callable[[int, int], T]


class Mergeable(Protocol):
    """Accumulator that folds another accumulator into itself."""

    def merge(self, other: Any) -> Any:
        """Fold ``other`` into self and return self."""
        ...


M = TypeVar("M", bound=Mergeable)


@dataclass(frozen=True)
class ChunkJob:
    """Trials [start, stop) of a study."""

    index: int
    start: int
    stop: int

    @property
    def trials(self) -> int:
        """Number of trials in the chunk."""
        return self.stop - self.start


def plan_chunks(trials: int, chunk_size: int) -> list[ChunkJob]:
    """Split trials 0..trials-1 into consecutive chunks.

    Raises:
        ValueError: If trials or chunk_size is not positive

    Example:
        >>> [(c.start, c.stop) for c in plan_chunks(5, 2)]
        [(0, 2), (2, 4), (4, 5)]
    """
    if trials < 1 or chunk_size < 1:
        msg = f"trials and chunk_size must be positive, got {trials} and {chunk_size}"
        raise ValueError(msg)
    return [
        ChunkJob(index, start, min(start + chunk_size, trials))
        for index, start in enumerate(range(0, trials, chunk_size))
    ]


def merge_in_order(results: Sequence[M]) -> M:
    """Fold chunk results left to right."""
    return reduce(lambda acc, item: acc.merge(item), results[1:], results[0])


class TrialExecutor:
    """Runs chunked studies with bounded concurrency.

    With ``threads == 1`` chunks run inline on the event loop thread; with
    more, they run in a process pool of that size and chunk functions must
    be picklable (module-level functions or ``functools.partial`` of them).

    Example:
        >>> async with TrialExecutor(RunnerConfig(threads=4)) as executor:
        ...     parts = await executor.run_chunks(partial(advantage_chunk, cfg, policy, seed), 10_000)
    """

    def __init__(self, runner: RunnerConfig | None = None):
        """Initialize the executor.

        Args:
            runner: Worker count, chunk size and progress interval
        """
        self.runner = runner or RunnerConfig()
        self.semaphore = asyncio.Semaphore(self.runner.threads)
        self._pool: ProcessPoolExecutor | None = None
        self.chunks_run = 0
        self.chunks_failed = 0

        logger.info(
            "trial_executor_initialized",
            threads=self.runner.threads,
            chunk_size=self.runner.chunk_size,
        )

    async def __aenter__(self) -> Self:
        """Start the process pool when running with several workers."""
        if self.runner.threads > 1 and self._pool is None:
            self._pool = ProcessPoolExecutor(max_workers=self.runner.threads)
        return self

    async def __aexit__(self, *exc_info: object) -> None:
        """Shut the pool down."""
        self.close()

    def close(self) -> None:
        """Shut the process pool down, waiting for running chunks."""
        if self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None

    async def _execute_chunk(
        self,
        job: ChunkJob,
        func: ChunkFunction[T],
        monitor: ProgressMonitor,
        context: dict[str, Any],
    ) -> T:
        """Run one chunk under the concurrency limit."""
        async with self.semaphore:
            bind_run_context(**context, chunk=job.index)
            monitor.update("in_progress")
            started = time.time()
            try:
                if self._pool is not None:
                    loop = asyncio.get_running_loop()
                    result = await loop.run_in_executor(self._pool, func, job.start, job.stop)
                else:
                    result = func(job.start, job.stop)
            except Exception as e:
                self.chunks_failed += 1
                monitor.update("failed", duration_seconds=time.time() - started)
                logger.warning(
                    "chunk_failed",
                    start=job.start,
                    stop=job.stop,
                    error=str(e),
                    error_type=type(e).__name__,
                )
                raise
            else:
                self.chunks_run += 1
                duration = time.time() - started
                monitor.update("completed", duration_seconds=duration, trials=job.trials)
                logger.debug("chunk_completed", start=job.start, stop=job.stop, duration_seconds=duration)
                return result
            finally:
                unbind_run_context(*context, "chunk")

    async def run_chunks(
        self,
        func: ChunkFunction[T],
        trials: int,
        experiment_id: str = "study",
        grid_point: str = "",
    ) -> list[T]:
        """Run ``func(start, stop)`` over every chunk of a study.

        Args:
            func: Chunk function returning a result for trials [start, stop)
            trials: Total number of trials
            experiment_id: Identifier bound to the log context
            grid_point: Parameter label bound to the log context

        Returns:
            Chunk results in chunk order

        Raises:
            Exception: The error of the first failing chunk, in chunk order
        """
        jobs = plan_chunks(trials, self.runner.chunk_size)
        monitor = ProgressMonitor(len(jobs), self.runner.progress_log_interval_seconds)
        context = {"experiment_id": experiment_id, "grid_point": grid_point}

        logger.info(
            "study_started",
            experiment_id=experiment_id,
            grid_point=grid_point,
            trials=trials,
            chunks=len(jobs),
        )
        outcomes = await asyncio.gather(
            *(self._execute_chunk(job, func, monitor, context) for job in jobs),
            return_exceptions=True,
        )

        for job, outcome in zip(jobs, outcomes, strict=True):
            if isinstance(outcome, BaseException):
                logger.error(
                    "study_failed",
                    experiment_id=experiment_id,
                    grid_point=grid_point,
                    chunk=job.index,
                    error=str(outcome),
                )
                raise outcome

        report = monitor.report()
        logger.info(
            "study_completed",
            experiment_id=experiment_id,
            grid_point=grid_point,
            trials=report["trials_done"],
            elapsed_seconds=round(report["elapsed_seconds"], 3),
        )
        return list(outcomes)

    async def run_merged(
        self,
        func: Callable[[int, int], M],
        trials: int,
        experiment_id: str = "study",
        grid_point: str = "",
    ) -> M:
        """Run a study and merge its chunk accumulators in chunk order."""
        return merge_in_order(await self.run_chunks(func, trials, experiment_id, grid_point))

    def get_stats(self) -> dict[str, Any]:
        """Executor counters."""
        return {
            "threads": self.runner.threads,
            "chunk_size": self.runner.chunk_size,
            "chunks_run": self.chunks_run,
            "chunks_failed": self.chunks_failed,
            "pool_active": self._pool is not None,
        }


__all__ = [
    "ChunkJob",
    "TrialExecutor",
    "merge_in_order",
    "plan_chunks",
]
