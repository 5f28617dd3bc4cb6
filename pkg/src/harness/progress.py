"""Progress monitoring for chunked Monte Carlo studies.

Tracks chunk states and trial throughput of one study and logs snapshots at
a configurable interval.
"""

import threading
import time
from dataclasses import dataclass
from datetime import datetime, timezone


UTC = timezone.utc
from typing import Any

from src.log_config import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class ProgressSnapshot:
    """Progress of a study at one point in time.

    Attributes:
        timestamp: When the snapshot was taken
        total: Total number of chunks
        completed: Chunks finished successfully
        failed: Chunks that raised
        in_progress: Chunks currently running
        remaining: Chunks not yet started
        trials_done: Trials contained in completed chunks
        throughput: Trials per second since tracking started
        average_duration: Mean chunk duration in seconds
    """

    timestamp: datetime
    total: int
    completed: int
    failed: int
    in_progress: int
    remaining: int
    trials_done: int
    throughput: float
    average_duration: float


class ProgressMonitor:
    """Thread-safe chunk progress tracker.

    Example:
        >>> monitor = ProgressMonitor(total_chunks=4)
        >>> monitor.update("in_progress")
        >>> monitor.update("completed", duration_seconds=1.5, trials=1000)
        >>> monitor.report()["completed"]
        1
    """

    def __init__(self, total_chunks: int, log_interval_seconds: float = 30.0):
        """Initialize the monitor.

        Args:
            total_chunks: Number of chunks in the study
            log_interval_seconds: How often snapshots are logged

        Raises:
            ValueError: If total_chunks is not positive
        """
        if total_chunks <= 0:
            msg = "total_chunks must be positive"
            raise ValueError(msg)

        self.total_chunks = total_chunks
        self.completed = 0
        self.failed = 0
        self.in_progress = 0
        self.trials_done = 0
        self.start_time = time.time()
        self.chunk_durations: list[float] = []

        self._lock = threading.Lock()
        self._last_log_time = self.start_time
        self._log_interval = log_interval_seconds

    def update(self, status: str, duration_seconds: float | None = None, trials: int = 0) -> None:
        """Record a chunk state transition.

        Args:
            status: One of 'in_progress', 'completed', 'failed'
            duration_seconds: Chunk duration for finished chunks
            trials: Trials contained in a completed chunk

        Raises:
            ValueError: If status is not recognized
        """
        with self._lock:
            if status == "in_progress":
                self.in_progress += 1
            elif status in ("completed", "failed"):
                if status == "completed":
                    self.completed += 1
                    self.trials_done += trials
                else:
                    self.failed += 1
                self.in_progress = max(self.in_progress - 1, 0)
                if duration_seconds is not None:
                    self.chunk_durations.append(duration_seconds)
            else:
                msg = f"Unknown status: {status}"
                raise ValueError(msg)

            current_time = time.time()
            if current_time - self._last_log_time >= self._log_interval:
                self._log_progress_snapshot()
                self._last_log_time = current_time

    def report(self) -> dict[str, Any]:
        """Current progress with derived metrics.

        Returns:
            Dictionary with chunk counts, trials_done, throughput (trials per
            second), elapsed_seconds, completion_percentage and
            estimated_time_remaining_seconds
        """
        with self._lock:
            snapshot = self._create_snapshot()
            start_time = self.start_time

        return {
            "total": snapshot.total,
            "completed": snapshot.completed,
            "failed": snapshot.failed,
            "in_progress": snapshot.in_progress,
            "remaining": snapshot.remaining,
            "trials_done": snapshot.trials_done,
            "throughput": snapshot.throughput,
            "average_duration_seconds": snapshot.average_duration,
            "elapsed_seconds": time.time() - start_time,
            "completion_percentage": (snapshot.completed + snapshot.failed) / snapshot.total * 100.0,
            "estimated_time_remaining_seconds": self._estimate_time_remaining(snapshot),
        }

    def get_snapshot(self) -> ProgressSnapshot:
        """Immutable snapshot of the current progress."""
        with self._lock:
            return self._create_snapshot()

    def _create_snapshot(self) -> ProgressSnapshot:
        """Build a snapshot; must be called with the lock held."""
        elapsed = time.time() - self.start_time
        return ProgressSnapshot(
            timestamp=datetime.now(UTC),
            total=self.total_chunks,
            completed=self.completed,
            failed=self.failed,
            in_progress=self.in_progress,
            remaining=self.total_chunks - self.completed - self.failed - self.in_progress,
            trials_done=self.trials_done,
            throughput=self.trials_done / elapsed if elapsed > 0 else 0.0,
            average_duration=(
                sum(self.chunk_durations) / len(self.chunk_durations) if self.chunk_durations else 0.0
            ),
        )

    def _estimate_time_remaining(self, snapshot: ProgressSnapshot) -> float:
        """Seconds until all chunks finish at the mean chunk duration so far."""
        if snapshot.completed == 0 or snapshot.average_duration == 0.0:
            return 0.0
        return (snapshot.remaining + snapshot.in_progress) * snapshot.average_duration

    def _log_progress_snapshot(self) -> None:
        """Log the current snapshot; must be called with the lock held."""
        snapshot = self._create_snapshot()
        logger.info(
            "progress_snapshot",
            total=snapshot.total,
            completed=snapshot.completed,
            failed=snapshot.failed,
            in_progress=snapshot.in_progress,
            trials_done=snapshot.trials_done,
            throughput=f"{snapshot.throughput:.1f} trials/sec",
            estimated_time_remaining_seconds=f"{self._estimate_time_remaining(snapshot):.0f}s",
        )

    def is_complete(self) -> bool:
        """Whether every chunk has finished."""
        with self._lock:
            return self.completed + self.failed >= self.total_chunks


__all__ = ["ProgressMonitor", "ProgressSnapshot"]
