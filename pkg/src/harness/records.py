"""Run record collection and persistence.

Every experiment grid point yields one RunRecord. Records are collected in
a thread-safe sink and written as CSV (one ``metric:<name>`` column per
metric, floats with 17 significant digits) so equal runs produce
byte-identical files. Wall time is kept in memory and in the JSON export
only.
"""

import csv
import json
import math
import threading
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from src.core.errors import InputError
from src.core.io import format_float
from src.log_config import get_logger

logger = get_logger(__name__)

SCHEMA_VERSION = 1
METRIC_PREFIX = "metric:"
BASE_COLUMNS = ("schema_version", "experiment_id", "params", "seed")


def params_label(params: dict[str, Any]) -> str:
    """Canonical JSON of a parameter tuple (sorted keys, no spaces)."""
    return json.dumps(params, sort_keys=True, separators=(",", ":"))


@dataclass
class RunRecord:
    """Result of one grid point of an experiment.

    Attributes:
        experiment_id: Identifier of the experiment
        params: Parameter tuple of the grid point
        seed: Seed the grid point's trials descend from
        metrics: Named finite metric values
        order: Position of the grid point in its plan
        wall_time: Seconds spent on the grid point
        schema_version: Record schema version
    """

    experiment_id: str
    params: dict[str, Any]
    seed: int
    metrics: dict[str, float] = field(default_factory=dict)
    order: int = 0
    wall_time: float = 0.0
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self) -> None:
        """Reject non-finite metrics."""
        for name, value in self.metrics.items():
            if not math.isfinite(value):
                msg = f"Metric '{name}' of {self.experiment_id} is not finite: {value!r}"
                raise InputError(msg)
            self.metrics[name] = float(value)

    @property
    def key(self) -> tuple[str, int, str]:
        """Ordering key of the record in a sink."""
        return (self.experiment_id, self.order, params_label(self.params))

    def as_row(self) -> dict[str, str]:
        """CSV row; absent metrics are left to the writer's default."""
        row = {
            "schema_version": str(self.schema_version),
            "experiment_id": self.experiment_id,
            "params": params_label(self.params),
            "seed": str(self.seed),
        }
        for name, value in self.metrics.items():
            row[METRIC_PREFIX + name] = format_float(value)
        return row


class RecordSink:
    """Ordered, thread-safe store of run records.

    Records may arrive in any order; they are always written sorted by
    (experiment id, grid position), so output order does not depend on how
    grid points were scheduled.
    """

    def __init__(self) -> None:
        """Initialize an empty sink."""
        self._records: dict[tuple[str, int, str], RunRecord] = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._records)

    def add(self, record: RunRecord) -> None:
        """Store a record, replacing one with the same key."""
        with self._lock:
            self._records[record.key] = record
        logger.debug(
            "record_added",
            experiment_id=record.experiment_id,
            params=params_label(record.params),
        )

    def extend(self, records: list[RunRecord]) -> None:
        """Store several records."""
        for record in records:
            self.add(record)

    @property
    def records(self) -> list[RunRecord]:
        """Records in output order."""
        with self._lock:
            return [self._records[key] for key in sorted(self._records)]

    def metric_names(self) -> list[str]:
        """Sorted union of the metric names of all records."""
        names: set[str] = set()
        for record in self.records:
            names.update(record.metrics)
        return sorted(names)

    def get_summary(self) -> dict[str, Any]:
        """Record counts per experiment and total wall time."""
        per_experiment: dict[str, int] = {}
        records = self.records
        for record in records:
            per_experiment[record.experiment_id] = per_experiment.get(record.experiment_id, 0) + 1
        return {
            "total_records": len(records),
            "experiments": per_experiment,
            "total_wall_time_seconds": sum(r.wall_time for r in records),
        }

    def write_csv(self, filepath: str | Path) -> Path:
        """Write all records as CSV, creating parent directories.

        Args:
            filepath: Output CSV path

        Returns:
            The written path
        """
        filepath = Path(filepath)
        filepath.parent.mkdir(parents=True, exist_ok=True)
        fieldnames = [*BASE_COLUMNS, *(METRIC_PREFIX + name for name in self.metric_names())]

        with filepath.open("w", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=fieldnames, restval="", lineterminator="\n")
            writer.writeheader()
            for record in self.records:
                writer.writerow(record.as_row())

        logger.info("records_written", path=str(filepath), records=len(self))
        return filepath

    def export_json(self, filepath: str | Path) -> Path:
        """Write the summary and every record, wall time included, as JSON."""
        filepath = Path(filepath)
        filepath.parent.mkdir(parents=True, exist_ok=True)
        data = {
            "summary": self.get_summary(),
            "records": [asdict(r) for r in self.records],
        }
        with filepath.open("w") as f:
            json.dump(data, f, indent=2, sort_keys=True)
            f.write("\n")
        return filepath

    @classmethod
    def load_csv(cls, filepath: str | Path) -> "RecordSink":
        """Read records written by ``write_csv``.

        Grid positions are restored from the row order within each
        experiment.

        Raises:
            FileNotFoundError: If the file does not exist
            InputError: If a row does not match the record schema
        """
        filepath = Path(filepath)
        if not filepath.exists():
            msg = f"Record file not found: {filepath}"
            raise FileNotFoundError(msg)

        sink = cls()
        positions: dict[str, int] = {}
        with filepath.open(newline="") as f:
            reader = csv.DictReader(f)
            missing = [c for c in BASE_COLUMNS if c not in (reader.fieldnames or [])]
            if missing:
                msg = f"{filepath}: missing columns {missing}"
                raise InputError(msg)
            for line_number, row in enumerate(reader, start=2):
                try:
                    experiment_id = row["experiment_id"]
                    metrics = {
                        column[len(METRIC_PREFIX) :]: float(value)
                        for column, value in row.items()
                        if column.startswith(METRIC_PREFIX) and value != ""
                    }
                    record = RunRecord(
                        experiment_id=experiment_id,
                        params=json.loads(row["params"]),
                        seed=int(row["seed"]),
                        metrics=metrics,
                        order=positions.get(experiment_id, 0),
                        schema_version=int(row["schema_version"]),
                    )
                except (ValueError, TypeError) as e:
                    msg = f"{filepath}:{line_number}: invalid record ({e})"
                    raise InputError(msg) from e
                positions[experiment_id] = record.order + 1
                sink.add(record)
        return sink

    def clear(self) -> None:
        """Drop every record."""
        with self._lock:
            self._records.clear()


__all__ = ["SCHEMA_VERSION", "RecordSink", "RunRecord", "params_label"]
