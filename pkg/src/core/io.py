"""Dataset CSV reader and writer.

Format: one point per row, a fixed number of columns, no header, decimal
reals. Floats are written with 17 significant digits so a save/load cycle
is lossless.
"""

import csv
import math
from pathlib import Path

from src.core.errors import InputError
from src.core.points import Dataset
from src.log_config import get_logger

logger = get_logger(__name__)

FLOAT_FORMAT = ".17g"


def format_float(value: float) -> str:
    """Render a float with 17 significant digits."""
    return format(float(value), FLOAT_FORMAT)


def load_dataset(path: str | Path) -> Dataset:
    """Read a dataset from a header-less CSV file.

    Args:
        path: CSV file path

    Returns:
        Validated Dataset

    Raises:
        FileNotFoundError: If the file does not exist
        InputError: On empty files, ragged rows, unparsable or non-finite values
    """
    csv_path = Path(path)
    if not csv_path.exists():
        msg = f"Dataset file not found: {csv_path}"
        raise FileNotFoundError(msg)

    rows: list[list[float]] = []
    width: int | None = None
    with csv_path.open(newline="") as f:
        for line_no, raw in enumerate(csv.reader(f), start=1):
            if not raw or all(not cell.strip() for cell in raw):
                continue
            try:
                row = [float(cell) for cell in raw]
            except ValueError as e:
                msg = f"{csv_path}:{line_no}: unparsable value ({e})"
                raise InputError(msg) from e
            if not all(math.isfinite(v) for v in row):
                msg = f"{csv_path}:{line_no}: non-finite value"
                raise InputError(msg)
            if width is None:
                width = len(row)
            elif len(row) != width:
                msg = f"{csv_path}:{line_no}: ragged row with {len(row)} columns, expected {width}"
                raise InputError(msg)
            rows.append(row)

    if not rows:
        msg = f"Dataset file is empty: {csv_path}"
        raise InputError(msg)

    logger.info("dataset_loaded", path=str(csv_path), n=len(rows), d=width)
    return Dataset.from_rows(rows)


def save_dataset(dataset: Dataset, path: str | Path) -> Path:
    """Write a dataset as header-less CSV, creating parent directories.

    Returns:
        The written path
    """
    csv_path = Path(path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with csv_path.open("w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        for point in dataset.points:
            writer.writerow([format_float(v) for v in point])
    logger.debug("dataset_saved", path=str(csv_path), n=dataset.n, d=dataset.d)
    return csv_path


__all__ = ["FLOAT_FORMAT", "format_float", "load_dataset", "save_dataset"]
