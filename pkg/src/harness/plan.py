"""Experiment plans.

A plan names an experiment kind, a parameter grid and a trial count. The
grid is expanded into the cartesian product of its value lists, keys in
sorted order. Each grid point gets its own seed, derived from the master
seed, the experiment id and the point's parameter labels, so adding grid
points never changes the seeds of existing ones.

Plan files are JSON (read with ``yaml.safe_load``, which accepts JSON)::

    {
      "experiment_id": "drift_sweep",
      "kind": "advantage",
      "grid": {"k": [16, 64], "epsilon": [0.49], "policy": ["drift"],
               "weights": ["one_heavy(log2)"]},
      "trials": 1000,
      "master_seed": 7
    }
"""

import itertools
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Literal
import sys

if sys.version_info >= (3, 11):
    from typing import Self
else:
    from typing_extensions import Self

import yaml
from pydantic import BaseModel, Field, ValidationError, model_validator

from src.core.errors import InputError
from src.core.rng import derive_seed
from src.harness.records import params_label
from src.log_config import get_logger

logger = get_logger(__name__)

ExperimentKind = Literal["ratio", "advantage", "badness", "chernoff"]

DEFAULT_MASTER_SEED = 20240917
DEFAULT_LEVELS = (40, 80, 120, 160, 200)

REQUIRED_GRID_KEYS: dict[str, tuple[str, ...]] = {
    "ratio": ("instance", "k", "epsilon", "policy"),
    "advantage": ("k", "epsilon", "policy", "weights"),
    "badness": ("k", "epsilon", "policy", "weights"),
    "chernoff": ("p", "ell"),
}


class OutputPaths(BaseModel):
    """Where a plan's outputs go, relative to the output directory.

    Attributes:
        records_csv: RunRecord CSV
        records_json: Optional JSON export including wall times
        detail_dir: Per-grid-point detail CSVs (per-round advantage, per-level badness)
    """

    records_csv: str = "records.csv"
    records_json: str | None = None
    detail_dir: str | None = "details"

    model_config = {"extra": "forbid"}


class ExperimentPlan(BaseModel):
    """Validated experiment plan.

    Attributes:
        experiment_id: Identifier used in records, seeds and logs
        kind: ratio, advantage, badness or chernoff
        grid: Parameter name to the list of its values
        trials: Trials per grid point
        master_seed: Seed all grid point seeds descend from
        outputs: Output file names
        lloyd_iters: Lloyd iterations for the refined ratio column (0 = off)
        levels: Levels evaluated by badness experiments
    """

    experiment_id: str = Field(min_length=1, pattern=r"^[A-Za-z0-9_.-]+$")
    kind: ExperimentKind
    grid: dict[str, list[Any]]
    trials: int = Field(ge=1)
    master_seed: int = Field(default=DEFAULT_MASTER_SEED, ge=0, lt=2**64)
    outputs: OutputPaths = Field(default_factory=OutputPaths)
    lloyd_iters: int = Field(default=0, ge=0)
    levels: list[int] = Field(default_factory=lambda: list(DEFAULT_LEVELS))

    model_config = {"extra": "forbid"}

    @model_validator(mode="after")
    def check_grid(self) -> Self:
        """Require a nonempty grid holding the keys of the plan's kind.

        Raises:
            ValueError: If the grid is empty, a value list is empty, or a
                required key is missing
        """
        if not self.grid:
            msg = "grid must not be empty"
            raise ValueError(msg)
        empty = sorted(name for name, values in self.grid.items() if not values)
        if empty:
            msg = f"grid values must be nonempty lists: {empty}"
            raise ValueError(msg)
        missing = [key for key in REQUIRED_GRID_KEYS[self.kind] if key not in self.grid]
        if missing:
            msg = f"grid of a {self.kind} experiment needs keys {missing}"
            raise ValueError(msg)
        if any(level < 1 for level in self.levels):
            msg = f"levels must be positive, got {self.levels}"
            raise ValueError(msg)
        return self

    def points(self) -> list["GridPoint"]:
        """Cartesian product of the grid, keys sorted, values in file order."""
        keys = sorted(self.grid)
        points = []
        for order, values in enumerate(itertools.product(*(self.grid[key] for key in keys))):
            params = dict(zip(keys, values, strict=True))
            points.append(GridPoint(order=order, params=params, seed=self.point_seed(params)))
        return points

    def point_seed(self, params: dict[str, Any]) -> int:
        """Seed of one grid point; depends only on its parameter values."""
        labels = [f"{key}={json.dumps(params[key], sort_keys=True)}" for key in sorted(params)]
        return derive_seed(self.master_seed, self.experiment_id, *labels)


@dataclass(frozen=True)
class GridPoint:
    """One parameter tuple of a plan with its seed."""

    order: int
    params: dict[str, Any]
    seed: int

    @property
    def label(self) -> str:
        """Canonical JSON of the parameters."""
        return params_label(self.params)


def _format_location(loc: tuple[Any, ...]) -> str:
    return ".".join(str(part) for part in loc) or "<root>"


def parse_plan(text: str, source: str = "<plan>") -> ExperimentPlan:
    """Parse and validate a plan document.

    Raises:
        InputError: On syntax errors or schema violations, naming the
            offending line or field
    """
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        where = f"line {mark.line + 1} col {mark.column + 1}" if mark is not None else "syntax"
        msg = f"{source}: {where}: invalid plan document"
        raise InputError(msg) from e
    if not isinstance(data, dict):
        msg = f"{source}: plan must be an object"
        raise InputError(msg)
    try:
        plan = ExperimentPlan.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        msg = f"{source}: field {_format_location(first['loc'])}: {first['msg']}"
        raise InputError(msg) from e
    logger.info(
        "plan_loaded",
        source=source,
        experiment_id=plan.experiment_id,
        kind=plan.kind,
        grid_points=len(plan.points()),
        trials=plan.trials,
    )
    return plan


def load_plan(path: str | Path) -> ExperimentPlan:
    """Read a plan file.

    Raises:
        FileNotFoundError: If the file does not exist
        InputError: If the plan is malformed
    """
    plan_path = Path(path)
    if not plan_path.exists():
        msg = f"Plan file not found: {plan_path}"
        raise FileNotFoundError(msg)
    return parse_plan(plan_path.read_text(), str(plan_path))


__all__ = [
    "DEFAULT_LEVELS",
    "ExperimentKind",
    "ExperimentPlan",
    "GridPoint",
    "OutputPaths",
    "load_plan",
    "parse_plan",
]
