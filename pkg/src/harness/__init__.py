"""Experiment harness: plans, chunked trial execution, records and acceptance suites."""

from src.harness.acceptance import (
    SUITES,
    AcceptanceCaps,
    AcceptanceContext,
    AcceptanceFixtures,
    AcceptanceReport,
    SuiteResult,
    load_fixtures,
    run_acceptance,
    run_pilot,
    suite_names,
)
from src.harness.executor import ChunkJob, TrialExecutor, merge_in_order, plan_chunks
from src.harness.experiments import ExperimentOutcome, run_plan
from src.harness.plan import ExperimentPlan, GridPoint, OutputPaths, load_plan, parse_plan
from src.harness.progress import ProgressMonitor, ProgressSnapshot
from src.harness.records import RecordSink, RunRecord

__all__ = [
    "SUITES",
    "AcceptanceCaps",
    "AcceptanceContext",
    "AcceptanceFixtures",
    "AcceptanceReport",
    "ChunkJob",
    "ExperimentOutcome",
    "ExperimentPlan",
    "GridPoint",
    "OutputPaths",
    "ProgressMonitor",
    "ProgressSnapshot",
    "RecordSink",
    "RunRecord",
    "SuiteResult",
    "TrialExecutor",
    "load_fixtures",
    "load_plan",
    "merge_in_order",
    "parse_plan",
    "plan_chunks",
    "run_acceptance",
    "run_pilot",
    "run_plan",
    "suite_names",
]
