"""Centralized structured logging configuration using structlog.

Every module in the lab logs through this configuration: ISO timestamps,
log levels, callsite information and context variables bound per experiment
run, rendered as JSON (default) or as colored console output.

Example:
    >>> from src.log_config import configure_logging, get_logger
    >>> configure_logging(level="INFO")
    >>> logger = get_logger(__name__)
    >>> logger.info("seeding_finished", k=5, cost=12.5)
"""

import logging
import sys
from typing import Any

import structlog

RUN_CONTEXT_KEYS = ("experiment_id", "grid_point", "chunk")


def configure_logging(level: str = "INFO", json_logs: bool = True) -> None:
    """Configure structlog for the lab.

    Sets up structlog processors for timestamps, log levels, callsite
    parameters and exception rendering, and routes everything through the
    standard library logging module so that pytest's caplog sees records.

    Args:
        level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        json_logs: If True, use JSONRenderer; if False, use ConsoleRenderer

    Raises:
        ValueError: If an invalid log level is provided
    """
    numeric_level = getattr(logging, level.upper(), None)
    if not isinstance(numeric_level, int):
        msg = f"Invalid log level: {level}"
        raise ValueError(msg)

    # Experiment output goes to files; logs go to stderr so stdout stays pipeable
    logging.basicConfig(
        format="%(message)s",
        stream=sys.stderr,
        level=numeric_level,
    )
    logging.getLogger().setLevel(numeric_level)

    processors: list[Any] = [
        structlog.stdlib.add_log_level,
        structlog.processors.TimeStamper(fmt="iso"),
        structlog.processors.CallsiteParameterAdder(
            parameters=[
                structlog.processors.CallsiteParameter.MODULE,
                structlog.processors.CallsiteParameter.FUNC_NAME,
                structlog.processors.CallsiteParameter.LINENO,
            ],
        ),
        structlog.processors.StackInfoRenderer(),
        structlog.processors.format_exc_info,
        structlog.contextvars.merge_contextvars,
    ]

    if json_logs:
        processors.append(structlog.processors.JSONRenderer())
    else:
        processors.append(
            structlog.dev.ConsoleRenderer(
                colors=True,
                exception_formatter=structlog.dev.plain_traceback,
            ),
        )

    # Allows switching between JSON and console output within one process
    structlog.reset_defaults()

    structlog.configure(
        processors=processors,
        wrapper_class=structlog.stdlib.BoundLogger,
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        cache_logger_on_first_use=True,
    )


def get_logger(name: str | None = None) -> structlog.stdlib.BoundLogger:
    """Get a configured structlog logger.

    Args:
        name: Logger name (typically __name__ of the calling module)

    Returns:
        A configured structlog BoundLogger instance
    """
    return structlog.get_logger(name)


def bind_run_context(**ids: Any) -> None:
    """Attach experiment identifiers to every subsequent log line.

    Typical keys are ``experiment_id``, ``grid_point`` and ``chunk``; any
    keyword is accepted.

    Args:
        **ids: Identifiers describing the run currently executing

    Example:
        >>> bind_run_context(experiment_id="advantage", grid_point="k=64", chunk=3)
        >>> logger.info("chunk_started")  # carries all three fields
    """
    structlog.contextvars.bind_contextvars(**ids)


def unbind_run_context(*keys: str) -> None:
    """Remove run identifiers from the logging context.

    Args:
        *keys: Names to remove; defaults to the standard run-context keys
    """
    structlog.contextvars.unbind_contextvars(*(keys or RUN_CONTEXT_KEYS))


def clear_context() -> None:
    """Clear all context variables from the logging context."""
    structlog.contextvars.clear_contextvars()
