"""Exceptions shared across the lab.

Each exception keeps its message on ``.message`` so callers and log
processors can read it without parsing ``str(exc)``.
"""

from typing import Any


class InputError(ValueError):
    """Raised when an operation's precondition is violated by its inputs.

    Examples are dimension mismatches, ``k > n``, ε outside [0, 1/2),
    ragged CSV rows or non-finite coordinates.
    """

    def __init__(self, message: str):
        """Initialize the exception with a descriptive message.

        Args:
            message: Description of the invalid input
        """
        super().__init__(message)
        self.message = message


class DegenerateInstanceError(InputError):
    """Raised when D²-sampling is requested from an instance of zero total cost."""


class AdversaryViolationError(RuntimeError):
    """Raised when a policy steps outside the constraints of the noise model.

    Attributes:
        message: Description of the violation
        details: Structured information about the offending round/element
    """

    def __init__(self, message: str, details: dict[str, Any] | None = None):
        """Initialize the exception.

        Args:
            message: Description of the violation
            details: Structured violation details (round, index, bounds, ...)
        """
        super().__init__(message)
        self.message = message
        self.details = details or {}


class PolicySpecError(ValueError):
    """Raised when a scripted policy file cannot be parsed or validated.

    The message locates the problem: ``line L col C`` for JSON syntax
    errors, or the dotted field path for schema errors.
    """

    def __init__(self, message: str):
        """Initialize the exception with a located message."""
        super().__init__(message)
        self.message = message


class BoundViolationError(RuntimeError):
    """Raised when a deterministic bound fails on a simulated trace.

    The bounds checked this way hold for every trace, so a violation means a
    bug in the simulator or in the transcription of the bound.
    """

    def __init__(self, message: str, details: dict[str, Any] | None = None):
        """Initialize the exception.

        Args:
            message: Description of the counterexample
            details: Round, observed average and limit of the counterexample
        """
        super().__init__(message)
        self.message = message
        self.details = details or {}
