"""Structured error handling for the Levinson workbench.

Provides:
- Error categories mapped to CLI exit codes
- Actionable suggestions per category
- Structured error responses for the CLI and the tool server
"""
import json
import logging
from enum import Enum
from typing import Any, Dict, List, Optional

logger = logging.getLogger(__name__)


class ErrorCategory(Enum):
    """Categories of workbench errors"""
    DOMAIN = "domain"
    PRECONDITION = "precondition"
    RESOLUTION = "resolution"
    TOLERANCE = "tolerance"
    CONSISTENCY = "consistency"
    DEGENERATE_INPUT = "degenerate_input"
    INVALID_CENSUS = "invalid_census"
    IO = "io"
    USAGE = "usage"
    UNKNOWN = "unknown"


# Exit codes: 0 success, 2 usage, 3 solver/consistency, 4 I/O
EXIT_CODES: Dict[ErrorCategory, int] = {
    ErrorCategory.DOMAIN: 2,
    ErrorCategory.USAGE: 2,
    ErrorCategory.PRECONDITION: 3,
    ErrorCategory.RESOLUTION: 3,
    ErrorCategory.TOLERANCE: 3,
    ErrorCategory.CONSISTENCY: 3,
    ErrorCategory.DEGENERATE_INPUT: 3,
    ErrorCategory.INVALID_CENSUS: 3,
    ErrorCategory.IO: 4,
    ErrorCategory.UNKNOWN: 1,
}


# =============================================================================
# SUGGESTIONS PER CATEGORY
# =============================================================================

ERROR_SUGGESTIONS: Dict[ErrorCategory, List[str]] = {
    ErrorCategory.DOMAIN: [
        "Check that ell is a nonnegative integer",
        "Momenta must be strictly positive; use phase_shift_zero for k=0",
        "Coordinates and parameters must be finite numbers",
    ],
    ErrorCategory.PRECONDITION: [
        "Parity-resolved solvers need a symmetric potential",
        "The potential must decay faster than 1/x^2 (decay check)",
        "Increase --x-max if the potential is not negligible at the box edge",
    ],
    ErrorCategory.RESOLUTION: [
        "Use a denser k-grid (more --k-steps) so adjacent phases differ by less than pi/2",
        "Raise energy_mesh so that each cell holds at most one bound state",
        "Reduce --step for sharper potentials",
    ],
    ErrorCategory.TOLERANCE: [
        "Refine the sampling grid before applying derivative operators",
        "Supply an analytic derivative when one is available",
    ],
    ErrorCategory.CONSISTENCY: [
        "Analytic and numeric results disagree: this indicates a solver bug",
        "Re-run with --log-level DEBUG and compare censuses",
    ],
    ErrorCategory.DEGENERATE_INPUT: [
        "The zero-energy solution vanished identically; check the initial conditions",
    ],
    ErrorCategory.INVALID_CENSUS: [
        "At most one parity sector can be critical for a symmetric potential",
    ],
    ErrorCategory.IO: [
        "Check that the output directory exists and is writable",
        "Check the CSV header is exactly 'x,v'",
    ],
    ErrorCategory.USAGE: [
        "Run with --help to list the accepted flags",
    ],
    ErrorCategory.UNKNOWN: [
        "Re-run with --log-level DEBUG for a traceback",
    ],
}


class WorkbenchError(Exception):
    """Base error carrying a category, suggestions and context"""

    category: ErrorCategory = ErrorCategory.UNKNOWN

    def __init__(
        self,
        message: str,
        suggestions: Optional[List[str]] = None,
        context: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message)
        self.message = message
        self.suggestions = suggestions if suggestions is not None else list(
            ERROR_SUGGESTIONS.get(self.category, [])
        )
        self.context = context or {}

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.category]

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON response"""
        return {
            "error": self.message,
            "category": self.category.value,
            "exit_code": self.exit_code,
            "suggestions": self.suggestions,
            "context": self.context,
        }

    def to_json(self) -> str:
        """Convert to JSON string"""
        return json.dumps(self.to_dict(), indent=2, default=str)


class DomainError(WorkbenchError, ValueError):
    """Input outside the mathematical domain of an operation"""
    category = ErrorCategory.DOMAIN


class UsageError(WorkbenchError):
    """Malformed command line or configuration file"""
    category = ErrorCategory.USAGE


class PreconditionError(WorkbenchError):
    """Operation requires a property the input lacks (symmetry, decay)"""
    category = ErrorCategory.PRECONDITION


class ResolutionError(WorkbenchError):
    """Grid, mesh or k-sampling too coarse for a trustworthy answer"""
    category = ErrorCategory.RESOLUTION


class ToleranceError(WorkbenchError):
    """Requested accuracy cannot be met on the supplied grid"""
    category = ErrorCategory.TOLERANCE


class ConsistencyError(WorkbenchError):
    """Independent routes disagree; a solver bug, not physics"""
    category = ErrorCategory.CONSISTENCY


class DegenerateInputError(WorkbenchError):
    """Identically vanishing solution"""
    category = ErrorCategory.DEGENERATE_INPUT


class InvalidCensusError(WorkbenchError):
    """Bound-state census that no symmetric potential can produce"""
    category = ErrorCategory.INVALID_CENSUS


class OutputError(WorkbenchError):
    """Unreadable input file or unwritable output"""
    category = ErrorCategory.IO


# =============================================================================
# ERROR RESPONSES
# =============================================================================

def as_workbench_error(error: Exception) -> WorkbenchError:
    """Wrap foreign exceptions so every error has a category"""
    if isinstance(error, WorkbenchError):
        return error
    if isinstance(error, OSError):
        return OutputError(str(error), context={"type": type(error).__name__})
    wrapped = WorkbenchError(f"An error occurred: {error}")
    wrapped.context["type"] = type(error).__name__
    return wrapped


def create_error_response(
    error: Exception,
    context: Optional[Dict[str, Any]] = None,
    include_suggestions: bool = True,
) -> str:
    """
    Create a standardized JSON error response with suggestions.

    Args:
        error: The exception that occurred
        context: Optional extra context merged into the response
        include_suggestions: Whether to include suggestions

    Returns:
        JSON string with error details
    """
    enhanced = as_workbench_error(error)
    response: Dict[str, Any] = {
        "success": False,
        "error": enhanced.message,
        "category": enhanced.category.value,
    }
    if include_suggestions and enhanced.suggestions:
        response["suggestions"] = enhanced.suggestions
    merged = {**enhanced.context, **(context or {})}
    if merged:
        response["context"] = merged
    return json.dumps(response, indent=2, default=str)


def log_and_return_error(
    error: Exception,
    operation: str,
    context: Optional[Dict[str, Any]] = None,
    log_level: str = "error",
) -> str:
    """
    Log error with context and return the structured error response.

    Args:
        error: The exception that occurred
        operation: Name of the operation that failed
        context: Additional context for the error
        log_level: Log level (debug, info, warning, error, critical)

    Returns:
        JSON error response string
    """
    log_func = getattr(logger, log_level, logger.error)
    log_func(
        f"Error in {operation}: {error}",
        exc_info=not isinstance(error, WorkbenchError),
        extra={"operation": operation, "context": context},
    )
    return create_error_response(error, context=context)
