"""Utility modules for the Levinson workbench"""
from app.utils.cache import (
    get_cache,
    cached,
)

from app.utils.validators import (
    validate_ell,
    validate_finite,
    validate_positive,
    validate_k_grid,
    parse_ell_range,
    validate_choice,
)

from app.utils.errors import (
    ErrorCategory,
    WorkbenchError,
    DomainError,
    UsageError,
    PreconditionError,
    ResolutionError,
    ToleranceError,
    ConsistencyError,
    DegenerateInputError,
    InvalidCensusError,
    OutputError,
    create_error_response,
    log_and_return_error,
)

__all__ = [
    # Cache
    'get_cache',
    'cached',
    # Validators
    'validate_ell',
    'validate_finite',
    'validate_positive',
    'validate_k_grid',
    'parse_ell_range',
    'validate_choice',
    # Error Handling
    'ErrorCategory',
    'WorkbenchError',
    'DomainError',
    'UsageError',
    'PreconditionError',
    'ResolutionError',
    'ToleranceError',
    'ConsistencyError',
    'DegenerateInputError',
    'InvalidCensusError',
    'OutputError',
    'create_error_response',
    'log_and_return_error',
]
