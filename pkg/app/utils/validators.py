"""Input validation for physics parameters, momentum grids and CLI selectors

Every check raises DomainError and returns the cleaned value on success.
"""
import math
import re
from typing import Iterable, Sequence, Tuple

import numpy as np

from app.utils.errors import DomainError

_ELL_RANGE = re.compile(r'^\s*(\d+)\s*\.\.\s*(\d+)\s*$')


def validate_ell(ell, minimum: int = 0) -> int:
    """
    Validate a family index.

    Args:
        ell: Candidate index (int, or a float with integral value)
        minimum: Smallest accepted value

    Returns:
        ell as int

    Raises:
        DomainError: If ell is negative, non-integral or below minimum
    """
    if isinstance(ell, bool):
        raise DomainError(f"ell must be an integer, got {ell!r}")
    if isinstance(ell, (int, np.integer)):
        value = int(ell)
    elif isinstance(ell, (float, np.floating)) and math.isfinite(ell) and float(ell).is_integer():
        value = int(ell)
    else:
        raise DomainError(f"ell must be a nonnegative integer, got {ell!r}")
    if value < minimum:
        raise DomainError(f"ell must be >= {minimum}, got {value}")
    return value


def validate_finite(value, name: str = "value") -> float:
    """Reject NaN and infinities"""
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise DomainError(f"{name} must be a real number, got {value!r}")
    if not math.isfinite(number):
        raise DomainError(f"{name} must be finite, got {value!r}")
    return number


def validate_positive(value, name: str = "value") -> float:
    number = validate_finite(value, name)
    if number <= 0.0:
        raise DomainError(f"{name} must be > 0, got {number}")
    return number


def validate_k_grid(ks: Iterable[float], min_samples: int = 1) -> np.ndarray:
    """
    Validate a momentum grid: finite, strictly positive, strictly increasing.

    Returns:
        The grid as a float64 array
    """
    grid = np.asarray(list(ks), dtype=float)
    if grid.ndim != 1 or grid.size < min_samples:
        raise DomainError(f"k grid needs at least {min_samples} samples, got {grid.size}")
    if not np.all(np.isfinite(grid)):
        raise DomainError("k grid contains non-finite values")
    if np.any(grid <= 0.0):
        raise DomainError("k grid must be strictly positive (k=0 is handled by extrapolation)")
    if np.any(np.diff(grid) <= 0.0):
        raise DomainError("k grid must be strictly increasing")
    return grid


def parse_ell_range(text: str) -> Tuple[int, ...]:
    """
    Parse "A..B" into the inclusive tuple (A, A+1, ..., B).

    Example:
        parse_ell_range("0..2")  # (0, 1, 2)
    """
    match = _ELL_RANGE.match(text or "")
    if not match:
        raise DomainError(f"ell range must look like 'A..B', got {text!r}")
    start, stop = int(match.group(1)), int(match.group(2))
    if stop < start:
        raise DomainError(f"ell range end {stop} is below its start {start}")
    return tuple(range(start, stop + 1))


def validate_choice(value: str, choices: Sequence[str], name: str = "value") -> str:
    if value not in choices:
        raise DomainError(f"{name} must be one of {', '.join(choices)}; got {value!r}")
    return value
