"""
Validation helpers for varstring.

Arguments coming from users (CLI flags, config files, library calls) pass
through these before they reach an engine.
"""

import math
from typing import Any, Optional

from .errors import ParameterError


def validate_number(value: Any, min_value: Optional[float] = None,
                    max_value: Optional[float] = None, name: str = "value") -> float:
    """
    Validate a finite real number.

    Args:
        value: Value to validate (numbers or numeric strings)
        min_value: Optional inclusive minimum
        max_value: Optional inclusive maximum
        name: Name of the value for error messages

    Returns:
        The value as a float

    Raises:
        ParameterError: If the value is not a finite number or out of range
    """
    try:
        num = float(value)
    except (ValueError, TypeError):
        raise ParameterError(f"Invalid number for {name}: {value!r}")

    if not math.isfinite(num):
        raise ParameterError(f"{name} must be finite, got {value!r}")
    if min_value is not None and num < min_value:
        raise ParameterError(f"{name} must be at least {min_value}, got {num}")
    if max_value is not None and num > max_value:
        raise ParameterError(f"{name} must be at most {max_value}, got {num}")
    return num


def validate_positive(value: Any, name: str = "value") -> float:
    """Validate a strictly positive finite number."""
    num = validate_number(value, name=name)
    if num <= 0.0:
        raise ParameterError(f"{name} must be positive, got {num}")
    return num


def validate_index(value: Any, min_value: int = 1, name: str = "n") -> int:
    """
    Validate an integer index such as a mode number or a basis size.

    Floats with an integral value are accepted, so values read from JSON or
    the command line work unchanged.
    """
    if isinstance(value, bool):
        raise ParameterError(f"{name} must be an integer, got {value!r}")
    try:
        num = float(value)
    except (ValueError, TypeError):
        raise ParameterError(f"Invalid integer for {name}: {value!r}")
    if not num.is_integer():
        raise ParameterError(f"{name} must be an integer, got {value!r}")
    idx = int(num)
    if idx < min_value:
        raise ParameterError(f"{name} must be at least {min_value}, got {idx}")
    return idx


def validate_even(value: Any, min_value: int = 2, name: str = "N") -> int:
    """Validate an even integer."""
    idx = validate_index(value, min_value=min_value, name=name)
    if idx % 2:
        raise ParameterError(f"{name} must be even, got {idx}")
    return idx


def validate_odd_order(value: Any, max_order: int, name: str = "order") -> int:
    """Validate an odd derivative order 1 <= order <= max_order."""
    idx = validate_index(value, min_value=1, name=name)
    if idx % 2 == 0 or idx > max_order:
        raise ParameterError(f"{name} must be odd and at most {max_order}, got {idx}")
    return idx
