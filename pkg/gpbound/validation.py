"""
Argument validation helpers for gpbound.

Declarative checks for the numeric preconditions that run through the
package: positive radii M, nonnegative multipliers, even working degrees,
solver tolerances and instance generator settings.

Example:
    from gpbound.validation import ensure, even_integer, positive

    ensure({
        "two_d": (two_d, [even_integer(), positive()]),
        "M": (M, [positive()]),
    })
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable


@dataclass
class ValidationResult:
    """Result of a validation check."""

    is_valid: bool
    message: str | None = None
    field: str | None = None

    def __bool__(self) -> bool:
        return self.is_valid


# Type alias for validator functions
Validator = Callable[[Any], ValidationResult]


def _as_float(value: Any) -> float | None:
    if isinstance(value, bool):
        return None
    try:
        return float(value)
    except (TypeError, ValueError):
        return None


# =============================================================================
# Core Validators
# =============================================================================


def finite(message: str = "Must be a finite number") -> Validator:
    """Validate that value is a finite real number."""

    def validator(value: Any) -> ValidationResult:
        num = _as_float(value)
        if num is None or not math.isfinite(num):
            return ValidationResult(False, message)
        return ValidationResult(True)

    return validator


def positive(message: str = "Must be positive") -> Validator:
    """
    Validate that value is a strictly positive number.

    Example:
        errors = validate({"M": (M, [positive()])})
    """

    def validator(value: Any) -> ValidationResult:
        num = _as_float(value)
        if num is None or not num > 0:
            return ValidationResult(False, message)
        return ValidationResult(True)

    return validator


def nonnegative(message: str = "Must be nonnegative") -> Validator:
    """Validate that value is a number >= 0."""

    def validator(value: Any) -> ValidationResult:
        num = _as_float(value)
        if num is None or not num >= 0:
            return ValidationResult(False, message)
        return ValidationResult(True)

    return validator


def at_least(minimum: int | float, message: str | None = None) -> Validator:
    """
    Validate a minimum numeric value.

    Example:
        errors = validate({"max_iterations": (k, [at_least(1)])})
    """

    def validator(value: Any) -> ValidationResult:
        msg = message or f"Must be at least {minimum}"
        num = _as_float(value)
        if num is None or num < minimum:
            return ValidationResult(False, msg)
        return ValidationResult(True)

    return validator


def integer(message: str = "Must be a whole number") -> Validator:
    """Validate that value is an integer (floats with integral value pass)."""

    def validator(value: Any) -> ValidationResult:
        if isinstance(value, bool):
            return ValidationResult(False, message)
        if isinstance(value, int):
            return ValidationResult(True)
        num = _as_float(value)
        if num is None or not math.isfinite(num) or num != int(num):
            return ValidationResult(False, message)
        return ValidationResult(True)

    return validator


def even_integer(message: str = "Must be an even integer") -> Validator:
    """Validate that value is an even integer."""
    is_int = integer(message)

    def validator(value: Any) -> ValidationResult:
        if not is_int(value):
            return ValidationResult(False, message)
        if int(value) % 2 != 0:
            return ValidationResult(False, message)
        return ValidationResult(True)

    return validator


def one_of(options: list[Any], message: str | None = None) -> Validator:
    """
    Validate that value is one of the allowed options.

    Example:
        errors = validate({"diagonal": (mode, [one_of(["unit", "none"])])})
    """

    def validator(value: Any) -> ValidationResult:
        msg = message or f"Must be one of: {', '.join(str(o) for o in options)}"
        if value not in options:
            return ValidationResult(False, msg)
        return ValidationResult(True)

    return validator


def custom(
    check: Callable[[Any], bool],
    message: str = "Validation failed",
) -> Validator:
    """
    Create a custom validator from a predicate.

    Example:
        errors = validate({
            "coeff_range": (rng, [custom(lambda r: r[0] <= r[1], "Empty range")]),
        })
    """

    def validator(value: Any) -> ValidationResult:
        try:
            if check(value):
                return ValidationResult(True)
            return ValidationResult(False, message)
        except Exception:
            return ValidationResult(False, message)

    return validator


# =============================================================================
# Main Validation Functions
# =============================================================================


def validate(
    fields: dict[str, tuple[Any, list[Validator]]],
) -> dict[str, list[str]]:
    """
    Validate multiple fields with their validators.

    Args:
        fields: Dictionary mapping field names to (value, validators) tuples

    Returns:
        Dictionary of field names to list of error messages.
        Empty dict if all validations pass.
    """
    errors: dict[str, list[str]] = {}

    for field_name, (value, validators) in fields.items():
        field_errors = []
        for validator in validators:
            result = validator(value)
            if not result.is_valid and result.message:
                field_errors.append(result.message)
        if field_errors:
            errors[field_name] = field_errors

    return errors


def ensure(fields: dict[str, tuple[Any, list[Validator]]]) -> None:
    """
    Validate fields and raise ValueError on the first failing field.

    Raises:
        ValueError: "<field>: <message>" for every failing field, joined by "; "
    """
    errors = validate(fields)
    if errors:
        detail = "; ".join(f"{name}: {messages[0]}" for name, messages in errors.items())
        raise ValueError(detail)


def is_valid(value: Any, validators: list[Validator]) -> bool:
    """Check if a value passes all validators."""
    for validator in validators:
        if not validator(value).is_valid:
            return False
    return True
