"""
Extended Nonnegative Values
The three infinity conventions used throughout: a/inf = 0, a/0 = inf for a > 0,
and 0/0 = 0 (the quotient form of 0 * inf = 0).

Infinity is the platform float infinity; nothing else is special-cased.
"""

import math
from typing import Union

from ringbound.exceptions import ValidationError

INF = math.inf

ExtendedNonneg = float
Number = Union[int, float]


def as_extended(value: Number, name: str = "value") -> float:
    """
    Validate and coerce a value in [0, inf].

    Args:
        value: Candidate value
        name: Parameter name used in the error message

    Returns:
        The value as a float

    Raises:
        ValidationError: If the value is negative or NaN
    """
    value = float(value)
    if math.isnan(value) or value < 0.0:
        raise ValidationError(f"{name} must lie in [0, inf], got {value}")
    return value


def ext_div(a: Number, b: Number) -> float:
    """
    Divide two extended nonnegative values.

    Args:
        a: Numerator in [0, inf]
        b: Denominator in [0, inf]

    Returns:
        a / b with a/inf = 0 (finite a), a/0 = inf (a > 0), 0/0 = 0

    Raises:
        ValidationError: For inf / inf, which is left undefined
    """
    a = as_extended(a, "numerator")
    b = as_extended(b, "denominator")
    if math.isinf(b):
        if math.isinf(a):
            raise ValidationError("inf / inf is undefined")
        return 0.0
    if b == 0.0:
        return INF if a > 0.0 else 0.0
    return a / b


def ext_pow(value: Number, exponent: float) -> float:
    """Raise an extended value to a positive power (inf stays inf, 0 stays 0)."""
    value = as_extended(value)
    if exponent <= 0:
        raise ValidationError(f"exponent must be positive, got {exponent}")
    if math.isinf(value):
        return INF
    return value ** exponent
