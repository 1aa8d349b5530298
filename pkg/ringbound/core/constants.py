"""
Dimensional Constants
Area of the unit sphere and volume of the unit ball in R^n
"""

import math
from functools import lru_cache

from scipy.special import gamma

from ringbound.exceptions import ValidationError


def _check_dimension(n: int) -> int:
    if int(n) != n or n < 2:
        raise ValidationError(f"dimension n must be an integer >= 2, got {n}")
    return int(n)


@lru_cache(maxsize=None)
def unit_sphere_area(n: int) -> float:
    """
    Area of the unit sphere S^{n-1} in R^n.

    Args:
        n: Dimension (>= 2)

    Returns:
        2 pi^{n/2} / Gamma(n/2)
    """
    n = _check_dimension(n)
    return float(2.0 * math.pi ** (n / 2.0) / gamma(n / 2.0))


@lru_cache(maxsize=None)
def unit_ball_volume(n: int) -> float:
    """Volume of the unit ball in R^n, pi^{n/2} / Gamma(n/2 + 1)."""
    n = _check_dimension(n)
    return float(math.pi ** (n / 2.0) / gamma(n / 2.0 + 1.0))
