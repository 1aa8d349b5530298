"""
ringbound - ring-integral capacity bounds and equicontinuity certificates
"""

__version__ = "0.1.0"
__author__ = "Your Name"
__license__ = "MIT"

from ringbound.core.toolkit import RingBound
from ringbound.models.geometry import (
    Annulus,
    Ball,
    Box,
    Condenser,
    DimensionalConstants,
    Exponents,
    RingCondenser,
    Segment,
)

__all__ = [
    "RingBound",
    "Annulus",
    "Ball",
    "Box",
    "Condenser",
    "DimensionalConstants",
    "Exponents",
    "RingCondenser",
    "Segment",
]
