"""
Shared fixtures for the ringbound test suite
"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Add parent directory to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from ringbound import RingBound
from ringbound.models.fields import ConstantField, LogPowerField
from ringbound.models.gauges import ExponentialGauge, PowerGauge
from ringbound.models.geometry import Ball, Exponents, RingCondenser

E = math.e


@pytest.fixture
def rb():
    """Toolkit with the default tolerance profile"""
    return RingBound(profile="default", seed=0)


@pytest.fixture
def fast_rb():
    """Toolkit with the fast tolerance profile"""
    return RingBound(profile="fast", seed=0)


@pytest.fixture
def exp_gauge():
    return ExponentialGauge()


@pytest.fixture
def power_gauge():
    return PowerGauge(alpha=2.0)


@pytest.fixture
def plane():
    """Conformal exponents in the plane"""
    return Exponents(n=2, p=2)


@pytest.fixture
def unit_disk():
    return Ball((0.0, 0.0), 1.0)


@pytest.fixture
def plane_ring():
    """The ring (1, e) about the origin"""
    return RingCondenser((0.0, 0.0), 1.0, E)


@pytest.fixture
def identity_field():
    return ConstantField(1.0)


@pytest.fixture
def log_field():
    return LogPowerField(power=1.0, center=(0.0, 0.0))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def orlicz_budget():
    """M0 = pi / 8: with Phi = exp, n = p = 2, r0 = 1, x0 = 0 the lower limit is tau = e"""
    return math.pi / 8.0
