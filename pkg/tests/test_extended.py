"""
Unit tests for the infinity conventions and dimensional constants

Run with: pytest tests/test_extended.py -v
"""

import math

import pytest

from ringbound.core.constants import unit_ball_volume, unit_sphere_area
from ringbound.core.extended import INF, as_extended, ext_div, ext_pow
from ringbound.exceptions import ValidationError
from ringbound.models.geometry import DimensionalConstants


class TestExtDiv:
    """Tests for ext_div"""

    def test_finite_over_infinity_is_zero(self):
        assert ext_div(5.0, INF) == 0.0

    def test_positive_over_zero_is_infinity(self):
        assert ext_div(2.0, 0.0) == INF

    def test_zero_over_zero_is_zero(self):
        assert ext_div(0.0, 0.0) == 0.0

    def test_infinity_over_finite(self):
        assert ext_div(INF, 3.0) == INF

    def test_ordinary_quotient(self):
        assert ext_div(1.0, 4.0) == 0.25

    def test_infinity_over_infinity_raises(self):
        with pytest.raises(ValidationError, match="undefined"):
            ext_div(INF, INF)

    @pytest.mark.parametrize("a, b", [(-1.0, 1.0), (1.0, -2.0), (math.nan, 1.0)])
    def test_values_outside_extended_range_raise(self, a, b):
        with pytest.raises(ValueError):
            ext_div(a, b)


class TestExtPow:
    """Tests for ext_pow and as_extended"""

    def test_infinity_stays_infinite(self):
        assert ext_pow(INF, 0.5) == INF

    def test_zero_stays_zero(self):
        assert ext_pow(0.0, 3.0) == 0.0

    def test_nonpositive_exponent_raises(self):
        with pytest.raises(ValidationError):
            ext_pow(2.0, 0.0)

    def test_as_extended_names_parameter(self):
        with pytest.raises(ValidationError, match="radius"):
            as_extended(-3.0, "radius")


class TestDimensionalConstants:
    """Tests for unit_sphere_area and unit_ball_volume"""

    @pytest.mark.parametrize(
        "n, area, volume",
        [
            (2, 2 * math.pi, math.pi),
            (3, 4 * math.pi, 4 * math.pi / 3),
            (4, 2 * math.pi ** 2, math.pi ** 2 / 2),
        ],
    )
    def test_known_values(self, n, area, volume):
        assert unit_sphere_area(n) == pytest.approx(area, rel=1e-14)
        assert unit_ball_volume(n) == pytest.approx(volume, rel=1e-14)

    def test_area_is_n_times_volume(self):
        for n in range(2, 9):
            assert unit_sphere_area(n) == pytest.approx(n * unit_ball_volume(n), rel=1e-13)

    @pytest.mark.parametrize("n", [1, 0, 2.5])
    def test_invalid_dimension_raises(self, n):
        with pytest.raises(ValidationError):
            unit_sphere_area(n)

    def test_dimensional_constants_record(self):
        consts = DimensionalConstants.for_dimension(3)
        assert consts.omega == pytest.approx(4 * math.pi)
        assert consts.big_omega == pytest.approx(4 * math.pi / 3)
