"""
Unit tests for the chordal metric

Run with: pytest tests/test_chordal.py -v
"""

import math

import numpy as np
import pytest

from ringbound.core.chordal import (
    POINT_AT_INFINITY,
    chordal_diameter,
    chordal_distance,
    chordal_set_distance,
    is_infinity,
)
from ringbound.exceptions import ValidationError


def _random_extended(rng, count, n=3, inf_share=0.05):
    points = []
    for _ in range(count):
        if rng.random() < inf_share:
            points.append(POINT_AT_INFINITY)
        else:
            # wide scale spread so both tiny and huge points show up
            points.append(rng.standard_normal(n) * 10.0 ** rng.uniform(-3, 3))
    return points


class TestChordalDistance:
    """Tests for chordal_distance"""

    def test_origin_to_infinity_is_one(self):
        assert chordal_distance((0.0, 0.0), POINT_AT_INFINITY) == pytest.approx(1.0)

    def test_infinity_to_itself_is_zero(self):
        assert chordal_distance(POINT_AT_INFINITY, POINT_AT_INFINITY) == 0.0

    def test_unit_points_antipodal(self):
        # stereographic images of (1, 0) and (-1, 0) are antipodal on the equator
        assert chordal_distance((1.0, 0.0), (-1.0, 0.0)) == pytest.approx(1.0)

    def test_closed_form(self):
        x, y = np.array([1.0, 2.0]), np.array([-0.5, 0.25])
        expected = np.linalg.norm(x - y) / math.sqrt((1 + x @ x) * (1 + y @ y))
        assert chordal_distance(x, y) == pytest.approx(expected, rel=1e-14)

    def test_point_to_infinity(self):
        assert chordal_distance(POINT_AT_INFINITY, (3.0, 4.0)) == pytest.approx(1 / math.sqrt(26))

    def test_dimension_mismatch_raises(self):
        with pytest.raises(ValidationError):
            chordal_distance((1.0, 0.0), (1.0, 0.0, 0.0))

    def test_non_finite_coordinates_raise(self):
        with pytest.raises(ValidationError):
            chordal_distance((math.inf, 0.0), (0.0, 0.0))

    def test_singleton(self):
        assert is_infinity(POINT_AT_INFINITY)
        assert not is_infinity((0.0, 0.0))


class TestMetricAxioms:
    """Metric properties on random extended samples"""

    def test_symmetry_exact(self, rng):
        pts = _random_extended(rng, 400)
        for x, y in zip(pts[::2], pts[1::2]):
            assert chordal_distance(x, y) == chordal_distance(y, x)

    def test_triangle_inequality(self, rng):
        pts = _random_extended(rng, 30000)
        for k in range(0, 30000, 3):
            x, y, z = pts[k], pts[k + 1], pts[k + 2]
            assert chordal_distance(x, z) <= (
                chordal_distance(x, y) + chordal_distance(y, z) + 1e-12
            )

    def test_bounded_by_one(self, rng):
        pts = _random_extended(rng, 2000)
        values = [chordal_distance(x, y) for x, y in zip(pts[::2], pts[1::2])]
        assert max(values) <= 1.0
        assert min(values) >= 0.0


class TestChordalDiameter:
    """Tests for chordal_diameter and chordal_set_distance"""

    def test_single_point(self):
        assert chordal_diameter([(1.0, 1.0)]) == 0.0

    def test_matches_pairwise_maximum(self, rng):
        pts = _random_extended(rng, 60, n=2)
        brute = max(chordal_distance(a, b) for a in pts for b in pts)
        assert chordal_diameter(pts) == pytest.approx(brute, rel=1e-12, abs=1e-15)

    def test_at_most_one(self, rng):
        pts = _random_extended(rng, 200, inf_share=0.2)
        assert chordal_diameter(pts) <= 1.0

    def test_empty_sample_raises(self):
        with pytest.raises(ValidationError):
            chordal_diameter([])

    def test_set_distance_matches_brute_force(self, rng):
        a = _random_extended(rng, 25, n=2)
        b = _random_extended(rng, 25, n=2) + [POINT_AT_INFINITY]
        brute = min(chordal_distance(x, y) for x in a for y in b)
        assert chordal_set_distance(a, b) == pytest.approx(brute, rel=1e-12, abs=1e-15)

    def test_set_distance_zero_when_sharing_infinity(self):
        assert chordal_set_distance([POINT_AT_INFINITY], [(0.0, 1.0), POINT_AT_INFINITY]) == 0.0
