"""
Unit tests for tolerance profiles and the toolkit base

Run with: pytest tests/test_base.py -v
"""

import math
import os
import time
from unittest.mock import patch

import numpy as np
import pytest

from ringbound import RingBound
from ringbound.core.base import PROFILE_ENV_VAR, PROFILES, ToleranceProfile, resolve_profile
from ringbound.exceptions import NumericalFailure, RingBoundError, ValidationError
from ringbound.models.geometry import Ball


class TestProfiles:
    """Tests for resolve_profile and with_overrides"""

    def test_explicit_name(self):
        assert resolve_profile("strict").name == "strict"

    def test_instance_passes_through(self):
        custom = ToleranceProfile(name="custom", radial_rtol=1e-5)
        assert resolve_profile(custom) is custom

    def test_environment_variable(self):
        with patch("ringbound.core.base.load_dotenv") as mock_dotenv:
            with patch.dict(os.environ, {PROFILE_ENV_VAR: "fast"}):
                assert resolve_profile().name == "fast"
            mock_dotenv.assert_called_once()

    def test_default_without_environment(self):
        with patch("ringbound.core.base.load_dotenv"):
            with patch.dict(os.environ, {}, clear=True):
                assert resolve_profile() is PROFILES["default"]

    def test_unknown_profile(self):
        with pytest.raises(ValidationError, match="profile must be one of"):
            resolve_profile("turbo")

    def test_overrides_coerce_types(self):
        profile = PROFILES["default"].with_overrides({"points_per_decade": "32",
                                                      "radial_rtol": 1e-6})
        assert profile.points_per_decade == 32
        assert profile.radial_rtol == 1e-6
        assert PROFILES["default"].points_per_decade == 64

    def test_unknown_override(self):
        with pytest.raises(ValidationError, match="unknown tolerance key"):
            PROFILES["default"].with_overrides({"speed": 1})

    def test_profiles_order_by_accuracy(self):
        fast, default, strict = PROFILES["fast"], PROFILES["default"], PROFILES["strict"]
        assert fast.radial_rtol > default.radial_rtol > strict.radial_rtol
        assert fast.points_per_decade < default.points_per_decade < strict.points_per_decade


class TestToolkitBase:
    """Tests for the shared toolkit plumbing"""

    def test_jobs_must_be_positive(self):
        with pytest.raises(ValidationError, match="jobs"):
            RingBound(jobs=0)

    def test_map_keeps_input_order(self):
        rb = RingBound(profile="fast", jobs=4)

        def slow_square(k):
            time.sleep(0.001 * (5 - k))
            return k * k

        assert rb._map(slow_square, range(5)) == [0, 1, 4, 9, 16]

    def test_sphere_rule_cached(self):
        rb = RingBound(profile="fast")
        assert rb.sphere_quadrature(3) is rb.sphere_quadrature(3)
        assert rb.sphere_quadrature(2).nodes.shape[0] == PROFILES["fast"].sphere_nodes_2d

    @pytest.mark.parametrize("n", [2, 3])
    def test_cross_check_rule_differs(self, n):
        rb = RingBound(profile="fast")
        main, cross = rb.sphere_quadrature(n), rb.cross_check_quadrature(n)
        assert cross is rb.cross_check_quadrature(n)
        assert cross.scheme == main.scheme
        assert cross.node_count > main.node_count
        assert cross.weights.sum() == pytest.approx(main.weights.sum())

    def test_cross_check_monte_carlo_reseeds(self):
        rb = RingBound(profile="fast", seed=3)
        main, cross = rb.sphere_quadrature(5), rb.cross_check_quadrature(5)
        assert cross.seed == 4
        assert not np.array_equal(main.nodes, cross.nodes)

    def test_sobol_domain_integral_in_four_dimensions(self):
        rb = RingBound(profile="fast", seed=7)
        ball = Ball((0.0,) * 4, 1.0)
        result = rb._domain_integral(lambda pts: np.ones(len(pts)), ball)
        # volume of the unit 4-ball
        assert result.value == pytest.approx(math.pi ** 2 / 2, rel=1e-2)

    def test_error_hierarchy(self):
        assert issubclass(ValidationError, ValueError)
        assert issubclass(NumericalFailure, RuntimeError)
        assert issubclass(ValidationError, RingBoundError)
