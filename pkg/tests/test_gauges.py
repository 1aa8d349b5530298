"""
Unit tests for the Orlicz gauge catalog

Run with: pytest tests/test_gauges.py -v
"""

import math

import numpy as np
import pytest

from ringbound.exceptions import ValidationError
from ringbound.models.gauges import (
    ExponentialGauge,
    PowerExponentialGauge,
    PowerGauge,
    TabulatedGauge,
)

CATALOG = [ExponentialGauge(), PowerExponentialGauge(beta=1.5), PowerGauge(alpha=3.0)]


class TestCatalogGauges:
    """Tests for the analytic gauges"""

    @pytest.mark.parametrize("gauge", CATALOG, ids=lambda g: g.kind)
    def test_inverse_undoes_phi(self, gauge):
        for t in np.linspace(0.0, 50.0, 101):
            assert gauge.inverse(float(gauge.phi(np.array([t]))[0])) == pytest.approx(
                t, abs=1e-8, rel=1e-10
            )

    @pytest.mark.parametrize("gauge", CATALOG, ids=lambda g: g.kind)
    def test_phi0(self, gauge):
        assert gauge.phi0 == 1.0

    @pytest.mark.parametrize("gauge", CATALOG, ids=lambda g: g.kind)
    def test_log_inverse_matches_inverse(self, gauge):
        for u in (0.5, 3.0, 20.0):
            assert gauge.log_inverse(u) == pytest.approx(gauge.inverse(math.exp(u)), rel=1e-12)

    def test_log_inverse_beyond_float_range(self):
        assert ExponentialGauge().log_inverse(1e5) == 1e5
        assert PowerExponentialGauge(beta=2.0).log_inverse(1e4) == pytest.approx(100.0)

    def test_exp_verdicts(self):
        gauge = ExponentialGauge()
        assert gauge.divergence_verdict(1.0) is True
        assert gauge.divergence_verdict(1.01) is False

    def test_power_exponential_verdict_scales_with_beta(self):
        gauge = PowerExponentialGauge(beta=2.0)
        assert gauge.divergence_verdict(2.0) is True
        assert gauge.divergence_verdict(2.5) is False

    def test_power_gauge_never_diverges(self):
        assert PowerGauge(alpha=1.0).divergence_verdict(0.01) is False

    @pytest.mark.parametrize(
        "factory",
        [lambda: PowerExponentialGauge(beta=0.5), lambda: PowerGauge(alpha=0.9)],
    )
    def test_non_convex_parameters_rejected(self, factory):
        with pytest.raises(ValidationError):
            factory()


class TestTabulatedGauge:
    """Tests for tabulated gauges"""

    def test_piecewise_linear_and_extrapolation(self):
        gauge = TabulatedGauge(t=[0.0, 1.0, 2.0], values=[1.0, 2.0, 4.0])
        assert float(gauge(1.5)) == pytest.approx(3.0)
        assert float(gauge(3.0)) == pytest.approx(6.0)

    def test_inverse_by_bisection(self):
        gauge = TabulatedGauge(t=[0.0, 1.0, 2.0], values=[1.0, 2.0, 4.0])
        assert gauge.inverse(3.0) == pytest.approx(1.5, rel=1e-9)
        assert gauge.inverse(10.0) == pytest.approx(5.0, rel=1e-9)
        assert gauge.inverse(1.0) == 0.0

    def test_inverse_below_phi0_raises(self):
        gauge = TabulatedGauge(t=[0.0, 1.0], values=[1.0, 2.0])
        with pytest.raises(ValidationError):
            gauge.inverse(0.5)

    @pytest.mark.parametrize(
        "t, values, message",
        [
            ([0.0, 1.0, 2.0], [1.0, 3.0, 4.0], "convex"),
            ([0.0, 1.0, 2.0], [1.0, 1.0, 4.0], "increasing"),
            ([0.5, 1.0], [1.0, 2.0], "t = 0"),
            ([0.0, 1.0], [-1.0, 2.0], "Phi\\(0\\)"),
        ],
    )
    def test_invalid_tables(self, t, values, message):
        with pytest.raises(ValidationError, match=message):
            TabulatedGauge(t=t, values=values)

    def test_sampled_exponential_tracks_closed_form(self):
        gauge = TabulatedGauge.sample(ExponentialGauge(), t_max=4.0, count=4001)
        assert float(gauge(2.5)) == pytest.approx(math.exp(2.5), rel=1e-6)
        assert gauge.divergence_verdict(1.0) is None
