"""
Unit tests for capacity-decay and diameter certificates

Run with: pytest tests/test_certify.py -v
"""

import math

import numpy as np
import pytest

from ringbound.core.capacity import default_reference_condenser, mazya_coefficient
from ringbound.core.certify import (
    CAPACITY_DECAY,
    CHORDAL_MODULUS,
    DELTA_STEP,
    DIAMETER_BOUND,
    STAGE_ONE_FAILURE,
    RadialStretchMap,
)
from ringbound.exceptions import NumericalFailure, ValidationError
from ringbound.models.gauges import TabulatedGauge
from ringbound.models.geometry import Exponents
from ringbound.models.results import Certificate

ORIGIN2 = (0.0, 0.0)
ORIGIN3 = (0.0, 0.0, 0.0)
SPACE = Exponents(3, 2.5)
THM2_R0 = 0.5
THM2_M0 = 10.0


def plane_capacity_bound(eps):
    """2 pi / I for Phi = exp, n = p = 2, r0 = 1, M0 = pi / 8."""
    if eps >= math.exp(-0.5):
        return math.inf
    return 2 * math.pi / (0.5 * math.log(2.0 * math.log(1.0 / eps)))


def space_capacity_bound(eps, r0, M0=THM2_M0):
    """omega / I^{p-1} for Phi = exp, n = 3, p = 5/2, recomputed by hand."""
    beta = (1.0 + r0 ** 2) ** 3
    lower = max(math.log(2 * beta * M0) + 1 - math.log(4 * math.pi / 3) - 3 * math.log(r0), 1.0)
    upper = 3.0 * (math.log(r0) - math.log(eps))
    if upper <= lower:
        return math.inf
    I = upper ** (1 / 3) - lower ** (1 / 3)
    return 4 * math.pi / I ** 1.5


@pytest.fixture
def space_grid(rb):
    return rb.certificate_grid(THM2_R0, 3, decades=80, per_decade=4)


@pytest.fixture
def space_certificate(rb, exp_gauge, space_grid):
    return rb.diameter_certificate(
        exp_gauge, SPACE, THM2_M0, ORIGIN3, THM2_R0, b_n=1.0, eps_grid=space_grid
    )


class TestCapacityDecayCertificate:
    """Tests for capacity_decay_certificate"""

    @pytest.fixture
    def certificate(self, rb, exp_gauge, plane, orlicz_budget):
        grid = rb.certificate_grid(1.0, 2, decades=12, per_decade=8)
        return rb.capacity_decay_certificate(
            exp_gauge, plane, orlicz_budget, ORIGIN2, 1.0, eps_grid=grid
        )

    def test_closed_form(self, certificate):
        assert certificate.kind == CAPACITY_DECAY
        for eps, bound in certificate.rows():
            expected = plane_capacity_bound(eps)
            if math.isinf(expected):
                assert math.isinf(bound)
            else:
                assert bound == pytest.approx(expected, rel=1e-8)

    def test_empty_range_rows_are_infinite(self, certificate):
        assert math.isinf(certificate.bounds[0])
        assert certificate.finite_count == certificate.bounds.size - 1

    def test_nonincreasing_as_eps_shrinks(self, certificate):
        finite = certificate.bounds[np.isfinite(certificate.bounds)]
        assert np.all(np.diff(finite) <= 1e-12)

    def test_provenance_and_inputs(self, certificate, orlicz_budget):
        assert certificate.provenance == [
            "orlicz-integral-lower-bound", "ring-capacity-upper-bound"
        ]
        assert certificate.inputs["M0"] == orlicz_budget
        assert certificate.inputs["gauge"]["kind"] == "ExponentialGauge"
        assert not certificate.conditional
        assert certificate.status == "ok"

    def test_radii_above_top_are_infinite(self, rb, exp_gauge, plane, orlicz_budget):
        certificate = rb.capacity_decay_certificate(
            exp_gauge, plane, orlicz_budget, ORIGIN2, 1.0, eps_grid=[0.9, 0.01]
        )
        assert math.isinf(certificate.bounds[0])
        assert certificate.bounds[1] == pytest.approx(plane_capacity_bound(0.01))

    def test_all_empty_raises(self, rb, exp_gauge, plane, orlicz_budget):
        with pytest.raises(NumericalFailure, match="empty certificate"):
            rb.capacity_decay_certificate(
                exp_gauge, plane, orlicz_budget, ORIGIN2, 1.0, eps_grid=[0.68, 0.65]
            )

    def test_requires_conformal_exponents(self, rb, exp_gauge):
        with pytest.raises(ValidationError, match="p = n"):
            rb.capacity_decay_certificate(exp_gauge, SPACE, 1.0, ORIGIN3, 0.5)

    def test_undecided_divergence(self, rb, exp_gauge, plane, orlicz_budget):
        table = TabulatedGauge.sample(exp_gauge, t_max=40.0, count=4001)
        grid = [1e-2, 1e-4]
        with pytest.raises(ValidationError, match="allow_conditional"):
            rb.capacity_decay_certificate(table, plane, orlicz_budget, ORIGIN2, 1.0, eps_grid=grid)
        certificate = rb.capacity_decay_certificate(
            table, plane, orlicz_budget, ORIGIN2, 1.0, eps_grid=grid, allow_conditional=True
        )
        assert certificate.conditional

    def test_failing_divergence_rejected(self, rb, power_gauge, plane, orlicz_budget):
        with pytest.raises(ValidationError, match="fails"):
            rb.capacity_decay_certificate(power_gauge, plane, orlicz_budget, ORIGIN2, 1.0)


class TestDiameterCertificate:
    """Tests for diameter_certificate"""

    def test_stage_one_matches_hand_computation(self, space_certificate, space_grid):
        alpha = space_certificate.stages["alpha"]
        for eps, value in zip(space_grid[::16], alpha[::16]):
            expected = space_capacity_bound(float(eps), THM2_R0)
            if math.isinf(expected):
                assert math.isinf(value)
            else:
                assert value == pytest.approx(expected, rel=1e-7)

    def test_eps1_is_largest_admissible_radius(self, space_certificate, space_grid):
        c_m = mazya_coefficient(SPACE)
        admissible = [
            float(e) for e in space_grid
            if (space_capacity_bound(float(e), THM2_R0) / c_m) ** 6 <= 1.0
        ]
        assert space_certificate.inputs["eps1"] == pytest.approx(max(admissible), rel=1e-12)

    def test_final_bound_matches_hand_computation(self, space_certificate, space_grid):
        eps1 = space_certificate.inputs["eps1"]
        assert space_certificate.status == "ok"
        assert space_certificate.kind == DIAMETER_BOUND
        assert space_certificate.finite_count > 0
        for eps, value in zip(space_grid, space_certificate.bounds):
            if eps > eps1 * 2 ** (-1 / 3):
                assert math.isinf(value)
                continue
            alpha2 = space_capacity_bound(float(eps), eps1)
            expected = (alpha2 ** 2) ** 0.4 if math.isfinite(alpha2) else math.inf
            if math.isinf(expected):
                assert math.isinf(value)
            else:
                assert value == pytest.approx(expected, rel=1e-7)

    def test_b_n_scaling(self, rb, exp_gauge, space_grid, space_certificate):
        doubled = rb.diameter_certificate(
            exp_gauge, SPACE, THM2_M0, ORIGIN3, THM2_R0, b_n=2.0, eps_grid=space_grid
        )
        finite = np.isfinite(space_certificate.bounds)
        assert np.allclose(
            doubled.bounds[finite], space_certificate.bounds[finite] * 2 ** (-1 / 2.5), rtol=1e-12
        )

    def test_stage_one_failure_on_short_grid(self, rb, exp_gauge):
        certificate = rb.diameter_certificate(exp_gauge, SPACE, THM2_M0, ORIGIN3, THM2_R0)
        assert certificate.status == STAGE_ONE_FAILURE
        assert certificate.finite_count == 0
        assert certificate.notes[0].startswith("min alpha1 = ")

    def test_requires_exponents_between(self, rb, exp_gauge):
        with pytest.raises(ValidationError, match="n - 1 < p < n"):
            rb.diameter_certificate(exp_gauge, Exponents(3, 3), THM2_M0, ORIGIN3, THM2_R0)

    def test_b_n_must_be_positive(self, rb, exp_gauge):
        with pytest.raises(ValidationError, match="b_n"):
            rb.diameter_certificate(exp_gauge, SPACE, THM2_M0, ORIGIN3, THM2_R0, b_n=0.0)


class TestChordalModulus:
    """Tests for chordal_modulus_from_delta_table"""

    TABLE = [(0.1, 1.0), (0.5, 4.0), (1.0, 8.0)]

    @pytest.fixture
    def certificate(self, rb, exp_gauge, plane, orlicz_budget):
        grid = rb.certificate_grid(1.0, 2, decades=12, per_decade=8)
        return rb.capacity_decay_certificate(
            exp_gauge, plane, orlicz_budget, ORIGIN2, 1.0, eps_grid=grid
        )

    def test_smallest_admissible_a(self, rb, certificate):
        modulus = rb.chordal_modulus_from_delta_table(certificate, self.TABLE)
        assert modulus.kind == CHORDAL_MODULUS
        assert modulus.provenance[-1] == DELTA_STEP
        for bound, a in zip(certificate.bounds, modulus.bounds):
            admissible = [row_a for row_a, delta in self.TABLE if bound < delta]
            assert a == (min(admissible) if admissible else 1.0)
        assert modulus.bounds[0] == 1.0
        # 2 pi / I drops below 4 once I > pi / 2
        assert modulus.bounds[-1] == 0.5

    def test_modulus_nonincreasing(self, rb, certificate):
        modulus = rb.chordal_modulus_from_delta_table(certificate, self.TABLE)
        assert np.all(np.diff(modulus.bounds) <= 0)

    @pytest.mark.parametrize(
        "table",
        [[], [(0.0, 1.0)], [(0.5, -1.0)], [(0.1, 4.0), (0.5, 1.0)], [(1.5, 2.0)]],
    )
    def test_invalid_tables(self, rb, certificate, table):
        with pytest.raises(ValidationError):
            rb.chordal_modulus_from_delta_table(certificate, table)

    def test_requires_capacity_certificate(self, rb):
        other = Certificate(
            kind=DIAMETER_BOUND,
            inputs={},
            epsilons=np.array([0.1]),
            bounds=np.array([1.0]),
            provenance=[],
        )
        with pytest.raises(ValidationError, match="capacity-decay"):
            rb.chordal_modulus_from_delta_table(other, self.TABLE)


class TestStretchMaps:
    """Tests for the radial stretch maps and the soundness sweep"""

    def test_image_diameter(self, rb):
        stretch = rb.stretch_map(2.0)
        nodes = rb.sphere_quadrature(3).nodes
        assert stretch.image_diameter(0.1, nodes) == pytest.approx(0.02, rel=1e-12)

    def test_map_values(self):
        stretch = RadialStretchMap(3.0)
        assert np.allclose(stretch(np.array([[0.5, 0.0]])), [[0.125, 0.0]])
        assert stretch.dilatation(Exponents(2, 2)) == pytest.approx(1 / 3)

    def test_exponent_must_exceed_one(self):
        with pytest.raises(ValidationError):
            RadialStretchMap(1.0)

    def test_sweep_has_no_violations(self, rb, exp_gauge, space_grid):
        report = rb.soundness_sweep([1.5, 2.0, 3.0], exp_gauge, SPACE, THM2_R0, 1.0,
                                    eps_grid=space_grid)
        assert report.certificate.status == "ok"
        assert report.ok
        assert sorted(report.measured) == [1.5, 2.0, 3.0]
        eps = report.epsilons[0]
        assert report.measured[2.0][0] == pytest.approx(2 * eps ** 2, rel=1e-12)

    @pytest.mark.slow
    def test_sweep_with_calibrated_constant(self, rb, exp_gauge, space_grid):
        b_n = rb.calibrate_kruglikov_constant([default_reference_condenser(3)], SPACE, 48)
        report = rb.soundness_sweep([1.5, 2.0, 3.0], exp_gauge, SPACE, THM2_R0, b_n,
                                    eps_grid=space_grid)
        assert report.ok

    def test_sweep_validates_inputs(self, rb, exp_gauge):
        with pytest.raises(ValidationError):
            rb.soundness_sweep([], exp_gauge, SPACE, THM2_R0, 1.0)
        with pytest.raises(ValidationError):
            rb.soundness_sweep([2.0], exp_gauge, SPACE, 1.5, 1.0)
