"""
Certificates
Capacity-decay and image-diameter curves assembled from the bound chain,
plus the stretch-map soundness sweep
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial.distance import pdist

from ringbound.core.capacity import mazya_coefficient
from ringbound.core.orlicz import annulus_top, epsilon_grid
from ringbound.core.radial import modulus_upper_bound
from ringbound.exceptions import NumericalFailure, ValidationError
from ringbound.models.fields import ConstantField, MassBudget
from ringbound.models.gauges import OrliczGauge
from ringbound.models.geometry import Ball, Exponents, as_point
from ringbound.models.results import Certificate, SweepReport

logger = logging.getLogger(__name__)

CAPACITY_DECAY = "capacity-decay"
DIAMETER_BOUND = "diameter-bound"
CHORDAL_MODULUS = "chordal-modulus"

ORLICZ_STEP = "orlicz-integral-lower-bound"
CAPACITY_STEP = "ring-capacity-upper-bound"
MEASURE_STEP = "mazya-measure-bound"
DIAMETER_STEP = "kruglikov-diameter-bound"
DELTA_STEP = "delta-table-inversion"

STAGE_ONE_FAILURE = "stage-1-failure"
NO_FINITE_BOUND = "no-finite-bound"


def gauge_description(gauge: OrliczGauge) -> Dict[str, Any]:
    params: Dict[str, Any] = {"kind": gauge.kind, "phi0": gauge.phi0}
    for name in ("beta", "alpha"):
        if hasattr(gauge, name):
            params[name] = getattr(gauge, name)
    return params


@dataclass(frozen=True)
class RadialStretchMap:
    """
    f(x) = x |x|^{alpha - 1} with alpha > 1.

    Round rings inside the unit ball are mapped with p-capacity multiplied by at
    most alpha^{1-p}, so f satisfies the ring inequality with Q = alpha^{1-p}
    there.
    """

    alpha: float

    def __post_init__(self):
        if not self.alpha > 1.0:
            raise ValidationError(f"stretch exponent must exceed 1, got {self.alpha}")

    def __call__(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        r = np.linalg.norm(pts, axis=1, keepdims=True)
        return pts * np.power(r, self.alpha - 1.0)

    def dilatation(self, exps: Exponents) -> float:
        return self.alpha ** (1.0 - exps.p)

    def image_diameter(self, eps: float, sphere_nodes: np.ndarray) -> float:
        """Diameter of f(B(0, eps)) measured on sampled boundary points."""
        n = sphere_nodes.shape[1]
        samples = np.vstack([sphere_nodes, np.eye(n), -np.eye(n)]) * eps
        return float(np.max(pdist(self(samples))))


class CertificateMixin:
    """Mixin for equicontinuity certificates"""

    def certificate_grid(self, r0: float, n: int, decades: Optional[float] = None,
                         per_decade: Optional[int] = None) -> np.ndarray:
        """Shared eps grid: log-spaced below r0 * 2^{-1/n}."""
        return epsilon_grid(
            annulus_top(r0, n),
            decades or self.profile.grid_decades,
            per_decade or self.profile.points_per_decade,
        )

    def _check_divergence(self, gauge: OrliczGauge, q: float, allow_conditional: bool) -> bool:
        """Return True when the certificate is conditional on an undecided divergence."""
        verdict = gauge.divergence_verdict(q)
        if verdict is True:
            return False
        if not allow_conditional:
            state = "fails" if verdict is False else "is not decided in closed form"
            raise ValidationError(
                f"divergence condition with exponent {q:.6g} {state} for {gauge.kind}; "
                "pass allow_conditional=True for a conditional certificate"
            )
        logger.warning("certificate is conditional on the divergence of %s", gauge.kind)
        return True

    def _capacity_curve(
        self,
        gauge: OrliczGauge,
        exps: Exponents,
        budget: MassBudget,
        x0,
        r0: float,
        grid: np.ndarray,
        phi_floor: bool,
    ) -> np.ndarray:
        """omega / I_min^{p-1} on the grid; inf outside the valid regime."""
        top = annulus_top(r0, exps.n)

        def bound(eps: float) -> float:
            if eps > top * (1.0 + 1e-12):
                return math.inf
            I_min = self.lemma1_lower_bound(gauge, exps, budget, x0, r0, eps, phi_floor)
            return modulus_upper_bound(I_min, exps)

        return np.asarray(self._map(bound, [float(e) for e in grid]), dtype=float)

    def capacity_decay_certificate(
        self,
        gauge: OrliczGauge,
        exps: Exponents,
        budget: Union[MassBudget, float],
        x0,
        r0: float,
        eps_grid: Optional[Sequence[float]] = None,
        allow_conditional: bool = False,
        phi_floor: bool = False,
    ) -> Certificate:
        """
        Uniform upper bound on cap_n f(E) for E = (B(x0, r0), closed B(x0, eps)).

        Args:
            gauge: Orlicz gauge Phi
            exps: Exponents with p = n
            budget: M0
            x0: Center
            r0: Outer radius
            eps_grid: Radii; defaults to the shared certificate grid
            allow_conditional: Accept gauges whose divergence is not established
            phi_floor: Substitute Phi(phi_floor_t) for Phi(0) = 0

        Returns:
            Certificate of kind ``capacity-decay``; inf marks radii with no information

        Raises:
            NumericalFailure: If no grid radius yields a finite bound
        """
        if not exps.is_conformal:
            raise ValidationError(f"capacity-decay certificate needs p = n, got p = {exps.p}")
        budget = budget if isinstance(budget, MassBudget) else MassBudget(budget)
        x0 = as_point(x0, "x0")
        conditional = self._check_divergence(gauge, 1.0 / (exps.n - 1), allow_conditional)
        grid = np.asarray(
            eps_grid if eps_grid is not None else self.certificate_grid(r0, exps.n), dtype=float
        )
        bounds = self._capacity_curve(gauge, exps, budget, x0, r0, grid, phi_floor)
        if not np.isfinite(bounds).any():
            raise NumericalFailure(
                "empty certificate: the Orlicz range is empty at every grid radius"
            )
        return Certificate(
            kind=CAPACITY_DECAY,
            inputs={
                "gauge": gauge_description(gauge),
                "n": exps.n,
                "p": exps.p,
                "M0": budget.M0,
                "x0": list(x0),
                "r0": r0,
            },
            epsilons=grid,
            bounds=bounds,
            provenance=[ORLICZ_STEP, CAPACITY_STEP],
            conditional=conditional,
        )

    def diameter_certificate(
        self,
        gauge: OrliczGauge,
        exps: Exponents,
        budget: Union[MassBudget, float],
        x0,
        r0: float,
        b_n: float = 1.0,
        eps_grid: Optional[Sequence[float]] = None,
        allow_conditional: bool = False,
    ) -> Certificate:
        """
        Uniform bound alpha_3(eps) on the diameter of f(closed B(x0, eps)) for
        n - 1 < p < n.

        Stage 1 turns the capacity bound alpha(eps) into a measure bound
        alpha_1(eps) and picks eps_1, the largest grid radius with
        alpha_1 <= 1. Stage 2 bounds the capacity alpha_2(eps) of the inner
        ring (eps, eps_1) and inverts the diameter bound with m(A) <= 1.

        Returns:
            Certificate of kind ``diameter-bound``; status ``stage-1-failure``
            when no eps_1 exists on the grid
        """
        exps.require_between()
        if not b_n > 0:
            raise ValidationError(f"b_n must be positive, got {b_n}")
        budget = budget if isinstance(budget, MassBudget) else MassBudget(budget)
        x0 = as_point(x0, "x0")
        n, p = exps.n, exps.p
        conditional = self._check_divergence(gauge, exps.mean_power, allow_conditional)
        grid = np.asarray(
            eps_grid if eps_grid is not None else self.certificate_grid(r0, n), dtype=float
        )
        inputs = {
            "gauge": gauge_description(gauge),
            "n": n,
            "p": p,
            "M0": budget.M0,
            "x0": list(x0),
            "r0": r0,
            "b_n": b_n,
        }
        provenance = [ORLICZ_STEP, CAPACITY_STEP, MEASURE_STEP, ORLICZ_STEP, CAPACITY_STEP,
                      DIAMETER_STEP]

        alpha = self._capacity_curve(gauge, exps, budget, x0, r0, grid, phi_floor=False)
        with np.errstate(over="ignore"):
            alpha1 = np.power(alpha / mazya_coefficient(exps), n / (n - p))
        small = np.flatnonzero(alpha1 <= 1.0)
        stages = {"alpha": alpha, "alpha1": alpha1}
        if small.size == 0:
            best = float(np.min(alpha1))
            logger.warning("stage 1 found no eps_1; smallest alpha_1 = %g", best)
            return Certificate(
                kind=DIAMETER_BOUND,
                inputs=inputs,
                epsilons=grid,
                bounds=np.full(grid.size, math.inf),
                provenance=provenance,
                conditional=conditional,
                status=STAGE_ONE_FAILURE,
                notes=[f"min alpha1 = {best:.15g}"],
                stages=stages,
            )
        eps1 = float(np.max(grid[small]))
        inputs["eps1"] = eps1
        logger.info("stage 1: eps_1 = %g", eps1)

        top = annulus_top(eps1, n)

        def inner_bound(eps: float) -> float:
            if eps > top * (1.0 + 1e-12):
                return math.inf
            I_min = self.lemma1_lower_bound(gauge, exps, budget, x0, eps1, eps)
            return modulus_upper_bound(I_min, exps)

        alpha2 = np.asarray(self._map(inner_bound, [float(e) for e in grid]), dtype=float)
        with np.errstate(over="ignore"):
            alpha3 = np.power(np.power(alpha2, n - 1.0) / b_n, 1.0 / p)
        stages["alpha2"] = alpha2
        status = "ok"
        notes: List[str] = []
        if not np.isfinite(alpha3).any():
            status = NO_FINITE_BOUND
            notes.append(f"eps_1 = {eps1:.15g}; extend the grid below it")
        return Certificate(
            kind=DIAMETER_BOUND,
            inputs=inputs,
            epsilons=grid,
            bounds=alpha3,
            provenance=provenance,
            conditional=conditional,
            status=status,
            notes=notes,
            stages=stages,
        )

    def chordal_modulus_from_delta_table(
        self, certificate: Certificate, delta_table: Sequence[Tuple[float, float]]
    ) -> Certificate:
        """
        Turn a capacity-decay certificate into a chordal modulus of continuity.

        ``delta_table`` lists pairs (a, delta(a)) such that a condenser whose
        compact image has chordal diameter >= a has capacity >= delta(a). At
        each eps the result is the smallest tabulated a with
        delta(a) > bound(eps), or 1 when there is none.
        """
        if certificate.kind != CAPACITY_DECAY:
            raise ValidationError(
                f"expected a {CAPACITY_DECAY} certificate, got {certificate.kind}"
            )
        table = sorted((float(a), float(d)) for a, d in delta_table)
        if not table:
            raise ValidationError("delta table must not be empty")
        if any(not 0.0 < a <= 1.0 or not d > 0.0 for a, d in table):
            raise ValidationError("delta table needs 0 < a <= 1 and delta(a) > 0")
        deltas = [d for _, d in table]
        if any(b < a for a, b in zip(deltas, deltas[1:])):
            raise ValidationError("delta(a) must be nondecreasing in a")
        moduli = np.ones(certificate.bounds.size)
        for idx, bound in enumerate(certificate.bounds):
            for a, d in table:
                if bound < d:
                    moduli[idx] = a
                    break
        return Certificate(
            kind=CHORDAL_MODULUS,
            inputs=dict(certificate.inputs, delta_table=[list(row) for row in table]),
            epsilons=certificate.epsilons,
            bounds=moduli,
            provenance=certificate.provenance + [DELTA_STEP],
            conditional=certificate.conditional,
        )

    def stretch_map(self, alpha: float) -> RadialStretchMap:
        return RadialStretchMap(alpha)

    def soundness_sweep(
        self,
        alphas: Sequence[float],
        gauge: OrliczGauge,
        exps: Exponents,
        r0: float,
        b_n: float,
        eps_grid: Optional[Sequence[float]] = None,
    ) -> SweepReport:
        """
        Compare measured diameters of f(B(0, eps)) for stretch maps with the
        diameter certificate of a class that contains all of them.

        Each map has constant dilatation alpha^{1-p} on the unit ball; M0 is
        the largest of their Orlicz masses.

        Returns:
            SweepReport; ``violations`` lists (alpha, eps, measured, bound)
        """
        if not alphas:
            raise ValidationError("at least one stretch exponent is required")
        if not 0.0 < r0 <= 1.0:
            raise ValidationError(f"r0 must lie in (0, 1], got {r0}")
        n = exps.n
        origin = (0.0,) * n
        domain = Ball(origin, 1.0)
        maps = [RadialStretchMap(float(a)) for a in alphas]
        masses = []
        for stretch in maps:
            field = ConstantField(stretch.dilatation(exps), support=domain)
            result = self.mass_integral(field, gauge, domain)
            if result.diverged:
                raise NumericalFailure(f"Orlicz mass diverged for stretch exponent {stretch.alpha}")
            masses.append(result.value)
        budget = MassBudget(max(masses) * (1.0 + 1e-9))
        certificate = self.diameter_certificate(
            gauge, exps, budget, origin, r0, b_n, eps_grid=eps_grid
        )
        nodes = self.sphere_quadrature(n).nodes
        measured: Dict[float, np.ndarray] = {}
        violations = []
        for stretch in maps:
            diameters = np.array(
                [stretch.image_diameter(float(e), nodes) for e in certificate.epsilons]
            )
            measured[stretch.alpha] = diameters
            for eps, d, bound in zip(certificate.epsilons, diameters, certificate.bounds):
                if d > bound:
                    violations.append((stretch.alpha, float(eps), float(d), float(bound)))
        if violations:
            logger.error("soundness sweep found %d violation(s)", len(violations))
        return SweepReport(
            alphas=[m.alpha for m in maps],
            epsilons=certificate.epsilons,
            measured=measured,
            certificate=certificate,
            violations=violations,
        )
