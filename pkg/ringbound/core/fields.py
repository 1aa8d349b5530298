"""
Field Operations
Field evaluation, gauge inversion, the weighted Orlicz mass constraint and
the divergence diagnostics
"""

import logging
import math
from typing import Dict, List, Optional, Union

import numpy as np

from ringbound.exceptions import ValidationError
from ringbound.models.fields import MassBudget, ScalarField
from ringbound.models.gauges import CONVERGES, DIVERGES, INCONCLUSIVE, OrliczGauge
from ringbound.models.geometry import Annulus, Ball, Box, Exponents, Region
from ringbound.models.results import DivergenceReport, MassCheck
from ringbound.utils.quadrature import QuadResult, adaptive_quad

logger = logging.getLogger(__name__)


def singular_radii(field: ScalarField, domain: Region) -> List[float]:
    """Distances from the domain center to the field's own center, if any."""
    center = getattr(field, "center", None)
    dom_center = getattr(domain, "center", None)
    if center is None or dom_center is None or len(center) != len(dom_center):
        return []
    return [float(np.linalg.norm(np.asarray(center) - np.asarray(dom_center)))]


class FieldMixin:
    """Mixin for field and gauge diagnostics"""

    def eval_field(self, field: ScalarField, x) -> Union[float, np.ndarray]:
        """
        Evaluate Q at one point or at an (m, n) array of points.

        Returns:
            Value(s) in [0, inf]; 0 outside the field's support
        """
        arr = np.asarray(x, dtype=float)
        if arr.ndim == 1:
            return field(arr)
        return field.values(arr)

    def gauge_inverse(self, gauge: OrliczGauge, tau: float) -> float:
        """
        Solve Phi(t) = tau.

        Args:
            gauge: Orlicz gauge
            tau: Level, at least Phi(0)

        Returns:
            t >= 0 with Phi(t) = tau

        Raises:
            ValidationError: If tau < Phi(0)
        """
        return gauge.inverse(tau)

    def mass_integral(
        self, field: ScalarField, gauge: OrliczGauge, domain: Region
    ) -> QuadResult:
        """Integral of Phi(Q(x)) (1 + |x|^2)^{-n} over the domain."""
        if not isinstance(domain, (Ball, Annulus, Box)):
            raise ValidationError("domain must be a Ball, Annulus or Box")
        n = domain.dimension

        def weighted(points: np.ndarray) -> np.ndarray:
            with np.errstate(over="ignore", invalid="ignore"):
                phi = gauge.phi(field.values(points))
                return phi * np.power(1.0 + np.einsum("ij,ij->i", points, points), -n)

        return self._domain_integral(weighted, domain, singular_radii(field, domain))

    def verify_mass_bound(
        self,
        field: ScalarField,
        gauge: OrliczGauge,
        domain: Region,
        budget: Union[MassBudget, float],
    ) -> MassCheck:
        """
        Check the weighted Orlicz mass against the budget M0.

        Args:
            field: Dilatation field Q
            gauge: Orlicz gauge Phi
            domain: Ball, annulus or box D
            budget: M0 (or a MassBudget)

        Returns:
            MassCheck; a divergent integral is reported as inf and unsatisfied
        """
        if not isinstance(budget, MassBudget):
            budget = MassBudget(budget)
        result = self.mass_integral(field, gauge, domain)
        method = "sobol" if domain.dimension >= 4 else "adaptive"
        if result.diverged:
            logger.warning("mass integral of %s over %r diverged", field.kind, domain)
        return MassCheck(
            integral=result.value,
            satisfied=(not result.diverged) and result.value <= budget.M0,
            diverged=result.diverged,
            method=method,
            abserr=result.abserr,
        )

    def divergence_diagnostic(
        self,
        gauge: OrliczGauge,
        q: float,
        delta0: float,
        horizon: float = 1e6,
    ) -> DivergenceReport:
        """
        Decide whether the integral of dtau / (tau Phi^{-1}(tau)^q) from delta0
        to infinity diverges.

        Catalog gauges get a closed-form verdict; the partial integral up to
        ``horizon`` is always reported (computed in u = log tau).

        Raises:
            ValidationError: If delta0 <= Phi(0), q <= 0 or horizon <= delta0
        """
        if not q > 0:
            raise ValidationError(f"exponent q must be positive, got {q}")
        if not delta0 > gauge.phi0:
            raise ValidationError(f"delta0 must exceed Phi(0) = {gauge.phi0}, got {delta0}")
        if not horizon > delta0:
            raise ValidationError(f"horizon must exceed delta0, got {horizon}")
        partial = orlicz_integral(
            gauge, q, math.log(delta0), math.log(horizon), epsrel=self.profile.quad_epsrel
        )
        closed = gauge.divergence_verdict(q)
        verdict = INCONCLUSIVE if closed is None else (DIVERGES if closed else CONVERGES)
        return DivergenceReport(
            exponent=float(q),
            delta0=float(delta0),
            horizon=float(horizon),
            partial_integral=partial,
            verdict=verdict,
        )

    def divergence_report(
        self,
        gauge: OrliczGauge,
        exps: Exponents,
        delta0: Optional[float] = None,
        horizon: float = 1e6,
    ) -> Dict[str, DivergenceReport]:
        """
        Divergence diagnostics for both exponents in use: 1/(n-1) and 1/(p-1).

        Args:
            delta0: Lower limit; defaults to e * max(Phi(0), 1)
        """
        if delta0 is None:
            delta0 = math.e * max(gauge.phi0, 1.0)
        return {
            "n": self.divergence_diagnostic(gauge, 1.0 / (exps.n - 1), delta0, horizon),
            "p": self.divergence_diagnostic(gauge, exps.mean_power, delta0, horizon),
        }


def orlicz_integral(
    gauge: OrliczGauge, q: float, log_lo: float, log_hi: float, epsrel: float = 1e-10
) -> float:
    """
    Integral of dtau / (tau Phi^{-1}(tau)^q) between e^log_lo and e^log_hi,
    evaluated as the integral of Phi^{-1}(e^u)^{-q} du.

    Empty or reversed ranges give 0. The limits may be far beyond the float
    range of tau itself.
    """
    if not log_hi > log_lo:
        return 0.0

    def integrand(u: float) -> float:
        t = gauge.log_inverse(u)
        if t == 0.0:
            return math.inf
        return t ** (-q)

    result = adaptive_quad(integrand, log_lo, log_hi, epsrel=epsrel, limit=500)
    return result.value

