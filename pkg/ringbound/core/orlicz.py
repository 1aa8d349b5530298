"""
Orlicz Bounds
Annulus mean of Phi(Q), the Orlicz lower bound on the ring integral, and
the search for the radius r_* where that bound reaches a target
"""

import logging
import math
from typing import Optional, Sequence, Union

import numpy as np

from ringbound.core.constants import unit_ball_volume
from ringbound.core.fields import orlicz_integral, singular_radii
from ringbound.exceptions import ValidationError
from ringbound.models.fields import MassBudget, ScalarField
from ringbound.models.gauges import OrliczGauge
from ringbound.models.geometry import Annulus, Exponents, as_point
from ringbound.models.results import (
    AnnulusMeanReport,
    EpsilonStarResult,
    OrliczBoundCurve,
    OrliczBoundReport,
)

logger = logging.getLogger(__name__)

DIVERGENCE_FAILS = "divergence-condition-fails"
NEEDS_SMALLER = "needs-smaller-epsilon"


def epsilon_grid(top: float, decades: float, per_decade: int) -> np.ndarray:
    """
    Decreasing log-spaced radii top * 10^{-k / per_decade}, k = 0..decades * per_decade.

    Args:
        top: Largest radius
        decades: Number of decades covered below ``top``
        per_decade: Points per decade

    Returns:
        Strictly decreasing array starting at ``top``
    """
    if not top > 0 or not decades > 0 or per_decade < 1:
        raise ValidationError(
            f"epsilon grid needs top > 0, decades > 0, per_decade >= 1; "
            f"got {top}, {decades}, {per_decade}"
        )
    count = int(math.floor(decades * per_decade + 1e-9))
    return top * np.power(10.0, -np.arange(count + 1) / per_decade)


def annulus_top(r0: float, n: int) -> float:
    """Largest eps for which the annulus mean bound holds: r0 * 2^{-1/n}."""
    return r0 * 2.0 ** (-1.0 / n)


def _budget(budget: Union[MassBudget, float]) -> MassBudget:
    return budget if isinstance(budget, MassBudget) else MassBudget(budget)


def beta_factor(x0: Sequence[float], r0: float, n: int) -> float:
    """(1 + (r0 + |x0|)^2)^n, the weight correction on B(x0, r0)."""
    return (1.0 + (r0 + float(np.linalg.norm(x0))) ** 2) ** n


class OrliczMixin:
    """Mixin for the Orlicz-constrained lower bounds"""

    def annulus_phi_mean(
        self,
        field: ScalarField,
        gauge: OrliczGauge,
        x0,
        eps: float,
        r0: float,
        budget: Optional[Union[MassBudget, float]] = None,
    ) -> AnnulusMeanReport:
        """
        Volume mean M* of Phi(Q) over the annulus A(x0, eps, r0).

        Args:
            field: Dilatation field Q
            gauge: Orlicz gauge Phi
            x0: Center
            eps: Inner radius (0 < eps < r0)
            r0: Outer radius
            budget: M0 used for the upper bound 2 beta M0 / (Omega r0^n); inf if omitted

        Returns:
            AnnulusMeanReport; a divergent integral gives m_star = inf
        """
        x0 = as_point(x0, "x0")
        n = len(x0)
        if not 0.0 < eps < r0:
            raise ValidationError(f"annulus needs 0 < eps < r0, got eps={eps}, r0={r0}")
        annulus = Annulus(x0, eps, r0)

        def phi_of_q(points: np.ndarray) -> np.ndarray:
            with np.errstate(over="ignore"):
                return gauge.phi(field.values(points))

        result = self._domain_integral(phi_of_q, annulus, singular_radii(field, annulus))
        m_star = math.inf if result.diverged else result.value / annulus.measure()
        beta = beta_factor(x0, r0, n)
        upper = math.inf
        if budget is not None:
            upper = 2.0 * beta * _budget(budget).M0 / (unit_ball_volume(n) * r0 ** n)
        return AnnulusMeanReport(
            m_star=m_star,
            beta=beta,
            m_star_upper=upper,
            valid_regime=eps <= annulus_top(r0, n),
        )

    def lemma1_bound_report(
        self,
        gauge: OrliczGauge,
        exps: Exponents,
        budget: Union[MassBudget, float],
        x0,
        r0: float,
        eps: float,
        phi_floor: bool = False,
    ) -> OrliczBoundReport:
        """
        Lower bound on the ring integral over A(x0, eps, r0) valid for every
        field whose weighted Orlicz mass is at most M0.

        The bound is (1/n) times the integral of dtau / (tau Phi^{-1}(tau)^{1/(p-1)})
        from 2 beta M0 e / (Omega r0^n) to Phi(0) r0^n / eps^n, and 0 when that
        range is empty. Limits are handled as logarithms.

        Args:
            gauge: Orlicz gauge Phi
            exps: Exponents (n, p)
            budget: M0
            x0: Center
            r0: Outer radius (r0 <= 1 when p < n)
            eps: Inner radius, 0 < eps <= r0 * 2^{-1/n}
            phi_floor: Replace Phi(0) = 0 by Phi(phi_floor_t)

        Raises:
            ValidationError: On radii outside the valid regime, or Phi(0) = 0
                without ``phi_floor``
        """
        budget = _budget(budget)
        x0 = as_point(x0, "x0")
        n = exps.n
        if len(x0) != n:
            raise ValidationError(f"x0 has dimension {len(x0)}, exponents say n = {n}")
        if not 0.0 < r0 < math.inf:
            raise ValidationError(f"r0 must be positive and finite, got {r0}")
        if not exps.is_conformal and r0 > 1.0:
            raise ValidationError(f"r0 must be <= 1 when p < n, got {r0}")
        top = annulus_top(r0, n)
        if not 0.0 < eps <= top * (1.0 + 1e-12):
            raise ValidationError(f"eps must satisfy 0 < eps <= r0 * 2^(-1/n) = {top}, got {eps}")

        tau0 = gauge.phi0
        floor_used = False
        if tau0 == 0.0:
            if not phi_floor:
                raise ValidationError(
                    "Phi(0) = 0 makes the bound vacuous; pass phi_floor=True to use "
                    "Phi(phi_floor_t) as the upper-limit coefficient"
                )
            tau0 = float(gauge.phi(np.array([self.profile.phi_floor_t]))[0])
            floor_used = True
            logger.warning("Phi(0) = 0: using Phi(%g) = %g instead", self.profile.phi_floor_t, tau0)

        log_lower = (
            math.log(2.0 * beta_factor(x0, r0, n) * budget.M0)
            + 1.0
            - math.log(unit_ball_volume(n))
            - n * math.log(r0)
        )
        inconsistent = log_lower < 1.0 + math.log(tau0)
        if inconsistent:
            logger.warning("M0 = %g is below the smallest possible annulus mean", budget.M0)
            log_lower = 1.0 + math.log(tau0)
        log_upper = math.log(tau0) + n * (math.log(r0) - math.log(eps))
        if log_upper <= log_lower:
            return OrliczBoundReport(0.0, log_lower, log_upper, True, floor_used, inconsistent)
        value = orlicz_integral(
            gauge, exps.mean_power, log_lower, log_upper, epsrel=self.profile.quad_epsrel
        ) / n
        return OrliczBoundReport(value, log_lower, log_upper, False, floor_used, inconsistent)

    def lemma1_lower_bound(
        self,
        gauge: OrliczGauge,
        exps: Exponents,
        budget: Union[MassBudget, float],
        x0,
        r0: float,
        eps: float,
        phi_floor: bool = False,
    ) -> float:
        """Value of :meth:`lemma1_bound_report`."""
        return self.lemma1_bound_report(gauge, exps, budget, x0, r0, eps, phi_floor).value

    def measured_mean_lower_bound(
        self,
        field: ScalarField,
        gauge: OrliczGauge,
        exps: Exponents,
        x0,
        r0: float,
        eps: float,
    ) -> float:
        """
        Lower bound on the ring integral of one field from its measured
        annulus mean M*: (1/n) times the integral from e M* to M* r0^n / eps^n.

        At least as large as the budget-only bound whenever M* respects the budget.
        """
        n = exps.n
        if not exps.is_conformal and r0 > 1.0:
            raise ValidationError(f"r0 must be <= 1 when p < n, got {r0}")
        if not 0.0 < eps <= annulus_top(r0, n) * (1.0 + 1e-12):
            raise ValidationError(f"eps must satisfy 0 < eps <= r0 * 2^(-1/n), got {eps}")
        m_star = self.annulus_phi_mean(field, gauge, x0, eps, r0).m_star
        if not 0.0 < m_star < math.inf:
            return 0.0
        log_m = math.log(m_star)
        return orlicz_integral(
            gauge,
            exps.mean_power,
            1.0 + log_m,
            log_m + n * (math.log(r0) - math.log(eps)),
            epsrel=self.profile.quad_epsrel,
        ) / n

    def epsilon_star(
        self,
        gauge: OrliczGauge,
        exps: Exponents,
        budget: Union[MassBudget, float],
        x0,
        r0: float,
        sigma: float,
        phi_floor: bool = False,
    ) -> EpsilonStarResult:
        """
        Largest grid radius r_* with lemma1_lower_bound(eps) >= sigma for
        every grid eps <= r_*.

        The grid runs from r0 * 2^{-1/n} down to r0 * epsilon_floor at
        ``points_per_decade``; bisection runs over grid indices.

        A gauge that provably violates the divergence condition is still
        searched: its bound stays finite as eps shrinks, but it may clear
        sigma anyway. ``divergence_fails`` records the verdict either way.

        Returns:
            EpsilonStarResult; when ``found`` is False the reason is
            ``divergence-condition-fails`` if the bound at the floor is below
            sigma and the divergence condition fails, ``needs-smaller-epsilon``
            otherwise
        """
        if not sigma > 0:
            raise ValidationError(f"sigma must be positive, got {sigma}")
        n = exps.n
        per_decade = self.profile.points_per_decade
        top = annulus_top(r0, n)
        floor = r0 * self.profile.epsilon_floor
        grid = epsilon_grid(top, math.log10(top / floor), per_decade)
        step = 10.0 ** (1.0 / per_decade)

        def bound(k: int) -> float:
            return self.lemma1_lower_bound(gauge, exps, budget, x0, r0, float(grid[k]), phi_floor)

        last = grid.size - 1
        at_floor = bound(last)
        verdict = gauge.divergence_verdict(exps.mean_power)
        conditional = verdict is None
        divergence_fails = verdict is False

        def not_found(reason: str) -> EpsilonStarResult:
            return EpsilonStarResult(
                found=False,
                r_star=None,
                sigma=float(sigma),
                reason=reason,
                floor=float(grid[last]),
                bound_at_floor=at_floor,
                conditional=conditional,
                grid_step=step,
                divergence_fails=divergence_fails,
            )

        if divergence_fails:
            logger.info("divergence condition fails for %s; the bound stays finite", gauge.kind)
        if conditional:
            logger.warning("divergence of %s is not decided in closed form", gauge.kind)
        if at_floor < sigma:
            return not_found(DIVERGENCE_FAILS if divergence_fails else NEEDS_SMALLER)

        lo, hi = -1, last
        # invariant: bound(hi) >= sigma, bound(lo) < sigma (lo = -1 is virtual)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if bound(mid) >= sigma:
                hi = mid
            else:
                lo = mid
            logger.debug("epsilon_star bracket [%d, %d]", lo, hi)
        return EpsilonStarResult(
            found=True,
            r_star=float(grid[hi]),
            sigma=float(sigma),
            reason="",
            floor=float(grid[last]),
            bound_at_floor=at_floor,
            conditional=conditional,
            grid_step=step,
            divergence_fails=divergence_fails,
        )

    def orlicz_curve(
        self,
        gauge: OrliczGauge,
        exps: Exponents,
        budget: Union[MassBudget, float],
        x0,
        r0: float,
        sigma: float,
        decades: Optional[float] = None,
        per_decade: Optional[int] = None,
        phi_floor: bool = False,
    ) -> OrliczBoundCurve:
        """
        Orlicz lower bound tabulated on a decreasing eps grid below r0 * 2^{-1/n},
        together with r_* for the target sigma.
        """
        grid = epsilon_grid(
            annulus_top(r0, exps.n),
            decades or self.profile.grid_decades,
            per_decade or self.profile.points_per_decade,
        )
        bounds = self._map(
            lambda e: self.lemma1_lower_bound(gauge, exps, budget, x0, r0, float(e), phi_floor),
            grid,
        )
        star = self.epsilon_star(gauge, exps, budget, x0, r0, sigma, phi_floor)
        return OrliczBoundCurve(
            epsilons=grid,
            lower_bounds=np.asarray(bounds, dtype=float),
            sigma_target=float(sigma),
            r_star=star.r_star,
        )
