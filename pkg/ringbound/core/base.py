"""
Toolkit Base
Tolerance profiles, seeding and worker settings shared by every mixin
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, TypeVar, Union

from dotenv import load_dotenv

from ringbound.core.radial import SphereQuadrature
from ringbound.exceptions import ValidationError
from ringbound.models.geometry import Annulus, Ball, Box, Region
from ringbound.utils.quadrature import (
    QuadResult,
    box_integral,
    radial_shell_integral,
    sobol_integral,
)

logger = logging.getLogger(__name__)

PROFILE_ENV_VAR = "RINGBOUND_TOLERANCE_PROFILE"

T = TypeVar("T")
R = TypeVar("R")


@dataclass(frozen=True)
class ToleranceProfile:
    """Numerical tolerances and resolutions used by the toolkit."""

    name: str = "default"
    radial_rtol: float = 1e-8
    radial_max_nodes: int = 2 ** 18
    sphere_nodes_2d: int = 256
    sphere_nodes_3d: int = 512
    sphere_nodes_mc: int = 4096
    quad_epsrel: float = 1e-10
    quad_limit: int = 200
    qmc_log2_points: int = 20
    gauge_rtol: float = 1e-10
    capacity_tol: float = 1e-9
    capacity_window: int = 10
    capacity_max_iter: int = 20000
    capacity_mu: float = 1e-12
    points_per_decade: int = 64
    grid_decades: int = 6
    epsilon_floor: float = 1e-12
    phi_floor_t: float = 1e-6

    def with_overrides(self, overrides: Optional[Dict[str, Any]]) -> "ToleranceProfile":
        """
        Return a copy with individual fields replaced.

        Raises:
            ValidationError: If a key is not a profile field
        """
        if not overrides:
            return self
        known = {f.name: f.type for f in fields(self)}
        unknown = sorted(set(overrides) - set(known))
        if unknown:
            raise ValidationError(
                f"unknown tolerance key(s) {unknown}; must be one of {sorted(known)}"
            )
        coerced = {}
        for key, value in overrides.items():
            current = getattr(self, key)
            coerced[key] = type(current)(value)
        return replace(self, **coerced)


PROFILES: Dict[str, ToleranceProfile] = {
    "default": ToleranceProfile(),
    "fast": ToleranceProfile(
        name="fast",
        radial_rtol=1e-6,
        radial_max_nodes=2 ** 14,
        sphere_nodes_2d=128,
        sphere_nodes_3d=200,
        sphere_nodes_mc=1024,
        quad_epsrel=1e-7,
        qmc_log2_points=16,
        capacity_tol=1e-7,
        capacity_max_iter=5000,
        points_per_decade=16,
    ),
    "strict": ToleranceProfile(
        name="strict",
        radial_rtol=1e-10,
        sphere_nodes_2d=512,
        sphere_nodes_3d=1152,
        sphere_nodes_mc=16384,
        quad_epsrel=1e-12,
        quad_limit=500,
        qmc_log2_points=22,
        gauge_rtol=1e-12,
        capacity_tol=1e-10,
        capacity_max_iter=50000,
        points_per_decade=128,
    ),
}


def resolve_profile(profile: Union[None, str, ToleranceProfile] = None) -> ToleranceProfile:
    """
    Pick the tolerance profile: explicit argument first, then the
    RINGBOUND_TOLERANCE_PROFILE environment variable (``.env`` honoured),
    then ``default``.
    """
    if isinstance(profile, ToleranceProfile):
        return profile
    if profile is None:
        load_dotenv()
        profile = os.getenv(PROFILE_ENV_VAR) or "default"
    if profile not in PROFILES:
        raise ValidationError(f"profile must be one of {sorted(PROFILES)}, got {profile!r}")
    return PROFILES[profile]


class ToolkitBase:
    """
    Base class for the toolkit.

    Holds the tolerance profile, the seed used by every randomized rule and
    the worker cap. Mixins read these attributes and never change them.
    """

    def __init__(
        self,
        profile: Union[None, str, ToleranceProfile] = None,
        seed: int = 0,
        jobs: int = 1,
    ):
        """
        Initialize the toolkit.

        Args:
            profile: Profile name, a ToleranceProfile, or None for the
                environment/default choice
            seed: Seed for Monte-Carlo sphere rules and Sobol sequences
            jobs: Maximum number of worker threads for independent evaluations
        """
        if int(jobs) < 1:
            raise ValidationError(f"jobs must be >= 1, got {jobs}")
        self.profile = resolve_profile(profile)
        self.seed = int(seed)
        self.jobs = int(jobs)
        logger.debug("toolkit profile=%s seed=%d jobs=%d", self.profile.name, self.seed, self.jobs)

    def _map(self, func: Callable[[T], R], items: Iterable[T]) -> List[R]:
        """Apply ``func`` to every item; results keep the input order."""
        items = list(items)
        if self.jobs == 1 or len(items) < 2:
            return [func(item) for item in items]
        with ThreadPoolExecutor(max_workers=self.jobs) as pool:
            return list(pool.map(func, items))

    def sphere_quadrature(self, n: int) -> SphereQuadrature:
        """The sphere rule for dimension n at the profile's node count (cached)."""
        cache = self.__dict__.setdefault("_sphere_rules", {})
        if n not in cache:
            if n == 2:
                count = self.profile.sphere_nodes_2d
            elif n == 3:
                count = self.profile.sphere_nodes_3d
            else:
                count = self.profile.sphere_nodes_mc
            cache[n] = SphereQuadrature.build(n, count, seed=self.seed)
        return cache[n]

    def cross_check_quadrature(self, n: int) -> SphereQuadrature:
        """
        An independent sphere rule for cross-checks against
        :meth:`sphere_quadrature`: roughly twice the nodes for the
        deterministic rules, a fresh seed for Monte-Carlo.
        """
        cache = self.__dict__.setdefault("_cross_rules", {})
        if n not in cache:
            base = self.sphere_quadrature(n)
            count = 2 * base.node_count + 1 if base.deterministic else base.node_count
            cache[n] = SphereQuadrature.build(n, count, seed=self.seed + 1)
        return cache[n]

    def _domain_integral(
        self,
        integrand: Callable,
        domain: Region,
        breakpoints: Optional[Sequence[float]] = None,
    ) -> QuadResult:
        """
        Integrate a vectorized integrand over a ball, annulus or box.

        Shell quadrature for balls and annuli and iterated quadrature for
        boxes when n <= 3; scrambled Sobol points when n >= 4.
        """
        n = domain.dimension
        if n >= 4:
            lo, hi = domain.bounding_box()
            return sobol_integral(
                integrand,
                lo,
                hi,
                mask=lambda pts: domain.contains(pts, closed=False),
                log2_points=self.profile.qmc_log2_points,
                seed=self.seed,
            )
        if isinstance(domain, (Ball, Annulus)):
            rule = self.sphere_quadrature(n)
            r_in = domain.inner if isinstance(domain, Annulus) else 0.0
            r_out = domain.outer if isinstance(domain, Annulus) else domain.radius
            return radial_shell_integral(
                integrand,
                domain.center,
                r_in,
                r_out,
                rule.nodes,
                rule.weights,
                epsrel=self.profile.quad_epsrel,
                limit=self.profile.quad_limit,
                breakpoints=breakpoints,
            )
        if isinstance(domain, Box):
            return box_integral(
                integrand, domain.lower, domain.upper, epsrel=self.profile.quad_epsrel
            )
        raise ValidationError(
            f"domain must be a Ball, Annulus or Box, got {type(domain).__name__}"
        )
