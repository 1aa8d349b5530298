"""
Radial Operations
Spherical means, the ring integral I, the admissible weight psi and the
modulus bound omega / I^{p-1}
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np
from scipy.integrate import simpson

from ringbound.core.constants import unit_sphere_area
from ringbound.core.extended import INF, ext_div, ext_pow
from ringbound.exceptions import ValidationError
from ringbound.models.fields import ScalarField
from ringbound.models.geometry import Exponents, RingCondenser, as_point
from ringbound.models.results import FubiniCheck, RadialProfile, SphericalMeanEstimate
from ringbound.utils.quadrature import radial_shell_integral

logger = logging.getLogger(__name__)

# points evaluated per field call
_CHUNK = 2 ** 18


@dataclass(frozen=True)
class SphereQuadrature:
    """
    Fixed rule on the unit sphere S^{n-1}.

    ``nodes`` are unit vectors and ``weights`` sum to the sphere area.
    """

    n: int
    scheme: str
    nodes: np.ndarray
    weights: np.ndarray
    seed: int = 0

    @property
    def node_count(self) -> int:
        return int(self.nodes.shape[0])

    @property
    def deterministic(self) -> bool:
        return self.scheme != "monte-carlo"

    @classmethod
    def build(cls, n: int, node_count: int, seed: int = 0) -> "SphereQuadrature":
        """
        Build the rule for dimension n.

        Args:
            n: Dimension
            node_count: Requested number of nodes (>= 16); the product rule
                rounds it to 2k^2
            seed: Seed for the Monte-Carlo rule (n >= 4)

        Returns:
            trapezoid-on-angle (n = 2), product-Gauss (n = 3) or Monte-Carlo
        """
        if node_count < 16:
            raise ValidationError(f"node_count must be >= 16, got {node_count}")
        omega = unit_sphere_area(n)
        if n == 2:
            theta = 2.0 * math.pi * np.arange(node_count) / node_count
            nodes = np.column_stack([np.cos(theta), np.sin(theta)])
            weights = np.full(node_count, omega / node_count)
            scheme = "trapezoid"
        elif n == 3:
            k = max(3, int(round(math.sqrt(node_count / 2.0))))
            x, w = np.polynomial.legendre.leggauss(k)
            phi = 2.0 * math.pi * np.arange(2 * k) / (2 * k)
            cos_t, azim = np.meshgrid(x, phi, indexing="ij")
            sin_t = np.sqrt(1.0 - cos_t ** 2)
            nodes = np.column_stack(
                [(sin_t * np.cos(azim)).ravel(), (sin_t * np.sin(azim)).ravel(), cos_t.ravel()]
            )
            weights = np.repeat(w, 2 * k) * (math.pi / k)
            scheme = "product-gauss"
        else:
            rng = np.random.default_rng(seed)
            g = rng.standard_normal((node_count, n))
            nodes = g / np.linalg.norm(g, axis=1, keepdims=True)
            weights = np.full(node_count, omega / node_count)
            scheme = "monte-carlo"
        nodes.setflags(write=False)
        weights.setflags(write=False)
        return cls(n=n, scheme=scheme, nodes=nodes, weights=weights, seed=seed)


def modulus_upper_bound(I: float, exps: Exponents) -> float:
    """
    Bound omega_{n-1} / I^{p-1} on the modulus of the image path family
    (and on the capacity of the image condenser).

    Args:
        I: Ring integral in [0, inf]
        exps: Exponents (n, p)

    Returns:
        0 when I = inf, inf when I = 0
    """
    return ext_div(unit_sphere_area(exps.n), ext_pow(I, exps.p - 1.0))


@dataclass(frozen=True)
class RadialWeight:
    """The normalized weight eta(t) = psi(t) / I on (r1, r2); zero outside."""

    field: ScalarField
    ring: RingCondenser
    exps: Exponents
    integral: float
    rule: SphereQuadrature

    def __call__(self, t: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.zeros_like(t_arr)
        inside = (t_arr > self.ring.r1) & (t_arr < self.ring.r2)
        if np.any(inside):
            q = _means_at(self.field, self.ring.center, t_arr[inside], self.rule)
            out[inside] = _psi(t_arr[inside], q, self.exps) / self.integral
        return float(out[0]) if np.ndim(t) == 0 else out


def _means_at(
    field: ScalarField, center: np.ndarray, radii: np.ndarray, rule: SphereQuadrature
) -> np.ndarray:
    """Spherical means at several radii through one rule."""
    radii = np.asarray(radii, dtype=float)
    omega = unit_sphere_area(rule.n)
    per_chunk = max(1, _CHUNK // rule.node_count)
    out = np.empty(radii.size)
    for start in range(0, radii.size, per_chunk):
        block = radii[start:start + per_chunk]
        pts = center[None, None, :] + block[:, None, None] * rule.nodes[None, :, :]
        vals = field.values(pts.reshape(-1, rule.n)).reshape(block.size, rule.node_count)
        with np.errstate(invalid="ignore"):
            out[start:start + block.size] = vals @ rule.weights / omega
    return out


def _psi(t: np.ndarray, q: np.ndarray, exps: Exponents, radial_power: Optional[float] = None):
    """psi(t) = 1 / (t^k q(t)^{1/(p-1)}) with q = 0 giving inf and q = inf giving 0."""
    k = exps.radial_power if radial_power is None else radial_power
    with np.errstate(divide="ignore", over="ignore"):
        return np.power(t, -k) * np.power(q, -exps.mean_power)


class RadialMixin:
    """Mixin for spherical means and ring-integral bounds"""

    def spherical_mean(self, field: ScalarField, x0, t: float, n: Optional[int] = None) -> float:
        """
        Mean of Q over the sphere S(x0, t).

        Args:
            field: Dilatation field
            x0: Sphere center
            t: Radius (> 0)
            n: Dimension; defaults to len(x0)

        Returns:
            Mean value in [0, inf]
        """
        return self.spherical_mean_with_error(field, x0, t, n).value

    def spherical_mean_with_error(
        self, field: ScalarField, x0, t: float, n: Optional[int] = None
    ) -> SphericalMeanEstimate:
        """Spherical mean together with a standard error (Monte-Carlo rules only)."""
        center = np.asarray(as_point(x0, "x0"))
        n = n or center.size
        if not t > 0:
            raise ValidationError(f"radius t must be positive, got {t}")
        rule = self.sphere_quadrature(n)
        vals = field.values(center + t * rule.nodes)
        with np.errstate(invalid="ignore"):
            mean = float(vals @ rule.weights / unit_sphere_area(n))
        stderr = 0.0
        if not rule.deterministic and np.all(np.isfinite(vals)):
            stderr = float(np.std(vals, ddof=1) / math.sqrt(rule.node_count))
            if mean > 0 and stderr > 1e-2 * mean:
                logger.warning(
                    "Monte-Carlo spherical mean at t=%g has relative stderr %.2e", t, stderr / mean
                )
        return SphericalMeanEstimate(mean, stderr, rule.scheme, rule.node_count)

    def radial_profile(
        self, field: ScalarField, ring: RingCondenser, count: int = 200
    ) -> RadialProfile:
        """q(t) at ``count`` log-spaced radii strictly inside (r1, r2)."""
        if count < 2:
            raise ValidationError(f"count must be >= 2, got {count}")
        edges = np.linspace(math.log(ring.r1), math.log(ring.r2), count + 1)
        t_grid = np.exp(0.5 * (edges[:-1] + edges[1:]))
        q = _means_at(field, ring.center, t_grid, self.sphere_quadrature(ring.dimension))
        return RadialProfile(t_grid=t_grid, q_values=q)

    def ring_integral_I(
        self, field: ScalarField, ring: RingCondenser, exps: Exponents, resolution: int = 64
    ) -> float:
        """
        Ring integral I(x0, r1, r2) of the field.

        Composite Simpson on a log-spaced radius grid; the node count doubles
        until two estimates agree to ``radial_rtol`` or ``radial_max_nodes``
        is reached.

        Args:
            field: Dilatation field Q
            ring: Ring A(x0, r1, r2)
            exps: Exponents (n, p)
            resolution: Initial number of subintervals (>= 32)

        Returns:
            I in [0, inf]; inf as soon as q vanishes on an interval
        """
        return self._ring_integral(field, ring, exps, resolution)

    def scaled_ring_integral(
        self, field: ScalarField, inner: float, outer: float, exps: Exponents, resolution: int = 64
    ) -> float:
        """
        Integral of dt / (t q(t)^{1/(p-1)}) over (inner, outer) about the origin.

        Applied to ``pullback(Q, r0, x0)`` on (eps / r0, 1) it reproduces the
        ring integral of Q on (eps, r0) when p = n, and bounds it from below
        for r0 <= 1 when p < n.
        """
        ring = RingCondenser((0.0,) * exps.n, inner, outer)
        return self._ring_integral(field, ring, exps, resolution, radial_power=1.0)

    def _ring_integral(
        self,
        field: ScalarField,
        ring: RingCondenser,
        exps: Exponents,
        resolution: int,
        radial_power: Optional[float] = None,
    ) -> float:
        if resolution < 32:
            raise ValidationError(f"resolution must be >= 32, got {resolution}")
        if ring.dimension != exps.n:
            raise ValidationError(
                f"ring center has dimension {ring.dimension}, exponents say n = {exps.n}"
            )
        rule = self.sphere_quadrature(exps.n)
        cap = self.profile.radial_max_nodes
        intervals = resolution + (resolution % 2)
        s_lo, s_hi = math.log(ring.r1), math.log(ring.r2)

        def integrand(s: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
            r = np.exp(s)
            chunks = np.array_split(r, max(1, min(self.jobs, r.size // 64)))
            q = np.concatenate(
                self._map(lambda block: _means_at(field, ring.center, block, rule), chunks)
            )
            return r * _psi(r, q, exps, radial_power), q

        s = np.linspace(s_lo, s_hi, intervals + 1)
        g, q = integrand(s)
        previous = None
        while True:
            value = _simpson_extended(s, g, q)
            if math.isinf(value):
                logger.debug("ring integral is infinite: q vanishes on an interval")
                return INF
            tol = self.profile.radial_rtol * abs(value)
            if previous is not None and abs(value - previous) <= tol:
                return value
            if 2 * intervals > cap:
                logger.warning(
                    "ring integral stopped at %d nodes with relative change %.2e",
                    intervals + 1,
                    abs(value - previous) / abs(value) if previous and value else float("nan"),
                )
                return value
            mids = 0.5 * (s[:-1] + s[1:])
            g_mid, q_mid = integrand(mids)
            s = _interleave(s, mids)
            g = _interleave(g, g_mid)
            q = _interleave(q, q_mid)
            intervals *= 2
            previous = value
            logger.debug("ring integral refined to %d intervals: %.15g", intervals, value)

    def fubini_check(
        self, field: ScalarField, ring: RingCondenser, exps: Exponents, resolution: int = 256
    ) -> FubiniCheck:
        """
        Compare the volume integral of Q psi^p over the ring with omega * I.

        The volume side uses :meth:`cross_check_quadrature` on each sphere,
        so the two sides share no angular rule.

        Returns:
            FubiniCheck with lhs (volume quadrature) and rhs (omega_{n-1} I)

        Raises:
            ValidationError: If I is 0 or inf
        """
        I = self.ring_integral_I(field, ring, exps, resolution)
        if not 0.0 < I < INF:
            raise ValidationError(f"Fubini identity needs 0 < I < inf, got I = {I}")
        rule = self.cross_check_quadrature(exps.n)
        omega = unit_sphere_area(exps.n)
        p = exps.p

        def volume_density(points: np.ndarray) -> np.ndarray:
            q_vals = field.values(points)
            r = np.linalg.norm(points - ring.center, axis=1)
            with np.errstate(invalid="ignore"):
                q_mean = float(q_vals @ rule.weights) / omega
            psi = _psi(r, np.full_like(r, q_mean), exps)
            with np.errstate(invalid="ignore"):
                return q_vals * np.power(psi, p)

        # one call per sphere, so q_mean above is the mean on that sphere
        result = radial_shell_integral(
            volume_density,
            ring.center,
            ring.r1,
            ring.r2,
            rule.nodes,
            rule.weights,
            epsrel=self.profile.quad_epsrel,
            limit=self.profile.quad_limit,
        )
        if result.diverged:
            logger.warning("Fubini volume quadrature diverged")
        return FubiniCheck(lhs=result.value, rhs=omega * I, abserr=result.abserr)

    def normalized_eta(
        self, field: ScalarField, ring: RingCondenser, exps: Exponents, resolution: int = 64
    ) -> RadialWeight:
        """
        The admissible weight eta(t) = psi(t) / I, which integrates to 1 over (r1, r2).

        Raises:
            ValidationError: If I is 0 or inf
        """
        I = self.ring_integral_I(field, ring, exps, resolution)
        if not 0.0 < I < INF:
            raise ValidationError(f"eta is undefined for I = {I}")
        return RadialWeight(field, ring, exps, I, self.sphere_quadrature(exps.n))

    def modulus_upper_bound(self, I: float, exps: Exponents) -> float:
        return modulus_upper_bound(I, exps)


def _interleave(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.empty(a.size + b.size)
    out[0::2] = a
    out[1::2] = b
    return out


def _simpson_extended(s: np.ndarray, g: np.ndarray, q: np.ndarray) -> float:
    """
    Simpson's rule for an integrand in [0, inf].

    Two neighbouring nodes with q = 0 make the integral infinite; an isolated
    zero is a measure-zero event and takes the average of its neighbours.
    q = inf already gives g = 0.
    """
    zero = q == 0.0
    if np.any(zero[1:] & zero[:-1]):
        return INF
    g = g.copy()
    for idx in np.flatnonzero(zero):
        neighbours: List[float] = [g[j] for j in (idx - 1, idx + 1) if 0 <= j < g.size]
        g[idx] = float(np.mean(neighbours))
    if not np.all(np.isfinite(g)):
        return INF
    return float(simpson(g, x=s))
