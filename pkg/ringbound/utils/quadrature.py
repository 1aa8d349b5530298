"""
Quadrature Helpers
Adaptive 1-D quadrature with divergence flags, shell-wise volume integrals,
box integrals, and scrambled Sobol integration
"""

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate
from scipy.integrate import IntegrationWarning
from scipy.stats import qmc

logger = logging.getLogger(__name__)

VectorIntegrand = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class QuadResult:
    value: float
    abserr: float
    converged: bool
    diverged: bool


def _classify(value: float, abserr: float, converged: bool) -> QuadResult:
    diverged = not math.isfinite(value) or (
        not converged and abserr > 1e-2 * max(abs(value), 1e-300)
    )
    if diverged:
        return QuadResult(math.inf, abserr, False, True)
    return QuadResult(float(value), float(abserr), converged, False)


def adaptive_quad(
    func: Callable[[float], float],
    a: float,
    b: float,
    epsrel: float = 1e-10,
    limit: int = 200,
    points: Optional[Sequence[float]] = None,
) -> QuadResult:
    """
    Adaptive Gauss-Kronrod quadrature of a scalar function.

    Args:
        func: Integrand
        a: Lower limit
        b: Upper limit (may be inf)
        epsrel: Relative tolerance
        limit: Subinterval cap
        points: Interior breakpoints (finite limits only)

    Returns:
        QuadResult; ``diverged`` is set when the value is not finite or the
        error estimate stays large after QUADPACK gives up
    """
    if a == b:
        return QuadResult(0.0, 0.0, True, False)
    kwargs = {"epsabs": 0.0, "epsrel": epsrel, "limit": limit}
    if points is not None and math.isfinite(a) and math.isfinite(b):
        inner = sorted(p for p in points if a < p < b)
        if inner:
            kwargs["points"] = inner
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", IntegrationWarning)
        with np.errstate(all="ignore"):
            value, abserr = integrate.quad(func, a, b, **kwargs)
    converged = not any(issubclass(w.category, IntegrationWarning) for w in caught)
    if not converged:
        logger.debug(
            "quad on [%g, %g] did not reach epsrel=%g: value=%g abserr=%g",
            a, b, epsrel, value, abserr,
        )
    return _classify(value, abserr, converged)


def radial_shell_integral(
    integrand: VectorIntegrand,
    center: Sequence[float],
    r_in: float,
    r_out: float,
    nodes: np.ndarray,
    weights: np.ndarray,
    epsrel: float = 1e-10,
    limit: int = 200,
    breakpoints: Optional[Sequence[float]] = None,
) -> QuadResult:
    """
    Integrate over the shell r_in < |x - center| < r_out.

    The radius is handled adaptively; each sphere uses the fixed rule given by
    unit ``nodes`` and ``weights``.
    """
    c = np.asarray(center, dtype=float)
    n = c.size

    def shell(r: float) -> float:
        if r == 0.0:
            return 0.0
        vals = integrand(c + r * nodes)
        with np.errstate(invalid="ignore"):
            total = float(np.dot(weights, vals))
        return r ** (n - 1) * total

    return adaptive_quad(shell, r_in, r_out, epsrel=epsrel, limit=limit, points=breakpoints)


def box_integral(
    integrand: VectorIntegrand,
    lower: Sequence[float],
    upper: Sequence[float],
    epsrel: float = 1e-10,
) -> QuadResult:
    """Iterated adaptive quadrature over a box in two or three dimensions."""
    lo, hi = [float(v) for v in lower], [float(v) for v in upper]
    n = len(lo)

    def point_value(*coords: float) -> float:
        return float(integrand(np.array(coords[::-1])[None, :])[0])

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", IntegrationWarning)
        with np.errstate(all="ignore"):
            if n == 2:
                value, abserr = integrate.dblquad(
                    point_value, lo[0], hi[0], lo[1], hi[1], epsabs=0.0, epsrel=epsrel
                )
            elif n == 3:
                value, abserr = integrate.tplquad(
                    point_value, lo[0], hi[0], lo[1], hi[1], lo[2], hi[2],
                    epsabs=0.0, epsrel=epsrel,
                )
            else:
                raise ValueError(f"box_integral supports n = 2 or 3, got {n}")
    converged = not caught
    return _classify(value, abserr, converged)


def sobol_integral(
    integrand: VectorIntegrand,
    lower: Sequence[float],
    upper: Sequence[float],
    mask: Callable[[np.ndarray], np.ndarray],
    log2_points: int = 20,
    seed: int = 0,
    batch_log2: int = 16,
) -> QuadResult:
    """
    Scrambled Sobol estimate of the integral of ``integrand`` over
    {x in box : mask(x)}.

    The error estimate is the sample standard error, so a heavy tail shows up
    as a large ``abserr`` rather than an exception.
    """
    lo, hi = np.asarray(lower, dtype=float), np.asarray(upper, dtype=float)
    volume = float(np.prod(hi - lo))
    sampler = qmc.Sobol(d=lo.size, scramble=True, seed=seed)
    total, total_sq, count = 0.0, 0.0, 0
    batch = 2 ** min(batch_log2, log2_points)
    remaining = 2 ** log2_points
    while remaining > 0:
        unit = sampler.random_base2(int(math.log2(batch))) if count == 0 else sampler.random(batch)
        pts = qmc.scale(unit, lo, hi)
        vals = np.zeros(batch)
        inside = mask(pts)
        if np.any(inside):
            vals[inside] = integrand(pts[inside])
        if not np.all(np.isfinite(vals)):
            return QuadResult(math.inf, math.inf, False, True)
        total += float(vals.sum())
        total_sq += float(np.dot(vals, vals))
        count += batch
        remaining -= batch
    mean = total / count
    var = max(total_sq / count - mean * mean, 0.0)
    stderr = volume * math.sqrt(var / count)
    logger.debug("sobol integral over %d points: %g +- %g", count, volume * mean, stderr)
    return QuadResult(volume * mean, stderr, True, False)
