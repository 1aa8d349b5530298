"""
Result Records
Reports, curves and certificates returned by the toolkit
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np


@dataclass(frozen=True)
class MassCheck:
    """Weighted Orlicz mass of a field over a domain."""

    integral: float
    satisfied: bool
    diverged: bool
    method: str
    abserr: float = 0.0


@dataclass(frozen=True)
class DivergenceReport:
    """Outcome of the divergence diagnostic for one exponent q."""

    exponent: float
    delta0: float
    horizon: float
    partial_integral: float
    verdict: str


@dataclass(frozen=True)
class RadialProfile:
    """Spherical means q(t) on an increasing radius grid."""

    t_grid: np.ndarray
    q_values: np.ndarray

    def rows(self) -> List[Tuple[float, float]]:
        return [(float(t), float(q)) for t, q in zip(self.t_grid, self.q_values)]


@dataclass(frozen=True)
class SphericalMeanEstimate:
    """Spherical mean with a standard error (zero for deterministic rules)."""

    value: float
    stderr: float
    scheme: str
    node_count: int


@dataclass(frozen=True)
class FubiniCheck:
    lhs: float
    rhs: float
    abserr: float

    @property
    def relative_gap(self) -> float:
        return abs(self.lhs - self.rhs) / self.rhs


@dataclass(frozen=True)
class AnnulusMeanReport:
    m_star: float
    beta: float
    m_star_upper: float
    valid_regime: bool


@dataclass(frozen=True)
class OrliczBoundReport:
    """Lower bound on the ring integral together with the limits it used."""

    value: float
    log_lower_limit: float
    log_upper_limit: float
    empty: bool
    phi_floor_used: bool = False
    budget_inconsistent: bool = False


@dataclass(frozen=True)
class EpsilonStarResult:
    """
    Largest grid radius r_* below which the Orlicz bound reaches sigma.

    ``reason`` is empty when found, otherwise ``divergence-condition-fails`` or
    ``needs-smaller-epsilon``. ``divergence_fails`` is set whenever the gauge
    provably violates the divergence condition, found or not.
    """

    found: bool
    r_star: Optional[float]
    sigma: float
    reason: str
    floor: float
    bound_at_floor: float
    conditional: bool
    grid_step: float
    divergence_fails: bool = False


@dataclass(frozen=True)
class OrliczBoundCurve:
    epsilons: np.ndarray
    lower_bounds: np.ndarray
    sigma_target: float
    r_star: Optional[float]

    def rows(self) -> List[Tuple[float, float, bool]]:
        return [
            (float(e), float(b), bool(b >= self.sigma_target))
            for e, b in zip(self.epsilons, self.lower_bounds)
        ]


@dataclass
class GridSolution:
    """Discrete p-harmonic potential of a condenser on a uniform node grid."""

    resolution: int
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]
    potential: np.ndarray
    energy: float
    iterations: int
    residual: float
    converged: bool
    wall_time: float = 0.0

    @property
    def spacing(self) -> float:
        return (self.upper[0] - self.lower[0]) / (self.potential.shape[0] - 1)


@dataclass
class Certificate:
    """
    Tabulated bound curve with the chain of inequalities that produced it.

    ``bounds[k]`` belongs to ``epsilons[k]``; inf means the chain gives no
    information at that radius.
    """

    kind: str
    inputs: Dict[str, Any]
    epsilons: np.ndarray
    bounds: np.ndarray
    provenance: List[str]
    conditional: bool = False
    status: str = "ok"
    notes: List[str] = field(default_factory=list)
    stages: Dict[str, np.ndarray] = field(default_factory=dict)

    def rows(self) -> List[Tuple[float, float]]:
        return [(float(e), float(b)) for e, b in zip(self.epsilons, self.bounds)]

    @property
    def finite_count(self) -> int:
        return int(np.isfinite(self.bounds).sum())


@dataclass
class SweepReport:
    """Measured image diameters against a diameter certificate."""

    alphas: List[float]
    epsilons: np.ndarray
    measured: Dict[float, np.ndarray]
    certificate: Certificate
    violations: List[Tuple[float, float, float, float]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations
