"""
Orlicz Gauges
Strictly increasing convex functions Phi with evaluable inverses
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import bisect

from ringbound.exceptions import ValidationError

DIVERGES = "diverges-closed-form"
CONVERGES = "converges-closed-form"
INCONCLUSIVE = "inconclusive-numeric"


class OrliczGauge(ABC):
    """Base class for gauges Phi: [0, inf) -> [0, inf)."""

    @property
    def kind(self) -> str:
        return type(self).__name__

    @property
    def phi0(self) -> float:
        """Phi(0), the threshold tau_0."""
        return float(self.phi(np.array([0.0]))[0])

    @abstractmethod
    def phi(self, t: np.ndarray) -> np.ndarray:
        """Evaluate Phi elementwise; overflow gives inf."""

    @abstractmethod
    def inverse(self, tau: float) -> float:
        """Phi^{-1}(tau) for tau >= Phi(0)."""

    def log_inverse(self, u: float) -> float:
        """Phi^{-1}(e^u), evaluated without forming e^u where possible."""
        if u > 709.0:
            return math.inf
        return self.inverse(math.exp(u))

    def divergence_verdict(self, q: float) -> Optional[bool]:
        """
        Closed-form answer to whether the integral of dtau / (tau Phi^{-1}(tau)^q)
        diverges at infinity; None when no closed form is known.
        """
        return None

    def _check_tau(self, tau: float) -> float:
        tau = float(tau)
        if math.isnan(tau) or tau < self.phi0:
            raise ValidationError(f"tau must be >= Phi(0) = {self.phi0}, got {tau}")
        return tau

    def __call__(self, t) -> np.ndarray:
        return self.phi(np.asarray(t, dtype=float))


@dataclass(frozen=True)
class ExponentialGauge(OrliczGauge):
    """Phi(t) = e^t."""

    def phi(self, t: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(np.asarray(t, dtype=float))

    def inverse(self, tau: float) -> float:
        return math.log(self._check_tau(tau))

    def log_inverse(self, u: float) -> float:
        if u < 0.0:
            raise ValidationError(f"tau must be >= Phi(0) = 1, got exp({u})")
        return float(u)

    def divergence_verdict(self, q: float) -> Optional[bool]:
        return q <= 1.0


@dataclass(frozen=True)
class PowerExponentialGauge(OrliczGauge):
    """Phi(t) = exp(t^beta), convex for beta >= 1."""

    beta: float

    def __post_init__(self):
        if not 1.0 <= self.beta < math.inf:
            raise ValidationError(f"beta must satisfy beta >= 1, got {self.beta}")

    def phi(self, t: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(np.power(np.maximum(np.asarray(t, dtype=float), 0.0), self.beta))

    def inverse(self, tau: float) -> float:
        return math.log(self._check_tau(tau)) ** (1.0 / self.beta)

    def log_inverse(self, u: float) -> float:
        if u < 0.0:
            raise ValidationError(f"tau must be >= Phi(0) = 1, got exp({u})")
        return float(u) ** (1.0 / self.beta)

    def divergence_verdict(self, q: float) -> Optional[bool]:
        return q / self.beta <= 1.0


@dataclass(frozen=True)
class PowerGauge(OrliczGauge):
    """Phi(t) = (1 + t)^alpha with alpha >= 1; the divergence integral always converges."""

    alpha: float

    def __post_init__(self):
        if not 1.0 <= self.alpha < math.inf:
            raise ValidationError(f"alpha must satisfy alpha >= 1, got {self.alpha}")

    def phi(self, t: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.power(1.0 + np.asarray(t, dtype=float), self.alpha)

    def inverse(self, tau: float) -> float:
        return self._check_tau(tau) ** (1.0 / self.alpha) - 1.0

    def log_inverse(self, u: float) -> float:
        if u < 0.0:
            raise ValidationError(f"tau must be >= Phi(0) = 1, got exp({u})")
        return math.expm1(u / self.alpha)

    def divergence_verdict(self, q: float) -> Optional[bool]:
        return False


@dataclass(frozen=True, eq=False)
class TabulatedGauge(OrliczGauge):
    """
    Gauge given by samples (t_k, Phi(t_k)) starting at t_0 = 0.
    Piecewise linear between samples, extended past the last sample with the
    last slope. The samples must increase strictly and have nondecreasing
    slopes (discrete convexity).
    """

    t: np.ndarray
    values: np.ndarray
    rtol: float = 1e-10

    def __post_init__(self):
        t = np.array(self.t, dtype=float)
        values = np.array(self.values, dtype=float)
        if t.ndim != 1 or t.shape != values.shape or t.size < 2:
            raise ValidationError("tabulated gauge needs two 1-D arrays of equal length >= 2")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(values))):
            raise ValidationError("tabulated gauge samples must be finite")
        if t[0] != 0.0:
            raise ValidationError(f"tabulated gauge must start at t = 0, got {t[0]}")
        if values[0] < 0.0:
            raise ValidationError(f"Phi(0) must be >= 0, got {values[0]}")
        if np.any(np.diff(t) <= 0) or np.any(np.diff(values) <= 0):
            raise ValidationError("tabulated gauge must be strictly increasing")
        slopes = np.diff(values) / np.diff(t)
        slack = 1e-9 * np.maximum(np.abs(slopes[:-1]), 1.0)
        if np.any(np.diff(slopes) < -slack):
            raise ValidationError("tabulated gauge must be convex (nondecreasing slopes)")
        t.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", values)

    @classmethod
    def sample(cls, gauge: OrliczGauge, t_max: float, count: int = 10001) -> "TabulatedGauge":
        """Tabulate a catalog gauge on a uniform grid over [0, t_max]."""
        t = np.linspace(0.0, t_max, count)
        return cls(t=t, values=gauge.phi(t))

    @property
    def phi0(self) -> float:
        return float(self.values[0])

    def phi(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.interp(t, self.t, self.values)
        last_slope = (self.values[-1] - self.values[-2]) / (self.t[-1] - self.t[-2])
        first_slope = (self.values[1] - self.values[0]) / (self.t[1] - self.t[0])
        beyond = t > self.t[-1]
        below = t < 0.0
        out = np.where(beyond, self.values[-1] + last_slope * (t - self.t[-1]), out)
        return np.where(below, self.values[0] + first_slope * t, out)

    def inverse(self, tau: float) -> float:
        tau = self._check_tau(tau)
        if tau == self.phi0:
            return 0.0
        hi = float(self.t[-1])
        while float(self.phi(np.array([hi]))[0]) < tau:
            hi *= 2.0
            if not math.isfinite(hi):
                return math.inf
        return float(
            bisect(
                lambda s: float(self.phi(np.array([s]))[0]) - tau,
                0.0,
                hi,
                xtol=1e-300,
                rtol=max(self.rtol, 4 * np.finfo(float).eps),
                maxiter=400,
            )
        )
