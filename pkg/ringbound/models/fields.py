"""
Dilatation Fields
Catalog of scalar fields Q >= 0, sampled grid fields, and the affine pullback
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from ringbound.exceptions import ValidationError
from ringbound.models.geometry import Point, Region, as_point, as_points


class ScalarField(ABC):
    """
    A nonnegative field Q on R^n that vanishes outside its support.

    Subclasses implement ``_raw`` for points inside the support; ``values``
    applies the support mask. Values may be ``inf``.
    """

    support: Optional[Region]

    @property
    def dimension(self) -> Optional[int]:
        """Fixed dimension, or None for fields defined in every R^n."""
        return self.support.dimension if self.support is not None else None

    @property
    def kind(self) -> str:
        return type(self).__name__

    @abstractmethod
    def _raw(self, points: np.ndarray) -> np.ndarray:
        ...

    def values(self, points) -> np.ndarray:
        """
        Evaluate Q at an (m, n) array of finite points.

        Returns:
            Array of shape (m,) with values in [0, inf]
        """
        pts = as_points(points)
        if not np.all(np.isfinite(pts)):
            raise ValidationError("field evaluation needs finite points")
        if self.support is None:
            return self._raw(pts)
        out = np.zeros(pts.shape[0])
        inside = self.support.contains(pts, closed=True)
        if np.any(inside):
            out[inside] = self._raw(pts[inside])
        return out

    def __call__(self, x) -> float:
        return float(self.values(np.asarray(x, dtype=float)[None, :])[0])


@dataclass(frozen=True, eq=False)
class ConstantField(ScalarField):
    value: float
    support: Optional[Region] = None

    def __post_init__(self):
        if math.isnan(self.value) or self.value < 0:
            raise ValidationError(f"constant field value must lie in [0, inf], got {self.value}")

    def _raw(self, points: np.ndarray) -> np.ndarray:
        return np.full(points.shape[0], float(self.value))


@dataclass(frozen=True, eq=False)
class RadialPowerField(ScalarField):
    """Q(x) = |x - a|^{-s}, capped at ``clamp``; negative s gives growing powers."""

    exponent: float
    center: Point
    clamp: float = math.inf
    support: Optional[Region] = None

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center, "center"))
        if not self.clamp > 0:
            raise ValidationError(f"clamp must be positive, got {self.clamp}")

    def _raw(self, points: np.ndarray) -> np.ndarray:
        r = np.linalg.norm(points - np.asarray(self.center), axis=1)
        with np.errstate(divide="ignore", over="ignore"):
            q = np.power(r, -float(self.exponent))
        return np.minimum(q, self.clamp)


@dataclass(frozen=True, eq=False)
class LogPowerField(ScalarField):
    """Q(x) = (log(e / |x - a|))^m on |x - a| < 1, and 1 elsewhere."""

    power: float
    center: Point
    support: Optional[Region] = None

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center, "center"))
        if self.power < 0:
            raise ValidationError(f"log-power exponent must be >= 0, got {self.power}")

    def _raw(self, points: np.ndarray) -> np.ndarray:
        r = np.linalg.norm(points - np.asarray(self.center), axis=1)
        out = np.ones_like(r)
        near = r < 1.0
        with np.errstate(divide="ignore"):
            out[near] = np.power(1.0 - np.log(r[near]), self.power)
        return out


@dataclass(frozen=True, eq=False)
class GridField(ScalarField):
    """
    Sampled field on a uniform grid over the box [lower, upper].

    Samples sit at cell centres. Inside the outer ring of centres the field is
    multilinear; between the outer centres and the box faces it takes the
    nearest value. Points outside the box get ``default`` or raise.
    """

    lower: Point
    upper: Point
    samples: np.ndarray
    default: Optional[float] = None
    support: Optional[Region] = None
    _interp: RegularGridInterpolator = field(init=False, repr=False)

    def __post_init__(self):
        lower, upper = as_point(self.lower, "lower"), as_point(self.upper, "upper")
        samples = np.array(self.samples, dtype=float)
        if samples.ndim != len(lower) or len(lower) != len(upper):
            raise ValidationError(
                f"grid of shape {samples.shape} does not match extents of dimension {len(lower)}"
            )
        if any(c < 2 for c in samples.shape):
            raise ValidationError(f"grid needs at least 2 samples per axis, got {samples.shape}")
        if not all(a < b for a, b in zip(lower, upper)):
            raise ValidationError("grid extents need lower < upper on every axis")
        if np.isnan(samples).any() or (samples < 0).any():
            raise ValidationError("grid samples must be nonnegative numbers")
        if self.default is not None and not self.default >= 0:
            raise ValidationError(f"grid default must be nonnegative, got {self.default}")
        samples.setflags(write=False)
        axes = self.axes_for(lower, upper, samples.shape)
        interp = RegularGridInterpolator(axes, samples, method="linear", bounds_error=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "_interp", interp)

    @staticmethod
    def axes_for(
        lower: Sequence[float], upper: Sequence[float], shape: Sequence[int]
    ) -> Tuple[np.ndarray, ...]:
        """Cell-centre coordinates along each axis."""
        axes = []
        for lo, hi, count in zip(lower, upper, shape):
            h = (hi - lo) / count
            axes.append(lo + h * (np.arange(count) + 0.5))
        return tuple(axes)

    @property
    def dimension(self) -> int:
        return len(self.lower)

    @property
    def counts(self) -> Tuple[int, ...]:
        return tuple(self.samples.shape)

    def _raw(self, points: np.ndarray) -> np.ndarray:
        if points.shape[1] != self.dimension:
            raise ValidationError(
                f"points have dimension {points.shape[1]}, grid has dimension {self.dimension}"
            )
        lo, hi = np.asarray(self.lower), np.asarray(self.upper)
        outside = np.any((points < lo) | (points > hi), axis=1)
        if np.any(outside) and self.default is None:
            raise ValidationError(
                f"{int(outside.sum())} point(s) fall outside the grid extents and no default is set"
            )
        first = np.array([a[0] for a in self._interp.grid])
        last = np.array([a[-1] for a in self._interp.grid])
        out = np.empty(points.shape[0])
        inside = ~outside
        if np.any(inside):
            out[inside] = self._interp(np.clip(points[inside], first, last))
        if np.any(outside):
            out[outside] = self.default
        return np.maximum(out, 0.0)


@dataclass(frozen=True, eq=False)
class PulledBackField(ScalarField):
    """Q~(x) = Q(scale * x + shift)."""

    base: ScalarField
    scale: float
    shift: Point
    support: Optional[Region] = None

    def __post_init__(self):
        object.__setattr__(self, "shift", as_point(self.shift, "shift"))
        if not 0 < self.scale < math.inf:
            raise ValidationError(f"pullback scale must be positive and finite, got {self.scale}")

    @property
    def dimension(self) -> Optional[int]:
        return self.base.dimension

    def _raw(self, points: np.ndarray) -> np.ndarray:
        return self.base.values(self.scale * points + np.asarray(self.shift))


def pullback(base: ScalarField, r0: float, x0: Sequence[float]) -> PulledBackField:
    """The field x -> Q(r0 * x + x0), used by the unit-ring substitution."""
    return PulledBackField(base=base, scale=float(r0), shift=as_point(x0, "x0"))


@dataclass(frozen=True)
class MassBudget:
    """Bound M0 on the weighted Orlicz mass of admissible fields."""

    M0: float

    def __post_init__(self):
        if not 0.0 < float(self.M0) < math.inf:
            raise ValidationError(f"M0 must satisfy 0 < M0 < inf, got {self.M0}")
        object.__setattr__(self, "M0", float(self.M0))
