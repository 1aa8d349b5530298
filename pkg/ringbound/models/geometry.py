"""
Geometry Models
Exponents, dimensional constants, round rings, and the set descriptors used
for integration domains and condensers
"""

import itertools
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np

from ringbound.core.constants import unit_ball_volume, unit_sphere_area
from ringbound.exceptions import ValidationError

Point = Tuple[float, ...]


def as_point(x: Union[Sequence[float], np.ndarray], name: str = "point") -> Point:
    """
    Coerce a coordinate sequence to an immutable tuple of finite floats.

    Raises:
        ValidationError: If the point is empty or has non-finite coordinates
    """
    coords = tuple(float(c) for c in np.ravel(np.asarray(x, dtype=float)))
    if not coords:
        raise ValidationError(f"{name} must have at least one coordinate")
    if not all(math.isfinite(c) for c in coords):
        raise ValidationError(f"{name} must have finite coordinates, got {coords}")
    return coords


def as_points(points: Union[Sequence[Sequence[float]], np.ndarray]) -> np.ndarray:
    """Return points as a float array of shape (m, n)."""
    return np.atleast_2d(np.asarray(points, dtype=float))


@dataclass(frozen=True)
class Exponents:
    """
    Dimension n and modulus exponent p with 1 < p <= n.

    Operations needing p in (n-1, n) or p = n check it themselves.
    """

    n: int
    p: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValidationError(f"n must be an integer >= 2, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "p", float(self.p))
        if not 1.0 < self.p <= self.n:
            raise ValidationError(f"p must satisfy 1 < p <= n = {self.n}, got {self.p}")

    @property
    def is_conformal(self) -> bool:
        return self.p == self.n

    @property
    def radial_power(self) -> float:
        """(n-1)/(p-1), the power of r in the ring integral."""
        return (self.n - 1) / (self.p - 1)

    @property
    def mean_power(self) -> float:
        """1/(p-1), the power of the spherical mean in the ring integral."""
        return 1.0 / (self.p - 1)

    def require_between(self) -> None:
        """Require n - 1 < p < n."""
        if not self.n - 1 < self.p < self.n:
            raise ValidationError(
                f"p must satisfy n - 1 < p < n for n = {self.n}, got {self.p}"
            )


@dataclass(frozen=True)
class DimensionalConstants:
    """omega = area of S^{n-1}, big_omega = volume of the unit ball."""

    n: int
    omega: float
    big_omega: float

    @classmethod
    def for_dimension(cls, n: int) -> "DimensionalConstants":
        return cls(n=int(n), omega=unit_sphere_area(n), big_omega=unit_ball_volume(n))


@dataclass(frozen=True)
class RingCondenser:
    """The ring A(x0, r1, r2) = {r1 < |x - x0| < r2}."""

    x0: Point
    r1: float
    r2: float

    def __post_init__(self):
        object.__setattr__(self, "x0", as_point(self.x0, "x0"))
        r1, r2 = float(self.r1), float(self.r2)
        if not (math.isfinite(r1) and math.isfinite(r2)):
            raise ValidationError(f"ring radii must be finite, got r1={r1}, r2={r2}")
        if r1 <= 0.0:
            raise ValidationError(f"r1 must be positive, got {r1}")
        if r1 >= r2:
            raise ValidationError(f"r1 must be smaller than r2, got r1={r1}, r2={r2}")
        object.__setattr__(self, "r1", r1)
        object.__setattr__(self, "r2", r2)

    @property
    def center(self) -> np.ndarray:
        return np.asarray(self.x0, dtype=float)

    @property
    def dimension(self) -> int:
        return len(self.x0)

    @property
    def log_ratio(self) -> float:
        return math.log(self.r2 / self.r1)


# =========================================================================
# Set descriptors
# =========================================================================


class Region(ABC):
    """A bounded set in R^n described in closed form."""

    @property
    @abstractmethod
    def dimension(self) -> int:
        ...

    @abstractmethod
    def contains(self, points: np.ndarray, closed: bool = False) -> np.ndarray:
        """Membership mask for an (m, n) array of points."""

    @abstractmethod
    def bounding_box(self) -> Tuple[np.ndarray, np.ndarray]:
        ...

    @abstractmethod
    def measure(self) -> float:
        """n-dimensional Lebesgue measure."""

    @abstractmethod
    def diameter(self) -> float:
        ...

    @abstractmethod
    def extreme_points(self) -> np.ndarray:
        """Points whose membership in a convex set implies containment of this one."""

    def rasterize(self, points: np.ndarray, spacing: float) -> np.ndarray:
        """Grid nodes treated as belonging to the closed set at the given node spacing."""
        return self.contains(points, closed=True)

    def _check_points(self, points: np.ndarray) -> np.ndarray:
        pts = as_points(points)
        if pts.shape[1] != self.dimension:
            raise ValidationError(
                f"points have dimension {pts.shape[1]}, region has dimension {self.dimension}"
            )
        return pts


@dataclass(frozen=True)
class Ball(Region):
    center: Point
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center, "center"))
        if not 0.0 < float(self.radius) < math.inf:
            raise ValidationError(f"ball radius must be positive and finite, got {self.radius}")
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dimension(self) -> int:
        return len(self.center)

    def contains(self, points: np.ndarray, closed: bool = False) -> np.ndarray:
        dist = np.linalg.norm(self._check_points(points) - np.asarray(self.center), axis=1)
        return dist <= self.radius if closed else dist < self.radius

    def bounding_box(self) -> Tuple[np.ndarray, np.ndarray]:
        c = np.asarray(self.center)
        return c - self.radius, c + self.radius

    def measure(self) -> float:
        return unit_ball_volume(self.dimension) * self.radius ** self.dimension

    def diameter(self) -> float:
        return 2.0 * self.radius

    def extreme_points(self) -> np.ndarray:
        eye = np.eye(self.dimension)
        c = np.asarray(self.center)
        return np.vstack([c + self.radius * eye, c - self.radius * eye])


@dataclass(frozen=True)
class Annulus(Region):
    center: Point
    inner: float
    outer: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center, "center"))
        inner, outer = float(self.inner), float(self.outer)
        if not 0.0 <= inner < outer < math.inf:
            raise ValidationError(
                f"annulus radii must satisfy 0 <= inner < outer < inf, got {inner}, {outer}"
            )
        object.__setattr__(self, "inner", inner)
        object.__setattr__(self, "outer", outer)

    @property
    def dimension(self) -> int:
        return len(self.center)

    def contains(self, points: np.ndarray, closed: bool = False) -> np.ndarray:
        dist = np.linalg.norm(self._check_points(points) - np.asarray(self.center), axis=1)
        if closed:
            return (dist >= self.inner) & (dist <= self.outer)
        return (dist > self.inner) & (dist < self.outer)

    def bounding_box(self) -> Tuple[np.ndarray, np.ndarray]:
        c = np.asarray(self.center)
        return c - self.outer, c + self.outer

    def measure(self) -> float:
        n = self.dimension
        return unit_ball_volume(n) * (self.outer ** n - self.inner ** n)

    def diameter(self) -> float:
        return 2.0 * self.outer

    def extreme_points(self) -> np.ndarray:
        return Ball(self.center, self.outer).extreme_points()


@dataclass(frozen=True)
class Box(Region):
    lower: Point
    upper: Point

    def __post_init__(self):
        lower, upper = as_point(self.lower, "lower"), as_point(self.upper, "upper")
        if len(lower) != len(upper):
            raise ValidationError("box corners must have the same dimension")
        if not all(a < b for a, b in zip(lower, upper)):
            raise ValidationError(f"box needs lower < upper on every axis, got {lower}, {upper}")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dimension(self) -> int:
        return len(self.lower)

    def contains(self, points: np.ndarray, closed: bool = False) -> np.ndarray:
        pts = self._check_points(points)
        lo, hi = np.asarray(self.lower), np.asarray(self.upper)
        if closed:
            return np.all((pts >= lo) & (pts <= hi), axis=1)
        return np.all((pts > lo) & (pts < hi), axis=1)

    def bounding_box(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.lower), np.asarray(self.upper)

    def measure(self) -> float:
        return float(np.prod(np.asarray(self.upper) - np.asarray(self.lower)))

    def diameter(self) -> float:
        return float(np.linalg.norm(np.asarray(self.upper) - np.asarray(self.lower)))

    def extreme_points(self) -> np.ndarray:
        corners = itertools.product(*zip(self.lower, self.upper))
        return np.array(list(corners), dtype=float)


@dataclass(frozen=True)
class Segment(Region):
    """A straight segment; a thin compact set for condenser plates."""

    start: Point
    end: Point

    def __post_init__(self):
        start, end = as_point(self.start, "start"), as_point(self.end, "end")
        if len(start) != len(end):
            raise ValidationError("segment endpoints must have the same dimension")
        if start == end:
            raise ValidationError("segment endpoints must differ")
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "end", end)

    @property
    def dimension(self) -> int:
        return len(self.start)

    def distance(self, points: np.ndarray) -> np.ndarray:
        pts = self._check_points(points)
        a, b = np.asarray(self.start), np.asarray(self.end)
        direction = b - a
        t = np.clip((pts - a) @ direction / direction.dot(direction), 0.0, 1.0)
        return np.linalg.norm(pts - (a + t[:, None] * direction), axis=1)

    def contains(self, points: np.ndarray, closed: bool = False) -> np.ndarray:
        return self.distance(points) <= 1e-12 * max(1.0, self.diameter())

    def rasterize(self, points: np.ndarray, spacing: float) -> np.ndarray:
        return self.distance(points) <= 0.5 * spacing * (1.0 + 1e-9)

    def bounding_box(self) -> Tuple[np.ndarray, np.ndarray]:
        a, b = np.asarray(self.start), np.asarray(self.end)
        return np.minimum(a, b), np.maximum(a, b)

    def measure(self) -> float:
        return 0.0

    def diameter(self) -> float:
        return float(np.linalg.norm(np.asarray(self.end) - np.asarray(self.start)))

    def extreme_points(self) -> np.ndarray:
        return np.array([self.start, self.end], dtype=float)


DomainDescriptor = Union[Ball, Annulus, Box]


@dataclass(frozen=True)
class Condenser:
    """A pair (A, C): open set A (ball or box) and compact C inside it."""

    A: Region
    C: Region

    def __post_init__(self):
        if not isinstance(self.A, (Ball, Box)):
            raise ValidationError("condenser A must be a ball or a box")
        if not isinstance(self.C, (Ball, Box, Segment)):
            raise ValidationError("condenser C must be a closed ball, a box or a segment")
        if self.A.dimension != self.C.dimension:
            raise ValidationError("condenser sets must live in the same dimension")
        if not self._c_inside_a():
            raise ValidationError("condenser C must lie inside A")

    def _c_inside_a(self) -> bool:
        if isinstance(self.A, Ball) and isinstance(self.C, Ball):
            gap = np.linalg.norm(np.asarray(self.A.center) - np.asarray(self.C.center))
            return bool(gap + self.C.radius < self.A.radius)
        # A is convex: the extreme points of C suffice
        return bool(np.all(self.A.contains(self.C.extreme_points())))

    @property
    def dimension(self) -> int:
        return self.A.dimension

    def describe(self) -> str:
        return f"A={self.A!r}; C={self.C!r}"


def ring_condenser_sets(ring: RingCondenser) -> Condenser:
    """The condenser (B(x0, r2), closed B(x0, r1)) of a round ring."""
    return Condenser(A=Ball(ring.x0, ring.r2), C=Ball(ring.x0, ring.r1))
