"""
Chordal Metric
Distances on the extended space R^n plus the point at infinity
"""

from typing import List, Sequence, Tuple, Union

import numpy as np
from scipy.spatial.distance import cdist, pdist

from ringbound.exceptions import ValidationError


class _PointAtInfinity:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "POINT_AT_INFINITY"

    def __reduce__(self):
        return (_PointAtInfinity, ())


POINT_AT_INFINITY = _PointAtInfinity()

ExtendedPoint = Union[Sequence[float], np.ndarray, _PointAtInfinity]


def is_infinity(x) -> bool:
    return x is POINT_AT_INFINITY


def _split(sample: Sequence[ExtendedPoint]) -> Tuple[np.ndarray, bool]:
    """Separate finite points (as an (m, n) array) from the point at infinity."""
    points = list(sample)
    if not points:
        raise ValidationError("point sample must be nonempty")
    finite: List[np.ndarray] = []
    has_inf = False
    for p in points:
        if is_infinity(p):
            has_inf = True
            continue
        arr = np.asarray(p, dtype=float).ravel()
        if not np.all(np.isfinite(arr)):
            raise ValidationError(f"finite points need finite coordinates, got {arr}")
        finite.append(arr)
    if finite and len({a.size for a in finite}) != 1:
        raise ValidationError("all finite points must have the same dimension")
    return (np.vstack(finite) if finite else np.empty((0, 0))), has_inf


def _scale(points: np.ndarray) -> np.ndarray:
    return 1.0 / np.sqrt(1.0 + np.einsum("ij,ij->i", points, points))


def chordal_distance(x: ExtendedPoint, y: ExtendedPoint) -> float:
    """
    Chordal distance between two points of the extended space.

    Args:
        x: Finite point or POINT_AT_INFINITY
        y: Finite point or POINT_AT_INFINITY

    Returns:
        |x - y| / (sqrt(1 + |x|^2) sqrt(1 + |y|^2)), or 1 / sqrt(1 + |x|^2)
        when y is the point at infinity; a value in [0, 1]
    """
    if is_infinity(x) and is_infinity(y):
        return 0.0
    if is_infinity(x):
        x, y = y, x
    px, _ = _split([x])
    if is_infinity(y):
        return float(_scale(px)[0])
    py, _ = _split([y])
    if px.shape[1] != py.shape[1]:
        raise ValidationError("points must have the same dimension")
    d = float(np.linalg.norm(px[0] - py[0]))
    return min(d * float(_scale(px)[0]) * float(_scale(py)[0]), 1.0)


def _cross(a: np.ndarray, a_inf: bool, b: np.ndarray, b_inf: bool) -> np.ndarray:
    """All cross distances between two split samples, flattened."""
    parts = []
    if a.size and b.size:
        if a.shape[1] != b.shape[1]:
            raise ValidationError("samples must have the same dimension")
        parts.append((cdist(a, b) * _scale(a)[:, None] * _scale(b)[None, :]).ravel())
    if a.size and b_inf:
        parts.append(_scale(a))
    if b.size and a_inf:
        parts.append(_scale(b))
    if a_inf and b_inf:
        parts.append(np.zeros(1))
    return np.minimum(np.concatenate(parts), 1.0)


def chordal_diameter(sample: Sequence[ExtendedPoint]) -> float:
    """Largest pairwise chordal distance in a nonempty sample (0 for one point)."""
    pts, has_inf = _split(sample)
    best = 0.0
    if pts.shape[0] >= 2:
        scale = _scale(pts)
        # pdist order is (i, j) for i < j
        i, j = np.triu_indices(pts.shape[0], k=1)
        best = float(np.max(pdist(pts) * scale[i] * scale[j]))
    if has_inf and pts.size:
        best = max(best, float(np.max(_scale(pts))))
    return min(best, 1.0)


def chordal_set_distance(a: Sequence[ExtendedPoint], b: Sequence[ExtendedPoint]) -> float:
    """Smallest chordal distance between a point of ``a`` and a point of ``b``."""
    pa, a_inf = _split(a)
    pb, b_inf = _split(b)
    return float(np.min(_cross(pa, a_inf, pb, b_inf)))
