"""
Capacity Operations
Closed-form ring capacities, the measure and diameter lower bounds, and the
discrete p-capacity oracle (projected preconditioned nonlinear CG)
"""

import logging
import math
import time
from typing import List, Sequence, Tuple

import numpy as np
from scipy.ndimage import distance_transform_edt, map_coordinates

from ringbound.core.constants import unit_ball_volume
from ringbound.core.radial import modulus_upper_bound
from ringbound.exceptions import ValidationError
from ringbound.models.geometry import (
    Ball,
    Box,
    Condenser,
    Exponents,
    Region,
    RingCondenser,
    Segment,
)
from ringbound.models.results import GridSolution

logger = logging.getLogger(__name__)

RASTERIZATIONS = ("node", "enclosing")

# grids below this size start from the distance-based guess instead of a coarser solve
_WARM_START_MIN = 64


def ring_constant_integral(ring: RingCondenser, exps: Exponents) -> float:
    """Ring integral of Q = 1 in closed form."""
    if exps.is_conformal:
        return ring.log_ratio
    gamma = (exps.p - exps.n) / (exps.p - 1.0)
    return (ring.r1 ** gamma - ring.r2 ** gamma) / (-gamma)


def ring_capacity_exact(ring: RingCondenser, exps: Exponents) -> float:
    """
    p-capacity of the round ring (B(x0, r2), closed B(x0, r1)).

    Returns:
        omega_{n-1} (log(r2/r1))^{1-n} for p = n, otherwise
        omega_{n-1} ((n-p)/(p-1))^{p-1} |r1^g - r2^g|^{1-p} with g = (p-n)/(p-1)
    """
    return modulus_upper_bound(ring_constant_integral(ring, exps), exps)


def mazya_coefficient(exps: Exponents) -> float:
    """n Omega_n^{p/n} ((n-p)/(p-1))^{p-1}."""
    n, p = exps.n, exps.p
    if not 1.0 < p < n:
        raise ValidationError(f"measure bound needs 1 < p < n = {n}, got p = {p}")
    return n * unit_ball_volume(n) ** (p / n) * ((n - p) / (p - 1.0)) ** (p - 1.0)


def mazya_lower_bound(mC: float, exps: Exponents) -> float:
    """
    Lower bound on cap_p(A, C) from the measure of C.

    Args:
        mC: Lebesgue measure of C (>= 0)
        exps: Exponents with 1 < p < n

    Returns:
        n Omega_n^{p/n} ((n-p)/(p-1))^{p-1} mC^{(n-p)/n}

    Raises:
        ValidationError: If p >= n or mC < 0
    """
    if not mC >= 0:
        raise ValidationError(f"mC must be >= 0, got {mC}")
    coefficient = mazya_coefficient(exps)
    return coefficient * mC ** ((exps.n - exps.p) / exps.n)


def kruglikov_lower_bound(dC: float, mA: float, exps: Exponents, b_n: float = 1.0) -> float:
    """
    Lower bound on cap_p(A, C) from the diameter of C and the measure of A.

    Returns:
        (b_n dC^p / mA^{1-n+p})^{1/(n-1)}

    Raises:
        ValidationError: If p <= n - 1 or an argument is out of range
    """
    n, p = exps.n, exps.p
    if not p > n - 1:
        raise ValidationError(f"diameter bound needs p > n - 1 = {n - 1}, got p = {p}")
    if not dC >= 0 or not mA > 0 or not b_n > 0:
        raise ValidationError(f"need dC >= 0, mA > 0, b_n > 0; got {dC}, {mA}, {b_n}")
    return (b_n * dC ** p / mA ** (1.0 - n + p)) ** (1.0 / (n - 1.0))


# =========================================================================
# Discrete p-Dirichlet energy
# =========================================================================


class GridEnergy:
    """
    Regularized p-Dirichlet energy of node values on a uniform grid.

    Each cell contributes h^n / 2 [(|g_L|^2 + mu)^{p/2} + (|g_U|^2 + mu)^{p/2}]
    where g_L is the forward-difference gradient at the cell's lowest corner
    and g_U the backward-difference gradient at its highest corner.
    """

    def __init__(self, shape: Tuple[int, ...], h: float, p: float, mu: float):
        self.shape = shape
        self.n = len(shape)
        self.h = h
        self.p = p
        self.mu = mu
        low = tuple(slice(0, s - 1) for s in shape)
        high = tuple(slice(1, s) for s in shape)
        # (plus, minus) node views of every difference, grouped by corner
        self._forward = [(self._swap(low, k, high[k]), low) for k in range(self.n)]
        self._backward = [(high, self._swap(high, k, low[k])) for k in range(self.n)]

    @staticmethod
    def _swap(slices: Tuple[slice, ...], k: int, value: slice) -> Tuple[slice, ...]:
        out = list(slices)
        out[k] = value
        return tuple(out)

    def _corner_terms(self, u: np.ndarray):
        for pairs in (self._forward, self._backward):
            diffs = [(u[plus] - u[minus]) / self.h for plus, minus in pairs]
            yield pairs, diffs, sum(d * d for d in diffs) + self.mu

    def value(self, u: np.ndarray) -> float:
        total = sum(
            float(np.sum(np.power(sq, 0.5 * self.p))) for _, _, sq in self._corner_terms(u)
        )
        return 0.5 * self.h ** self.n * total

    def value_and_gradient(self, u: np.ndarray) -> Tuple[float, np.ndarray, np.ndarray]:
        """Energy, its gradient, and a Jacobi-type diagonal for preconditioning."""
        weight = 0.5 * self.h ** self.n
        grad = np.zeros(self.shape)
        diag = np.zeros(self.shape)
        total = 0.0
        for pairs, diffs, sq in self._corner_terms(u):
            total += float(np.sum(np.power(sq, 0.5 * self.p)))
            coef = weight * self.p * np.power(sq, 0.5 * self.p - 1.0) / self.h
            curvature = coef / self.h
            for (plus, minus), diff in zip(pairs, diffs):
                flux = coef * diff
                grad[plus] += flux
                grad[minus] -= flux
                diag[plus] += curvature
                diag[minus] += curvature
        return weight * total, grad, diag


def _cells_meeting(region: Region, centers: np.ndarray, h: float) -> np.ndarray:
    """Cells (given by centres) that may intersect the closed region."""
    n = centers.shape[1]
    if isinstance(region, Ball):
        dist = np.linalg.norm(centers - np.asarray(region.center), axis=1)
        return dist <= region.radius + 0.5 * h * math.sqrt(n)
    if isinstance(region, Box):
        lo = np.asarray(region.lower) - 0.5 * h
        hi = np.asarray(region.upper) + 0.5 * h
        return np.all((centers >= lo) & (centers <= hi), axis=1)
    if isinstance(region, Segment):
        return region.distance(centers) <= 0.5 * h * math.sqrt(n)
    raise ValidationError(f"unsupported region {type(region).__name__}")


def _cells_inside(region: Region, centers: np.ndarray, h: float) -> np.ndarray:
    """Cells (given by centres) lying inside the open region."""
    n = centers.shape[1]
    if isinstance(region, Ball):
        dist = np.linalg.norm(centers - np.asarray(region.center), axis=1)
        return dist + 0.5 * h * math.sqrt(n) < region.radius
    if isinstance(region, Box):
        lo = np.asarray(region.lower) + 0.5 * h
        hi = np.asarray(region.upper) - 0.5 * h
        return np.all((centers > lo) & (centers < hi), axis=1)
    raise ValidationError(f"unsupported region {type(region).__name__}")


def _corner_views(shape: Tuple[int, ...]):
    """Slices selecting, for every cell, one of its 2^n corner nodes."""
    n = len(shape)
    for corner in range(2 ** n):
        yield tuple(
            slice(1, s) if (corner >> k) & 1 else slice(0, s - 1) for k, s in enumerate(shape)
        )


class CapacityGrid:
    """Node grid covering a condenser, with fixed and free node masks."""

    def __init__(self, cond: Condenser, resolution: int, rasterization: str = "enclosing"):
        if resolution < 32:
            raise ValidationError(f"resolution must be >= 32, got {resolution}")
        if rasterization not in RASTERIZATIONS:
            raise ValidationError(
                f"rasterization must be one of {list(RASTERIZATIONS)}, got {rasterization!r}"
            )
        lo, hi = cond.A.bounding_box()
        extent = float(np.max(hi - lo))
        self.resolution = resolution
        self.h = extent / (resolution - 4)
        self.lower = lo - 2.0 * self.h
        self.n = cond.dimension
        self.shape = (resolution + 1,) * self.n
        axes = [self.lower[k] + self.h * np.arange(resolution + 1) for k in range(self.n)]
        mesh = np.meshgrid(*axes, indexing="ij")
        nodes = np.column_stack([m.ravel() for m in mesh])
        if rasterization == "node":
            self.one = cond.C.rasterize(nodes, self.h).reshape(self.shape)
            self.free = cond.A.contains(nodes, closed=False).reshape(self.shape) & ~self.one
        else:
            self.one, self.free = self._enclosing_masks(cond, axes)
        if not self.one.any():
            raise ValidationError("grid is too coarse: no node falls on the compact set C")
        self.zero = ~(self.one | self.free)

    def _enclosing_masks(self, cond: Condenser, axes) -> Tuple[np.ndarray, np.ndarray]:
        """
        Masks for which the piecewise-linear potential is admissible: every
        cell meeting C is fixed to 1, and free nodes only touch cells inside A.
        """
        centers_axes = [a[:-1] + 0.5 * self.h for a in axes]
        mesh = np.meshgrid(*centers_axes, indexing="ij")
        centers = np.column_stack([m.ravel() for m in mesh])
        cell_shape = (self.resolution,) * self.n
        meets_c = _cells_meeting(cond.C, centers, self.h).reshape(cell_shape)
        inside_a = _cells_inside(cond.A, centers, self.h).reshape(cell_shape)
        one = np.zeros(self.shape, dtype=bool)
        all_inside = np.ones(self.shape, dtype=bool)
        for view in _corner_views(self.shape):
            one[view] |= meets_c
            all_inside[view] &= inside_a
        free = all_inside & ~one
        return one, free

    @property
    def upper(self) -> np.ndarray:
        return self.lower + self.h * self.resolution

    def initial_guess(self) -> np.ndarray:
        """u = dA / (dA + dC) from Euclidean distance transforms."""
        d_zero = distance_transform_edt(~self.zero, sampling=self.h)
        d_one = distance_transform_edt(~self.one, sampling=self.h)
        with np.errstate(invalid="ignore"):
            u = d_zero / (d_zero + d_one)
        u = np.nan_to_num(u, nan=0.0)
        return self.apply_bounds(u)

    def apply_bounds(self, u: np.ndarray) -> np.ndarray:
        u = np.clip(u, 0.0, 1.0)
        u[self.one] = 1.0
        u[self.zero] = 0.0
        return u

    def interpolate_from(self, coarse: GridSolution) -> np.ndarray:
        """Linear interpolation of a coarser potential onto these nodes."""
        coords = []
        for k in range(self.n):
            axis = self.lower[k] + self.h * np.arange(self.resolution + 1)
            coords.append((axis - coarse.lower[k]) / coarse.spacing)
        mesh = np.meshgrid(*coords, indexing="ij")
        u = map_coordinates(coarse.potential, mesh, order=1, mode="nearest")
        return self.apply_bounds(u)


def minimize_energy(
    grid: CapacityGrid,
    energy: GridEnergy,
    u0: np.ndarray,
    tol: float,
    window: int,
    max_iter: int,
) -> Tuple[np.ndarray, float, int, float, bool]:
    """
    Projected, Jacobi-preconditioned Polak-Ribiere+ nonlinear CG on the free
    nodes with box constraints 0 <= u <= 1.

    Returns:
        (u, energy, iterations, residual, converged)
    """
    free = grid.free
    u = u0.copy()
    value, grad, diag = energy.value_and_gradient(u)
    if not free.any():
        return u, value, 0, 0.0, True

    def projected(g: np.ndarray) -> np.ndarray:
        r = np.where(free, -g, 0.0)
        # components pushing through an active bound are frozen
        r[(u <= 0.0) & (r < 0.0)] = 0.0
        r[(u >= 1.0) & (r > 0.0)] = 0.0
        return r

    history = [value]
    r = projected(grad)
    z = r / np.maximum(diag, 1e-300)
    d = z.copy()
    rz_old = float(np.sum(r * z))
    residual = float(np.max(np.abs(r)))
    converged = False
    iteration = 0
    for iteration in range(1, max_iter + 1):
        slope = -float(np.sum(r * d))
        if slope >= 0.0:
            d = z.copy()
            slope = -float(np.sum(r * d))
            if slope >= 0.0:
                converged = True
                break
        scale = float(np.max(np.abs(d)))
        eta = 1e-7 / scale
        _, grad_trial, _ = energy.value_and_gradient(u + eta * d)
        curvature = float(np.sum((grad_trial - grad) * d)) / eta
        step = -slope / curvature if curvature > 0 else 1.0 / scale
        accepted = False
        for _ in range(60):
            trial = grid.apply_bounds(u + step * d)
            trial_value = energy.value(trial)
            if trial_value <= value + 1e-4 * float(np.sum(grad * (trial - u))):
                accepted = True
                break
            step *= 0.5
        if not accepted:
            logger.debug("line search stalled at iteration %d", iteration)
            converged = True
            break
        u = trial
        value, grad, diag = energy.value_and_gradient(u)
        history.append(value)
        r_new = projected(grad)
        z_new = r_new / np.maximum(diag, 1e-300)
        rz_new = float(np.sum(r_new * z_new))
        beta = max(0.0, (rz_new - float(np.sum(r_new * z))) / rz_old) if rz_old > 0 else 0.0
        d = z_new + beta * d
        r, z, rz_old = r_new, z_new, rz_new
        residual = float(np.max(np.abs(r)))
        if iteration % 100 == 0:
            logger.debug("ncg iteration %d: energy=%.12g residual=%.3e", iteration, value, residual)
        if residual == 0.0:
            converged = True
            break
        if len(history) > window:
            change = history[-window - 1] - history[-1]
            if change <= tol * abs(history[-1]):
                converged = True
                break
    return u, value, iteration, residual, converged


class CapacityMixin:
    """Mixin for capacity closed forms and the discrete capacity oracle"""

    def ring_capacity_exact(self, ring: RingCondenser, exps: Exponents) -> float:
        return ring_capacity_exact(ring, exps)

    def mazya_lower_bound(self, mC: float, exps: Exponents) -> float:
        return mazya_lower_bound(mC, exps)

    def kruglikov_lower_bound(
        self, dC: float, mA: float, exps: Exponents, b_n: float = 1.0
    ) -> float:
        return kruglikov_lower_bound(dC, mA, exps, b_n)

    def discrete_p_capacity(
        self,
        cond: Condenser,
        exps: Exponents,
        resolution: int = 128,
        rasterization: str = "enclosing",
        warm_start: bool = True,
    ) -> GridSolution:
        """
        Minimize the discrete p-Dirichlet energy over node potentials with
        u = 1 on C, u = 0 off A and 0 <= u <= 1.

        Args:
            cond: Condenser (A, C)
            exps: Exponents (n, p); n must match the condenser
            resolution: Cells per axis of the padded bounding box (>= 32)
            rasterization: ``enclosing`` (default: every cell meeting C is
                fixed, free nodes keep their cells inside A, so for n = 2 the
                energy bounds the capacity from above) or ``node`` (node
                membership, no one-sided guarantee)
            warm_start: Start from the solution at half the resolution

        Returns:
            GridSolution with ``converged`` False if the iteration cap was hit
        """
        if cond.dimension != exps.n:
            raise ValidationError(
                f"condenser lives in R^{cond.dimension}, exponents say n = {exps.n}"
            )
        started = time.perf_counter()
        grid = CapacityGrid(cond, resolution, rasterization)
        energy = GridEnergy(grid.shape, grid.h, exps.p, self.profile.capacity_mu)
        if warm_start and resolution >= _WARM_START_MIN:
            coarse = self.discrete_p_capacity(cond, exps, resolution // 2, rasterization, True)
            u0 = grid.interpolate_from(coarse)
        else:
            u0 = grid.initial_guess()
        u, value, iterations, residual, converged = minimize_energy(
            grid,
            energy,
            u0,
            tol=self.profile.capacity_tol,
            window=self.profile.capacity_window,
            max_iter=self.profile.capacity_max_iter,
        )
        if not converged:
            logger.warning(
                "capacity solve at resolution %d hit the iteration cap (%d)", resolution, iterations
            )
        wall = time.perf_counter() - started
        logger.debug(
            "capacity resolution=%d energy=%.10g iterations=%d residual=%.3e",
            resolution, value, iterations, residual,
        )
        return GridSolution(
            resolution=resolution,
            lower=tuple(float(v) for v in grid.lower),
            upper=tuple(float(v) for v in grid.upper),
            potential=u,
            energy=value,
            iterations=iterations,
            residual=residual,
            converged=converged,
            wall_time=wall,
        )

    def calibrate_kruglikov_constant(
        self,
        condensers: Sequence[Condenser],
        exps: Exponents,
        resolution: int = 64,
        rasterization: str = "enclosing",
    ) -> float:
        """
        Largest b_n for which the diameter bound stays below the discrete
        capacity on every reference condenser.

        Returns:
            min over condensers of cap^{n-1} mA^{1-n+p} / dC^p
        """
        n, p = exps.n, exps.p
        if not p > n - 1:
            raise ValidationError(f"diameter bound needs p > n - 1 = {n - 1}, got p = {p}")
        if not condensers:
            raise ValidationError("at least one reference condenser is required")
        values: List[float] = []
        for cond in condensers:
            cap = self.discrete_p_capacity(cond, exps, resolution, rasterization).energy
            dC, mA = cond.C.diameter(), cond.A.measure()
            values.append(cap ** (n - 1) * mA ** (1.0 - n + p) / dC ** p)
            logger.info("b_n candidate %.6g from %s", values[-1], cond.describe())
        return float(min(values))


def default_reference_condenser(n: int) -> Condenser:
    """Unit segment through the origin inside the unit ball."""
    start = np.zeros(n)
    end = np.zeros(n)
    start[0], end[0] = -0.5, 0.5
    return Condenser(A=Ball(tuple(np.zeros(n)), 1.0), C=Segment(tuple(start), tuple(end)))

