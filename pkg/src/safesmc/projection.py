"""Sequential relaxed projection onto CBF half-spaces and the actuator box."""

from __future__ import annotations

from collections.abc import Iterator, Sequence
from dataclasses import dataclass

import numpy as np

from safesmc.arrays import ArrayLike, FloatArray, as_vector, require
from safesmc.constants import (
    DEFAULT_GAMMA,
    DEFAULT_SWEEPS,
    DEFAULT_TOL,
    FILTER_METHODS,
    FILTER_PROJECTION,
    ROW_NORM_EPS,
)
from safesmc.dynamics import ControlWrench
from safesmc.hocbf import HalfSpaceConstraint


@dataclass(frozen=True, eq=False)
class ActuatorBox:
    tau_min: FloatArray
    tau_max: FloatArray

    @classmethod
    def create(cls, tau_min: ArrayLike, tau_max: ArrayLike) -> ActuatorBox:
        lo = as_vector(tau_min, 3, "box.tau_min")
        hi = as_vector(tau_max, 3, "box.tau_max")
        require(bool(np.all(lo <= hi)), "box", "tau_min must be <= tau_max")
        return cls(tau_min=lo, tau_max=hi)

    @classmethod
    def symmetric(cls, bound: ArrayLike) -> ActuatorBox:
        hi = np.abs(as_vector(bound, 3, "box.bound"))
        return cls(tau_min=-hi, tau_max=hi)

    def contains(self, tau: ControlWrench) -> bool:
        return bool(np.all(tau >= self.tau_min) and np.all(tau <= self.tau_max))

    def vertices(self) -> FloatArray:
        """The 8 corners, shape (8, 3)."""
        grid = np.array(np.meshgrid([0, 1], [0, 1], [0, 1], indexing="ij")).reshape(3, -1).T
        return np.where(grid == 1, self.tau_max, self.tau_min)


@dataclass(frozen=True)
class FilterConfig:
    gamma: float = DEFAULT_GAMMA
    sweeps: int = DEFAULT_SWEEPS
    tol: float = DEFAULT_TOL
    method: str = FILTER_PROJECTION

    def __post_init__(self) -> None:
        require(0.0 < self.gamma <= 1.0, "filter.gamma", "must be in (0, 1]")
        require(self.sweeps >= 1, "filter.sweeps", "must be >= 1")
        require(self.tol > 0.0, "filter.tol", "must be > 0")
        require(self.method in FILTER_METHODS, "filter.method",
                f"must be one of {sorted(FILTER_METHODS)}")


@dataclass(frozen=True, eq=False)
class FilterResult:
    tau_safe: ControlWrench
    modified: bool
    sweeps_used: int
    max_residual: float
    feasible: bool


def clip_box(box: ActuatorBox, tau: ArrayLike) -> ControlWrench:
    """Componentwise median(tau_min, tau, tau_max)."""
    return np.minimum(np.maximum(np.asarray(tau, dtype=np.float64), box.tau_min), box.tau_max)


def max_violation(constraints: Sequence[HalfSpaceConstraint], tau: ControlWrench) -> float:
    """Largest b - a . tau over all rows, floored at zero."""
    worst = 0.0
    for row in constraints:
        worst = max(worst, row.b - float(row.a @ tau))
    return worst


def iterate_projections(
    box: ActuatorBox,
    constraints: Sequence[HalfSpaceConstraint],
    config: FilterConfig,
    tau: ControlWrench,
) -> Iterator[tuple[int, ControlWrench]]:
    """Yield (sweep, iterate) after every half-space step and its re-clip.

    Rows are visited in the given order; rows with |a| < eps are skipped.
    Runs the full sweep budget without the early stop.
    """
    tau = clip_box(box, tau)
    for sweep in range(1, config.sweeps + 1):
        for row in constraints:
            norm_sq = float(row.a @ row.a)
            if norm_sq < ROW_NORM_EPS**2:
                continue
            violation = row.b - float(row.a @ tau)
            if violation > 0.0:
                tau = clip_box(box, tau + config.gamma * (violation / norm_sq) * row.a)
                yield sweep, tau


def project(
    box: ActuatorBox,
    constraints: Sequence[HalfSpaceConstraint],
    config: FilterConfig,
    tau_nominal: ArrayLike,
) -> FilterResult:
    """Map a nominal wrench to a nearby wrench in the box satisfying all rows.

    Stops after the first sweep whose end iterate violates no row by more
    than tol. If the sweep budget runs out, the iterate with the smallest
    violation (tau^(0) included) is returned with feasible=False.
    """
    start = clip_box(box, tau_nominal)
    best, best_res = start, max_violation(constraints, start)
    tau = start
    sweeps_used = 0
    for sweep in range(1, config.sweeps + 1):
        sweeps_used = sweep
        if sweep == 1 and best_res <= config.tol:
            break
        for row in constraints:
            norm_sq = float(row.a @ row.a)
            if norm_sq < ROW_NORM_EPS**2:
                continue
            violation = row.b - float(row.a @ tau)
            if violation > 0.0:
                tau = clip_box(box, tau + config.gamma * (violation / norm_sq) * row.a)
        residual = max_violation(constraints, tau)
        if residual < best_res:
            best, best_res = tau, residual
        if residual <= config.tol:
            break
    return FilterResult(
        tau_safe=best,
        modified=not np.array_equal(best, start),
        sweeps_used=sweeps_used,
        max_residual=best_res,
        feasible=best_res <= config.tol,
    )
