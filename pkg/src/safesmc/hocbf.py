"""Circular-obstacle barrier functions and their linear wrench constraints.

h(eta) = |p - p_o|^2 - R^2 has relative degree two in tau. Enforcing

    h_ddot + 2 alpha h_dot + alpha^2 h >= 0

with h_ddot linear in tau gives one half-space a . tau >= b per obstacle. The
row is built with d = 0; an optional bound |d| <= d_bar tightens b by |a| d_bar.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from safesmc.arrays import ArrayLike, FloatArray, as_vector, require
from safesmc.dynamics import (
    ControlWrench,
    VesselParams,
    VesselState,
    coriolis,
    damping,
    rotation,
    state_derivative,
)


@dataclass(frozen=True, eq=False)
class Obstacle:
    """Circular obstacle; radius is the safety radius (vessel inflation included)."""

    center: FloatArray
    radius: float

    @classmethod
    def create(cls, center: ArrayLike, radius: float, field: str = "obstacle") -> Obstacle:
        require(radius > 0.0, f"{field}.radius", "must be > 0")
        return cls(center=as_vector(center, 2, f"{field}.center"), radius=float(radius))


@dataclass(frozen=True)
class AlphaSchedule:
    """alpha(h, h_dot) = alpha0 (1 + kappa max(0, -h_dot) / (max(h, 0) + eps_h)), clipped."""

    alpha0: float
    kappa: float
    eps_h: float
    alpha_max: float

    def __post_init__(self) -> None:
        require(self.kappa >= 0.0, "barrier.schedule.kappa", "must be >= 0")
        require(self.eps_h > 0.0, "barrier.schedule.eps_h", "must be > 0")
        require(self.alpha_max >= self.alpha0, "barrier.schedule.alpha_max", "must be >= alpha")

    def __call__(self, h: float, h_dot: float) -> float:
        boost = self.kappa * max(0.0, -h_dot) / (max(h, 0.0) + self.eps_h)
        return min(self.alpha0 * (1.0 + boost), self.alpha_max)


@dataclass(frozen=True)
class BarrierParams:
    alpha: float
    schedule: AlphaSchedule | None = None
    disturbance_bound: float = 0.0

    def __post_init__(self) -> None:
        require(self.alpha > 0.0, "barrier.alpha", "must be > 0")
        require(self.disturbance_bound >= 0.0, "barrier.disturbance_bound", "must be >= 0")

    def alpha_at(self, h: float, h_dot: float) -> float:
        if self.schedule is None:
            return self.alpha
        return self.schedule(h, h_dot)


@dataclass(frozen=True, eq=False)
class HalfSpaceConstraint:
    """Row a . tau >= b, with the barrier values it was built from."""

    a: FloatArray
    b: float
    obstacle_id: int
    h: float
    h_dot: float
    alpha: float

    def residual(self, tau: ControlWrench) -> float:
        """a . tau - b; negative means violated."""
        return float(self.a @ tau) - self.b


def _offset(obstacle: Obstacle, eta: FloatArray) -> FloatArray:
    return np.asarray(eta[:2], dtype=np.float64) - obstacle.center


def _rotation_rate_2(psi: float) -> FloatArray:
    """d/dpsi of the top 2x3 block of R(psi)."""
    c, s = math.cos(psi), math.sin(psi)
    return np.array([[-s, -c, 0.0], [c, -s, 0.0]])


def h_value(obstacle: Obstacle, eta: FloatArray) -> float:
    delta = _offset(obstacle, eta)
    return float(delta @ delta) - obstacle.radius**2


def h_dot(obstacle: Obstacle, state: VesselState) -> float:
    p_dot = rotation(float(state.eta[2]))[:2] @ state.nu
    return float(2.0 * _offset(obstacle, state.eta) @ p_dot)


def h_ddot(
    params: VesselParams,
    obstacle: Obstacle,
    state: VesselState,
    tau: ControlWrench,
    d: FloatArray | None = None,
) -> float:
    """Second time derivative of h evaluated through the full state derivative."""
    psi = float(state.eta[2])
    x_dot = state_derivative(params, state, tau, np.zeros(3) if d is None else d)
    p_dot = x_dot[:2]
    p_ddot = state.nu[2] * _rotation_rate_2(psi) @ state.nu + rotation(psi)[:2] @ x_dot[3:]
    return float(2.0 * p_dot @ p_dot + 2.0 * _offset(obstacle, state.eta) @ p_ddot)


def build_constraint(
    params: VesselParams,
    bparams: BarrierParams,
    obstacle: Obstacle,
    state: VesselState,
    obstacle_id: int = 0,
) -> HalfSpaceConstraint:
    """Linear wrench constraint equivalent to the HOCBF inequality at this state."""
    nu = state.nu
    psi = float(state.eta[2])
    delta = _offset(obstacle, state.eta)
    R2 = rotation(psi)[:2]
    p_dot = R2 @ nu
    h = float(delta @ delta) - obstacle.radius**2
    hd = float(2.0 * delta @ p_dot)
    alpha = bparams.alpha_at(h, hd)

    a = 2.0 * params.M_inv @ (R2.T @ delta)
    drift = (
        2.0 * float(p_dot @ p_dot)
        + 2.0 * float(delta @ (nu[2] * _rotation_rate_2(psi) @ nu))
        - float(a @ (coriolis(params, nu) @ nu + damping(params, nu) @ nu))
    )
    b = -(drift + 2.0 * alpha * hd + alpha**2 * h)
    if bparams.disturbance_bound > 0.0:
        b += float(np.linalg.norm(a)) * bparams.disturbance_bound
    return HalfSpaceConstraint(a=a, b=b, obstacle_id=obstacle_id, h=h, h_dot=hd, alpha=alpha)


def build_all(
    params: VesselParams,
    bparams: BarrierParams,
    obstacles: Sequence[Obstacle],
    state: VesselState,
) -> list[HalfSpaceConstraint]:
    """One row per obstacle, in obstacle-index order."""
    return [
        build_constraint(params, bparams, obstacle, state, index)
        for index, obstacle in enumerate(obstacles)
    ]
