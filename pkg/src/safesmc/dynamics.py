"""3-DOF vessel kinematics and rigid-body + hydrodynamic dynamics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TypeAlias

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, eigvalsh

from safesmc.arrays import ArrayLike, FloatArray, as_matrix, as_vector, require, wrap_angle
from safesmc.constants import (
    DEFAULT_ADDED_MASS_RATIO,
    DEFAULT_D_QUAD,
    DEFAULT_DECAY_TIME,
    DEFAULT_MASS,
    ERR_MASS_NOT_SPD,
    ERR_NON_FINITE_STATE,
)
from safesmc.exceptions import ConfigError, IntegrationError

ControlWrench: TypeAlias = FloatArray


@dataclass(frozen=True, eq=False)
class VesselState:
    """Pose eta = [x, y, psi] (world) and body velocity nu = [u, v, r]."""

    eta: FloatArray
    nu: FloatArray

    @classmethod
    def create(cls, eta: ArrayLike, nu: ArrayLike = (0.0, 0.0, 0.0)) -> VesselState:
        eta_arr = as_vector(eta, 3, "eta").copy()
        eta_arr[2] = wrap_angle(float(eta_arr[2]))
        return cls(eta=eta_arr, nu=as_vector(nu, 3, "nu").copy())

    @classmethod
    def from_vector(cls, x: FloatArray) -> VesselState:
        eta = x[:3].copy()
        eta[2] = wrap_angle(float(eta[2]))
        return cls(eta=eta, nu=x[3:].copy())

    def as_vector(self) -> FloatArray:
        return np.concatenate((self.eta, self.nu))


@dataclass(frozen=True, eq=False)
class VesselParams:
    """Mass (inertia + added mass) and damping of the vessel.

    M must be symmetric positive definite; this is checked here so the
    dynamics never see a singular mass matrix.
    """

    M: FloatArray
    D_lin: FloatArray
    D_quad: FloatArray
    mass: float = DEFAULT_MASS
    M_inv: FloatArray = field(init=False, repr=False)
    lambda_min_M: float = field(init=False)

    def __post_init__(self) -> None:
        M = as_matrix(self.M, "vessel.M")
        if not np.allclose(M, M.T, rtol=1e-12, atol=0.0):
            raise ConfigError(ERR_MASS_NOT_SPD)
        try:
            factor = cho_factor(M)
        except LinAlgError as exc:
            raise ConfigError(ERR_MASS_NOT_SPD) from exc
        M_inv = cho_solve(factor, np.eye(3))
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "D_lin", as_matrix(self.D_lin, "vessel.D_lin"))
        object.__setattr__(self, "D_quad", as_vector(self.D_quad, 3, "vessel.D_quad"))
        object.__setattr__(self, "M_inv", 0.5 * (M_inv + M_inv.T))
        object.__setattr__(self, "lambda_min_M", float(eigvalsh(M)[0]))
        require(bool(np.all(self.D_quad >= 0.0)), "vessel.D_quad", "must be >= 0")


def triangle_yaw_inertia(mass: float, positions: ArrayLike) -> float:
    """Yaw inertia about the origin of a uniform triangular lamina with the given vertices."""
    p = np.asarray(positions, dtype=np.float64)
    sides = p - np.roll(p, 1, axis=0)
    centroid = p.mean(axis=0)
    return float(mass * np.sum(sides**2) / 36.0 + mass * centroid @ centroid)


def build_vessel_params(
    positions: ArrayLike,
    *,
    mass: float = DEFAULT_MASS,
    added_mass_ratio: float = DEFAULT_ADDED_MASS_RATIO,
    decay_time: float = DEFAULT_DECAY_TIME,
    d_quad: ArrayLike = DEFAULT_D_QUAD,
    M: ArrayLike | None = None,
    D_lin: ArrayLike | None = None,
) -> VesselParams:
    """Build vessel parameters from the platform description.

    Defaults: added mass as a fraction of the rigid-body diagonal, yaw inertia
    from the thruster triangle, and linear damping giving an open-loop velocity
    decay time constant of *decay_time* seconds on every axis.
    """
    require(mass > 0.0, "vessel.mass", "must be > 0")
    require(added_mass_ratio >= 0.0, "vessel.added_mass_ratio", "must be >= 0")
    require(decay_time > 0.0, "vessel.decay_time", "must be > 0")
    if M is None:
        rigid = np.array([mass, mass, triangle_yaw_inertia(mass, positions)])
        M_arr = np.diag(rigid * (1.0 + added_mass_ratio))
    else:
        M_arr = as_matrix(M, "vessel.M")
    if D_lin is None:
        D_arr = np.diag(np.diag(M_arr) / decay_time)
    else:
        D_in = np.asarray(D_lin, dtype=np.float64)
        D_arr = np.diag(D_in) if D_in.ndim == 1 else D_in
    return VesselParams(M=M_arr, D_lin=D_arr, D_quad=np.asarray(d_quad, dtype=np.float64),
                        mass=mass)


def rotation(psi: float) -> FloatArray:
    """Body-to-world rotation R(psi)."""
    c, s = math.cos(psi), math.sin(psi)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def coriolis(params: VesselParams, nu: FloatArray) -> FloatArray:
    """Coriolis-centripetal matrix built from M so that C(nu) is skew-symmetric."""
    p = params.M @ nu
    return np.array([[0.0, 0.0, -p[1]], [0.0, 0.0, p[0]], [p[1], -p[0], 0.0]])


def damping(params: VesselParams, nu: FloatArray) -> FloatArray:
    """D(nu) = D_lin + diag(D_quad * |nu|)."""
    return params.D_lin + np.diag(params.D_quad * np.abs(nu))


def kinetic_energy(params: VesselParams, nu: FloatArray) -> float:
    return float(0.5 * nu @ params.M @ nu)


def body_acceleration(params: VesselParams, nu: FloatArray, force: FloatArray) -> FloatArray:
    """nu_dot = M^-1 (force - C(nu) nu - D(nu) nu) with force = tau + d."""
    return params.M_inv @ (force - coriolis(params, nu) @ nu - damping(params, nu) @ nu)


def _derivative(params: VesselParams, x: FloatArray, force: FloatArray) -> FloatArray:
    nu = x[3:]
    return np.concatenate((rotation(float(x[2])) @ nu, body_acceleration(params, nu, force)))


def state_derivative(
    params: VesselParams,
    state: VesselState,
    tau: ControlWrench,
    d: FloatArray,
) -> FloatArray:
    """Return d/dt [eta; nu] for wrench *tau* and matched disturbance *d*."""
    return _derivative(params, state.as_vector(), np.asarray(tau) + np.asarray(d))


def integrate_step(
    params: VesselParams,
    state: VesselState,
    tau: ControlWrench,
    d: FloatArray,
    dt: float,
) -> VesselState:
    """Advance one classical RK4 step with tau and d held over the step."""
    require(dt > 0.0, "dt", "must be > 0")
    force = np.asarray(tau, dtype=np.float64) + np.asarray(d, dtype=np.float64)
    x = state.as_vector()
    k1 = _derivative(params, x, force)
    k2 = _derivative(params, x + 0.5 * dt * k1, force)
    k3 = _derivative(params, x + 0.5 * dt * k2, force)
    k4 = _derivative(params, x + dt * k3, force)
    x_next = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(x_next)):
        raise IntegrationError(ERR_NON_FINITE_STATE.format(eta=x_next[:3], nu=x_next[3:]))
    return VesselState.from_vector(x_next)
