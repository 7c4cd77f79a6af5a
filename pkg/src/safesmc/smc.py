"""Sliding surface and the boundary-layer sliding-mode control wrench.

The surface mixes the body-frame velocity error with the world-frame pose
error, s = (nu - nu_d) + Lambda (eta - eta_d), and its derivative carries
Lambda R(psi) nu. Both are used literally; e_p is not rotated into the body frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from safesmc.arrays import ArrayLike, FloatArray, as_vector, require, wrap_angle
from safesmc.dynamics import ControlWrench, VesselParams, VesselState, coriolis, damping, rotation


@dataclass(frozen=True, eq=False)
class SmcGains:
    """Diagonal gains stored as 3-vectors: Lambda [1/s], Ks [m/s^2 per unit sat], phi."""

    Lambda: FloatArray
    Ks: FloatArray
    phi: float

    @classmethod
    def create(cls, Lambda: ArrayLike, Ks: ArrayLike, phi: float) -> SmcGains:
        lam = as_vector(Lambda, 3, "smc.Lambda")
        ks = as_vector(Ks, 3, "smc.Ks")
        require(bool(np.all(lam > 0.0)), "smc.Lambda", "diagonal must be > 0")
        require(bool(np.all(ks > 0.0)), "smc.Ks", "diagonal must be > 0")
        require(phi > 0.0, "smc.phi", "must be > 0")
        return cls(Lambda=lam, Ks=ks, phi=float(phi))

    @property
    def tube_radius(self) -> float:
        """Position-error bound phi / lambda_min(Lambda)."""
        return self.phi / float(np.min(self.Lambda))


@dataclass(frozen=True, eq=False)
class ReferenceSignal:
    eta_d: FloatArray
    etadot_d: FloatArray
    nu_d: FloatArray
    nudot_d: FloatArray

    @classmethod
    def station(cls, eta_d: ArrayLike) -> ReferenceSignal:
        """Goal regulation: all reference rates zero."""
        zero = np.zeros(3)
        return cls(as_vector(eta_d, 3, "goal"), zero, zero.copy(), zero.copy())


def pose_error(eta: FloatArray, eta_d: FloatArray) -> FloatArray:
    """e_p = eta - eta_d with the heading component wrapped to (-pi, pi]."""
    e_p = np.asarray(eta, dtype=np.float64) - eta_d
    e_p[2] = wrap_angle(float(e_p[2]))
    return e_p


def sliding_surface(gains: SmcGains, state: VesselState, ref: ReferenceSignal) -> FloatArray:
    return (state.nu - ref.nu_d) + gains.Lambda * pose_error(state.eta, ref.eta_d)


def sat(x: FloatArray, phi: float) -> FloatArray:
    """Elementwise boundary-layer saturation: x/phi inside |x| <= phi, sign(x) outside."""
    return np.clip(np.asarray(x, dtype=np.float64) / phi, -1.0, 1.0)


def smc_wrench(
    params: VesselParams, gains: SmcGains, state: VesselState, ref: ReferenceSignal
) -> ControlWrench:
    """Implementable SMC law; the disturbance is unknown and left out."""
    nu = state.nu
    s = sliding_surface(gains, state, ref)
    accel = (
        -gains.Ks * sat(s, gains.phi)
        + ref.nudot_d
        - gains.Lambda * (rotation(float(state.eta[2])) @ nu)
        + gains.Lambda * ref.etadot_d
    )
    return coriolis(params, nu) @ nu + damping(params, nu) @ nu + params.M @ accel
