"""Pseudo-inverse allocation of a body wrench to three azimuth thrusters."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from safesmc.arrays import ArrayLike, FloatArray, require
from safesmc.constants import (
    DEFAULT_C_F,
    DEFAULT_C_N,
    DEFAULT_F_MAX,
    DEFAULT_THRUSTER_POSITIONS,
    ERR_LAYOUT_RANK,
)
from safesmc.dynamics import ControlWrench
from safesmc.exceptions import ConfigError
from safesmc.projection import ActuatorBox


@dataclass(frozen=True, eq=False)
class ThrusterLayout:
    """Body-frame lever arms (n, 2) of the azimuth thrusters and their force limit.

    The 3 x 2n configuration matrix must have rank 3.
    """

    positions: FloatArray
    f_max: float = DEFAULT_F_MAX
    c_f: float = DEFAULT_C_F
    c_n: float = DEFAULT_C_N
    B: FloatArray = field(init=False, repr=False)
    B_pinv: FloatArray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        pos = np.asarray(self.positions, dtype=np.float64)
        shape_ok = pos.ndim == 2 and pos.shape[0] >= 1 and pos.shape[1] == 2
        require(shape_ok, "thrusters.positions", f"expected rows of [lx, ly], got {pos.shape}")
        require(bool(np.all(np.isfinite(pos))), "thrusters.positions", "non-finite entry")
        require(self.f_max >= 0.0, "thrusters.f_max", "must be >= 0")
        require(0.0 < self.c_f <= 1.0, "thrusters.c_f", "must be in (0, 1]")
        require(0.0 < self.c_n <= 1.0, "thrusters.c_n", "must be in (0, 1]")
        B = _configuration_matrix(pos)
        rank = int(np.linalg.matrix_rank(B))
        if rank < 3:
            raise ConfigError(ERR_LAYOUT_RANK.format(rank=rank))
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "B_pinv", np.linalg.pinv(B))

    @classmethod
    def default(cls) -> ThrusterLayout:
        return cls(positions=np.asarray(DEFAULT_THRUSTER_POSITIONS, dtype=np.float64))

    @property
    def count(self) -> int:
        return int(self.positions.shape[0])


@dataclass(frozen=True, eq=False)
class ThrusterCommand:
    forces: FloatArray  # (n, 2) body-frame [F_x, F_y]
    saturated: FloatArray  # (n,) bool

    @property
    def magnitudes(self) -> FloatArray:
        return np.asarray(np.hypot(self.forces[:, 0], self.forces[:, 1]), dtype=np.float64)

    @property
    def azimuths(self) -> FloatArray:
        return np.asarray(np.arctan2(self.forces[:, 1], self.forces[:, 0]), dtype=np.float64)

    @property
    def any_saturated(self) -> bool:
        return bool(np.any(self.saturated))

    def stacked(self) -> FloatArray:
        return self.forces.reshape(-1)


def _configuration_matrix(positions: FloatArray) -> FloatArray:
    columns = []
    for lx, ly in positions:
        columns.append((1.0, 0.0, -ly))
        columns.append((0.0, 1.0, lx))
    return np.asarray(columns, dtype=np.float64).T


def allocation_matrix(layout: ThrusterLayout) -> FloatArray:
    """3 x 2n map from stacked [F_x1, F_y1, ...] to [tau_x, tau_y, tau_n]."""
    return layout.B.copy()


def allocate(layout: ThrusterLayout, tau_cmd: ArrayLike) -> tuple[ThrusterCommand, ControlWrench]:
    """Minimum-norm force split, radial saturation per thruster, realized wrench."""
    tau = np.asarray(tau_cmd, dtype=np.float64)
    forces = (layout.B_pinv @ tau).reshape(-1, 2)
    magnitude = np.hypot(forces[:, 0], forces[:, 1])
    saturated = magnitude > layout.f_max
    if np.any(saturated):
        scale = np.ones_like(magnitude)
        scale[saturated] = layout.f_max / magnitude[saturated]
        forces = forces * scale[:, np.newaxis]
    command = ThrusterCommand(forces=forces, saturated=saturated)
    return command, layout.B @ command.stacked()


def wrench_box(layout: ThrusterLayout) -> ActuatorBox:
    """Axis-aligned inner box of the attainable wrench set, scaled by c_f and c_n."""
    force = layout.c_f * layout.count * layout.f_max
    lever = float(np.sum(np.linalg.norm(layout.positions, axis=1)))
    moment = layout.c_n * lever * layout.f_max
    return ActuatorBox.symmetric((force, force, moment))


def certify_box(layout: ThrusterLayout, box: ActuatorBox) -> tuple[bool, float]:
    """Check that every box vertex allocates without saturation.

    Thruster forces are linear in tau and the magnitude is convex, so the
    worst case over the box sits at a vertex. Returns (ok, worst magnitude).
    """
    forces = (layout.B_pinv @ box.vertices().T).T.reshape(8, -1, 2)
    worst = float(np.max(np.hypot(forces[..., 0], forces[..., 1]))) if forces.size else 0.0
    return worst <= layout.f_max * (1.0 + 1e-12), worst
