"""One controller step: SMC wrench, barrier rows, safety filter."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from safesmc.arrays import FloatArray
from safesmc.constants import FILTER_ORACLE
from safesmc.dynamics import ControlWrench, VesselParams, VesselState
from safesmc.exceptions import InfeasibleProblemError
from safesmc.hocbf import BarrierParams, HalfSpaceConstraint, Obstacle, build_all
from safesmc.oracle import qp_oracle
from safesmc.projection import (
    ActuatorBox,
    FilterConfig,
    FilterResult,
    clip_box,
    max_violation,
    project,
)
from safesmc.smc import ReferenceSignal, SmcGains, pose_error, sliding_surface, smc_wrench


@dataclass(frozen=True, eq=False)
class StepDiagnostics:
    tau_smc: ControlWrench
    delta_u: ControlWrench  # tau_safe - tau_smc
    constraints: list[HalfSpaceConstraint]
    s: FloatArray
    e_p: FloatArray


def _oracle_result(
    box: ActuatorBox,
    constraints: Sequence[HalfSpaceConstraint],
    config: FilterConfig,
    tau_nominal: ControlWrench,
) -> FilterResult:
    clipped = clip_box(box, tau_nominal)
    try:
        tau = qp_oracle(box, constraints, tau_nominal)
    except InfeasibleProblemError:
        tau = clipped
    residual = max_violation(constraints, tau)
    return FilterResult(
        tau_safe=tau,
        modified=not np.array_equal(tau, clipped),
        sweeps_used=0,
        max_residual=residual,
        feasible=residual <= config.tol,
    )


def filter_pipeline(
    params: VesselParams,
    gains: SmcGains,
    bparams: BarrierParams,
    box: ActuatorBox,
    fconfig: FilterConfig,
    obstacles: Sequence[Obstacle],
    state: VesselState,
    ref: ReferenceSignal,
) -> tuple[ControlWrench, FilterResult, StepDiagnostics]:
    """tau_SMC -> half-space rows -> filter -> tau_safe.

    The filter is the relaxed projection unless fconfig.method is "oracle",
    in which case the exact QP runs in its place; an infeasible QP falls back
    to the clipped wrench and is reported with feasible=False.
    """
    tau_smc = smc_wrench(params, gains, state, ref)
    constraints = build_all(params, bparams, obstacles, state)
    if fconfig.method == FILTER_ORACLE:
        result = _oracle_result(box, constraints, fconfig, tau_smc)
    else:
        result = project(box, constraints, fconfig, tau_smc)
    diagnostics = StepDiagnostics(
        tau_smc=tau_smc,
        delta_u=result.tau_safe - tau_smc,
        constraints=constraints,
        s=sliding_surface(gains, state, ref),
        e_p=pose_error(state.eta, ref.eta_d),
    )
    return result.tau_safe, result, diagnostics
