"""Closed-loop simulation driver and seeded ensembles."""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from safesmc.allocation import ThrusterCommand, allocate
from safesmc.config import ScenarioConfig
from safesmc.constants import (
    DISTURBANCE_CHANNELS,
    ERR_UNSAFE_START,
    MSG_FILTER_INFEASIBLE,
    MSG_THRUSTER_SATURATED,
    RESOLVED_CONFIG_FILE,
)
from safesmc.disturbance import DisturbanceSample, make_disturbance
from safesmc.dynamics import ControlWrench, VesselState, integrate_step
from safesmc.exceptions import UnsafeStartError
from safesmc.hocbf import h_dot, h_value
from safesmc.pipeline import StepDiagnostics, filter_pipeline
from safesmc.projection import FilterResult
from safesmc.smc import pose_error, sliding_surface
from safesmc.trajectory import (
    RunMetrics,
    TrajectoryLog,
    compute_metrics,
    log_columns,
    save_log,
    save_metrics,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EnsembleMember:
    index: int
    seed: int
    log: TrajectoryLog
    metrics: RunMetrics


def ensemble_seed(seed: int, index: int) -> int:
    """Independent per-member seed derived from (seed, index)."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def _noise_rng(config: ScenarioConfig) -> np.random.Generator | None:
    if config.pose_noise is None:
        return None
    # Child streams 0..2 belong to the disturbance channels.
    streams = np.random.SeedSequence(config.seed).spawn(len(DISTURBANCE_CHANNELS) + 1)
    return np.random.default_rng(streams[-1])


def _check_initial_safety(config: ScenarioConfig) -> None:
    if config.allow_unsafe_start:
        return
    for index, obstacle in enumerate(config.obstacles):
        h0 = h_value(obstacle, config.initial.eta)
        if h0 < 0.0:
            raise UnsafeStartError(ERR_UNSAFE_START.format(index=index, h=h0))


def _row(
    config: ScenarioConfig,
    t: float,
    state: VesselState,
    measured: VesselState | None,
    diag: StepDiagnostics,
    result: FilterResult,
    tau_real: ControlWrench,
    command: ThrusterCommand,
    sample: DisturbanceSample,
) -> list[float]:
    ref = config.reference
    e_p = pose_error(state.eta, ref.eta_d)
    s = sliding_surface(config.gains, state, ref)
    row: list[float] = [t, *state.eta, *state.nu, *e_p, *s, float(np.linalg.norm(s))]
    row += [*diag.tau_smc, *result.tau_safe, *diag.delta_u, float(np.linalg.norm(diag.delta_u))]
    row += [*tau_real, *sample.total, *sample.wind, *sample.wave, *sample.current]
    row.append(float(sample.clipped))
    for obstacle, constraint in zip(config.obstacles, diag.constraints, strict=True):
        row += [
            h_value(obstacle, state.eta),
            h_dot(obstacle, state),
            constraint.alpha,
            constraint.residual(tau_real),
        ]
    row += [float(result.modified), float(result.sweeps_used), result.max_residual,
            float(result.feasible)]
    for force, azimuth, saturated in zip(
        command.magnitudes, command.azimuths, command.saturated, strict=True
    ):
        row += [float(force), float(azimuth), float(saturated)]
    if measured is not None:
        row += [*measured.eta]
    return [float(v) for v in row]


def run_scenario(config: ScenarioConfig) -> tuple[TrajectoryLog, RunMetrics]:
    """Simulate one closed-loop run; deterministic given the config and its seed.

    Each row: measure -> sample disturbance -> filter_pipeline -> allocate ->
    log, then one RK4 step with the realized wrench and the true disturbance.
    The last row is logged without a further step, so there are steps + 1 rows.
    """
    _check_initial_safety(config)
    process = make_disturbance(config.disturbance, config.dt)
    noise_rng = _noise_rng(config)
    columns = log_columns(len(config.obstacles), config.thrusters.count,
                          measured=noise_rng is not None)
    ref = config.reference
    steps = config.steps
    logger.info("Running %d steps (dt=%.3g s, seed=%d, filter=%s)",
                steps, config.dt, config.seed, config.filter.method)

    state = config.initial
    rows: list[list[float]] = []
    timing: list[float] = []
    infeasible_episode = False
    saturation_reported = False
    for k in range(steps + 1):
        t = k * config.dt
        measured: VesselState | None = None
        if noise_rng is not None and config.pose_noise is not None:
            noise = config.pose_noise * noise_rng.standard_normal(3)
            measured = VesselState.create(state.eta + noise, state.nu)
        sample = process.sample(t)

        start = time.perf_counter()
        tau_safe, result, diag = filter_pipeline(
            config.vessel, config.gains, config.barrier, config.box, config.filter,
            config.obstacles, measured if measured is not None else state, ref,
        )
        timing.append(time.perf_counter() - start)

        command, tau_real = allocate(config.thrusters, tau_safe)
        if not result.feasible:
            level = logging.DEBUG if infeasible_episode else logging.WARNING
            logger.log(level, MSG_FILTER_INFEASIBLE.format(t=t, res=result.max_residual))
        infeasible_episode = not result.feasible
        if command.any_saturated and not saturation_reported:
            logger.warning(MSG_THRUSTER_SATURATED.format(t=t))
            saturation_reported = True

        rows.append(_row(config, t, state, measured, diag, result, tau_real, command, sample))
        if k < steps:
            state = integrate_step(config.vessel, state, tau_real, sample.total, config.dt)

    log = TrajectoryLog(
        columns=columns,
        data=np.asarray(rows, dtype=np.float64).reshape(len(rows), len(columns)),
        timing=np.asarray(timing, dtype=np.float64),
    )
    metrics = compute_metrics(log)
    logger.info(
        "Run finished: min h=%s, steady |e_p|=%.3g, infeasible=%d, goal at %s",
        metrics.min_h, metrics.steady_state_ep, metrics.infeasible_steps,
        metrics.goal_reach_time,
    )
    return log, metrics


def _run_member(config: ScenarioConfig, index: int) -> EnsembleMember:
    seed = ensemble_seed(config.seed, index)
    log, metrics = run_scenario(config.with_seed(seed))
    return EnsembleMember(index=index, seed=seed, log=log, metrics=metrics)


def run_ensemble(config: ScenarioConfig, runs: int, workers: int = 1) -> list[EnsembleMember]:
    """Run *runs* members with independent streams; workers > 1 uses a process pool."""
    if workers <= 1 or runs <= 1:
        return [_run_member(config, index) for index in range(runs)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_run_member, config, index) for index in range(runs)]
        return [future.result() for future in futures]


def write_run(
    out_dir: Path, config: ScenarioConfig, log: TrajectoryLog, metrics: RunMetrics
) -> Path:
    """Write the log pair, metrics.json and the resolved config.json into *out_dir*."""
    save_log(log, out_dir)
    save_metrics(metrics, out_dir)
    (out_dir / RESOLVED_CONFIG_FILE).write_text(
        json.dumps(config.to_dict(), indent=2) + "\n", encoding="utf-8"
    )
    return out_dir
