"""Trajectory log schema, CSV persistence and replayable run metrics."""

from __future__ import annotations

import csv
import json
import math
import re
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any

import numpy as np

from safesmc.arrays import FloatArray
from safesmc.constants import (
    AXES,
    ERR_LOG_MISSING,
    ERR_LOG_SCHEMA,
    ERROR_COLUMNS,
    GOAL_HEADING_TOL,
    GOAL_HOLD_TIME,
    GOAL_POSITION_TOL,
    METRICS_FILE,
    SLIDING_COLUMNS,
    STATE_COLUMNS,
    STEADY_STATE_FRACTION,
    TIMING_FILE,
    TRAJECTORY_FILE,
)
from safesmc.exceptions import LogError

TIMING_COLUMNS = ("step", "controller_s")
FILTER_COLUMNS = ("modified", "sweeps_used", "max_residual", "feasible")
MEASURED_COLUMNS = ("meas_x_m", "meas_y_m", "meas_psi_rad")
_H_COLUMN = re.compile(r"^h(\d+)_m2$")


def _axis_columns(prefix: str) -> tuple[str, ...]:
    return tuple(f"{prefix}_{axis}_{unit}" for axis, unit in AXES)


def log_columns(n_obstacles: int, n_thrusters: int, measured: bool = False) -> tuple[str, ...]:
    """Fixed column order for a run with the given obstacle and thruster counts."""
    columns: list[str] = [*STATE_COLUMNS, *ERROR_COLUMNS, *SLIDING_COLUMNS]
    columns += _axis_columns("tau_smc") + _axis_columns("tau_safe") + _axis_columns("du")
    columns.append("du_norm")
    columns += _axis_columns("tau_real")
    for source in ("d", "d_wind", "d_wave", "d_current"):
        columns += _axis_columns(source)
    columns.append("d_clipped")
    for k in range(n_obstacles):
        columns += [f"h{k}_m2", f"hdot{k}_m2ps", f"alpha{k}_ps", f"res{k}"]
    columns += FILTER_COLUMNS
    for i in range(n_thrusters):
        columns += [f"f{i}_N", f"az{i}_rad", f"sat{i}"]
    if measured:
        columns += MEASURED_COLUMNS
    return tuple(columns)


@dataclass(frozen=True, eq=False)
class TrajectoryLog:
    """One row per logged step; controller wall-time is kept apart from the rows."""

    columns: tuple[str, ...]
    data: FloatArray  # (rows, columns)
    timing: FloatArray  # (rows,) seconds spent in the controller per row

    def __len__(self) -> int:
        return int(self.data.shape[0])

    def column(self, name: str) -> FloatArray:
        return self.data[:, self.columns.index(name)]

    def columns_for(self, prefix: str) -> FloatArray:
        """The three axis columns of a wrench-like quantity, shape (rows, 3)."""
        idx = [self.columns.index(name) for name in _axis_columns(prefix)]
        return self.data[:, idx]

    @property
    def obstacle_count(self) -> int:
        return sum(1 for name in self.columns if _H_COLUMN.match(name))

    @property
    def thruster_count(self) -> int:
        return sum(1 for name in self.columns if re.fullmatch(r"f\d+_N", name))


@dataclass(frozen=True)
class RunMetrics:
    min_h: float | None
    steady_state_ep: float
    steady_state_ep_inf: float
    steady_state_position_error: float
    max_s_tail: float
    max_s: float
    s_finite: bool
    max_delta_u: float
    step_time_mean: float
    step_time_p99: float
    modification_rate: float
    infeasible_steps: int
    saturation_steps: int
    disturbance_clips: int
    goal_reach_time: float | None

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def _tail(n_rows: int) -> slice:
    start = min(n_rows - 1, int(math.floor((1.0 - STEADY_STATE_FRACTION) * n_rows)))
    return slice(max(start, 0), n_rows)


def _goal_reach_time(t: FloatArray, e_pos: FloatArray, e_psi: FloatArray) -> float | None:
    inside = (e_pos < GOAL_POSITION_TOL) & (np.abs(e_psi) < GOAL_HEADING_TOL)
    # Earliest row from which the criterion holds for GOAL_HOLD_TIME seconds.
    run_start: int | None = None
    for i, ok in enumerate(inside):
        if not ok:
            run_start = None
            continue
        if run_start is None:
            run_start = i
        if t[i] - t[run_start] >= GOAL_HOLD_TIME - 1e-9:
            return float(t[run_start])
    return None


def _select(log: TrajectoryLog, names: list[str]) -> FloatArray:
    return log.data[:, [log.columns.index(name) for name in names]]


def compute_metrics(log: TrajectoryLog) -> RunMetrics:
    """Metrics computed from the log alone, so a saved log replays to the same values."""
    n = len(log)
    tail = _tail(n)
    t = log.column("t_s")
    e_p = _select(log, list(ERROR_COLUMNS))
    e_norm = np.linalg.norm(e_p, axis=1)
    e_pos = np.hypot(e_p[:, 0], e_p[:, 1])
    s_norm = log.column("s_norm")

    h_columns = [c for c in log.columns if _H_COLUMN.match(c)]
    min_h = float(np.min(_select(log, h_columns))) if h_columns else None
    sat_columns = [c for c in log.columns if re.fullmatch(r"sat\d+", c)]
    saturated_rows = np.any(_select(log, sat_columns) > 0.5, axis=1)
    timing = log.timing if log.timing.size else np.zeros(1)

    return RunMetrics(
        min_h=min_h,
        steady_state_ep=float(np.max(e_norm[tail])),
        steady_state_ep_inf=float(np.max(np.abs(e_p[tail]))),
        steady_state_position_error=float(np.max(e_pos[tail])),
        max_s_tail=float(np.max(s_norm[tail])),
        max_s=float(np.max(s_norm)),
        s_finite=bool(np.all(np.isfinite(s_norm))),
        max_delta_u=float(np.max(log.column("du_norm"))),
        step_time_mean=float(np.mean(timing)),
        step_time_p99=float(np.percentile(timing, 99)),
        modification_rate=float(np.mean(log.column("modified"))),
        infeasible_steps=int(np.sum(log.column("feasible") < 0.5)),
        saturation_steps=int(np.sum(saturated_rows)),
        disturbance_clips=int(np.sum(log.column("d_clipped") > 0.5)),
        goal_reach_time=_goal_reach_time(t, e_pos, e_p[:, 2]),
    )


def _format(value: float) -> str:
    return repr(float(value))


def save_log(log: TrajectoryLog, out_dir: Path) -> tuple[Path, Path]:
    """Write trajectory.csv and timing.csv into *out_dir*; floats keep full precision."""
    out_dir.mkdir(parents=True, exist_ok=True)
    traj_path = out_dir / TRAJECTORY_FILE
    with traj_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(log.columns)
        for row in log.data:
            writer.writerow([_format(v) for v in row])
    timing_path = out_dir / TIMING_FILE
    with timing_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TIMING_COLUMNS)
        for step, seconds in enumerate(log.timing):
            writer.writerow([step, _format(seconds)])
    return traj_path, timing_path


def _read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    if not path.exists():
        raise LogError(ERR_LOG_MISSING.format(name=path.name, path=path))
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        rows = list(reader)
    if header is None:
        raise LogError(ERR_LOG_SCHEMA.format(path=path))
    return header, rows


def load_log(run_dir: Path) -> TrajectoryLog:
    header, rows = _read_csv(run_dir / TRAJECTORY_FILE)
    expected = log_columns(
        sum(1 for c in header if _H_COLUMN.match(c)),
        sum(1 for c in header if re.fullmatch(r"f\d+_N", c)),
        measured=MEASURED_COLUMNS[0] in header,
    )
    if tuple(header) != expected:
        raise LogError(ERR_LOG_SCHEMA.format(path=run_dir / TRAJECTORY_FILE))
    data = np.array([[float(v) for v in row] for row in rows], dtype=np.float64)
    timing_header, timing_rows = _read_csv(run_dir / TIMING_FILE)
    if tuple(timing_header) != TIMING_COLUMNS:
        raise LogError(ERR_LOG_SCHEMA.format(path=run_dir / TIMING_FILE))
    timing = np.array([float(row[1]) for row in timing_rows], dtype=np.float64)
    return TrajectoryLog(columns=tuple(header), data=data.reshape(len(rows), len(header)),
                         timing=timing)


def save_metrics(metrics: RunMetrics, out_dir: Path) -> Path:
    path = out_dir / METRICS_FILE
    path.write_text(json.dumps(metrics.to_dict(), indent=2) + "\n", encoding="utf-8")
    return path


def load_metrics(run_dir: Path) -> dict[str, Any]:
    path = run_dir / METRICS_FILE
    if not path.exists():
        raise LogError(ERR_LOG_MISSING.format(name=METRICS_FILE, path=path))
    data: dict[str, Any] = json.loads(path.read_text(encoding="utf-8"))
    return data
