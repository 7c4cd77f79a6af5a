"""Tests for trajectory module."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from safesmc.exceptions import LogError
from safesmc.trajectory import (
    TrajectoryLog,
    compute_metrics,
    load_log,
    load_metrics,
    log_columns,
    save_log,
)


def _log(rows: int, n_obstacles: int = 1) -> TrajectoryLog:
    columns = log_columns(n_obstacles, 3)
    data = np.zeros((rows, len(columns)))
    data[:, columns.index("t_s")] = 0.5 * np.arange(rows)
    data[:, columns.index("feasible")] = 1.0
    return TrajectoryLog(columns=columns, data=data, timing=np.full(rows, 1e-4))


class TestLogColumns:
    def test_layout(self) -> None:
        columns = log_columns(2, 3, measured=True)
        assert columns[:7] == ("t_s", "x_m", "y_m", "psi_rad", "u_mps", "v_mps", "r_radps")
        assert "tau_smc_n_Nm" in columns
        assert columns.index("h0_m2") < columns.index("h1_m2") < columns.index("modified")
        assert columns[-3:] == ("meas_x_m", "meas_y_m", "meas_psi_rad")
        assert len(set(columns)) == len(columns)

    def test_counts(self) -> None:
        log = _log(4, n_obstacles=2)
        assert log.obstacle_count == 2
        assert log.thruster_count == 3


class TestComputeMetrics:
    def test_goal_needs_hold_time(self) -> None:
        log = _log(60)
        ex = log.columns.index("ep_x_m")
        log.data[:, ex] = 5.0
        log.data[10:25, ex] = 0.1  # 7 s inside: too short
        log.data[30:, ex] = 0.1  # from t = 15 s onward
        assert compute_metrics(log).goal_reach_time == pytest.approx(15.0)

    def test_counts_flags(self) -> None:
        log = _log(8)
        log.data[2, log.columns.index("feasible")] = 0.0
        log.data[3, log.columns.index("sat1")] = 1.0
        log.data[4, log.columns.index("d_clipped")] = 1.0
        log.data[5, log.columns.index("modified")] = 1.0
        log.data[:, log.columns.index("h0_m2")] = np.linspace(10.0, -1.0, 8)
        metrics = compute_metrics(log)
        assert metrics.infeasible_steps == 1
        assert metrics.saturation_steps == 1
        assert metrics.disturbance_clips == 1
        assert metrics.modification_rate == pytest.approx(1 / 8)
        assert metrics.min_h == pytest.approx(-1.0)

    def test_tail_is_last_quarter(self) -> None:
        log = _log(100)
        log.data[:, log.columns.index("s_norm")] = np.arange(100.0)
        log.data[:74, log.columns.index("ep_y_m")] = 9.0
        metrics = compute_metrics(log)
        assert metrics.max_s == 99.0
        assert metrics.steady_state_position_error == 0.0
        assert metrics.max_s_tail == 99.0


class TestPersistence:
    def test_round_trip_is_exact(self, tmp_path: Path) -> None:
        log = _log(5)
        log.data[:, log.columns.index("x_m")] = [0.1, 1 / 3, np.pi, -2e-17, 1e300]
        save_log(log, tmp_path)
        loaded = load_log(tmp_path)
        assert loaded.columns == log.columns
        np.testing.assert_array_equal(loaded.data, log.data)
        np.testing.assert_array_equal(loaded.timing, log.timing)

    def test_missing_files_raise(self, tmp_path: Path) -> None:
        with pytest.raises(LogError, match="trajectory.csv"):
            load_log(tmp_path)
        with pytest.raises(LogError, match="metrics.json"):
            load_metrics(tmp_path)

    def test_bad_header_raises(self, tmp_path: Path) -> None:
        save_log(_log(3), tmp_path)
        path = tmp_path / "trajectory.csv"
        lines = path.read_text().splitlines()
        lines[0] = lines[0].replace("x_m", "east_m", 1)
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(LogError, match="header"):
            load_log(tmp_path)
