"""Tests for simulation module."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any

import numpy as np
import pytest

from safesmc.config import parse_config
from safesmc.dynamics import VesselState
from safesmc.exceptions import UnsafeStartError
from safesmc.hocbf import build_constraint, h_ddot
from safesmc.simulation import ensemble_seed, run_ensemble, run_scenario, write_run
from safesmc.trajectory import compute_metrics, load_log, load_metrics, log_columns

from .conftest import scenario_dict

GENTLE = {
    "d_max": 800.0,
    "wind": {"mean": [100.0, 50.0, 200.0], "sigma": 60.0, "correlation_time": 20.0},
    "wave": {"mean": [50.0, 0.0, 0.0], "sigma": [80.0, 80.0, 300.0], "correlation_time": 8.0},
    "current": {"mean": [50.0, -25.0, 0.0], "sigma": 30.0, "correlation_time": 120.0},
}


def _disturbed(**overrides: Any) -> dict[str, Any]:
    data = scenario_dict(disturbance=GENTLE, initial={"eta": [0.0, 0.0, 0.0]},
                         goal=[20.0, 5.0, 0.0], seed=3)
    data.update(overrides)
    return data


class TestRunScenario:
    def test_logs_every_step_plus_final(self, sample_config: dict[str, Any]) -> None:
        config = parse_config(sample_config)
        log, _ = run_scenario(config)
        assert len(log) == config.steps + 1 == 201
        assert log.columns == log_columns(0, 3)
        assert log.timing.shape == (201,)
        np.testing.assert_allclose(log.column("t_s")[-1], 20.0)

    def test_holds_station_at_goal(self, sample_config: dict[str, Any]) -> None:
        log, metrics = run_scenario(parse_config(sample_config))
        assert metrics.steady_state_ep <= 1e-6
        assert float(np.max(np.abs(log.columns_for("tau_safe")))) == 0.0
        assert metrics.goal_reach_time == 0.0
        assert metrics.infeasible_steps == 0
        assert metrics.min_h is None

    def test_reaches_goal_in_calm_water(self) -> None:
        config = parse_config(scenario_dict(
            horizon=300.0,
            goal=[20.0, 10.0, 0.0],
            smc={"Lambda": [0.1, 0.1, 0.2], "Ks": 0.03, "phi": 0.3},
        ))
        _, metrics = run_scenario(config)
        assert metrics.goal_reach_time is not None
        assert metrics.goal_reach_time <= 250.0
        assert metrics.steady_state_position_error < 1.0
        assert metrics.saturation_steps == 0

    def test_identical_runs_write_identical_logs(self, tmp_path: Path) -> None:
        config = parse_config(_disturbed())
        for name in ("a", "b"):
            log, metrics = run_scenario(config)
            write_run(tmp_path / name, config, log, metrics)
        for artifact in ("trajectory.csv", "config.json"):
            first = (tmp_path / "a" / artifact).read_bytes()
            assert first == (tmp_path / "b" / artifact).read_bytes()

    def test_replay_reproduces_metrics(self, tmp_path: Path) -> None:
        config = parse_config(_disturbed(obstacles=[{"center": [10.0, 20.0], "radius": 4.0}]))
        log, metrics = run_scenario(config)
        out = write_run(tmp_path / "run", config, log, metrics)
        replayed = json.loads(json.dumps(compute_metrics(load_log(out)).to_dict()))
        assert replayed == load_metrics(out)
        assert json.loads((out / "config.json").read_text())["seed"] == 3

    def test_disturbance_seed_changes_trajectory(self) -> None:
        config = parse_config(_disturbed())
        first, _ = run_scenario(config)
        second, _ = run_scenario(config.with_seed(4))
        assert not np.array_equal(first.column("x_m"), second.column("x_m"))

    def test_unsafe_start_raises(self) -> None:
        data = scenario_dict(obstacles=[{"center": [1.0, 0.0], "radius": 5.0}])
        with pytest.raises(UnsafeStartError, match="obstacle 0"):
            run_scenario(parse_config(data))

    def test_unsafe_start_allowed(self) -> None:
        data = scenario_dict(obstacles=[{"center": [1.0, 0.0], "radius": 5.0}],
                             allow_unsafe_start=True, horizon=1.0)
        log, metrics = run_scenario(parse_config(data))
        assert len(log) == 11
        assert metrics.min_h is not None
        assert metrics.min_h < 0.0

    def test_stays_clear_of_obstacle(self) -> None:
        config = parse_config(scenario_dict(
            horizon=300.0,
            goal=[80.0, 0.0, 0.0],
            smc={"Lambda": [0.02, 0.02, 0.1], "Ks": [0.01, 0.01, 0.02], "phi": 0.3},
            barrier={"alpha": 0.1, "disturbance_bound": 800.0},
            disturbance=GENTLE,
            obstacles=[{"center": [40.0, 3.0], "radius": 8.0}],
        ))
        log, metrics = run_scenario(config)
        assert metrics.infeasible_steps == 0
        assert metrics.min_h is not None
        assert metrics.min_h > 0.0
        assert metrics.s_finite
        assert float(np.max(log.column("modified"))) == 1.0

    def test_logged_rows_satisfy_barrier_inequality(self) -> None:
        config = parse_config(scenario_dict(
            horizon=300.0,
            goal=[80.0, 0.0, 0.0],
            smc={"Lambda": [0.02, 0.02, 0.1], "Ks": [0.01, 0.01, 0.02], "phi": 0.3},
            disturbance=GENTLE,
            obstacles=[{"center": [40.0, 3.0], "radius": 8.0}],
        ))
        log, _ = run_scenario(config)
        obstacle = config.obstacles[0]
        col = log.columns.index
        pose = [col(name) for name in ("x_m", "y_m", "psi_rad")]
        velocity = [col(name) for name in ("u_mps", "v_mps", "r_radps")]
        saturated = np.column_stack([log.column(f"sat{i}") for i in range(log.thruster_count)])
        tau_real = log.columns_for("tau_real")
        checked = 0
        for k, row in enumerate(log.data):
            if row[col("feasible")] != 1.0 or np.any(saturated[k]):
                continue
            state = VesselState.create(row[pose], row[velocity])
            constraint = build_constraint(config.vessel, config.barrier, obstacle, state)
            assert constraint.residual(tau_real[k]) == pytest.approx(row[col("res0")], abs=1e-12)
            alpha = constraint.alpha
            lhs = (
                h_ddot(config.vessel, obstacle, state, tau_real[k])
                + 2.0 * alpha * constraint.h_dot
                + alpha**2 * constraint.h
            )
            assert lhs >= -config.filter.tol - 1e-9
            checked += 1
        assert checked > len(log) // 2

    def test_default_barrier_covers_disturbance(self) -> None:
        config = parse_config(scenario_dict(
            horizon=300.0,
            goal=[80.0, 0.0, 0.0],
            disturbance={"d_max": 6000.0},
            obstacles=[{"center": [40.0, 2.0], "radius": 8.0}],
        ))
        assert config.barrier.disturbance_bound == 6000.0
        _, metrics = run_scenario(config)
        assert metrics.min_h is not None
        assert metrics.min_h >= -1e-6 * 8.0**2

    def test_skirts_obstacle_and_reaches_goal(self) -> None:
        config = parse_config(scenario_dict(
            horizon=400.0,
            goal=[40.0, 0.0, 0.0],
            smc={"Lambda": [0.1, 0.1, 0.2], "Ks": 0.03, "phi": 0.3},
            barrier={"alpha": 0.1, "disturbance_bound": 800.0},
            disturbance=GENTLE,
            obstacles=[{"center": [20.0, 4.0], "radius": 3.0}],
        ))
        _, metrics = run_scenario(config)
        assert metrics.min_h is not None
        assert metrics.min_h >= -1e-6 * 3.0**2
        assert metrics.goal_reach_time is not None
        assert metrics.steady_state_position_error < 1.0

    def test_infeasible_steps_logged(self, caplog: pytest.LogCaptureFixture) -> None:
        config = parse_config(scenario_dict(
            horizon=10.0,
            thrusters={"f_max": 100.0},
            initial={"eta": [0.0, 0.0, 0.0], "nu": [1.0, 0.0, 0.0]},
            obstacles=[{"center": [15.0, 0.0], "radius": 8.0}],
        ))
        with caplog.at_level(logging.WARNING, logger="safesmc.simulation"):
            log, metrics = run_scenario(config)
        assert metrics.infeasible_steps > 0
        assert "Safety constraints infeasible" in caplog.text
        assert np.all(np.abs(log.columns_for("tau_safe")) <= config.box.tau_max)

    def test_pose_noise_columns(self) -> None:
        config = parse_config(scenario_dict(pose_noise={"sigma": [0.5, 0.5, 0.01]},
                                            horizon=5.0))
        log, _ = run_scenario(config)
        assert log.columns[-3:] == ("meas_x_m", "meas_y_m", "meas_psi_rad")
        measured = log.column("meas_x_m")
        assert not np.array_equal(measured, log.column("x_m"))
        again, _ = run_scenario(config)
        np.testing.assert_array_equal(again.column("meas_x_m"), measured)


class TestEnsemble:
    def test_members_get_derived_seeds(self) -> None:
        config = parse_config(_disturbed(horizon=5.0))
        members = run_ensemble(config, 3)
        assert [m.index for m in members] == [0, 1, 2]
        assert [m.seed for m in members] == [ensemble_seed(3, i) for i in range(3)]
        assert len({m.seed for m in members}) == 3
        assert not np.array_equal(members[0].log.column("d_x_N"), members[1].log.column("d_x_N"))

    def test_workers_do_not_change_results(self) -> None:
        config = parse_config(_disturbed(horizon=5.0))
        serial = run_ensemble(config, 2, workers=1)
        pooled = run_ensemble(config, 2, workers=2)
        for a, b in zip(serial, pooled, strict=True):
            assert a.seed == b.seed
            np.testing.assert_array_equal(a.log.data, b.log.data)

    def test_seed_derivation_is_stable(self) -> None:
        assert ensemble_seed(0, 1) == ensemble_seed(0, 1)
        assert ensemble_seed(0, 1) != ensemble_seed(1, 0)
