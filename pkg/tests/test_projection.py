"""Tests for projection module."""

from __future__ import annotations

import numpy as np
import pytest

from safesmc.arrays import ArrayLike
from safesmc.exceptions import ConfigError
from safesmc.hocbf import HalfSpaceConstraint
from safesmc.oracle import qp_oracle
from safesmc.projection import (
    ActuatorBox,
    FilterConfig,
    clip_box,
    iterate_projections,
    max_violation,
    project,
)

UNIT_BOX = ActuatorBox.symmetric((10.0, 10.0, 10.0))


def _row(a: ArrayLike, b: float, obstacle_id: int = 0) -> HalfSpaceConstraint:
    return HalfSpaceConstraint(a=np.asarray(a, dtype=np.float64), b=b, obstacle_id=obstacle_id,
                               h=0.0, h_dot=0.0, alpha=0.0)


class TestActuatorBox:
    def test_clip(self) -> None:
        np.testing.assert_array_equal(clip_box(UNIT_BOX, [12.0, -3.0, -40.0]), [10.0, -3.0, -10.0])

    def test_contains(self) -> None:
        assert UNIT_BOX.contains(np.array([10.0, -10.0, 0.0]))
        assert not UNIT_BOX.contains(np.array([10.0 + 1e-9, 0.0, 0.0]))

    def test_vertices(self) -> None:
        box = ActuatorBox.create((-1.0, -2.0, -3.0), (1.0, 2.0, 3.0))
        corners = box.vertices()
        assert corners.shape == (8, 3)
        assert len({tuple(c) for c in corners}) == 8
        np.testing.assert_array_equal(np.abs(corners), np.tile([1.0, 2.0, 3.0], (8, 1)))

    def test_rejects_inverted_bounds(self) -> None:
        with pytest.raises(ConfigError, match="box"):
            ActuatorBox.create((1.0, 0.0, 0.0), (0.0, 1.0, 1.0))


class TestFilterConfig:
    @pytest.mark.parametrize(
        ("kwargs", "field"),
        [
            ({"gamma": 0.0}, "filter.gamma"),
            ({"gamma": 1.5}, "filter.gamma"),
            ({"sweeps": 0}, "filter.sweeps"),
            ({"tol": 0.0}, "filter.tol"),
            ({"method": "newton"}, "filter.method"),
        ],
    )
    def test_rejects_bad_values(self, kwargs: dict[str, object], field: str) -> None:
        with pytest.raises(ConfigError, match=field):
            FilterConfig(**kwargs)  # type: ignore[arg-type]


class TestProject:
    def test_no_violation_returns_nominal(self) -> None:
        tau = np.array([1.25, -3.5, 7.0])
        result = project(UNIT_BOX, [_row((1.0, 0.0, 0.0), -5.0)], FilterConfig(), tau)
        np.testing.assert_array_equal(result.tau_safe, tau)
        assert not result.modified
        assert result.sweeps_used == 1
        assert result.feasible
        assert result.max_residual == 0.0

    def test_no_rows_only_clips(self) -> None:
        result = project(UNIT_BOX, [], FilterConfig(), [50.0, 0.0, -50.0])
        np.testing.assert_array_equal(result.tau_safe, [10.0, 0.0, -10.0])
        assert not result.modified

    def test_single_row(self) -> None:
        result = project(UNIT_BOX, [_row((1.0, 0.0, 0.0), 5.0)], FilterConfig(), [0.0, 0.0, 0.0])
        np.testing.assert_allclose(result.tau_safe, [5.0, 0.0, 0.0])
        assert result.modified
        assert result.feasible

    def test_degenerate_row_skipped(self) -> None:
        rows = [_row((0.0, 0.0, 0.0), -1.0), _row((0.0, 2.0, 0.0), 4.0)]
        result = project(UNIT_BOX, rows, FilterConfig(), [1.0, 0.0, 1.0])
        np.testing.assert_allclose(result.tau_safe, [1.0, 2.0, 1.0])
        assert result.feasible

    def test_contradictory_rows_infeasible(self) -> None:
        rows = [_row((1.0, 0.0, 0.0), 2.0), _row((-1.0, 0.0, 0.0), 2.0)]
        config = FilterConfig(sweeps=5)
        result = project(UNIT_BOX, rows, config, [0.0, 0.0, 0.0])
        assert not result.feasible
        assert result.sweeps_used == 5
        assert result.max_residual > config.tol
        assert UNIT_BOX.contains(result.tau_safe)
        assert result.max_residual <= max_violation(rows, np.zeros(3))

    def test_row_outside_box_infeasible(self) -> None:
        result = project(UNIT_BOX, [_row((1.0, 0.0, 0.0), 20.0)], FilterConfig(), [0.0, 0.0, 0.0])
        assert not result.feasible
        np.testing.assert_allclose(result.tau_safe, [10.0, 0.0, 0.0])
        assert result.max_residual == pytest.approx(10.0)

    def test_in_box_and_never_worse(self) -> None:
        rng = np.random.default_rng(17)
        config = FilterConfig()
        for _ in range(500):
            box = ActuatorBox.symmetric(rng.uniform(0.5, 2.0, 3))
            rows = [_row(rng.standard_normal(3), float(rng.standard_normal()), j)
                    for j in range(int(rng.integers(1, 6)))]
            tau0 = 3.0 * rng.standard_normal(3)
            result = project(box, rows, config, tau0)
            assert box.contains(result.tau_safe)
            assert result.max_residual <= max_violation(rows, clip_box(box, tau0))
            assert result.feasible == (result.max_residual <= config.tol)

    def test_iterates_approach_every_feasible_point(self) -> None:
        rng = np.random.default_rng(23)
        huge = ActuatorBox.symmetric((1e6, 1e6, 1e6))
        config = FilterConfig(sweeps=10)
        for _ in range(50):
            anchor = rng.uniform(-1.0, 1.0, 3)
            rows = []
            for j in range(3):
                a = rng.standard_normal(3)
                rows.append(_row(a, float(a @ anchor) - 0.1, j))
            tau0 = 5.0 * rng.standard_normal(3)
            target = qp_oracle(huge, rows, tau0)
            distance = float(np.linalg.norm(clip_box(huge, tau0) - target))
            for _, tau in iterate_projections(huge, rows, config, tau0):
                step = float(np.linalg.norm(tau - target))
                assert step <= distance + 1e-7
                distance = step
