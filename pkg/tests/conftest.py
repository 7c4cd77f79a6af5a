"""Shared test fixtures."""

import json
from pathlib import Path
from typing import Any

import pytest

from safesmc.allocation import ThrusterLayout
from safesmc.constants import DEFAULT_KS, DEFAULT_LAMBDA, DEFAULT_PHI, DEFAULT_THRUSTER_POSITIONS
from safesmc.dynamics import VesselParams, build_vessel_params
from safesmc.smc import SmcGains

CALM = {"mean": [0.0, 0.0, 0.0], "sigma": 0.0, "correlation_time": 1.0}


def scenario_dict(**overrides: Any) -> dict[str, Any]:
    """Short obstacle-free scenario with no disturbance; keys in *overrides* replace it."""
    data: dict[str, Any] = {
        "dt": 0.1,
        "horizon": 20.0,
        "seed": 0,
        "disturbance": {"d_max": 1.0, "wind": CALM, "wave": CALM, "current": CALM},
        "obstacles": [],
        "initial": {"eta": [0.0, 0.0, 0.0], "nu": [0.0, 0.0, 0.0]},
        "goal": [0.0, 0.0, 0.0],
    }
    data.update(overrides)
    return data


@pytest.fixture()
def vessel() -> VesselParams:
    """Default platform parameters."""
    return build_vessel_params(DEFAULT_THRUSTER_POSITIONS)


@pytest.fixture()
def layout() -> ThrusterLayout:
    return ThrusterLayout.default()


@pytest.fixture()
def gains() -> SmcGains:
    return SmcGains.create(DEFAULT_LAMBDA, DEFAULT_KS, DEFAULT_PHI)


@pytest.fixture()
def tmp_config_dir(tmp_path: Path) -> Path:
    """Create a temporary config directory."""
    config_dir = tmp_path / "configs"
    config_dir.mkdir()
    return config_dir


@pytest.fixture()
def sample_config() -> dict[str, Any]:
    """Return a valid sample scenario dict."""
    return scenario_dict()


@pytest.fixture()
def sample_config_file(tmp_config_dir: Path, sample_config: dict[str, Any]) -> Path:
    """Write a sample config JSON file and return its path."""
    config_file = tmp_config_dir / "test.json"
    config_file.write_text(json.dumps(sample_config))
    return config_file
