"""Scenario configuration loading."""

from __future__ import annotations

import json
import logging
from collections.abc import Mapping
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np

from safesmc.allocation import ThrusterLayout, certify_box, wrench_box
from safesmc.arrays import FloatArray, as_vector, broadcast3, require
from safesmc.constants import (
    CONFIG_DIR,
    CONFIG_EXT,
    DEFAULT_ADDED_MASS_RATIO,
    DEFAULT_ALPHA,
    DEFAULT_ALPHA_MAX_FACTOR,
    DEFAULT_C_F,
    DEFAULT_C_N,
    DEFAULT_CURRENT,
    DEFAULT_D_MAX,
    DEFAULT_D_QUAD,
    DEFAULT_DECAY_TIME,
    DEFAULT_DT,
    DEFAULT_EPS_H,
    DEFAULT_F_MAX,
    DEFAULT_GAMMA,
    DEFAULT_GOAL,
    DEFAULT_HORIZON,
    DEFAULT_KAPPA,
    DEFAULT_KS,
    DEFAULT_LAMBDA,
    DEFAULT_MASS,
    DEFAULT_OBSTACLES,
    DEFAULT_PHI,
    DEFAULT_SEED,
    DEFAULT_SWEEPS,
    DEFAULT_THRUSTER_POSITIONS,
    DEFAULT_TOL,
    DEFAULT_WAVE,
    DEFAULT_WIND,
    DISTURBANCE_CHANNELS,
    ERR_CONFIG_BAD_VALUE,
    ERR_CONFIG_INVALID_JSON,
    ERR_CONFIG_NOT_FOUND,
    ERR_CONFIG_UNKNOWN_KEYS,
    FILTER_PROJECTION,
    MSG_BOX_UNCERTIFIED,
)
from safesmc.disturbance import ChannelConfig, DisturbanceConfig
from safesmc.dynamics import VesselParams, VesselState, build_vessel_params
from safesmc.exceptions import ConfigError
from safesmc.hocbf import AlphaSchedule, BarrierParams, Obstacle
from safesmc.projection import ActuatorBox, FilterConfig
from safesmc.smc import ReferenceSignal, SmcGains

logger = logging.getLogger(__name__)

CONFIG_BASE_DIR = Path.cwd()

_TOP_KEYS = frozenset({
    "dt", "horizon", "seed", "allow_unsafe_start", "vessel", "thrusters", "smc", "barrier",
    "filter", "disturbance", "obstacles", "initial", "goal", "pose_noise",
})
_VESSEL_KEYS = frozenset({"mass", "added_mass_ratio", "M", "D_lin", "D_quad", "decay_time"})
_THRUSTER_KEYS = frozenset({"positions", "f_max", "c_f", "c_n"})
_SMC_KEYS = frozenset({"Lambda", "Ks", "phi"})
_BARRIER_KEYS = frozenset({"alpha", "disturbance_bound", "schedule"})
_SCHEDULE_KEYS = frozenset({"kappa", "eps_h", "alpha_max"})
_FILTER_KEYS = frozenset({"method", "gamma", "sweeps", "tol"})
_DISTURBANCE_KEYS = frozenset({"d_max", *DISTURBANCE_CHANNELS})
_CHANNEL_KEYS = frozenset({"mean", "sigma", "correlation_time"})
_OBSTACLE_KEYS = frozenset({"center", "radius"})
_INITIAL_KEYS = frozenset({"eta", "nu"})
_NOISE_KEYS = frozenset({"sigma"})


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    """Everything a closed-loop run needs. Build with parse_config or load_config."""

    vessel: VesselParams
    thrusters: ThrusterLayout
    gains: SmcGains
    barrier: BarrierParams
    filter: FilterConfig
    disturbance: DisturbanceConfig
    obstacles: tuple[Obstacle, ...]
    initial: VesselState
    goal: FloatArray
    dt: float = DEFAULT_DT
    horizon: float = DEFAULT_HORIZON
    seed: int = DEFAULT_SEED
    allow_unsafe_start: bool = False
    pose_noise: FloatArray | None = None
    box: ActuatorBox = field(init=False, repr=False)

    def __post_init__(self) -> None:
        require(self.dt > 0.0, "dt", "must be > 0")
        require(self.horizon >= self.dt, "horizon", "must be >= dt")
        object.__setattr__(self, "box", wrench_box(self.thrusters))

    @property
    def steps(self) -> int:
        return round(self.horizon / self.dt)

    @property
    def reference(self) -> ReferenceSignal:
        return ReferenceSignal.station(self.goal)

    def with_seed(self, seed: int) -> ScenarioConfig:
        """Copy with a new seed for the disturbance and pose-noise streams."""
        return replace(self, seed=seed, disturbance=replace(self.disturbance, seed=seed))

    def to_dict(self) -> dict[str, Any]:
        """Document that parse_config loads back to an equivalent scenario."""
        schedule = self.barrier.schedule
        return {
            "dt": self.dt,
            "horizon": self.horizon,
            "seed": self.seed,
            "allow_unsafe_start": self.allow_unsafe_start,
            "vessel": {
                "mass": self.vessel.mass,
                "M": self.vessel.M.tolist(),
                "D_lin": self.vessel.D_lin.tolist(),
                "D_quad": self.vessel.D_quad.tolist(),
            },
            "thrusters": {
                "positions": self.thrusters.positions.tolist(),
                "f_max": self.thrusters.f_max,
                "c_f": self.thrusters.c_f,
                "c_n": self.thrusters.c_n,
            },
            "smc": {
                "Lambda": self.gains.Lambda.tolist(),
                "Ks": self.gains.Ks.tolist(),
                "phi": self.gains.phi,
            },
            "barrier": {
                "alpha": self.barrier.alpha,
                "disturbance_bound": self.barrier.disturbance_bound,
                "schedule": None if schedule is None else {
                    "kappa": schedule.kappa,
                    "eps_h": schedule.eps_h,
                    "alpha_max": schedule.alpha_max,
                },
            },
            "filter": {
                "method": self.filter.method,
                "gamma": self.filter.gamma,
                "sweeps": self.filter.sweeps,
                "tol": self.filter.tol,
            },
            "disturbance": self.disturbance.to_dict(),
            "obstacles": [
                {"center": ob.center.tolist(), "radius": ob.radius} for ob in self.obstacles
            ],
            "initial": {"eta": self.initial.eta.tolist(), "nu": self.initial.nu.tolist()},
            "goal": self.goal.tolist(),
            "pose_noise": None if self.pose_noise is None else {
                "sigma": self.pose_noise.tolist()
            },
        }


def _section(data: Mapping[str, Any], name: str, allowed: frozenset[str]) -> dict[str, Any]:
    value = data.get(name)
    if value is None:
        return {}
    return _checked(value, name, allowed)


def _checked(value: Any, name: str, allowed: frozenset[str]) -> dict[str, Any]:
    if not isinstance(value, Mapping):
        raise ConfigError(ERR_CONFIG_BAD_VALUE.format(field=name, reason="expected an object"))
    unknown = set(value) - allowed
    if unknown:
        raise ConfigError(
            ERR_CONFIG_UNKNOWN_KEYS.format(section=name, keys=", ".join(sorted(unknown)))
        )
    return dict(value)


def _number(section: Mapping[str, Any], key: str, default: float, name: str) -> float:
    value = section.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int | float):
        raise ConfigError(ERR_CONFIG_BAD_VALUE.format(field=f"{name}.{key}", reason="not a number"))
    return float(value)


def _vessel(data: Mapping[str, Any], positions: Any) -> VesselParams:
    sec = _section(data, "vessel", _VESSEL_KEYS)
    return build_vessel_params(
        positions,
        mass=_number(sec, "mass", DEFAULT_MASS, "vessel"),
        added_mass_ratio=_number(sec, "added_mass_ratio", DEFAULT_ADDED_MASS_RATIO, "vessel"),
        decay_time=_number(sec, "decay_time", DEFAULT_DECAY_TIME, "vessel"),
        d_quad=as_vector(sec.get("D_quad", DEFAULT_D_QUAD), 3, "vessel.D_quad"),
        M=sec.get("M"),
        D_lin=sec.get("D_lin"),
    )


def _thrusters(data: Mapping[str, Any]) -> ThrusterLayout:
    sec = _section(data, "thrusters", _THRUSTER_KEYS)
    return ThrusterLayout(
        positions=np.asarray(sec.get("positions", DEFAULT_THRUSTER_POSITIONS), dtype=np.float64),
        f_max=_number(sec, "f_max", DEFAULT_F_MAX, "thrusters"),
        c_f=_number(sec, "c_f", DEFAULT_C_F, "thrusters"),
        c_n=_number(sec, "c_n", DEFAULT_C_N, "thrusters"),
    )


def _barrier(data: Mapping[str, Any], d_max: float) -> BarrierParams:
    """Barrier section; the robust margin defaults to the disturbance bound d_max."""
    sec = _section(data, "barrier", _BARRIER_KEYS)
    alpha = _number(sec, "alpha", DEFAULT_ALPHA, "barrier")
    schedule = None
    raw = sec.get("schedule")
    if raw is not None:
        sched = _checked(raw, "barrier.schedule", _SCHEDULE_KEYS)
        schedule = AlphaSchedule(
            alpha0=alpha,
            kappa=_number(sched, "kappa", DEFAULT_KAPPA, "barrier.schedule"),
            eps_h=_number(sched, "eps_h", DEFAULT_EPS_H, "barrier.schedule"),
            alpha_max=_number(
                sched, "alpha_max", DEFAULT_ALPHA_MAX_FACTOR * alpha, "barrier.schedule"
            ),
        )
    return BarrierParams(
        alpha=alpha,
        schedule=schedule,
        disturbance_bound=_number(sec, "disturbance_bound", d_max, "barrier"),
    )


def _filter(data: Mapping[str, Any]) -> FilterConfig:
    sec = _section(data, "filter", _FILTER_KEYS)
    sweeps = sec.get("sweeps", DEFAULT_SWEEPS)
    if isinstance(sweeps, bool) or not isinstance(sweeps, int):
        raise ConfigError(ERR_CONFIG_BAD_VALUE.format(field="filter.sweeps", reason="not an int"))
    return FilterConfig(
        gamma=_number(sec, "gamma", DEFAULT_GAMMA, "filter"),
        sweeps=sweeps,
        tol=_number(sec, "tol", DEFAULT_TOL, "filter"),
        method=str(sec.get("method", FILTER_PROJECTION)),
    )


def _disturbance(data: Mapping[str, Any], seed: int) -> DisturbanceConfig:
    sec = _section(data, "disturbance", _DISTURBANCE_KEYS)
    defaults = {"wind": DEFAULT_WIND, "wave": DEFAULT_WAVE, "current": DEFAULT_CURRENT}
    channels: dict[str, ChannelConfig] = {}
    for name in DISTURBANCE_CHANNELS:
        path = f"disturbance.{name}"
        raw = sec.get(name)
        merged = dict(defaults[name]) if raw is None else {
            **defaults[name], **_checked(raw, path, _CHANNEL_KEYS)
        }
        channels[name] = ChannelConfig.from_dict(merged, path)
    return DisturbanceConfig(
        wind=channels["wind"],
        wave=channels["wave"],
        current=channels["current"],
        d_max=_number(sec, "d_max", DEFAULT_D_MAX, "disturbance"),
        seed=seed,
    )


def _obstacles(data: Mapping[str, Any]) -> tuple[Obstacle, ...]:
    raw = data.get("obstacles", DEFAULT_OBSTACLES)
    if not isinstance(raw, list | tuple):
        raise ConfigError(ERR_CONFIG_BAD_VALUE.format(field="obstacles", reason="expected a list"))
    obstacles = []
    for index, item in enumerate(raw):
        name = f"obstacles[{index}]"
        ob = _checked(item, name, _OBSTACLE_KEYS)
        if "center" not in ob or "radius" not in ob:
            raise ConfigError(
                ERR_CONFIG_BAD_VALUE.format(field=name, reason="needs center and radius")
            )
        obstacles.append(Obstacle.create(ob["center"], _number(ob, "radius", 0.0, name), name))
    return tuple(obstacles)


def parse_config(data: Mapping[str, Any]) -> ScenarioConfig:
    """Validate a scenario document and build the config; omitted values take defaults."""
    top = _checked(data, "scenario", _TOP_KEYS)
    seed = top.get("seed", DEFAULT_SEED)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError(ERR_CONFIG_BAD_VALUE.format(field="seed", reason="must be an int >= 0"))

    thrusters = _thrusters(top)
    smc = _section(top, "smc", _SMC_KEYS)
    initial = _section(top, "initial", _INITIAL_KEYS)
    noise = _section(top, "pose_noise", _NOISE_KEYS)
    pose_noise = None
    if noise:
        pose_noise = broadcast3(noise.get("sigma", 0.0), "pose_noise.sigma")
        require(bool(np.all(pose_noise >= 0.0)), "pose_noise.sigma", "must be >= 0")

    disturbance = _disturbance(top, seed)
    config = ScenarioConfig(
        vessel=_vessel(top, thrusters.positions),
        thrusters=thrusters,
        gains=SmcGains.create(
            smc.get("Lambda", DEFAULT_LAMBDA),
            broadcast3(smc.get("Ks", DEFAULT_KS), "smc.Ks"),
            _number(smc, "phi", DEFAULT_PHI, "smc"),
        ),
        barrier=_barrier(top, disturbance.d_max),
        filter=_filter(top),
        disturbance=disturbance,
        obstacles=_obstacles(top),
        initial=VesselState.create(initial.get("eta", (0.0, 0.0, 0.0)),
                                   initial.get("nu", (0.0, 0.0, 0.0))),
        goal=as_vector(top.get("goal", DEFAULT_GOAL), 3, "goal"),
        dt=_number(top, "dt", DEFAULT_DT, "scenario"),
        horizon=_number(top, "horizon", DEFAULT_HORIZON, "scenario"),
        seed=seed,
        allow_unsafe_start=bool(top.get("allow_unsafe_start", False)),
        pose_noise=pose_noise,
    )
    ok, worst = certify_box(config.thrusters, config.box)
    if not ok:
        logger.warning(MSG_BOX_UNCERTIFIED.format(force=worst, f_max=config.thrusters.f_max))
    return config


def load_config(name: str, *, config_dir: Path | None = None) -> ScenarioConfig:
    """Load a scenario config from a JSON file.

    Args:
        name: Config name (without .json extension), or a path to an existing file.
        config_dir: Override config directory. Defaults to ./configs/.
    """
    direct = Path(name)
    if direct.suffix.lower() == CONFIG_EXT and direct.is_file():
        path = direct
    else:
        if config_dir is None:
            config_dir = CONFIG_BASE_DIR / CONFIG_DIR
        if name.lower().endswith(CONFIG_EXT):
            name = name[: -len(CONFIG_EXT)]
        path = config_dir / f"{name}{CONFIG_EXT}"

    if not path.exists():
        raise ConfigError(ERR_CONFIG_NOT_FOUND.format(path=path))

    text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(ERR_CONFIG_INVALID_JSON.format(path=path)) from exc

    return parse_config(data)
