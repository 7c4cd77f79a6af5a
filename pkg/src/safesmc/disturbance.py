"""Seeded, bounded wind / wave / current disturbance generators.

Each channel is a constant mean plus a first-order Gauss-Markov process,
discretized exactly at the simulation step:

    x[k+1] = phi * x[k] + sigma * sqrt(1 - phi^2) * w[k],   phi = exp(-dt / T_c)

so the stationary standard deviation is sigma for any dt. The process starts
from its stationary distribution.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.signal import lfilter

from safesmc.arrays import FloatArray, as_vector, broadcast3, require
from safesmc.constants import DISTURBANCE_CHANNELS, ERR_DISTURBANCE_ORDER
from safesmc.exceptions import DisturbanceError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ChannelConfig:
    """Mean force [N, N, N*m] plus Gauss-Markov intensity and correlation time."""

    mean: FloatArray
    sigma: FloatArray
    correlation_time: float

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], section: str) -> ChannelConfig:
        sigma = broadcast3(data.get("sigma", 0.0), f"{section}.sigma")
        corr = float(data.get("correlation_time", 1.0))
        require(bool(np.all(sigma >= 0.0)), f"{section}.sigma", "must be >= 0")
        require(corr > 0.0, f"{section}.correlation_time", "must be > 0")
        mean = as_vector(data.get("mean", (0.0, 0.0, 0.0)), 3, f"{section}.mean")
        return cls(mean=mean, sigma=sigma, correlation_time=corr)

    @classmethod
    def calm(cls) -> ChannelConfig:
        return cls(mean=np.zeros(3), sigma=np.zeros(3), correlation_time=1.0)

    def to_dict(self) -> dict[str, Any]:
        return {
            "mean": self.mean.tolist(),
            "sigma": self.sigma.tolist(),
            "correlation_time": self.correlation_time,
        }


@dataclass(frozen=True, eq=False)
class DisturbanceConfig:
    wind: ChannelConfig
    wave: ChannelConfig
    current: ChannelConfig
    d_max: float
    seed: int = 0

    def __post_init__(self) -> None:
        require(self.d_max > 0.0, "disturbance.d_max", "must be > 0")

    @classmethod
    def calm(cls, d_max: float = 1.0, seed: int = 0) -> DisturbanceConfig:
        """All means and intensities zero."""
        return cls(ChannelConfig.calm(), ChannelConfig.calm(), ChannelConfig.calm(), d_max, seed)

    def channels(self) -> tuple[ChannelConfig, ChannelConfig, ChannelConfig]:
        return (self.wind, self.wave, self.current)

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {"d_max": self.d_max}
        for name, channel in zip(DISTURBANCE_CHANNELS, self.channels(), strict=True):
            data[name] = channel.to_dict()
        return data


@dataclass(frozen=True, eq=False)
class DisturbanceSample:
    """Matched disturbance with per-source attribution; total = wind + wave + current."""

    total: FloatArray
    wind: FloatArray
    wave: FloatArray
    current: FloatArray
    t: float
    clipped: bool = False


class GaussMarkovChannel:
    """Exponentially correlated zero-mean noise on three axes."""

    def __init__(
        self, sigma: FloatArray, correlation_time: float, dt: float, rng: np.random.Generator
    ) -> None:
        self._rng = rng
        self.phi = math.exp(-dt / correlation_time)
        self.sigma = np.asarray(sigma, dtype=np.float64)
        self._gain = self.sigma * math.sqrt(1.0 - self.phi**2)
        self.state = self.sigma * rng.standard_normal(3)

    def step(self) -> FloatArray:
        self.state = self.phi * self.state + self._gain * self._rng.standard_normal(3)
        return self.state

    def steps(self, n: int) -> FloatArray:
        """Advance *n* steps at once; returns the (n, 3) trajectory."""
        drive = self._gain * self._rng.standard_normal((n, 3))
        zi = (self.phi * self.state)[np.newaxis, :]
        out, _ = lfilter([1.0], [1.0, -self.phi], drive, axis=0, zi=zi)
        series = np.asarray(out, dtype=np.float64)
        if n:
            self.state = series[-1].copy()
        return series


class DisturbanceProcess:
    """Stateful single-consumer disturbance generator, advanced on a fixed dt grid."""

    def __init__(self, config: DisturbanceConfig, dt: float) -> None:
        require(dt > 0.0, "dt", "must be > 0")
        self.config = config
        self.dt = dt
        self.clip_count = 0
        self._last_t: float | None = None
        streams = np.random.SeedSequence(config.seed).spawn(len(DISTURBANCE_CHANNELS))
        self._channels = [
            GaussMarkovChannel(ch.sigma, ch.correlation_time, dt, np.random.default_rng(seq))
            for ch, seq in zip(config.channels(), streams, strict=True)
        ]

    def _advance_to(self, t: float) -> None:
        if self._last_t is None:
            require(t >= 0.0, "t", "must be >= 0")
        else:
            expected = self._last_t + self.dt
            if abs(t - expected) > 1e-9 * max(1.0, abs(t)):
                raise DisturbanceError(
                    ERR_DISTURBANCE_ORDER.format(t=t, last=self._last_t, dt=self.dt)
                )
            for channel in self._channels:
                channel.step()
        self._last_t = t

    def sample(self, t: float) -> DisturbanceSample:
        """Return the disturbance at time *t* (the next grid point after the last call)."""
        self._advance_to(t)
        parts = [
            cfg.mean + channel.state
            for cfg, channel in zip(self.config.channels(), self._channels, strict=True)
        ]
        raw_norm = float(np.linalg.norm(parts[0] + parts[1] + parts[2]))
        clipped = raw_norm > self.config.d_max
        if clipped:
            scale = self.config.d_max / raw_norm
            parts = [p * scale for p in parts]
            self.clip_count += 1
            logger.debug("Disturbance clipped at t=%.2f s (|d|=%.1f N)", t, raw_norm)
        wind, wave, current = parts
        return DisturbanceSample(
            total=wind + wave + current, wind=wind, wave=wave, current=current, t=t,
            clipped=clipped,
        )


def make_disturbance(config: DisturbanceConfig, dt: float) -> DisturbanceProcess:
    """Create a deterministic (given the seed) disturbance process on a dt grid."""
    return DisturbanceProcess(config, dt)
