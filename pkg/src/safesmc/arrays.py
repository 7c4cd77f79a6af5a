"""Array aliases and small validation helpers shared across modules."""

from __future__ import annotations

import math
from collections.abc import Sequence
from typing import TypeAlias

import numpy as np
import numpy.typing as npt

from safesmc.constants import ERR_CONFIG_BAD_VALUE
from safesmc.exceptions import ConfigError

FloatArray: TypeAlias = npt.NDArray[np.float64]
ArrayLike: TypeAlias = npt.ArrayLike


def as_vector(value: ArrayLike, size: int, field: str) -> FloatArray:
    """Return *value* as a finite float vector of length *size*.

    Raises ConfigError naming *field* otherwise.
    """
    try:
        arr = np.asarray(value, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ConfigError(ERR_CONFIG_BAD_VALUE.format(field=field, reason=exc)) from exc
    if arr.shape != (size,):
        reason = f"expected {size} values, got shape {arr.shape}"
        raise ConfigError(ERR_CONFIG_BAD_VALUE.format(field=field, reason=reason))
    if not np.all(np.isfinite(arr)):
        raise ConfigError(ERR_CONFIG_BAD_VALUE.format(field=field, reason="non-finite entry"))
    return arr


def as_matrix(value: ArrayLike, field: str) -> FloatArray:
    """Return *value* as a finite 3x3 float matrix."""
    arr = np.asarray(value, dtype=np.float64)
    if arr.shape != (3, 3) or not np.all(np.isfinite(arr)):
        reason = f"expected a finite 3x3 matrix, got shape {arr.shape}"
        raise ConfigError(ERR_CONFIG_BAD_VALUE.format(field=field, reason=reason))
    return arr


def broadcast3(value: float | Sequence[float], field: str) -> FloatArray:
    """Accept a scalar or a 3-vector; scalars apply to all three channels."""
    if isinstance(value, int | float):
        return np.full(3, float(value))
    return as_vector(value, 3, field)


def require(condition: bool, field: str, reason: str) -> None:
    if not condition:
        raise ConfigError(ERR_CONFIG_BAD_VALUE.format(field=field, reason=reason))


def wrap_angle(angle: float) -> float:
    """Wrap *angle* to (-pi, pi]."""
    return math.pi - math.fmod(math.fmod(math.pi - angle, 2.0 * math.pi) + 2.0 * math.pi,
                               2.0 * math.pi)
