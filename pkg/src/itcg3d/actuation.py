"""First-order autopilot lag with per-axis command saturation."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigurationError

G = 9.81
DEFAULT_TAU = 0.1
DEFAULT_A_MAX = 10 * G


@dataclass(frozen=True)
class ActuatorConfig:
    tau: float = DEFAULT_TAU
    a_max: float = DEFAULT_A_MAX

    def __post_init__(self):
        if not self.tau >= 0:
            raise ConfigurationError(f"autopilot time constant must be >= 0, got {self.tau}")
        if not self.a_max > 0:
            raise ConfigurationError(f"acceleration limit must be positive, got {self.a_max}")


def saturate(a_cmd: float, a_max: float) -> float:
    return max(-a_max, min(a_max, a_cmd))


def lag_gain(tau: float, dt: float) -> float:
    """Fraction of the command-to-state gap closed over one step of ``dt``."""
    if tau == 0:
        return 1.0
    return -math.expm1(-dt / tau)


def autopilot_step(a_achieved: float, a_cmd: float, tau: float, dt: float) -> float:
    """Exact zero-order-hold step of ``a_dot = (a_cmd - a) / tau``."""
    if not dt > 0:
        raise ConfigurationError(f"dt must be positive, got {dt}")
    return a_achieved + lag_gain(tau, dt) * (a_cmd - a_achieved)
