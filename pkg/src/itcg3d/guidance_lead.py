"""Backstepping on the effective lead angle.

The range error ``e1 = Vm (tf - t) - r`` is driven to zero through the desired
lead angle ``sigma_d = arccos(1 - k1 sgmf(e1))``; the accelerations then force
``e2 = sigma - sigma_d`` to decay at rate ``k2``. Only ``a_y`` carries the
switching term, which couples the two heading angles and makes ``a_z``
oscillate near ``theta_m = 0``. That behaviour is intended and kept.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import kinematics as kin
from .errors import ConfigurationError
from .kinematics import EngagementState, Flag, LateralAccel
from .smoothing import DEFAULT_SIGMOID_STEEPNESS, sgmf, sgmf_slope, switching_function

# floor on sgmf used for the sin(sigma_d) Taylor guard
SGMF_EPS = 1e-9


@dataclass(frozen=True)
class LeadLawGains:
    k1: float
    k2: float
    phi: float
    vm: float
    tf: float
    a: float = DEFAULT_SIGMOID_STEEPNESS
    switching: str = "sgmf2"

    def __post_init__(self):
        if not 0 < self.k1 <= 2:
            raise ConfigurationError(f"k1 must lie in (0, 2], got {self.k1}")
        if not self.k2 > 0:
            raise ConfigurationError(f"k2 must be positive, got {self.k2}")
        if not self.phi > 0:
            raise ConfigurationError(f"phi must be positive, got {self.phi}")
        if not self.vm > 0:
            raise ConfigurationError(f"Vm must be positive, got {self.vm}")


@dataclass(frozen=True)
class LeadErrors:
    e1: float
    e2: float


def range_error(t: float, r: float, tf: float, vm: float) -> float:
    return vm * (tf - t) - r


def _sigma_d_flagged(e1, k1, phi):
    arg = 1.0 - k1 * sgmf(e1, phi)
    if -1.0 <= arg <= 1.0:
        return math.acos(arg), Flag.NONE
    return math.acos(max(-1.0, min(1.0, arg))), Flag.ACOS_CLAMP


def sigma_d(e1: float, k1: float, phi: float) -> float:
    """Desired lead angle ``arccos(1 - k1 sgmf(e1, phi))``.

    A negative range error pushes the argument above 1; it is clamped, giving
    ``sigma_d = 0`` (collision course).
    """
    return _sigma_d_flagged(e1, k1, phi)[0]


def sin_of_desired(k1: float, s: float) -> float:
    """``sin(arccos(1 - k1 s))`` computed without the arccos round trip."""
    return math.sqrt(max(k1 * s * (2.0 - k1 * s), 0.0))


def _sigma_d_rate_flagged(e1, sigma, k1, phi, vm):
    if abs(e1) > phi:
        return 0.0, Flag.NONE
    s = sgmf(e1, phi)
    if k1 * s <= 0.0:
        # sigma_d is clamped to zero here, so it is locally constant
        return 0.0, Flag.NONE
    den = sin_of_desired(k1, s)
    floor = math.sqrt(2.0 * k1 * SGMF_EPS)
    flag = Flag.NONE
    if den < floor:
        den, flag = floor, Flag.RATE_FLOOR
    e1_dot = -vm + vm * math.cos(sigma)
    return k1 * e1_dot / den * sgmf_slope(e1, phi), flag


def sigma_d_rate(e1: float, sigma: float, sigma_d: float, k1: float, phi: float, vm: float) -> float:
    """Time derivative of ``sigma_d`` along the true range-error dynamics.

    ``sigma_d`` is accepted for interface symmetry; ``sin(sigma_d)`` is
    recomputed from ``e1`` as ``sqrt(k1 s (2 - k1 s))`` and floored at
    ``sqrt(2 k1 1e-9)``, its small-angle value, to resolve the 0/0 at ``e1 -> 0``.
    """
    return _sigma_d_rate_flagged(e1, sigma, k1, phi, vm)[0]


def _accel_flagged(s: EngagementState, sd, sd_rate, gains: LeadLawGains, sw):
    vm = gains.vm
    sigma = kin.effective_lead_angle(s.theta_m, s.psi_m)
    e2 = sigma - sd
    s_sig = math.sin(sigma)
    flags = Flag.NONE
    s_psm, hit = kin.guard(math.sin(s.psi_m))
    if hit:
        flags |= Flag.SIN_PSI_M
    s_thm, hit = kin.guard(math.sin(s.theta_m))
    if hit:
        flags |= Flag.SIN_THETA_M
    c_psm, hit = kin.guard(math.cos(s.psi_m))
    if hit:
        flags |= Flag.COS_PSI_M
    ay = vm * s_sig / s_psm * (sd_rate - gains.k2 * sw(e2))
    az = vm / (s_thm * c_psm) * (-vm * s_sig * s_sig / s.r)
    return LateralAccel(ay, az), flags


def accel_lead(s: EngagementState, sd: float, sd_rate: float, gains: LeadLawGains) -> LateralAccel:
    """Commanded (pre-saturation) accelerations of the lead-angle law."""
    sw = switching_function(gains.switching, gains.a)
    return _accel_flagged(s, sd, sd_rate, gains, sw)[0]


@dataclass
class LeadCommand:
    accel: LateralAccel
    e1: float
    e2: float
    sigma: float
    sigma_d: float
    flags: int


class LeadAngleLaw:
    """Callable guidance law bound to a gain set; used by the simulation engine."""

    def __init__(self, gains: LeadLawGains):
        self.gains = gains
        self._sw = switching_function(gains.switching, gains.a)

    def __call__(self, s: EngagementState) -> LeadCommand:
        g = self.gains
        e1 = range_error(s.t, s.r, g.tf, g.vm)
        sd, f1 = _sigma_d_flagged(e1, g.k1, g.phi)
        sigma = kin.effective_lead_angle(s.theta_m, s.psi_m)
        sd_rate, f2 = _sigma_d_rate_flagged(e1, sigma, g.k1, g.phi, g.vm)
        accel, f3 = _accel_flagged(s, sd, sd_rate, g, self._sw)
        return LeadCommand(accel, e1, sigma - sd, sigma, sd, int(f1 | f2 | f3))
