"""Point-mass, constant-speed engagement kinematics in spherical LOS coordinates.

State is ``(r, theta, psi, theta_m, psi_m)``: range, LOS elevation and azimuth,
and the two velocity lead (heading) angles measured in the LOS frame.

Frame convention: the unit LOS vector from interceptor to target is
``u = (cos th cos ps, cos th sin ps, -sin th)``, so positive elevation points
towards ``-z``. Together with ``e_th = du/dth`` and ``e_ps = (-sin ps, cos ps, 0)``
it forms an orthonormal triad, and the interceptor velocity is
``Vm (cos thm cos psm u + sin thm e_th + cos thm sin psm e_ps)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularityError

EPS_DEN = 1e-6
R_FLOOR = 0.1


class Flag(enum.IntFlag):
    """Denominator-guard and clamp events recorded per integration step."""

    NONE = 0
    SIN_SIGMA = enum.auto()
    SIN_THETA_M = enum.auto()
    SIN_PSI_M = enum.auto()
    COS_PSI_M = enum.auto()
    COS_THETA_M = enum.auto()
    ACOS_CLAMP = enum.auto()
    RATE_FLOOR = enum.auto()
    GIMBAL = enum.auto()


def flag_names(flags: int) -> str:
    """``'SIN_SIGMA|ACOS_CLAMP'`` style rendering; empty string for no flags."""
    return "|".join(f.name for f in Flag if f and flags & f)


def parse_flag_names(text: str) -> int:
    value = 0
    for name in filter(None, text.split("|")):
        value |= Flag[name]
    return value


def guard(x: float, eps: float = EPS_DEN) -> tuple[float, bool]:
    """Clamp ``|x|`` up to ``eps`` keeping its sign (zero maps to ``+eps``)."""
    if abs(x) >= eps:
        return x, False
    return (eps if x >= 0 else -eps), True


@dataclass(frozen=True)
class EngagementState:
    t: float
    r: float
    theta: float
    psi: float
    theta_m: float
    psi_m: float

    def as_tuple(self):
        return (self.r, self.theta, self.psi, self.theta_m, self.psi_m)


@dataclass(frozen=True)
class StateRates:
    r_dot: float
    theta_dot: float
    psi_dot: float
    theta_m_dot: float
    psi_m_dot: float


@dataclass(frozen=True)
class LateralAccel:
    ay: float
    az: float


def los_rates(r, theta, theta_m, psi_m, vm):
    """LOS elevation and azimuth rates; raises on the two singular denominators."""
    if r <= R_FLOOR:
        raise SingularityError(f"range {r:.6g} m at or below r_floor={R_FLOOR} m")
    c_th = math.cos(theta)
    if abs(c_th) < EPS_DEN:
        raise SingularityError(f"cos(theta)={c_th:.3g}: LOS elevation at +/-90 deg")
    c_thm = math.cos(theta_m)
    theta_dot = -vm * math.sin(theta_m) / r
    psi_dot = -vm * c_thm * math.sin(psi_m) / (r * c_th)
    return theta_dot, psi_dot


def rates(r, theta, psi, theta_m, psi_m, ay, az, vm):
    """Right-hand side of the five kinematic equations on plain floats.

    LOS rates are evaluated first and substituted into the heading-angle
    equations. Used by the integrator; :func:`state_rates` is the typed wrapper.
    """
    if r <= R_FLOOR:
        raise SingularityError(f"range {r:.6g} m at or below r_floor={R_FLOOR} m")
    c_th = math.cos(theta)
    if abs(c_th) < EPS_DEN:
        raise SingularityError(f"cos(theta)={c_th:.3g}: LOS elevation at +/-90 deg")
    s_th = math.sin(theta)
    s_thm = math.sin(theta_m)
    c_thm = math.cos(theta_m)
    if abs(c_thm) < EPS_DEN:
        c_thm = EPS_DEN if c_thm >= 0 else -EPS_DEN
    s_psm = math.sin(psi_m)
    c_psm = math.cos(psi_m)
    tan_thm = s_thm / c_thm

    r_dot = -vm * c_thm * c_psm
    theta_dot = -vm * s_thm / r
    psi_dot = -vm * c_thm * s_psm / (r * c_th)
    theta_m_dot = az / vm - psi_dot * s_th * s_psm - theta_dot * c_psm
    psi_m_dot = (
        ay / (vm * c_thm)
        + psi_dot * tan_thm * c_psm * s_th
        - psi_dot * c_th
        - theta_dot * tan_thm * s_psm
    )
    return r_dot, theta_dot, psi_dot, theta_m_dot, psi_m_dot


def state_rates(s: EngagementState, a: LateralAccel, vm: float) -> StateRates:
    return StateRates(*rates(s.r, s.theta, s.psi, s.theta_m, s.psi_m, a.ay, a.az, vm))


def effective_lead_angle(theta_m: float, psi_m: float) -> float:
    """Angle between velocity and LOS: ``arccos(cos psi_m cos theta_m)``, in [0, pi)."""
    c = math.cos(psi_m) * math.cos(theta_m)
    return math.acos(max(-1.0, min(1.0, c)))


def lead_angle_rate(s: EngagementState, a: LateralAccel, vm: float) -> float:
    """Rate of the effective lead angle.

    The acceleration terms divide by ``Vm sin(sigma)``; when ``|sin sigma|`` is
    below ``EPS_DEN`` that denominator is clamped (see :func:`lead_angle_rate_flagged`).
    """
    return lead_angle_rate_flagged(s, a, vm)[0]


def lead_angle_rate_flagged(s: EngagementState, a: LateralAccel, vm: float) -> tuple[float, int]:
    sigma = effective_lead_angle(s.theta_m, s.psi_m)
    s_sig = math.sin(sigma)
    den, hit = guard(s_sig)
    rate = (
        vm * s_sig / s.r
        + math.sin(s.psi_m) / (vm * den) * a.ay
        + math.sin(s.theta_m) * math.cos(s.psi_m) / (vm * den) * a.az
    )
    return rate, (Flag.SIN_SIGMA if hit else Flag.NONE)


def los_unit(theta: float, psi: float) -> np.ndarray:
    c_th = math.cos(theta)
    return np.array([c_th * math.cos(psi), c_th * math.sin(psi), -math.sin(theta)])


def los_frame(theta: float, psi: float) -> np.ndarray:
    """Rows are the LOS-frame X, Y, Z axes expressed in the inertial frame.

    X is the LOS, Y the azimuth direction, Z completes a right-handed set; at
    ``theta = psi = 0`` this is the identity.
    """
    x = los_unit(theta, psi)
    y = np.array([-math.sin(psi), math.cos(psi), 0.0])
    z = np.cross(x, y)
    return np.vstack([x, y, z])


def cartesian_positions(s: EngagementState, target_pos) -> np.ndarray:
    """Interceptor position ``target - r u(theta, psi)``."""
    return np.asarray(target_pos, dtype=float) - s.r * los_unit(s.theta, s.psi)


def velocity_vector(s: EngagementState, vm: float) -> np.ndarray:
    """Inertial interceptor velocity implied by the lead angles."""
    frame = los_frame(s.theta, s.psi)
    c_thm = math.cos(s.theta_m)
    # e_theta = -Z axis of the LOS frame
    return vm * (
        c_thm * math.cos(s.psi_m) * frame[0]
        + c_thm * math.sin(s.psi_m) * frame[1]
        - math.sin(s.theta_m) * frame[2]
    )


def los_angles(delta) -> tuple[float, float, bool]:
    """Elevation and azimuth of the vector ``delta`` (interceptor to target).

    Returns ``(theta, psi, degenerate)``; a vertical LOS has no azimuth, so
    ``psi = 0`` and the degenerate flag is set.
    """
    dx, dy, dz = (float(v) for v in delta)
    horiz = math.hypot(dx, dy)
    theta = math.atan2(-dz, horiz)
    if horiz < EPS_DEN * max(1.0, abs(dz)):
        return theta, 0.0, True
    return theta, math.atan2(dy, dx), False
