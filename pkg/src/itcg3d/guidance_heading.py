"""Backstepping on the two heading angles.

The desired heading angles ``(theta_md, psi_md)`` are picked from one of four
virtual-input families (cases A-D) so that the lead angle they imply keeps the
range-error dynamics of the lead-angle law. Their magnitudes come from arccos
and are signed by an octant selector, which fixes the octant of the initial
LOS frame the trajectory flies through.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from . import kinematics as kin
from .errors import ConfigurationError
from .guidance_lead import SGMF_EPS, range_error, sin_of_desired
from .kinematics import EngagementState, Flag, LateralAccel
from .smoothing import DEFAULT_SIGMOID_STEEPNESS, sgmf, sgmf_slope, switching_function


class VirtualInputCase(str, enum.Enum):
    A = "A"  # (0, f)
    B = "B"  # (f/2, f/2)
    C = "C"  # (f, f)
    D = "D"  # equal angles with cos(theta) cos(psi) = cos(f)


@dataclass(frozen=True)
class OctantSelector:
    sign_theta_md: int
    sign_psi_md: int

    def __post_init__(self):
        if self.sign_theta_md not in (1, -1) or self.sign_psi_md not in (1, -1):
            raise ConfigurationError(
                f"octant signs must be +1/-1, got ({self.sign_theta_md}, {self.sign_psi_md})"
            )

    @property
    def name(self) -> str:
        return _OCTANT_NAMES[(self.sign_theta_md, self.sign_psi_md)]

    @classmethod
    def from_name(cls, name: str) -> "OctantSelector":
        key = name.strip().upper()
        for signs, label in _OCTANT_NAMES.items():
            if label == key:
                return cls(*signs)
        raise ConfigurationError(f"unknown octant {name!r} (expected one of I, IV, V, VIII)")

    def los_signs(self) -> tuple[int, int, int]:
        """Sign pattern of (x, y, z) in the initial LOS frame for this octant."""
        # negative theta_md climbs towards +Z, positive psi_md towards +Y
        return 1, self.sign_psi_md, -self.sign_theta_md


_OCTANT_NAMES = {(-1, 1): "I", (-1, -1): "IV", (1, 1): "V", (1, -1): "VIII"}

OCTANT_I = OctantSelector(-1, 1)


@dataclass(frozen=True)
class HeadingErrors:
    e3: float
    e4: float


@dataclass(frozen=True)
class HeadingLawGains:
    k1: float
    k3: float
    k4: float
    phi: float
    vm: float
    tf: float
    case: VirtualInputCase = VirtualInputCase.D
    octant: OctantSelector = OCTANT_I
    a: float = DEFAULT_SIGMOID_STEEPNESS
    switching: str = "sgmf2"

    def __post_init__(self):
        if not 0 < self.k1 <= 2:
            raise ConfigurationError(f"k1 must lie in (0, 2], got {self.k1}")
        for name in ("k3", "k4", "phi", "vm"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive, got {getattr(self, name)}")


def k1_limit(case: VirtualInputCase) -> float:
    """Largest ``k1`` for which every case's formulas stay real (sigma_max -> 90 deg)."""
    return 2.0 if VirtualInputCase(case) is VirtualInputCase.B else 1.0


def _magnitudes(s, k1, case):
    """Unsigned (theta_md, psi_md) from ``s = sgmf(e1)``, plus a clamp flag."""
    arg = 1.0 - k1 * s
    flag = Flag.NONE
    if not -1.0 <= arg <= 1.0:
        arg = max(-1.0, min(1.0, arg))
        flag = Flag.ACOS_CLAMP
    f = math.acos(arg)
    if case is VirtualInputCase.A:
        return 0.0, f, flag
    if case is VirtualInputCase.B:
        return 0.5 * f, 0.5 * f, flag
    if case is VirtualInputCase.C:
        return f, f, flag
    inner = 2.0 * arg - 1.0
    if inner < -1.0:
        inner, flag = -1.0, flag | Flag.ACOS_CLAMP
    h = 0.5 * math.acos(inner)
    return h, h, flag


def virtual_inputs(e1: float, case, oct: OctantSelector, k1: float, phi: float) -> tuple[float, float]:
    """Desired heading angles ``(theta_md, psi_md)`` for a range error ``e1``.

    Magnitudes follow the case table with ``f = arccos(1 - k1 sgmf(e1))`` and are
    then multiplied by the octant signs.
    """
    case = VirtualInputCase(case)
    if not 0 < k1 <= k1_limit(case):
        raise ConfigurationError(
            f"k1={k1} outside (0, {k1_limit(case)}] required by case {case.value}"
        )
    th, ps, _ = _magnitudes(sgmf(e1, phi), k1, case)
    return oct.sign_theta_md * th, oct.sign_psi_md * ps


def _magnitude_slopes(s, k1, case):
    """d|theta_md|/ds and d|psi_md|/ds, with the Taylor floor at s -> 0+."""
    if k1 * s <= 0.0:
        return 0.0, 0.0, Flag.NONE
    flag = Flag.NONE
    if case is VirtualInputCase.D:
        # 2h = arccos(1 - 2 k1 s); sin 2h = sqrt(4 k1 s (1 - k1 s))
        den = math.sqrt(max(4.0 * k1 * s * (1.0 - k1 * s), 0.0))
        floor = math.sqrt(4.0 * k1 * SGMF_EPS)
        if den < floor:
            den, flag = floor, Flag.RATE_FLOOR
        d = k1 / den
        return d, d, flag
    den = sin_of_desired(k1, s)
    floor = math.sqrt(2.0 * k1 * SGMF_EPS)
    if den < floor:
        den, flag = floor, Flag.RATE_FLOOR
    df = k1 / den
    if case is VirtualInputCase.A:
        return 0.0, df, flag
    if case is VirtualInputCase.B:
        return 0.5 * df, 0.5 * df, flag
    return df, df, flag


def _rates_flagged(e1, sigma, case, oct, k1, phi, vm):
    if abs(e1) > phi:
        return 0.0, 0.0, Flag.NONE
    s = sgmf(e1, phi)
    dth, dps, flag = _magnitude_slopes(s, k1, case)
    s_dot = sgmf_slope(e1, phi) * (-vm + vm * math.cos(sigma))
    return oct.sign_theta_md * dth * s_dot, oct.sign_psi_md * dps * s_dot, flag


def virtual_input_rates(e1: float, sigma: float, theta_md: float, psi_md: float, case,
                        k1: float, phi: float, vm: float, oct: OctantSelector | None = None):
    """Rates of the desired heading angles, chain rule through ``e1_dot = Vm (cos sigma - 1)``.

    For case D this is ``k1 e1_dot sgmf'(e1) / sin(2 theta_md)``. Signs come from
    ``oct``; when it is omitted they are read off ``theta_md``/``psi_md``.
    """
    case = VirtualInputCase(case)
    if oct is None:
        oct = OctantSelector(-1 if theta_md < 0 else 1, -1 if psi_md < 0 else 1)
    th, ps, _ = _rates_flagged(e1, sigma, case, oct, k1, phi, vm)
    return th, ps


def heading_errors(s: EngagementState, vmd) -> HeadingErrors:
    theta_md, psi_md = vmd
    return HeadingErrors(s.theta_m - theta_md, s.psi_m - psi_md)


def _accel_flagged(s: EngagementState, vmd, vmd_rates, k3, k4, vm, sw):
    theta_md, psi_md = vmd
    th_md_dot, ps_md_dot = vmd_rates
    theta_dot, psi_dot = kin.los_rates(s.r, s.theta, s.theta_m, s.psi_m, vm)
    s_th, c_th = math.sin(s.theta), math.cos(s.theta)
    s_psm, c_psm = math.sin(s.psi_m), math.cos(s.psi_m)
    c_thm, hit = kin.guard(math.cos(s.theta_m))
    tan_thm = math.sin(s.theta_m) / c_thm
    e3 = s.theta_m - theta_md
    e4 = s.psi_m - psi_md
    ay = vm * c_thm * (
        -psi_dot * tan_thm * c_psm * s_th
        + psi_dot * c_th
        + theta_dot * tan_thm * s_psm
        + ps_md_dot
        - k4 * sw(e4)
    )
    az = vm * (psi_dot * s_th * s_psm + theta_dot * c_psm + th_md_dot - k3 * sw(e3))
    return LateralAccel(ay, az), (Flag.COS_THETA_M if hit else Flag.NONE)


def accel_heading(s: EngagementState, vmd, vmd_rates, k3: float, k4: float, vm: float,
                  switching: str = "sgmf2", a: float = DEFAULT_SIGMOID_STEEPNESS) -> LateralAccel:
    """Commanded (pre-saturation) accelerations of the heading-angle law.

    ``a_z`` cancels the LOS-rate terms of the ``theta_m`` equation and ``a_y``
    those of the ``psi_m`` equation, leaving ``e3_dot = -k3 sw(e3)`` and
    ``e4_dot = -k4 sw(e4)``.
    """
    return _accel_flagged(s, vmd, vmd_rates, k3, k4, vm, switching_function(switching, a))[0]


@dataclass
class HeadingCommand:
    accel: LateralAccel
    e1: float
    e3: float
    e4: float
    sigma: float
    sigma_d: float
    theta_md: float
    psi_md: float
    flags: int


class HeadingAngleLaw:
    """Callable guidance law bound to a gain set; used by the simulation engine."""

    def __init__(self, gains: HeadingLawGains):
        self.gains = gains
        self.case = VirtualInputCase(gains.case)
        if not gains.k1 <= k1_limit(self.case):
            raise ConfigurationError(
                f"k1={gains.k1} outside (0, {k1_limit(self.case)}] required by case {self.case.value}"
            )
        self._sw = switching_function(gains.switching, gains.a)

    def __call__(self, s: EngagementState) -> HeadingCommand:
        g = self.gains
        oct = g.octant
        e1 = range_error(s.t, s.r, g.tf, g.vm)
        sg = sgmf(e1, g.phi)
        th_mag, ps_mag, f1 = _magnitudes(sg, g.k1, self.case)
        theta_md = oct.sign_theta_md * th_mag
        psi_md = oct.sign_psi_md * ps_mag
        sigma = kin.effective_lead_angle(s.theta_m, s.psi_m)
        th_rate, ps_rate, f2 = _rates_flagged(e1, sigma, self.case, oct, g.k1, g.phi, g.vm)
        accel, f3 = _accel_flagged(s, (theta_md, psi_md), (th_rate, ps_rate),
                                   g.k3, g.k4, g.vm, self._sw)
        sd = kin.effective_lead_angle(theta_md, psi_md)
        return HeadingCommand(accel, e1, s.theta_m - theta_md, s.psi_m - psi_md,
                              sigma, sd, theta_md, psi_md, int(f1 | f2 | f3))
