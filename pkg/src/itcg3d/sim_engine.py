"""Closed-loop simulation: guidance, autopilot and kinematics on a fixed RK4 grid.

Each step computes the guidance command from the current state, saturates it,
advances the first-order autopilot over the step, and integrates the kinematics
with the achieved acceleration held constant (zero-order hold). Moving targets
are handled by aiming at their predicted interception point (PIP), which is
stationary by construction.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from . import feasibility
from . import kinematics as kin
from .actuation import ActuatorConfig, lag_gain
from .errors import ConfigurationError, SimulationError, SingularityError
from .guidance_heading import (
    OCTANT_I,
    HeadingAngleLaw,
    HeadingLawGains,
    OctantSelector,
    VirtualInputCase,
    virtual_inputs,
)
from .guidance_lead import LeadAngleLaw, LeadLawGains
from .kinematics import EngagementState, Flag

CLOSEST_APPROACH_RANGE = 50.0
HEADING_CONVERGENCE_TOL = 1e-2  # rad


class Law(str, enum.Enum):
    LEAD_ANGLE = "LeadAngle"
    HEADING_ANGLE = "HeadingAngle"


def _default_k1(case, sigma_max):
    return feasibility.k1_max(sigma_max, case) - 0.001


@dataclass(frozen=True)
class Scenario:
    """One engagement. Angles in radians, lengths in metres, times in seconds.

    Defaults reproduce the baseline parameter table: Vm = 250 m/s from the
    origin at a target (10, 10, 0) km, phi = 500, k1 = k1_max - 0.001, unit
    k2..k4, 10 g limit, 60 deg FOV, tau = 0.1 s.
    """

    interceptor_pos0: tuple = (0.0, 0.0, 0.0)
    target_pos0: tuple = (10_000.0, 10_000.0, 0.0)
    target_speed: float = 0.0
    target_heading: tuple = (0.0, 0.0)
    vm: float = 250.0
    tf: float = 70.0
    theta_m0: float = math.radians(-30.0)
    psi_m0: float = math.radians(30.0)
    law: Law = Law.HEADING_ANGLE
    case: VirtualInputCase = VirtualInputCase.D
    octant: OctantSelector = OCTANT_I
    k1: float | None = None
    k2: float = 1.0
    k3: float = 1.0
    k4: float = 1.0
    phi: float = 500.0
    a: float = 10.0
    switching: str = "sgmf2"
    sigma_max: float = math.radians(60.0)
    eta: float = feasibility.DEFAULT_ETA
    actuator: ActuatorConfig = field(default_factory=ActuatorConfig)
    dt: float = 1e-3
    r_kill: float = 1.0
    t_limit: float | None = None

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "law", Law(self.law))
        set_(self, "case", VirtualInputCase(self.case))
        set_(self, "interceptor_pos0", tuple(float(v) for v in self.interceptor_pos0))
        set_(self, "target_pos0", tuple(float(v) for v in self.target_pos0))
        set_(self, "target_heading", tuple(float(v) for v in self.target_heading))
        if len(self.interceptor_pos0) != 3 or len(self.target_pos0) != 3 or len(self.target_heading) != 2:
            raise ConfigurationError("positions need 3 components and target heading 2")
        if not 0 < self.sigma_max < math.pi / 2:
            raise ConfigurationError(f"sigma_max must lie in (0, 90) deg, got {math.degrees(self.sigma_max):.6g}")
        limit = self.k1_limit
        if self.k1 is None:
            # 0.001 below the limit; the margin shrinks for very narrow FOV bounds
            set_(self, "k1", limit - min(0.001, limit / 2))
        for name in ("vm", "dt", "r_kill", "phi", "a", "k2", "k3", "k4", "tf"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ConfigurationError(f"{name} must be a positive number, got {value!r}")
        if self.r_kill < kin.R_FLOOR:
            raise ConfigurationError(f"r_kill must be at least {kin.R_FLOOR} m, got {self.r_kill}")
        if not self.target_speed >= 0:
            raise ConfigurationError(f"target speed must be >= 0, got {self.target_speed}")
        if not self.eta >= 0:
            raise ConfigurationError(f"eta must be >= 0, got {self.eta}")
        for name in ("theta_m0", "psi_m0"):
            if not abs(getattr(self, name)) < math.pi / 2:
                raise ConfigurationError(f"|{name}| must be below 90 deg")
        if not 0 < self.k1 <= limit + 1e-12:
            where = f"case {self.case.value}" if self.law is Law.HEADING_ANGLE else "lead-angle law"
            raise ConfigurationError(
                f"k1={self.k1:.6g} exceeds the FOV limit {limit:.6g} for {where} "
                f"at sigma_max={math.degrees(self.sigma_max):.6g} deg"
            )
        if self.switching not in ("sgmf2", "sign"):
            raise ConfigurationError(f"switching must be 'sgmf2' or 'sign', got {self.switching!r}")
        if self.t_limit is not None and not self.t_limit > 0:
            raise ConfigurationError(f"t_limit must be positive, got {self.t_limit}")

    @property
    def k1_limit(self) -> float:
        case = self.case if self.law is Law.HEADING_ANGLE else VirtualInputCase.D
        return feasibility.k1_max(self.sigma_max, case)

    @property
    def time_limit(self) -> float:
        return self.tf + 10.0 if self.t_limit is None else self.t_limit

    def with_(self, **changes) -> "Scenario":
        return replace(self, **changes)


def pip(target_pos0, target_speed: float, target_heading, tf: float) -> np.ndarray:
    """Where a constant-velocity target will be at ``tf``."""
    th, ps = target_heading
    d = target_speed * tf
    x, y, z = (float(v) for v in target_pos0)
    return np.array([
        x + d * math.cos(th) * math.cos(ps),
        y + d * math.cos(th) * math.sin(ps),
        z - d * math.sin(th),
    ])


def target_velocity(scenario: Scenario) -> np.ndarray:
    th, ps = scenario.target_heading
    v = scenario.target_speed
    return v * np.array([math.cos(th) * math.cos(ps), math.cos(th) * math.sin(ps), -math.sin(th)])


def aim_point(scenario: Scenario) -> np.ndarray:
    return pip(scenario.target_pos0, scenario.target_speed, scenario.target_heading, scenario.tf)


def initial_state_flagged(scenario: Scenario) -> tuple[EngagementState, int]:
    delta = aim_point(scenario) - np.asarray(scenario.interceptor_pos0)
    r = float(np.linalg.norm(delta))
    if r < kin.EPS_DEN:
        raise ConfigurationError("interceptor and (predicted) target positions coincide")
    theta, psi, degenerate = kin.los_angles(delta)
    state = EngagementState(0.0, r, theta, psi, scenario.theta_m0, scenario.psi_m0)
    return state, (Flag.GIMBAL if degenerate else Flag.NONE)


def initial_state(scenario: Scenario) -> EngagementState:
    """Spherical state at t = 0 from the Cartesian geometry (PIP for moving targets)."""
    return initial_state_flagged(scenario)[0]


def make_law(scenario: Scenario):
    sc = scenario
    if sc.law is Law.LEAD_ANGLE:
        return LeadAngleLaw(LeadLawGains(sc.k1, sc.k2, sc.phi, sc.vm, sc.tf, sc.a, sc.switching))
    return HeadingAngleLaw(HeadingLawGains(sc.k1, sc.k3, sc.k4, sc.phi, sc.vm, sc.tf, sc.case,
                                           sc.octant, sc.a, sc.switching))


def initial_heading_errors(scenario: Scenario) -> tuple[float, float]:
    """``(e3(0), e4(0))`` against the case's signed virtual inputs at t = 0."""
    s0 = initial_state(scenario)
    e1 = scenario.vm * scenario.tf - s0.r
    th_md, ps_md = virtual_inputs(e1, scenario.case, scenario.octant, scenario.k1, scenario.phi)
    return s0.theta_m - th_md, s0.psi_m - ps_md


def feasibility_report(scenario: Scenario, eta: float | None = None) -> feasibility.FeasibilityReport:
    sc = scenario
    e3_0, e4_0 = initial_heading_errors(sc)
    return feasibility.analyze(
        r0=initial_state(sc).r, vm=sc.vm, sigma_max=sc.sigma_max, tf=sc.tf, k1=sc.k1,
        k3=sc.k3, k4=sc.k4, phi=sc.phi, e3_0=e3_0, e4_0=e4_0, case=sc.case,
        eta=sc.eta if eta is None else eta,
    )


TRACE_COLUMNS = (
    "t", "r", "theta", "psi", "theta_m", "psi_m", "sigma", "sigma_d", "theta_md", "psi_md",
    "e1", "e2", "e3", "e4", "ay_cmd", "az_cmd", "ay_ach", "az_ach", "x", "y", "z", "flags",
)


@dataclass(frozen=True)
class TraceRecord:
    t: float
    r: float
    theta: float
    psi: float
    theta_m: float
    psi_m: float
    sigma: float
    sigma_d: float
    theta_md: float
    psi_md: float
    e1: float
    e2: float
    e3: float
    e4: float
    ay_cmd: float
    az_cmd: float
    ay_ach: float
    az_ach: float
    x: float
    y: float
    z: float
    flags: int


class Trace:
    """Column store of one run; ``trace.r`` etc. are numpy arrays.

    ``ay_ach``/``az_ach`` hold the achieved acceleration applied over the step
    that starts at ``t``. Columns that do not apply to the active law are NaN.
    ``target`` holds the true (possibly moving) target position per step.
    """

    def __init__(self, columns: dict, target=None, termination: str = ""):
        self.columns = {name: np.asarray(columns[name]) for name in TRACE_COLUMNS}
        self.target = target
        self.termination = termination

    def __getattr__(self, name):
        cols = self.__dict__.get("columns")
        if cols is not None and name in cols:
            return cols[name]
        raise AttributeError(name)

    def __len__(self):
        return len(self.columns["t"])

    def __getitem__(self, i) -> TraceRecord:
        values = {name: self.columns[name][i].item() for name in TRACE_COLUMNS}
        return TraceRecord(**values)

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    @property
    def positions(self) -> np.ndarray:
        return np.column_stack([self.columns["x"], self.columns["y"], self.columns["z"]])


@dataclass
class ImpactReport:
    impact_time: float
    miss_distance: float
    impact_time_error: float
    sigma_peak: float
    accel_peak: float
    t_e2_converged: float
    t_e1_converged: float
    success: bool
    termination: str = ""
    target_miss_distance: float = math.nan
    steps: int = 0
    guarded_steps: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ImpactReport":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})


def _rk4(r, th, ps, thm, psm, ay, az, vm, h):
    f = kin.rates
    k1 = f(r, th, ps, thm, psm, ay, az, vm)
    hh = 0.5 * h
    k2 = f(r + hh * k1[0], th + hh * k1[1], ps + hh * k1[2], thm + hh * k1[3], psm + hh * k1[4], ay, az, vm)
    k3 = f(r + hh * k2[0], th + hh * k2[1], ps + hh * k2[2], thm + hh * k2[3], psm + hh * k2[4], ay, az, vm)
    k4 = f(r + h * k3[0], th + h * k3[1], ps + h * k3[2], thm + h * k3[3], psm + h * k3[4], ay, az, vm)
    w = h / 6.0
    return (
        r + w * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
        th + w * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]),
        ps + w * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]),
        thm + w * (k1[3] + 2 * k2[3] + 2 * k3[3] + k4[3]),
        psm + w * (k1[4] + 2 * k2[4] + 2 * k3[4] + k4[4]),
    )


def rk4_step(state: EngagementState, accel: kin.LateralAccel, vm: float, h: float) -> EngagementState:
    """One classical RK4 step of the kinematics with the acceleration held."""
    y = _rk4(*state.as_tuple(), accel.ay, accel.az, vm, h)
    return EngagementState(state.t + h, *y)


def simulate(scenario: Scenario) -> Trace:
    """Integrate one engagement and return its trace (see :func:`run`)."""
    sc = scenario
    law = make_law(sc)
    heading = sc.law is Law.HEADING_ANGLE
    state, flags0 = initial_state_flagged(sc)
    vm, dt, a_max = sc.vm, sc.dt, sc.actuator.a_max
    g = lag_gain(sc.actuator.tau, dt)
    t_limit = sc.time_limit
    n_max = int(math.ceil(t_limit / dt)) + 1

    cols = {name: [] for name in TRACE_COLUMNS if name not in ("x", "y", "z")}
    ap = {name: cols[name].append for name in cols}
    nan = math.nan

    t = 0.0
    r, th, ps, thm, psm = state.as_tuple()
    ay_a = az_a = 0.0
    r_prev = math.inf
    termination = "timeout"
    extra_flags = int(flags0)

    for i in range(n_max):
        cmd = law(EngagementState(t, r, th, ps, thm, psm))
        ay_c = max(-a_max, min(a_max, cmd.accel.ay))
        az_c = max(-a_max, min(a_max, cmd.accel.az))
        ay_a += g * (ay_c - ay_a)
        az_a += g * (az_c - az_a)

        ap["t"](t); ap["r"](r); ap["theta"](th); ap["psi"](ps); ap["theta_m"](thm); ap["psi_m"](psm)
        ap["sigma"](cmd.sigma); ap["sigma_d"](cmd.sigma_d); ap["e1"](cmd.e1)
        ap["e2"](cmd.sigma - cmd.sigma_d)
        if heading:
            ap["theta_md"](cmd.theta_md); ap["psi_md"](cmd.psi_md); ap["e3"](cmd.e3); ap["e4"](cmd.e4)
        else:
            ap["theta_md"](nan); ap["psi_md"](nan); ap["e3"](nan); ap["e4"](nan)
        ap["ay_cmd"](cmd.accel.ay); ap["az_cmd"](cmd.accel.az); ap["ay_ach"](ay_a); ap["az_ach"](az_a)
        ap["flags"](cmd.flags | extra_flags)
        extra_flags = 0

        if r <= sc.r_kill:
            termination = "kill"
            break
        if r > r_prev and r_prev < CLOSEST_APPROACH_RANGE:
            termination = "closest_approach"
            break
        if t >= t_limit:
            break
        r_prev = r

        try:
            r, th, ps, thm, psm = _rk4(r, th, ps, thm, psm, ay_a, az_a, vm, dt)
        except SingularityError as exc:
            if r < 4.0 * vm * dt:
                # stepped through the target inside one step: treat the last state as terminal
                termination = "kill"
                break
            raise SimulationError(f"step {i} (t={t:.4f} s): {exc}") from exc
        t = (i + 1) * dt
        if not all(math.isfinite(v) for v in (r, th, ps, thm, psm)):
            recent = [kin.flag_names(f) for f in cols["flags"][-5:]]
            raise SimulationError(f"non-finite state at step {i + 1} (t={t:.4f} s); recent flags {recent}")

    columns = {name: np.array(values, dtype=float) for name, values in cols.items()}
    columns["flags"] = np.array(cols["flags"], dtype=np.int64)
    aim = aim_point(sc)
    u = np.column_stack([
        np.cos(columns["theta"]) * np.cos(columns["psi"]),
        np.cos(columns["theta"]) * np.sin(columns["psi"]),
        -np.sin(columns["theta"]),
    ])
    pos = aim - columns["r"][:, None] * u
    columns["x"], columns["y"], columns["z"] = pos[:, 0], pos[:, 1], pos[:, 2]
    target = np.asarray(sc.target_pos0) + columns["t"][:, None] * target_velocity(sc)
    return Trace(columns, target=target, termination=termination)


def first_time(t: np.ndarray, mask: np.ndarray) -> float:
    idx = np.flatnonzero(mask)
    return float(t[idx[0]]) if idx.size else math.nan


def settled_time(t: np.ndarray, mask: np.ndarray) -> float:
    """First time after which ``mask`` holds for every remaining sample."""
    if mask.size == 0 or not mask[-1]:
        return math.nan
    bad = np.flatnonzero(~mask)
    return float(t[bad[-1] + 1]) if bad.size else float(t[0])


def _straight_line_closest(p, v, q, w, s_min):
    """Closest approach of ``p + v s`` and ``q + w s`` for ``s >= s_min``."""
    d = q - p
    dv = w - v
    den = float(dv @ dv)
    s = -float(d @ dv) / den if den > 0 else 0.0
    s = max(s, s_min)
    return float(np.linalg.norm(d + dv * s)), s


def metrics(trace: Trace, scenario: Scenario, conv_tol: float = HEADING_CONVERGENCE_TOL) -> ImpactReport:
    """Terminal and convergence metrics of a finished run."""
    if len(trace) == 0:
        raise ValueError("empty trace")
    sc = scenario
    t = trace.t
    r = trace.r
    last = trace[len(trace) - 1]
    reason = trace.termination
    s_last = EngagementState(last.t, last.r, last.theta, last.psi, last.theta_m, last.psi_m)
    v_m = kin.velocity_vector(s_last, sc.vm)
    p_m = np.array([last.x, last.y, last.z])

    if reason == "kill":
        miss, s = _straight_line_closest(p_m, v_m, aim_point(sc), np.zeros(3), 0.0)
        impact_time = last.t + s
    elif reason == "closest_approach" and len(trace) >= 3:
        # vertex of the parabola through the last three range samples
        r0, r1, r2 = r[-3], r[-2], r[-1]
        h = t[-1] - t[-2]
        curv = r0 - 2 * r1 + r2
        if curv > 0:
            offset = 0.5 * (r0 - r2) / curv
            impact_time = t[-2] + offset * h
            miss = max(r1 - (r0 - r2) ** 2 / (8 * curv), 0.0)
        else:
            impact_time, miss = float(t[-2]), float(r1)
    else:
        j = int(np.argmin(r))
        impact_time, miss = float(t[j]), float(r[j])

    if sc.target_speed > 0 and trace.target is not None:
        target_miss, _ = _straight_line_closest(p_m, v_m, trace.target[-1], target_velocity(sc), -2 * sc.dt)
    else:
        target_miss = miss

    a_mag = np.hypot(trace.ay_ach, trace.az_ach)
    if sc.law is Law.HEADING_ANGLE:
        conv = np.maximum(np.abs(trace.e3), np.abs(trace.e4)) <= conv_tol
    else:
        conv = np.abs(trace.e2) <= conv_tol
    eta = sc.eta if sc.eta > 0 else feasibility.DEFAULT_ETA
    success = reason in ("kill", "closest_approach") and miss <= sc.r_kill and impact_time <= sc.time_limit
    return ImpactReport(
        impact_time=float(impact_time),
        miss_distance=float(miss),
        impact_time_error=float(impact_time - sc.tf),
        sigma_peak=float(np.max(trace.sigma)),
        accel_peak=float(np.max(a_mag)),
        t_e2_converged=first_time(t, conv),
        t_e1_converged=settled_time(t, np.abs(trace.e1) <= eta),
        success=bool(success),
        termination=reason,
        target_miss_distance=float(target_miss),
        steps=len(trace),
        guarded_steps=int(np.count_nonzero(trace.flags)),
    )


def run(scenario: Scenario) -> tuple[Trace, ImpactReport]:
    """Simulate one engagement and extract its impact report.

    Terminates when the range drops to ``r_kill``, at closest approach once the
    range starts growing inside 50 m, or at the time limit (``tf + 10`` s by default).
    """
    trace = simulate(scenario)
    return trace, metrics(trace, scenario)
