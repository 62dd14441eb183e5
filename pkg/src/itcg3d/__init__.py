"""Three-dimensional impact-time-constrained guidance with field-of-view limits."""

from .actuation import ActuatorConfig, autopilot_step, saturate
from .errors import ConfigurationError, SimulationError, SingularityError
from .feasibility import FeasibilityReport, k1_max, necessary_window, sufficient_window
from .guidance_heading import OctantSelector, VirtualInputCase
from .kinematics import EngagementState, LateralAccel, effective_lead_angle
from .sim_engine import ImpactReport, Law, Scenario, Trace, feasibility_report, run

__all__ = [
    "ActuatorConfig", "ConfigurationError", "EngagementState", "FeasibilityReport", "ImpactReport",
    "LateralAccel", "Law", "OctantSelector", "Scenario", "SimulationError", "SingularityError",
    "Trace", "VirtualInputCase", "autopilot_step", "effective_lead_angle", "feasibility_report",
    "k1_max", "necessary_window", "run", "saturate", "sufficient_window",
]
