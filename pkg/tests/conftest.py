import functools
import math

import numpy as np
import pytest

from itcg3d import ActuatorConfig, Scenario, run
from itcg3d import kinematics as kin

IDEAL = ActuatorConfig(tau=0.0, a_max=math.inf)


@functools.lru_cache(maxsize=64)
def cached_run(scenario: Scenario):
    """Closed-loop runs are shared between tests; scenarios are hashable."""
    return run(scenario)


def deg(x):
    return math.radians(x)


def velocity_axes(theta, psi, theta_m, psi_m):
    """World-frame unit velocity and the directions a_y and a_z act along.

    Built from the LOS frame alone so it is independent of the rate equations:
    a_z turns the velocity towards increasing theta_m, a_y towards increasing psi_m.
    """
    L = kin.los_frame(theta, psi)  # rows are the LOS axes in world coordinates
    st, ct = math.sin(theta_m), math.cos(theta_m)
    sp, cp = math.sin(psi_m), math.cos(psi_m)
    v = L.T @ np.array([ct * cp, ct * sp, -st])
    ey = L.T @ np.array([-sp, cp, 0.0])
    ez = L.T @ np.array([-st * cp, -st * sp, -ct])
    return v, ey, ez


def angles_from_cartesian(p_m, v_m, target):
    """(r, theta, psi, theta_m, psi_m) recomputed from positions and velocity."""
    delta = np.asarray(target) - p_m
    r = float(np.linalg.norm(delta))
    theta, psi, _ = kin.los_angles(delta)
    local = kin.los_frame(theta, psi) @ (v_m / np.linalg.norm(v_m))
    theta_m = -math.asin(max(-1.0, min(1.0, local[2])))
    psi_m = math.atan2(local[1], local[0])
    return r, theta, psi, theta_m, psi_m


@pytest.fixture
def baseline_scenario():
    return Scenario()


# one (criterion, passed, detail) entry per acceptance check, printed after the run
ACCEPTANCE = []


def record(criterion: str, passed: bool, detail: str) -> bool:
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
