import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from itcg3d import kinematics as kin
from itcg3d.errors import ConfigurationError
from itcg3d.guidance_lead import (
    LeadAngleLaw,
    LeadLawGains,
    accel_lead,
    range_error,
    sigma_d,
    sigma_d_rate,
    sin_of_desired,
)
from itcg3d.kinematics import EngagementState, Flag
from itcg3d.sim_engine import rk4_step
from itcg3d.smoothing import switching_function

from conftest import deg

VM, PHI, K1 = 250.0, 500.0, 0.499


def test_range_error_examples():
    assert range_error(0.0, 14142.1, 70.0, 250.0) == pytest.approx(3357.9, abs=1e-9)
    assert range_error(0.0, math.hypot(1e4, 1e4), 70.0, 250.0) == pytest.approx(3357.864, abs=1e-3)
    assert range_error(12.0, 250.0 * 58.0, 70.0, 250.0) == 0.0
    assert range_error(0.0, 15000.0, 60.0, 250.0) == 0.0


def test_sigma_d_examples():
    assert sigma_d(0.0, K1, PHI) == 0.0
    assert math.degrees(sigma_d(600.0, K1, PHI)) == pytest.approx(math.degrees(math.acos(0.501)), abs=1e-12)
    assert math.degrees(sigma_d(600.0, K1, PHI)) == pytest.approx(59.934, abs=1e-3)
    assert math.degrees(sigma_d(600.0, 1.0, PHI)) == pytest.approx(90.0, abs=1e-12)


def test_sigma_d_negative_range_error_clamps():
    law = LeadAngleLaw(LeadLawGains(K1, 1.0, PHI, VM, 70.0))
    # r larger than Vm*(tf - t): the interceptor is late, e1 < 0
    cmd = law(EngagementState(0.0, 20000.0, 0.0, 0.0, 0.1, 0.2))
    assert cmd.e1 < 0
    assert cmd.sigma_d == 0.0
    assert cmd.flags & Flag.ACOS_CLAMP


@given(st.floats(min_value=-1e4, max_value=1e4))
def test_sigma_d_zero_iff_e1_zero(e1):
    sd = sigma_d(e1, K1, PHI)
    # below ~1e-10 m the argument 1 - k1 sgmf rounds to exactly 1
    if e1 > 1e-10:
        assert sd > 0
    else:
        assert sd == 0.0


def test_sigma_d_rate_trivial_branches():
    assert sigma_d_rate(600.0, 0.3, 0.2, K1, PHI, VM) == 0.0
    assert sigma_d_rate(-600.0, 0.3, 0.2, K1, PHI, VM) == 0.0
    assert sigma_d_rate(0.0, 0.0, 0.0, K1, PHI, VM) == 0.0


def _sigma_d_rate_fd(e1, sigma, k1, phi, vm):
    h = 1e-6 * max(e1, 1.0)
    dsd = (sigma_d(e1 + h, k1, phi) - sigma_d(e1 - h, k1, phi)) / (2 * h)
    return dsd * vm * (math.cos(sigma) - 1.0)


def test_sigma_d_rate_worked_example():
    sd = sigma_d(250.0, K1, PHI)
    got = sigma_d_rate(250.0, sd, sd, K1, PHI, VM)
    assert got == pytest.approx(_sigma_d_rate_fd(250.0, sd, K1, PHI, VM), rel=1e-7)
    assert got < 0


@settings(max_examples=200)
@given(st.floats(min_value=1e-2, max_value=499.0), st.floats(min_value=0.0, max_value=1.5),
       st.floats(min_value=0.05, max_value=2.0))
def test_sigma_d_rate_matches_chain_rule(e1, sigma, k1):
    got = sigma_d_rate(e1, sigma, sigma_d(e1, k1, PHI), k1, PHI, VM)
    assert got == pytest.approx(_sigma_d_rate_fd(e1, sigma, k1, PHI, VM), rel=1e-5, abs=1e-12)


def test_sin_of_desired_matches_trig():
    for s in (1e-6, 0.1, 0.5, 1.0):
        assert sin_of_desired(K1, s) == pytest.approx(math.sin(math.acos(1 - K1 * s)), rel=1e-9)


def test_accel_collision_course_is_zero():
    g = LeadLawGains(K1, 1.0, PHI, VM, 70.0)
    a = accel_lead(EngagementState(0, 5000.0, 0, 0, 0.0, 0.0), 0.0, 0.0, g)
    assert (a.ay, a.az) == (0.0, 0.0)


def test_accel_worked_example():
    g = LeadLawGains(K1, 1.0, PHI, VM, 70.0, switching="sign")
    thm, psm = deg(-30), deg(30)
    sigma = kin.effective_lead_angle(thm, psm)
    s = EngagementState(0, 1e4, 0.0, 0.0, thm, psm)
    a = accel_lead(s, sigma - 0.1, 0.0, g)
    assert a.ay < 0
    assert a.ay == pytest.approx(VM * math.sin(sigma) / math.sin(psm) * (-1.0), rel=1e-12)
    want_az = -VM**2 * math.sin(sigma) ** 2 / (1e4 * math.sin(thm) * math.cos(psm))
    assert a.az == pytest.approx(want_az, rel=1e-12)
    assert a.az > 0


state = st.tuples(
    st.floats(min_value=2e3, max_value=2e4),           # r
    st.floats(min_value=-0.6, max_value=0.6),          # theta
    st.floats(min_value=-3.0, max_value=3.0),          # psi
    st.floats(min_value=-1.0, max_value=1.0).filter(lambda x: abs(x) > 0.05),
    st.floats(min_value=-1.0, max_value=1.0).filter(lambda x: abs(x) > 0.05),
    st.floats(min_value=1.0, max_value=4000.0),        # e1
)


@settings(max_examples=100, deadline=None)
@given(state, st.sampled_from(["sign", "sgmf2"]))
def test_closed_loop_lead_error_dynamics(x, switching):
    """The law makes e2_dot = -k2 sw(e2): analytically and by stepping the kinematics."""
    r, th, ps, thm, psm, e1 = x
    k2 = 0.7
    tf = (r + e1) / VM
    g = LeadLawGains(K1, k2, PHI, VM, tf, switching=switching)
    law = LeadAngleLaw(g)
    s = EngagementState(0.0, r, th, ps, thm, psm)
    cmd = law(s)
    assert cmd.flags == 0
    sw = switching_function(switching)
    want = -k2 * sw(cmd.e2)

    analytic = kin.lead_angle_rate(s, cmd.accel, VM) - sigma_d_rate(cmd.e1, cmd.sigma, cmd.sigma_d, K1, PHI, VM)
    assert analytic == pytest.approx(want, abs=1e-9)

    h = 1e-6

    def e2_at(hh):
        n = rk4_step(s, cmd.accel, VM, hh)
        return kin.effective_lead_angle(n.theta_m, n.psi_m) - sigma_d(range_error(n.t, n.r, tf, VM), K1, PHI)

    fd = (e2_at(h) - e2_at(-h)) / (2 * h)
    assert fd == pytest.approx(want, abs=1e-6)


def test_gain_validation():
    with pytest.raises(ConfigurationError):
        LeadLawGains(0.0, 1.0, PHI, VM, 70.0)
    with pytest.raises(ConfigurationError):
        LeadLawGains(2.1, 1.0, PHI, VM, 70.0)
    with pytest.raises(ConfigurationError):
        LeadLawGains(0.4, -1.0, PHI, VM, 70.0)
    LeadLawGains(2.0, 1.0, PHI, VM, 70.0)


def test_rate_floor_flagged_near_zero_error():
    law = LeadAngleLaw(LeadLawGains(K1, 1.0, PHI, VM, 70.0))
    # e1 = 1e-7 m puts k1 sgmf below the 1e-9 floor
    s = EngagementState(0.0, VM * 70.0 - 1e-7, 0.0, 0.0, 1e-4, 1e-4)
    cmd = law(s)
    assert cmd.flags & Flag.RATE_FLOOR
    assert np.isfinite([cmd.accel.ay, cmd.accel.az]).all()
