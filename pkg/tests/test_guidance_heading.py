import math

import pytest
from hypothesis import given, settings, strategies as st

from itcg3d import kinematics as kin
from itcg3d.actuation import saturate
from itcg3d.errors import ConfigurationError
from itcg3d.feasibility import k1_max, range_error_rate
from itcg3d.guidance_heading import (
    OCTANT_I,
    HeadingAngleLaw,
    HeadingLawGains,
    OctantSelector,
    VirtualInputCase,
    accel_heading,
    heading_errors,
    k1_limit,
    virtual_input_rates,
    virtual_inputs,
)
from itcg3d.guidance_lead import range_error
from itcg3d.kinematics import EngagementState
from itcg3d.sim_engine import Scenario, initial_state, make_law, rk4_step
from itcg3d.smoothing import switching_function

from conftest import deg

VM, PHI = 250.0, 500.0
CASES = list(VirtualInputCase)
OCTANTS = [OctantSelector(a, b) for a in (1, -1) for b in (1, -1)]


def test_zero_error_gives_zero_inputs():
    for case in CASES:
        for oct in OCTANTS:
            th, ps = virtual_inputs(0.0, case, oct, 0.29, PHI)
            assert (abs(th), abs(ps)) == (0.0, 0.0)


def test_case_d_example():
    th, ps = virtual_inputs(600.0, "D", OCTANT_I, 0.499, PHI)
    assert math.degrees(th) == pytest.approx(-44.94, abs=5e-3)
    assert math.degrees(ps) == pytest.approx(44.94, abs=5e-3)
    assert th == pytest.approx(-0.5 * math.acos(0.002), rel=1e-12)
    assert math.cos(th) ** 2 == pytest.approx(0.501, rel=1e-12)


def test_case_a_example():
    th, ps = virtual_inputs(600.0, "A", OCTANT_I, 0.499, PHI)
    assert th == 0.0
    assert math.degrees(ps) == pytest.approx(59.934, abs=1e-3)


@pytest.mark.parametrize("case, k1", [("A", 1.01), ("C", 1.5), ("D", 1.2), ("B", 2.5)])
def test_inadmissible_k1_rejected(case, k1):
    with pytest.raises(ConfigurationError, match=str(k1_limit(VirtualInputCase(case)))):
        virtual_inputs(10.0, case, OCTANT_I, k1, PHI)


def test_k1_limits():
    assert k1_limit("B") == 2.0
    assert all(k1_limit(c) == 1.0 for c in "ACD")


@settings(max_examples=200)
@given(st.floats(min_value=0.0, max_value=2000.0), st.sampled_from(CASES), st.sampled_from(OCTANTS),
       st.floats(min_value=0.01, max_value=1.0))
def test_implied_range_error_rate_matches_case_table(e1, case, oct, frac):
    """Vm (cos theta_md cos psi_md - 1) equals the case's closed-loop e1 dynamics."""
    k1 = frac * k1_max(math.radians(60), case)
    th, ps = virtual_inputs(e1, case, oct, k1, PHI)
    implied = VM * (math.cos(th) * math.cos(ps) - 1.0)
    assert implied == pytest.approx(range_error_rate(e1, case, k1, PHI, VM), abs=1e-9)
    assert math.copysign(1, th) == oct.sign_theta_md or th == 0.0
    assert math.copysign(1, ps) == oct.sign_psi_md or ps == 0.0


@settings(max_examples=50)
@given(st.sampled_from(CASES), st.floats(min_value=0.05, max_value=1.0))
def test_desired_lead_angle_within_fov(case, frac):
    k1 = frac * k1_max(math.radians(60), case)
    for e1 in (1.0, 250.0, 600.0):
        th, ps = virtual_inputs(e1, case, OCTANT_I, k1, PHI)
        assert kin.effective_lead_angle(th, ps) <= math.radians(60) + 1e-12


def test_rate_trivial_branches():
    for case in CASES:
        assert virtual_input_rates(600.0, 0.5, 0.1, 0.1, case, 0.29, PHI, VM) == (0.0, 0.0)
        assert virtual_input_rates(0.0, 0.0, 0.0, 0.0, case, 0.29, PHI, VM) == (0.0, 0.0)


def _rates_fd(e1, sigma, case, oct, k1):
    h = 1e-6 * max(e1, 1.0)
    p = virtual_inputs(e1 + h, case, oct, k1, PHI)
    m = virtual_inputs(e1 - h, case, oct, k1, PHI)
    e1_dot = VM * (math.cos(sigma) - 1.0)
    return tuple((a - b) / (2 * h) * e1_dot for a, b in zip(p, m))


def test_case_d_rates_worked_example():
    th, ps = virtual_inputs(250.0, "D", OCTANT_I, 0.499, PHI)
    sigma = kin.effective_lead_angle(th, ps)
    got = virtual_input_rates(250.0, sigma, th, ps, "D", 0.499, PHI, VM)
    want = _rates_fd(250.0, sigma, "D", OCTANT_I, 0.499)
    assert got == pytest.approx(want, rel=1e-7)
    # closed form for case D: k1 e1_dot sgmf'(e1) / sin(2 theta_md), signed
    from itcg3d.smoothing import sgmf_slope
    mag = 0.499 * VM * (math.cos(sigma) - 1) * sgmf_slope(250.0, PHI) / math.sin(2 * abs(th))
    assert got == pytest.approx((-mag, mag), rel=1e-12)


@settings(max_examples=200)
@given(st.floats(min_value=1e-2, max_value=499.0), st.floats(min_value=0.0, max_value=1.4),
       st.sampled_from(CASES), st.sampled_from(OCTANTS), st.floats(min_value=0.05, max_value=0.999))
def test_rates_match_chain_rule(e1, sigma, case, oct, frac):
    k1 = frac * k1_limit(case)
    th, ps = virtual_inputs(e1, case, oct, k1, PHI)
    got = virtual_input_rates(e1, sigma, th, ps, case, k1, PHI, VM, oct)
    want = _rates_fd(e1, sigma, case, oct, k1)
    assert got == pytest.approx(want, rel=1e-5, abs=1e-12)


def test_heading_errors_examples():
    th_md, ps_md = virtual_inputs(600.0, "D", OCTANT_I, 0.499, PHI)
    e = heading_errors(EngagementState(0, 1e4, 0, 0, deg(-30), deg(30)), (th_md, ps_md))
    assert math.degrees(e.e3) == pytest.approx(14.94, abs=5e-3)
    _, ps_a = virtual_inputs(600.0, "A", OCTANT_I, 0.499, PHI)
    e = heading_errors(EngagementState(0, 1e4, 0, 0, deg(-30), deg(30)), (0.0, ps_a))
    assert math.degrees(e.e4) == pytest.approx(-29.93, abs=5e-3)
    assert heading_errors(EngagementState(0, 1, 0, 0, 0.3, 0.0), (0.3, 0.0)).e3 == 0.0


def test_accel_collision_course_is_zero():
    a = accel_heading(EngagementState(0, 5000.0, 0, 0, 0, 0), (0.0, 0.0), (0.0, 0.0), 1.0, 1.0, VM)
    assert (a.ay, a.az) == (0.0, 0.0)


state = st.tuples(
    st.floats(min_value=2e3, max_value=2e4),   # r
    st.floats(min_value=-0.6, max_value=0.6),  # theta
    st.floats(min_value=-3.0, max_value=3.0),  # psi
    st.floats(min_value=-1.2, max_value=1.2),  # theta_m
    st.floats(min_value=-1.2, max_value=1.2),  # psi_m
    st.floats(min_value=1.0, max_value=4000.0),
)


@settings(max_examples=100, deadline=None)
@given(state, st.sampled_from(CASES), st.sampled_from(OCTANTS), st.sampled_from(["sign", "sgmf2"]))
def test_closed_loop_heading_error_dynamics(x, case, oct, switching):
    """e3_dot = -k3 sw(e3) and e4_dot = -k4 sw(e4), analytically and by stepping."""
    r, th, ps, thm, psm, e1 = x
    k1 = 0.9 * k1_max(math.radians(60), case)
    k3, k4 = 0.8, 1.3
    tf = (r + e1) / VM
    law = HeadingAngleLaw(HeadingLawGains(k1, k3, k4, PHI, VM, tf, case, oct, switching=switching))
    s = EngagementState(0.0, r, th, ps, thm, psm)
    cmd = law(s)
    assert cmd.flags == 0
    sw = switching_function(switching)
    want3, want4 = -k3 * sw(cmd.e3), -k4 * sw(cmd.e4)

    rates = kin.state_rates(s, cmd.accel, VM)
    md_rates = virtual_input_rates(cmd.e1, cmd.sigma, cmd.theta_md, cmd.psi_md, case, k1, PHI, VM, oct)
    assert rates.theta_m_dot - md_rates[0] == pytest.approx(want3, abs=1e-9)
    assert rates.psi_m_dot - md_rates[1] == pytest.approx(want4, abs=1e-9)

    h = 1e-6

    def errors_at(hh):
        n = rk4_step(s, cmd.accel, VM, hh)
        th_md, ps_md = virtual_inputs(range_error(n.t, n.r, tf, VM), case, oct, k1, PHI)
        return n.theta_m - th_md, n.psi_m - ps_md

    (p3, p4), (m3, m4) = errors_at(h), errors_at(-h)
    assert (p3 - m3) / (2 * h) == pytest.approx(want3, abs=1e-6)
    assert (p4 - m4) / (2 * h) == pytest.approx(want4, abs=1e-6)


def test_baseline_initial_command_is_saturated_but_nonzero():
    sc = Scenario()
    cmd = make_law(sc)(initial_state(sc))
    assert cmd.accel.ay != 0 and cmd.accel.az != 0
    for a in (cmd.accel.ay, cmd.accel.az):
        assert abs(saturate(a, 98.1)) <= 98.1
    # case D, octant I at t = 0: theta_md < 0 < psi_md with the expected 44.94 deg magnitude
    assert math.degrees(cmd.psi_md) == pytest.approx(44.94, abs=5e-3)
    assert cmd.theta_md == -cmd.psi_md


def test_octant_selector():
    assert [OctantSelector.from_name(n).name for n in ("I", "iv", "V", "VIII")] == ["I", "IV", "V", "VIII"]
    assert OctantSelector.from_name("I") == OCTANT_I
    assert OctantSelector.from_name("IV").los_signs() == (1, -1, 1)
    assert OctantSelector.from_name("VIII").los_signs() == (1, -1, -1)
    with pytest.raises(ConfigurationError):
        OctantSelector.from_name("II")
    with pytest.raises(ConfigurationError):
        OctantSelector(0, 1)


def test_gains_validation():
    with pytest.raises(ConfigurationError):
        HeadingLawGains(0.5, 0.0, 1.0, PHI, VM, 70.0)
    with pytest.raises(ConfigurationError):
        HeadingAngleLaw(HeadingLawGains(1.5, 1.0, 1.0, PHI, VM, 70.0, case="C"))
