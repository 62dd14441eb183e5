import math

import mpmath
import pytest
from hypothesis import given, strategies as st

from itcg3d.errors import ConfigurationError
from itcg3d.smoothing import SmoothingParams, sgmf, sgmf2, sgmf_slope, sign, switching_function

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)
widths = st.floats(min_value=1e-3, max_value=1e4)


def test_sign_branches():
    assert sign(2.0) == 1.0
    assert sign(-3.5) == -1.0
    assert sign(0.0) == 0.0


@pytest.mark.parametrize("x, phi, want", [
    (0.0, 500.0, 0.0),
    (500.0, 500.0, 1.0),
    (250.0, 500.0, 0.6875),
    (-600.0, 500.0, -1.0),
])
def test_sgmf_values(x, phi, want):
    assert sgmf(x, phi) == pytest.approx(want, abs=1e-15)


@pytest.mark.parametrize("phi", [0.0, -1.0])
def test_sgmf_rejects_bad_width(phi):
    with pytest.raises(ConfigurationError):
        sgmf(1.0, phi)


def test_params_validate():
    SmoothingParams(phi=1.0, a=10.0)
    with pytest.raises(ConfigurationError):
        SmoothingParams(phi=0.0)
    with pytest.raises(ConfigurationError):
        SmoothingParams(phi=1.0, a=0.0)


def test_sgmf2_against_high_precision():
    mpmath.mp.dps = 40
    want = 2 * (1 / (1 + mpmath.e ** -1) - mpmath.mpf("0.5"))
    assert sgmf2(0.1, 10.0) == pytest.approx(float(want), rel=1e-14)
    assert round(sgmf2(0.1, 10.0), 5) == 0.46212
    assert sgmf2(0.0, 10.0) == 0.0
    assert sgmf2(1e3, 10.0) == 1.0


@given(finite, widths)
def test_sgmf_odd_and_bounded(x, phi):
    assert sgmf(-x, phi) == -sgmf(x, phi)
    assert abs(sgmf(x, phi)) <= 1.0


@given(finite, finite, widths)
def test_sgmf_monotone(x, y, phi):
    lo, hi = sorted((x, y))
    assert sgmf(lo, phi) <= sgmf(hi, phi)


@given(widths)
def test_sgmf_c1_at_boundary(phi):
    h = phi * 1e-7
    for edge in (phi, -phi):
        left = (sgmf(edge, phi) - sgmf(edge - h, phi)) / h
        right = (sgmf(edge + h, phi) - sgmf(edge, phi)) / h
        # both one-sided slopes vanish; compare on the scale of the interior slope 1.5/phi
        assert abs(left - right) <= 1e-6 * 1.5 / phi
        assert sgmf_slope(edge, phi) == 0.0


@given(st.floats(min_value=-0.999, max_value=0.999), widths)
def test_sgmf_slope_matches_difference_quotient(u, phi):
    x = u * phi
    h = phi * 1e-6
    fd = (sgmf(x + h, phi) - sgmf(x - h, phi)) / (2 * h)
    assert sgmf_slope(x, phi) == pytest.approx(fd, rel=1e-5, abs=1e-9 / phi)


@given(finite, st.floats(min_value=1e-2, max_value=1e3))
def test_sgmf2_odd_bounded(x, a):
    assert sgmf2(-x, a) == -sgmf2(x, a)
    assert abs(sgmf2(x, a)) <= 1.0
    if abs(a * x) < 30:
        assert abs(sgmf2(x, a)) < 1.0


@given(st.floats(min_value=-10, max_value=10), st.floats(min_value=-10, max_value=10))
def test_sgmf2_strictly_increasing(x, y):
    if abs(x - y) > 1e-6 and max(abs(x), abs(y)) < 3:
        lo, hi = sorted((x, y))
        assert sgmf2(lo, 10.0) < sgmf2(hi, 10.0)


@given(st.floats(min_value=0.01, max_value=1e6))
def test_sgmf2_approaches_sign(x):
    for v in (x, -x):
        assert abs(sgmf2(v, 1000.0) - sign(v)) < 1e-3


def test_switching_function_lookup():
    assert switching_function("sign")(-2.0) == -1.0
    assert switching_function("sgmf2", 10.0)(0.1) == sgmf2(0.1, 10.0)
    with pytest.raises(ConfigurationError):
        switching_function("tanh")
    assert math.isclose(switching_function("sgmf2", 1.0)(1.0), math.tanh(0.5))
