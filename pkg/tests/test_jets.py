import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from carleman_lab.jets import Jet

points = st.floats(-3.0, 3.0, allow_nan=False)


def test_variable_has_unit_derivative():
    d = Jet.variable([0.5, 1.5], 3).derivatives()
    np.testing.assert_array_equal(d[0], [0.5, 1.5])
    np.testing.assert_array_equal(d[1], [1.0, 1.0])
    assert np.all(d[2:] == 0)


@given(points)
def test_exp_derivatives_match_closed_form(x):
    d = Jet.variable(x, 5).exp().derivatives()[:, 0]
    np.testing.assert_allclose(d, math.exp(x), rtol=1e-13)


@given(points)
def test_sin_cos_derivative_cycle(x):
    s = Jet.variable(x, 4).sin().derivatives()[:, 0]
    expect = [math.sin(x), math.cos(x), -math.sin(x), -math.cos(x), math.sin(x)]
    np.testing.assert_allclose(s, expect, atol=1e-13)


@given(st.floats(0.2, 5.0))
def test_log_and_power(x):
    lg = Jet.variable(x, 3).log().derivatives()[:, 0]
    np.testing.assert_allclose(lg, [math.log(x), 1 / x, -1 / x**2, 2 / x**3], rtol=1e-12)
    pw = (Jet.variable(x, 2) ** 2.5).derivatives()[:, 0]
    np.testing.assert_allclose(pw, [x**2.5, 2.5 * x**1.5, 3.75 * x**0.5], rtol=1e-12)


@given(st.floats(0.3, 3.0))
def test_quotient_rule(x):
    v = Jet.variable(x, 3)
    q = (v * v + 1.0) / v  # x + 1/x
    np.testing.assert_allclose(q.derivatives()[:, 0], [x + 1 / x, 1 - x**-2, 2 * x**-3, -6 * x**-4], rtol=1e-12)


def test_mollifier_composition_against_finite_differences():
    # exp(-1/(1-s^2)) at s = 0.3, checked against a fine centered difference
    s = Jet.variable(0.3, 2)
    f = (-1.0 / (1.0 - s * s)).exp().derivatives()[:, 0]
    g = lambda y: math.exp(-1 / (1 - y * y))
    h = 1e-4
    assert f[1] == pytest.approx((g(0.3 + h) - g(0.3 - h)) / (2 * h), rel=1e-7)
    assert f[2] == pytest.approx((g(0.3 + h) - 2 * g(0.3) + g(0.3 - h)) / h**2, rel=1e-5)
