import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from carleman_lab.exponents import INF, PotentialNorms, ProblemParams, order_bound_exponent, theta_infinity
from carleman_lab.polarweights import ModeFunction, PowerSum, Scaled
from carleman_lab.solutions import eigen_solution, harmonic_power
from carleman_lab import ucp

from .frozen import K0_REFERENCE

CONST = ModeFunction(0, 3, PowerSum(((2.5, 0.0),)))


# --------------------------------------------------------------------------
# sup norms and orders
# --------------------------------------------------------------------------

def test_sup_ball_examples():
    assert ucp.sup_ball(CONST, 0.3) == pytest.approx(2.5)
    assert ucp.sup_ball(harmonic_power(3, 3), 0.1) == pytest.approx(1e-3, rel=1e-12)
    with pytest.raises(ValueError):
        ucp.sup_ball(CONST, 1e-30)


@given(st.integers(0, 4), st.floats(1.0, 500.0), st.floats(1e-5, 2.0))
def test_sup_ball_monotone(k, lam, r):
    u, _ = eigen_solution(lam, k, 3)
    assert ucp.sup_ball(u, r) <= ucp.sup_ball(u, 2 * r)


@pytest.mark.parametrize("k", range(7))
def test_vanishing_order_of_homogeneous_profiles(k):
    assert abs(ucp.vanishing_order_fit(harmonic_power(k, 3)).order - k) <= 0.05
    assert abs(ucp.vanishing_order_fit(eigen_solution(50.0, k, 3)[0]).order - k) <= 0.05


def test_vanishing_order_of_constant_and_scaling_invariance():
    assert ucp.vanishing_order_fit(CONST).order == pytest.approx(0.0, abs=1e-12)
    u = eigen_solution(20.0, 2, 3)[0]
    v = u.with_profile(Scaled(u.profile, 7.5))
    assert ucp.vanishing_order_fit(v).order == pytest.approx(ucp.vanishing_order_fit(u).order, abs=1e-10)


def test_vanishing_order_needs_two_decades():
    with pytest.raises(ValueError):
        ucp.vanishing_order_fit(CONST, np.linspace(0.01, 0.1, 8))


def test_order_bound_check_zero_potential_harmonic():
    res = ucp.order_bound_check(harmonic_power(3, 3), ProblemParams(3, 1), PotentialNorms(), C=3.05)
    assert res.passed and res.bound == 3.05
    res = ucp.order_bound_check(harmonic_power(3, 3), ProblemParams(3, 1), PotentialNorms(), C=2.95)
    assert not res.passed


def test_order_bound_check_normalization():
    zero = ModeFunction(0, 3, PowerSum(((0.0, 0.0),)))
    with pytest.raises(ucp.NormalizationError):
        ucp.order_bound_check(zero, ProblemParams(3, 1), PotentialNorms(), C=1.0)


# --------------------------------------------------------------------------
# Caccioppoli and L-infinity
# --------------------------------------------------------------------------

def test_caccioppoli_constant_solution():
    assert ucp.caccioppoli_ratio(CONST, 1, PotentialNorms()) <= 1.0
    with pytest.raises(ValueError):
        ucp.caccioppoli_ratio(CONST, 1, PotentialNorms(), annuli=(0.5, 0.6, 0.4, 0.2))


def test_linfty_constant_and_homogeneity():
    r_a = ucp.linfty_ratio(CONST, PotentialNorms(), 0.1)
    r_b = ucp.linfty_ratio(CONST, PotentialNorms(), 0.01)
    assert r_a == pytest.approx(r_b, rel=1e-6)
    u = harmonic_power(2, 3)
    assert ucp.linfty_ratio(u, PotentialNorms(), 0.1) == pytest.approx(ucp.linfty_ratio(u, PotentialNorms(), 0.02),
                                                                      rel=1e-6)


def test_linfty_admissibility():
    assert ucp.linfty_admissible(3, 1, INF)
    assert not ucp.linfty_admissible(6, 2, Fraction(1))
    with pytest.raises(ValueError):
        ucp.linfty_check([CONST], 1, [PotentialNorms({}, 1.0, Fraction(5, 2))], 0.1)


# --------------------------------------------------------------------------
# three-ball
# --------------------------------------------------------------------------

def test_k0_reference_value():
    assert ucp.k0_compute(0.001, 0.04, 0.1) == pytest.approx(K0_REFERENCE, rel=1e-13)


@given(st.floats(-18.0, -3.3), st.floats(0.05, 0.99), st.floats(0.05, 0.99))
def test_k0_in_unit_interval_and_increasing_in_r0(a, b, c):
    r0 = math.exp(a)
    r1 = r0 + b * (0.05 - r0)
    R1 = 2 * (r1 + c * (0.12 - r1))
    k = ucp.k0_compute(r0, r1, R1)
    assert 0 < k < 1
    assert ucp.k0_compute(r0 * 0.5, r1, R1) < k


def test_k0_degenerate_radii():
    with pytest.raises(ValueError):
        ucp.k0_compute(0.04, 0.001, 0.1)
    with pytest.raises(ValueError):
        ucp.ThreeBallConfig(0.01, 0.02, 0.5)


def test_three_ball_equal_products_take_branch_two():
    cfg = ucp.ThreeBallConfig(0.001, 0.04, 0.1)
    b = ucp.three_ball_bound(2.0, 4.0, 2.0, 1.0, cfg, tau_min=1.0)
    assert b.tau1 == 0 and b.branch == 2
    assert b.value <= b.paper_branch_two


@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(0, 30), st.floats(0.0, 5.0))
def test_three_ball_bound_monotone(lu1, lu2, tmin, step):
    cfg = ucp.ThreeBallConfig(0.001, 0.04, 0.1)
    B1, B2 = 3.0, 0.5
    base = ucp.three_ball_bound(math.exp(lu1), math.exp(lu2), B1, B2, cfg, tmin).log_value
    up1 = ucp.three_ball_bound(math.exp(lu1 + step), math.exp(lu2), B1, B2, cfg, tmin).log_value
    up2 = ucp.three_ball_bound(math.exp(lu1), math.exp(lu2 + step), B1, B2, cfg, tmin).log_value
    assert up1 >= base - 1e-9 and up2 >= base - 1e-9


def test_three_ball_bound_continuous_at_switch():
    cfg = ucp.ThreeBallConfig(0.001, 0.04, 0.1)
    tmin = 5.0
    U2 = math.exp(tmin * cfg.phi_gap)  # tau1 == tmin for B1 = B2 = U1 = 1
    a = ucp.three_ball_bound(1.0, U2 * (1 + 1e-12), 1.0, 1.0, cfg, tmin)
    b = ucp.three_ball_bound(1.0, U2 * (1 - 1e-12), 1.0, 1.0, cfg, tmin)
    assert (a.branch, b.branch) == (1, 2)
    assert a.log_value == pytest.approx(b.log_value, abs=1e-9)


def test_three_ball_constant_solution_ratio():
    cfg = ucp.ThreeBallConfig.from_r(0.01)
    rep = ucp.three_ball_check([CONST], 1, ProblemParams(3, 1), [PotentialNorms()], cfg)
    assert rep.ratios[0] <= 1 / abs(math.log(cfg.r1))


def test_three_ball_single_C_for_harmonics():
    harm = [harmonic_power(k, 3) for k in range(6)]
    zero = [PotentialNorms()] * 6
    params = ProblemParams(3, 1)
    cal = ucp.three_ball_check(harm, 1, params, zero, ucp.ThreeBallConfig.from_r(0.01))
    again = ucp.three_ball_check(harm, 1, params, zero, ucp.ThreeBallConfig.from_r(0.004), C=cal.fitted_C)
    assert again.passed


# --------------------------------------------------------------------------
# propagation and scaling
# --------------------------------------------------------------------------

def test_unroll_exponents_exact():
    k0 = Fraction(3, 37)
    assert ucp.unroll_exponents(k0, 8)[-1] == k0**8


def test_propagation_single_step_is_three_ball():
    u, V0 = eigen_solution(4.0, 1, 3)
    res = ucp.propagate_smallness(u, 0.0025, 0, ProblemParams(3, 1), PotentialNorms({}, abs(V0)))
    assert res.exponents == [1.0] and res.log_prefactors == [0.0]
    assert res.holds


@pytest.mark.parametrize("d", [1, 4, 8])
def test_propagation_lower_bound_below_measurement(d):
    u, V0 = eigen_solution(4.0, 1, 3)
    res = ucp.propagate_smallness(u, 0.0025, d, ProblemParams(3, 1), PotentialNorms({}, abs(V0)))
    assert res.holds and res.links_ok
    assert res.exponents[-1] == pytest.approx(res.k0**d, rel=1e-12)


def test_scaled_norms_exponents():
    params = ProblemParams(3, 1, alpha0=1, s=Fraction(6))
    sn = ucp.scaled_norms(4.0, params, PotentialNorms({1: 2.0}, 3.0, Fraction(6)))
    assert sn.r_exponents == {0: Fraction(3, 2), 1: Fraction(1)}
    assert sn.A0 == pytest.approx(3.0 * 4.0**1.5) and sn.A_alpha[1] == pytest.approx(8.0)
    with pytest.raises(ValueError):
        ucp.scaled_norms(0.5, params, PotentialNorms())


def test_infinity_bound_baseline():
    params = ProblemParams(3, 1)
    assert ucp.infinity_bound(1.0, params, PotentialNorms({}, 1.0)).log_value == 0.0
    b = ucp.infinity_bound(8.0, params, PotentialNorms({}, 1.0))
    assert b.theta == Fraction(4, 3)
    assert b.log_value == pytest.approx(-(1 + 8.0 ** (4 / 3 * 1)) * math.log(8.0))


@pytest.mark.parametrize("params", [ProblemParams(3, 1), ProblemParams(11, 3, alpha0=4),
                                    ProblemParams(6, 2, s=Fraction(9), eps=Fraction(1, 5)),
                                    ProblemParams(5, 2, alpha0=2, s=Fraction(11, 2))])
def test_scaled_exponent_matches_theta(params):
    sn = ucp.scaled_norms(Fraction(3), params, PotentialNorms({a: 1.0 for a in range(1, params.alpha0 + 1)}, 1.0))
    assert order_bound_exponent(params, sn) == theta_infinity(params)[0]
