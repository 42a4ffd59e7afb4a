import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from carleman_lab.exponents import (
    INF,
    AdmissibilityError,
    PotentialNorms,
    ProblemParams,
    as_exponent,
    beta0_closed_form,
    beta0_variant,
    check_p,
    classify,
    exponent_table,
    interpolation_theta,
    linfrac,
    max_alpha0,
    mu,
    nu_variant,
    order_bound,
    p_star,
    p_upper,
    s_lower_bound,
    theta_infinity,
)

from .frozen import NU_BASELINE, THETA_BASELINE


def test_baseline_reductions_are_exact():
    t = exponent_table(ProblemParams(3, 1))
    assert t.nu == NU_BASELINE and isinstance(t.nu, Fraction)
    assert t.theta == THETA_BASELINE
    assert t.p == 2 and t.case_tag == "I"


@pytest.mark.parametrize("n,m,case", [(3, 1, "I"), (2, 1, "II"), (6, 2, "II"), (5, 2, "III"), (7, 2, "I"), (2, 3, "III")])
def test_case_classification(n, m, case):
    assert classify(n, m) == case


def test_as_exponent_parsing():
    assert as_exponent("inf") == INF and as_exponent(math.inf) == INF
    assert as_exponent("7/2") == Fraction(7, 2)
    assert as_exponent(0.25) == Fraction(1, 4)
    with pytest.raises(ValueError):
        as_exponent(float("nan"))


def test_linfrac_limit_and_pole():
    assert linfrac(2, 0, 3, -6, INF) == Fraction(2, 3)
    with pytest.raises(ZeroDivisionError):
        linfrac(1, 0, 1, -2, Fraction(2))


def test_p_star_duality():
    assert p_star(INF) == 2
    assert p_star(Fraction(6)) == 3
    with pytest.raises(AdmissibilityError):
        p_star(2)


def test_admissibility_guards():
    with pytest.raises(AdmissibilityError):
        ProblemParams(3, 1, s=Fraction(2))  # s must exceed 2n/3m = 2
    with pytest.raises(AdmissibilityError):
        ProblemParams(2, 1, s=INF)  # case II needs eps
    with pytest.raises(AdmissibilityError):
        ProblemParams(3, 1, eps=Fraction(1, 2))
    with pytest.raises(AdmissibilityError):
        ProblemParams(3, 1, alpha0=max_alpha0(1) + 1)


def test_max_alpha0_keeps_beta_positive():
    for m in range(1, 9):
        a = max_alpha0(m)
        assert 3 * m - 2 * a > 0 >= 3 * m - 2 * (a + 1)


def test_mu_values():
    assert mu(1, 1) == 2 and mu(2, 1) == Fraction(1, 2)


case_one = st.integers(1, 4).flatmap(lambda m: st.tuples(st.integers(4 * m - 1, 4 * m + 10), st.just(m)))


@given(case_one, st.integers(1, 50), st.integers(1, 8))
def test_beta0_via_p_star_equals_closed_form(nm, num, den):
    n, m = nm
    s = s_lower_bound(n, m) + Fraction(num, den)
    params = ProblemParams(n, m, 0, s)
    p = p_star(s)
    if p > p_upper(n, m):
        with pytest.raises(AdmissibilityError):
            check_p("I", p, n, m)
        return
    via = (3 * m * p - n * (p - 2)) / (2 * p)
    assert via == beta0_closed_form(params) == beta0_variant(params, p)


@given(case_one)
def test_theta_endpoints(nm):
    n, m = nm
    assert interpolation_theta("I", 2, n, m)[0] == 1
    assert interpolation_theta("I", p_upper(n, m), n, m)[0] == 0


@given(st.integers(3, 40), st.integers(41, 400))
def test_case_two_weights_sum_to_one(p, pp):
    th, rest, eps = interpolation_theta("II", p, 6, 2, p_prime=pp)
    assert th + rest == 1 and 0 < eps < 1


def test_case_two_nu_tends_to_case_three_formula():
    s = Fraction(9)
    bar = linfrac(2, 0, 6, -12, s)
    gaps = [abs(nu_variant(ProblemParams(6, 2, 0, s, Fraction(1, 10**j))) - bar) for j in range(1, 8)]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < Fraction(1, 10**6)


def test_theta_infinity_branch_switch():
    # m = 3 allows drift up to order 4: (6 - 4) * 2/(9 - 8) = 4 beats (6) * 2/9
    params = ProblemParams(11, 3, alpha0=4)
    theta, _ = theta_infinity(params)
    assert theta == 4
    assert theta_infinity(ProblemParams(11, 3))[0] == Fraction(4, 3)


def test_order_bound_formula_and_drift_guard():
    params = ProblemParams(3, 1, alpha0=1)
    norms = PotentialNorms({1: 4.0}, 8.0)
    assert order_bound(params, norms, 2.0) == pytest.approx(2 * (1 + 16 + 4))
    with pytest.raises(AdmissibilityError):
        order_bound(ProblemParams(3, 1), norms)
    with pytest.raises(ValueError):
        PotentialNorms({0: 1.0}, 0.0)


@given(st.floats(0, 1e6), st.floats(0, 1e6))
def test_order_bound_monotone_in_potential_size(a, b):
    params = ProblemParams(3, 1)
    lo, hi = sorted((a, b))
    assert order_bound(params, PotentialNorms({}, lo)) <= order_bound(params, PotentialNorms({}, hi))


def test_case_two_rejects_infinite_p():
    with pytest.raises(AdmissibilityError):
        check_p("II", INF, 6, 2)
