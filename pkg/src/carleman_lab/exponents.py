"""Exact exponent arithmetic for the vanishing-order and decay bounds.

Every exponent is a linear-fractional function of the Lebesgue exponent ``s``
of the zeroth-order potential, so all formulas are written as
``(a*s + b) / (c*s + d)`` with rational coefficients. That makes ``s = inf``
a limit (``a / c``) rather than a floating-point special case, and every
self-consistency identity holds exactly in ``Fraction`` arithmetic.

Case tags follow the relation between the dimension ``n`` and the order ``2m``:
``I`` is ``n > 4m - 2``, ``II`` is ``n = 4m - 2``, ``III`` is ``2 <= n < 4m - 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Union

Rational = Union[Fraction, float]  # float only ever holds math.inf
INF = math.inf


class AdmissibilityError(ValueError):
    """Parameters fall outside the range where the estimates are stated."""


def as_exponent(x) -> Rational:
    """Coerce user input to a Fraction, or ``math.inf`` for the infinite exponent."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        x = x.strip().lower()
        if x in {"inf", "infinity", "oo"}:
            return INF
        return Fraction(x)
    if isinstance(x, float):
        if math.isinf(x) and x > 0:
            return INF
        if not math.isfinite(x):
            raise ValueError(f"exponent must be finite or +inf, got {x}")
        return Fraction(str(x))
    return Fraction(x)


def is_inf(x) -> bool:
    return isinstance(x, float) and math.isinf(x)


def linfrac(a, b, c, d, s: Rational) -> Fraction:
    """Evaluate (a*s + b)/(c*s + d), taking the limit a/c when s is infinite."""
    if is_inf(s):
        if c == 0:
            raise ZeroDivisionError("linear-fractional limit with c = 0")
        return Fraction(a) / Fraction(c)
    den = Fraction(c) * s + d
    if den == 0:
        raise ZeroDivisionError("linear-fractional denominator vanishes")
    return (Fraction(a) * s + b) / den


def classify(n: int, m: int) -> str:
    if n < 2 or m < 1:
        raise ValueError(f"need n >= 2 and m >= 1, got n={n}, m={m}")
    if n > 4 * m - 2:
        return "I"
    if n == 4 * m - 2:
        return "II"
    return "III"


def max_alpha0(m: int) -> int:
    """Largest drift order keeping beta_alpha = (3m - 2|alpha|)/2 positive."""
    return 3 * m // 2 - 1 if m % 2 == 0 else 3 * m // 2


def s_lower_bound(n: int, m: int) -> Fraction:
    """Open lower bound on s for the case of (n, m)."""
    if classify(n, m) == "I":
        return Fraction(2 * n, 3 * m)
    return Fraction(4 * (2 * m - 1), 3 * m)


@dataclass(frozen=True)
class ProblemParams:
    n: int
    m: int
    alpha0: int = 0
    s: Rational = INF
    eps: Fraction | None = None

    def __post_init__(self):
        object.__setattr__(self, "s", as_exponent(self.s))
        if self.eps is not None:
            object.__setattr__(self, "eps", Fraction(self.eps) if not isinstance(self.eps, float) else Fraction(str(self.eps)))
        case = classify(self.n, self.m)
        if not 0 <= self.alpha0 <= max_alpha0(self.m):
            raise AdmissibilityError(f"alpha0={self.alpha0} outside [0, {max_alpha0(self.m)}] for m={self.m}")
        lo = s_lower_bound(self.n, self.m)
        if not (is_inf(self.s) or self.s > lo):
            raise AdmissibilityError(f"s={self.s} must exceed {lo} in case {case}")
        if case == "II":
            if self.eps is None or not 0 < self.eps < 1:
                raise AdmissibilityError("case II needs eps in (0, 1)")
        elif self.eps is not None:
            raise AdmissibilityError("eps is only meaningful in case II (n = 4m - 2)")

    @property
    def case(self) -> str:
        return classify(self.n, self.m)


@dataclass(frozen=True)
class PotentialNorms:
    """Bounds A_alpha >= ||V_alpha||_inf (keyed by |alpha|) and A0 >= ||V_0||_{L^s}.

    ``r_exponents`` optionally records, per key (0 for V_0), the power of a
    scaling radius R carried by each bound; it is filled by ``scaled_norms``.
    """

    A_alpha: Mapping[int, float] = field(default_factory=dict)
    A0: float = 0.0
    s: Rational = INF
    r_exponents: Mapping[int, Fraction] | None = None

    def __post_init__(self):
        object.__setattr__(self, "s", as_exponent(self.s))
        object.__setattr__(self, "A_alpha", dict(self.A_alpha))
        if self.A0 < 0 or any(v < 0 for v in self.A_alpha.values()):
            raise ValueError("potential norms must be nonnegative")
        if any(k < 1 for k in self.A_alpha):
            raise ValueError("drift orders |alpha| must be >= 1")


@dataclass(frozen=True)
class ExponentTable:
    case_tag: str
    mu: dict[int, Fraction]
    nu: Fraction
    beta_alpha: dict[int, Fraction]
    beta0: Fraction
    p: Rational
    theta: Fraction
    alpha0_threshold: Fraction


def p_star(s) -> Rational:
    """Hoelder-dual exponent 2s/(s-2) pairing V_0 in L^s with u in L^p."""
    s = as_exponent(s)
    if not is_inf(s) and s <= 2:
        raise AdmissibilityError(f"p_star needs s > 2, got {s}")
    return linfrac(2, 0, 1, -2, s)


def mu(m: int, order: int) -> Fraction:
    return Fraction(2, 3 * m - 2 * order)


def beta_alpha(m: int, order: int) -> Fraction:
    return Fraction(3 * m - 2 * order, 2)


def nu_variant(params: ProblemParams) -> Fraction:
    n, m, s = params.n, params.m, params.s
    case = params.case
    if case == "I":
        val = linfrac(2, 0, 3 * m, -2 * n, s)
    elif case == "II":
        e, q = params.eps, 2 * m - 1
        val = linfrac(2, 0, 3 * m - 2 * q * e, -4 * q + 4 * q * e, s)
    else:
        val = linfrac(2, 0, 3 * m, -4 * (2 * m - 1), s)
    if val <= 0:
        raise AdmissibilityError(f"nu-variant {val} not positive; shrink eps or raise s")
    return val


def p_upper(n: int, m: int) -> Rational:
    """Upper end of the admissible p range of the L^2 -> L^p estimate."""
    case = classify(n, m)
    if case == "I":
        return Fraction(2 * n, n - 4 * m + 2)
    return INF


def check_p(case: str, p: Rational, n: int, m: int) -> None:
    if p < 2:
        raise AdmissibilityError(f"p={p} below 2")
    if case == "I" and p > p_upper(n, m):
        raise AdmissibilityError(f"p={p} above 2n/(n-4m+2)={p_upper(n, m)} in case I")
    if case == "II" and is_inf(p):
        raise AdmissibilityError("case II needs finite p")


def beta0_variant(params: ProblemParams, p: Rational) -> Fraction:
    n, m = params.n, params.m
    case = params.case
    inv_p = Fraction(0) if is_inf(p) else 1 / Fraction(p)
    if case == "I":
        # (3mp - n(p-2)) / (2p) written in 1/p to keep p = inf well defined
        return Fraction(3 * m - n, 2) + n * inv_p
    if case == "II":
        return (4 * m - 2) * inv_p * (1 - params.eps) - Fraction(m - 2, 2)
    return (4 * m - 2) * inv_p - Fraction(m - 2, 2)


def beta0_closed_form(params: ProblemParams) -> Fraction:
    """beta_0-variant at p = p_star(s), written directly in s."""
    n, m, s = params.n, params.m, params.s
    case = params.case
    q = 2 * m - 1
    if case == "I":
        return linfrac(3 * m, -2 * n, 2, 0, s)
    if case == "II":
        e = params.eps
        return linfrac(3 * m - 2 * q * e, -4 * q + 4 * q * e, 2, 0, s)
    return linfrac(3 * m, -4 * q, 2, 0, s)


def interpolation_theta(case: str, p, n: int, m: int, p_prime=None):
    """Interpolation weights (theta, 1 - theta, eps) between the L^2 and endpoint norms."""
    p = as_exponent(p)
    if case == "I":
        top = p_upper(n, m)
        if not 2 <= p <= top:
            raise AdmissibilityError(f"p={p} outside [2, {top}]")
        theta = Fraction(2 * n - p * (n - 4 * m + 2)) / ((4 * m - 2) * p)
        rest = Fraction((p - 2) * n) / ((4 * m - 2) * p)
        return theta, rest, None
    if case == "II":
        if p_prime is None:
            raise AdmissibilityError("case II needs p_prime")
        pp = as_exponent(p_prime)
        if not (2 < p < pp) or is_inf(pp):
            raise AdmissibilityError(f"case II needs 2 < p < p' < inf, got p={p}, p'={pp}")
        theta = Fraction(2 * (pp - p)) / (p * (pp - 2))
        return theta, 1 - theta, Fraction(p - 2) / (pp - 2)
    if case == "III":
        if p < 2:
            raise AdmissibilityError(f"p={p} below 2")
        theta = Fraction(0) if is_inf(p) else Fraction(2) / p
        return theta, 1 - theta, None
    raise ValueError(f"unknown case {case!r}")


def alpha0_threshold(params: ProblemParams) -> Fraction:
    """Drift order above which the drift branch dominates the decay exponent."""
    n, m, s = params.n, params.m, params.s
    case = params.case
    q = 2 * m - 1
    if case == "I":
        return linfrac(0, n, 1, 0, s)
    if case == "II":
        e = params.eps
        return linfrac(4 * m * q * e, 8 * m * q - 3 * m * n - 8 * m * q * e,
                       m + 2 * q * e, 4 * q - 2 * n - 4 * q * e, s)
    return linfrac(0, 8 * m * q - 3 * m * n, m, 4 * q - 2 * n, s)


def theta_infinity(params: ProblemParams) -> tuple[Fraction, Fraction]:
    """Decay exponent at infinity and the alpha0 threshold separating its two branches."""
    m = params.m
    n_over_s = Fraction(0) if is_inf(params.s) else Fraction(params.n) / params.s
    candidates = [(2 * m - n_over_s) * nu_variant(params)]
    candidates += [(2 * m - a) * mu(m, a) for a in range(1, params.alpha0 + 1)]
    return max(candidates), alpha0_threshold(params)


def exponent_table(params: ProblemParams, p=None) -> ExponentTable:
    case = params.case
    p = p_star(params.s) if p is None else as_exponent(p)
    check_p(case, p, params.n, params.m)
    nu = nu_variant(params)
    b0 = beta0_variant(params, p)
    if p == p_star(params.s) and b0 <= 0:
        raise AdmissibilityError(f"beta0-variant {b0} not positive at p = p_star")
    theta, thr = theta_infinity(params)
    return ExponentTable(
        case_tag=case,
        mu={a: mu(params.m, a) for a in range(1, params.alpha0 + 1)},
        nu=nu,
        beta_alpha={a: beta_alpha(params.m, a) for a in range(0, 2 * params.m)},
        beta0=b0,
        p=p,
        theta=theta,
        alpha0_threshold=thr,
    )


def order_bound(params: ProblemParams, norms: PotentialNorms, C: float = 1.0) -> float:
    """C (1 + sum_alpha A_alpha^mu + A0^nu): vanishing-order bound and tau threshold."""
    if C <= 0:
        raise ValueError("C must be positive")
    total = 1.0
    for a, val in norms.A_alpha.items():
        if a > params.alpha0:
            raise AdmissibilityError(f"drift of order {a} exceeds alpha0={params.alpha0}")
        total += float(val) ** float(mu(params.m, a))
    total += float(norms.A0) ** float(nu_variant(params))
    return C * total


def order_bound_exponent(params: ProblemParams, norms: PotentialNorms) -> Fraction:
    """Largest power of the scaling radius among the terms of ``order_bound``."""
    if norms.r_exponents is None:
        raise ValueError("norms carry no scaling exponents; build them with scaled_norms")
    terms = [norms.r_exponents[0] * nu_variant(params)]
    terms += [norms.r_exponents[a] * mu(params.m, a) for a in range(1, params.alpha0 + 1)]
    return max(terms)
