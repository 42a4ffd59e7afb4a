"""Quantitative unique continuation: sup norms, vanishing order, three-ball bounds, propagation.

Sup norms use the convention sup|Y_k| = 1 on the sphere, so for u = f Y_k the
ball sup is sup_{r' <= r} |f(r')|. L2 norms use the normalized angular measure
(integral of |Y_k|^2 equal to 1); the two conventions differ by a k-dependent
geometric factor that only moves fitted constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .exponents import (
    PotentialNorms,
    ProblemParams,
    as_exponent,
    is_inf,
    mu,
    nu_variant,
    order_bound,
    theta_infinity,
)
from .polarweights import ModeFunction, phi, safe_log_abs

T_FLOOR = -60.0
T_CEIL = 3.0
SUP_POINTS = 24001
PHI_MONOTONE_LIMIT = math.exp(-2.0)  # phi increases on (0, e^-2)

_SUP_GRID = np.linspace(T_FLOOR, T_CEIL, SUP_POINTS)


class NormalizationError(ValueError):
    """Solution violates the sup-norm normalization required by the bound."""


# --------------------------------------------------------------------------
# Sup norms and vanishing order
# --------------------------------------------------------------------------

def _check_radius(r: float) -> float:
    if not (math.exp(T_FLOOR) < r <= math.exp(T_CEIL)):
        raise ValueError(f"radius {r:g} outside the supported range [e^{T_FLOOR:g}, e^{T_CEIL:g}]")
    return math.log(r)


def log_sup_ball(u: ModeFunction, r: float) -> float:
    """log sup_{|x| <= r} |u| on a fixed global grid plus the endpoint (hence exactly monotone in r)."""
    tr = _check_radius(r)
    t = np.append(_SUP_GRID[_SUP_GRID < tr], tr)
    la = safe_log_abs(u.values(t))
    la = la[np.isfinite(la)]
    return float(la.max()) if la.size else -math.inf


def sup_ball(u: ModeFunction, r: float) -> float:
    return math.exp(log_sup_ball(u, r))


def sup_shell(u: ModeFunction, a: float, b: float, num: int = 2001) -> float:
    """sup of |f| over a <= r <= b: an upper bound for the sup over any ball inside that shell."""
    lo = math.log(max(a, math.exp(T_FLOOR)))
    t = np.linspace(lo, math.log(b), num)
    return float(np.max(np.abs(u.values(t))))


def sup_ray_segment(u: ModeFunction, a: float, b: float, num: int = 2001) -> float:
    """sup of |f| on the segment [a, b] of the ray where |Y_k| = 1: a lower bound for any ball containing it."""
    return sup_shell(u, a, b, num)


DEFAULT_RADII = np.logspace(-6, -3, 12)


@dataclass(frozen=True)
class OrderFit:
    order: float
    rounded: int
    radii: np.ndarray
    log_sups: np.ndarray
    residual: float


def vanishing_order_fit(u: ModeFunction, radii: Sequence[float] = DEFAULT_RADII, window: int = 6) -> OrderFit:
    """Least-squares slope of log sup_ball against log r over the smallest radii."""
    radii = np.sort(np.asarray(radii, dtype=float))
    if radii.size < 6 or radii[-1] / radii[0] < 100 * (1 - 1e-9):
        raise ValueError("need at least 6 radii spanning 2 decades")
    window = max(window, 6)
    use = radii[:window]
    if use[-1] / use[0] < 100 * (1 - 1e-9):
        use = radii
    logs = np.array([log_sup_ball(u, r) for r in use])
    if np.any(~np.isfinite(logs)):
        raise ValueError("sup vanishes at some radius: order exceeds the window resolution")
    x = np.log(use)
    slope, icpt = np.polyfit(x, logs, 1)
    res = float(np.max(np.abs(logs - (slope * x + icpt))))
    return OrderFit(float(slope), int(round(slope)), use, logs, res)


@dataclass
class OrderBoundResult:
    tag: str
    measured: float
    bound: float
    c_fit: float
    passed: bool
    metadata: dict = field(default_factory=dict)


def order_bound_check(u: ModeFunction, params: ProblemParams, norms: PotentialNorms, C: float,
                      radii: Sequence[float] = DEFAULT_RADII, normalize_radius: float = 1.0) -> OrderBoundResult:
    """measured order <= C(1 + sum A^mu + A0^nu), plus sup_ball(u, r) >= c r^bound with fitted c > 0."""
    if sup_ball(u, normalize_radius) <= 0:
        raise NormalizationError("u vanishes on the unit ball")
    fit = vanishing_order_fit(u, radii)
    bound = order_bound(params, norms, C)
    scale = log_sup_ball(u, normalize_radius)
    logc = min(ls - scale - bound * math.log(r) for r, ls in zip(fit.radii, fit.log_sups))
    ok = fit.order <= bound and math.isfinite(logc)
    return OrderBoundResult(f"thm1.{params.case}", fit.order, bound, math.exp(logc) if logc > -700 else 0.0,
                            bool(ok), {"C": C, "A0": norms.A0, "log_c": logc})


# --------------------------------------------------------------------------
# Caccioppoli and L-infinity bounds
# --------------------------------------------------------------------------

def _log_ball_l2(u: ModeFunction, a: float, b: float, num: int = 6001, max_order: int = 0) -> np.ndarray:
    """log of the frame surrogate sum over |alpha| = l of ||r^l D^alpha u||_{L2(a<|x|<b, dx)}, l = 0..max_order."""
    lo = math.log(a) if a > 0 else math.log(b) - 40.0
    t = np.linspace(lo, math.log(b), num)
    q = np.full(num, t[1] - t[0])
    q[0] = q[-1] = q[0] / 2
    d = u.derivs(t, max_order)
    sq = [logsumexp(2 * safe_log_abs(d[j]) + u.n * t, b=q) for j in range(max_order + 1)]
    lam = float(u.lam)
    out = np.empty(max_order + 1)
    for l in range(max_order + 1):
        parts = [sq[j] + ((l - j) * math.log(lam) if l > j else 0.0) for j in range(l + 1) if l == j or lam > 0]
        out[l] = 0.5 * logsumexp(parts)
    return out


def potential_beta(norms: PotentialNorms, C: float = 1.0) -> float:
    return C * (1.0 + sum(norms.A_alpha.values()) + norms.A0)


@dataclass
class RatioReport:
    tag: str
    ratios: np.ndarray
    labels: list
    fitted_C: float
    passed: bool
    metadata: dict = field(default_factory=dict)

    def summary(self) -> str:
        state = "PASS" if self.passed else "FAIL"
        return f"[{state}] {self.tag}: fitted C = {self.fitted_C:.4g} over {len(self.ratios)} cases"


def caccioppoli_ratio(u: ModeFunction, m: int, norms: PotentialNorms, annuli=(0.8, 0.6, 0.4, 0.2),
                      R: float = 1.0) -> float:
    c1, c2, c3, c4 = annuli
    if not 0 < c4 < c3 < c2 < c1:
        raise ValueError("annuli must satisfy 0 < c4 < c3 < c2 < c1")
    lhs = logsumexp(_log_ball_l2(u, c3 * R, c2 * R, max_order=2 * m - 1))
    rhs = (2 * m - 1) * math.log(potential_beta(norms)) + _log_ball_l2(u, c4 * R, c1 * R)[0]
    return math.exp(lhs - rhs)


def caccioppoli_check(family: Sequence[ModeFunction], m: int, norms_list: Sequence[PotentialNorms],
                      annuli=(0.8, 0.6, 0.4, 0.2), R: float = 1.0, C: float | None = None,
                      slack: float = 0.1) -> RatioReport:
    ratios = np.array([caccioppoli_ratio(u, m, nm, annuli, R) for u, nm in zip(family, norms_list)])
    C_fit = float(ratios.max()) if C is None else C
    ok = bool(np.all(ratios <= C_fit * (1 + slack)))
    return RatioReport("lemma1.caccioppoli", ratios, [u.profile.describe() for u in family], C_fit, ok,
                       {"annuli": annuli, "R": R, "m": m})


def linfty_admissible(n: int, m: int, s) -> bool:
    """s/(2ms - n) <= 1, i.e. s >= n/(2m - 1)."""
    s = as_exponent(s)
    return True if is_inf(s) else s >= Fraction(n, 2 * m - 1)


def linfty_ratio(u: ModeFunction, norms: PotentialNorms, r: float) -> float:
    """sup_{B_r}|u| / ((sum A + A0 + 1)^{n/2} r^{-n/2} ||u||_{L2(B_2r)})."""
    n = u.n
    lhs = log_sup_ball(u, r)
    rhs = n / 2 * math.log(potential_beta(norms)) - n / 2 * math.log(r) + _log_ball_l2(u, 0.0, 2 * r)[0]
    return math.exp(lhs - rhs)


def linfty_check(family: Sequence[ModeFunction], m: int, norms_list: Sequence[PotentialNorms], r: float,
                 C: float | None = None, slack: float = 0.1) -> RatioReport:
    for nm, u in zip(norms_list, family):
        if not linfty_admissible(u.n, m, nm.s):
            raise ValueError(f"s = {nm.s} < n/(2m-1): L-infinity bound not available")
    ratios = np.array([linfty_ratio(u, nm, r) for u, nm in zip(family, norms_list)])
    C_fit = float(ratios.max()) if C is None else C
    ok = bool(np.all(ratios <= C_fit * (1 + slack)))
    return RatioReport("lemma3.linfty", ratios, [u.profile.describe() for u in family], C_fit, ok, {"r": r})


# --------------------------------------------------------------------------
# Three-ball inequality
# --------------------------------------------------------------------------

def k0_compute(r0: float, r1: float, R1: float) -> float:
    """(phi(R1/2) - phi(r1)) / (phi(R1/2) - phi(r0))."""
    if not 0 < r0 < r1 < R1 / 2 < PHI_MONOTONE_LIMIT:
        raise ValueError("need 0 < r0 < r1 < R1/2 < e^-2 (phi is increasing there)")
    top = phi(R1 / 2)
    return (top - phi(r1)) / (top - phi(r0))


@dataclass(frozen=True)
class ThreeBallConfig:
    r0: float
    r1: float
    R1: float
    R0: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if not 0 < self.r0 < self.r1 < self.R1 < self.R0 <= 1:
            raise ValueError("need 0 < r0 < r1 < R1 < R0 <= 1")
        k0_compute(self.r0, self.r1, self.R1)

    @property
    def k0(self) -> float:
        return k0_compute(self.r0, self.r1, self.R1)

    @property
    def phi_gap(self) -> float:
        """phi(R1/2) - phi(r0)."""
        return phi(self.R1 / 2) - phi(self.r0)

    @classmethod
    def from_r(cls, r: float, **kw) -> "ThreeBallConfig":
        """Radii map r0 = r/2, r1 = 4r, R1 = 10r."""
        return cls(r / 2, 4 * r, 10 * r, **kw)


@dataclass(frozen=True)
class ThreeBallBound:
    value: float
    branch: int
    tau1: float
    k0: float
    log_value: float
    paper_branch_two: float  # looser branch-two form with phi(R1/2) in the exponent


def three_ball_bound(U1: float, U2: float, B1: float, B2: float, cfg: ThreeBallConfig,
                     tau_min: float) -> ThreeBallBound:
    """Optimize ||u||_{B_r1} <= B1 e^{tau(phi(r1)-phi(r0))} U1 + B2 e^{tau(phi(r1)-phi(R1/2))} U2 over tau >= tau_min.

    tau1 balances the two terms. Branch one (tau1 >= tau_min) gives
    2 (B1 U1)^k0 (B2 U2)^(1-k0). Branch two evaluates at tau_min, where the
    second term is dominated by the first, giving 2 B1 e^{tau_min(phi(r1)-phi(r0))} U1.
    The two forms agree at the switch, so the bound is continuous and monotone.
    """
    if min(U1, U2, B1, B2) <= 0:
        raise ValueError("U1, U2, B1, B2 must be positive")
    k0 = cfg.k0
    gap = cfg.phi_gap
    inner = phi(cfg.r1) - phi(cfg.r0)
    tau1 = (math.log(B2 * U2) - math.log(B1 * U1)) / gap
    if tau1 >= tau_min:
        logv = math.log(2) + k0 * math.log(B1 * U1) + (1 - k0) * math.log(B2 * U2)
        branch = 1
    else:
        logv = math.log(2) + math.log(B1 * U1) + tau_min * inner
        branch = 2
    loose = math.log(2) + math.log(B1 * U1) + tau_min * gap
    return ThreeBallBound(_exp(logv), branch, tau1, k0, logv, _exp(loose))


def _exp(x: float) -> float:
    return math.exp(x) if x < 709 else math.inf


def three_ball_log_terms(u: ModeFunction, m: int, params: ProblemParams, norms: PotentialNorms,
                         cfg: ThreeBallConfig, C_exp: float = 1.0) -> dict:
    """log LHS and log of the two right-hand terms (without the overall constant)."""
    n = u.n
    beta = potential_beta(norms, cfg.beta)
    logU1 = log_sup_ball(u, 2 * cfg.r0)
    logU2 = log_sup_ball(u, cfg.R1)
    lhs = log_sup_ball(u, 0.75 * cfg.r1)
    k0 = cfg.k0
    t1 = (2 * m + n / 2) * math.log(beta) + m * math.log(abs(math.log(cfg.r1))) + k0 * logU1 + (1 - k0) * logU2
    expo = order_bound(params, norms, C_exp) * cfg.phi_gap
    t2 = n / 2 * math.log(beta) + n / 2 * math.log(cfg.R1 / cfg.r1) + expo + logU1
    return {"lhs": lhs, "term1": t1, "term2": t2, "U1": logU1, "U2": logU2, "rhs": float(np.logaddexp(t1, t2))}


def three_ball_check(family: Sequence[ModeFunction], m: int, params: ProblemParams,
                     norms_list: Sequence[PotentialNorms], cfg: ThreeBallConfig, C: float | None = None,
                     C_exp: float = 1.0, slack: float = 0.1) -> RatioReport:
    """Ratio LHS / RHS(C = 1) per member; with C given, passes iff every ratio <= C(1 + slack)."""
    ratios = []
    for u, nm in zip(family, norms_list):
        d = three_ball_log_terms(u, m, params, nm, cfg, C_exp)
        ratios.append(math.exp(d["lhs"] - d["rhs"]))
    ratios = np.array(ratios)
    C_fit = float(ratios.max()) if C is None else C
    ok = bool(np.all(ratios <= C_fit * (1 + slack)))
    return RatioReport(f"eq4.25.{params.case}", ratios, [u.profile.describe() for u in family], C_fit, ok,
                       {"r0": cfg.r0, "r1": cfg.r1, "R1": cfg.R1, "k0": cfg.k0, "C_exp": C_exp})


# --------------------------------------------------------------------------
# Propagation of smallness
# --------------------------------------------------------------------------

def unroll_exponents(k0: Fraction | float, d: int) -> list:
    """delta exponents along a chain: e_0 = 1, e_{i+1} = k0 e_i (exact for Fraction input)."""
    e = [Fraction(1) if isinstance(k0, Fraction) else 1.0]
    for _ in range(d):
        e.append(e[-1] * k0)
    return e


@dataclass
class PropagationResult:
    d: int
    k0: float
    exponents: list
    log_prefactors: list  # log A_i with bound_i = A_i delta^{e_i}
    log_delta_lb: float
    log_delta_measured: float
    links_ok: bool
    C_hat: float
    metadata: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.log_delta_lb <= self.log_delta_measured


def propagate_smallness(u: ModeFunction, r: float, d: int, params: ProblemParams, norms: PotentialNorms,
                        C: float = 1.0, C_exp: float = 1.0, m: int | None = None) -> PropagationResult:
    """Unroll the three-ball step along the chain x_i = i r (1 - 1e-9) e on a ray.

    Each step is sup_{B_r(x_{i+1})} <= sup_{B_3r(x_i)} <= K delta_i^{k0} + E delta_i with
    K = C beta^{(4m+n)/2} |log r|^m C_hat^{1-k0} and E = C exp(C_exp (1 + A^nu) (phi(5r) - phi(r/2))).
    Writing bound_i = A_i delta^{e_i} gives A_{i+1} = K A_i^{k0} + E A_i and e_{i+1} = k0 e_i
    (using delta <= 1). The normalization |u(x_bar)| >= 1 with x_bar in B_r(x_d) then gives
    delta >= A_d^{-1/e_d}.
    """
    m = params.m if m is None else m
    n = u.n
    if d < 0:
        raise ValueError("chain length must be nonnegative")
    step = r * (1 - 1e-9)
    reach = d * step + r
    if sup_ball(u, reach) <= 0:
        raise NormalizationError("u vanishes on the chain")
    # normalize so the sup over the last ball (on the ray) is 1
    target = sup_ray_segment(u, max(d * step - r, 0.0), d * step + r)
    if target <= 0:
        raise NormalizationError("u vanishes near the chain end")
    log_norm = -math.log(target)
    C_hat = sup_ball(u, reach + 10 * r) * math.exp(log_norm)
    k0 = k0_compute(r / 2, 4 * r, 10 * r)
    beta = potential_beta(norms)
    logK = math.log(C) + (4 * m + n) / 2 * math.log(beta) + m * math.log(abs(math.log(r))) \
        + (1 - k0) * math.log(max(C_hat, 1e-300))
    logE = math.log(C) + order_bound(params, norms, C_exp) * (phi(5 * r) - phi(r / 2))
    logA = [0.0]
    for _ in range(d):
        logA.append(float(np.logaddexp(logK + k0 * logA[-1], logE + logA[-1])))
    exps = unroll_exponents(k0, d)
    log_lb = -logA[-1] / exps[-1]
    measured = log_sup_ball(u, r) + log_norm
    # links: sup over B_3r(x_i) (shell upper bound) against the step bound with ray lower bounds
    links_ok = True
    for i in range(d):
        x = i * step
        big = math.log(sup_shell(u, max(x - 3 * r, 0.0), x + 3 * r)) + log_norm
        small = math.log(max(sup_ray_segment(u, max(x - r, 0.0), x + r), 1e-300)) + log_norm
        if big > float(np.logaddexp(logK + k0 * small, logE + small)) + 1e-12:
            links_ok = False
    return PropagationResult(d, k0, exps, logA, log_lb, measured, links_ok, C_hat,
                             {"r": r, "C": C, "C_exp": C_exp})


# --------------------------------------------------------------------------
# Decay at infinity by scaling
# --------------------------------------------------------------------------

def scaled_norms(R: float | Fraction, params: ProblemParams, norms: PotentialNorms) -> PotentialNorms:
    """Norms of the rescaled potentials V(x0 + R x) R^{2m-...}: A0 R^{2m-n/s}, A_a R^{2m-a}."""
    if R < 1:
        raise ValueError("scaling radius must be >= 1")
    m, n = params.m, params.n
    n_over_s = Fraction(0) if is_inf(params.s) else Fraction(n) / params.s
    r_exp = {0: 2 * m - n_over_s}
    A_alpha = {}
    for a in range(1, params.alpha0 + 1):
        r_exp[a] = Fraction(2 * m - a)
        A_alpha[a] = float(norms.A_alpha.get(a, 0.0)) * float(R) ** float(r_exp[a])
    A0 = float(norms.A0) * float(R) ** float(r_exp[0])
    return PotentialNorms(A_alpha, A0, params.s, r_exp)


@dataclass(frozen=True)
class InfinityBound:
    log_value: float
    theta: Fraction
    order: float


def infinity_bound(R: float, params: ProblemParams, norms: PotentialNorms, C: float = 1.0,
                   c: float = 1.0) -> InfinityBound:
    """M(R) >= c exp(-order_bound(scaled_norms(R)) log R), which grows like R^Theta log R."""
    scaled = scaled_norms(R, params, norms)
    order = order_bound(params, scaled, C)
    theta, _ = theta_infinity(params)
    return InfinityBound(math.log(c) - order * math.log(R), theta, order)


def scaled_exponent_terms(params: ProblemParams) -> dict:
    """R-exponent of each order_bound term: (2m - n/s) nu and (2m - a) mu(a)."""
    m, n = params.m, params.n
    n_over_s = Fraction(0) if is_inf(params.s) else Fraction(n) / params.s
    out = {0: (2 * m - n_over_s) * nu_variant(params)}
    for a in range(1, params.alpha0 + 1):
        out[a] = (2 * m - a) * mu(m, a)
    return out
