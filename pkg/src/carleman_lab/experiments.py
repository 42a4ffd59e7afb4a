"""Experiment pipelines shared by the command line, the scripts and the acceptance suite.

Every pipeline takes a dataclass config and returns an ``Outcome``: CSV-ready
rows (each carrying a ``tag`` and a ``passed`` column), an overall verdict and
a one-line summary.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import carleman as cm
from .conjugation import (
    IBP_CATALOG,
    T0_CHECK,
    ConjugatedOperator,
    conjugation_residual,
    energy_context,
    energy_I_lower_bound,
    ibp_identity,
)
from .exponents import (
    INF,
    AdmissibilityError,
    PotentialNorms,
    ProblemParams,
    alpha0_threshold,
    beta0_closed_form,
    beta0_variant,
    classify,
    exponent_table,
    interpolation_theta,
    max_alpha0,
    nu_variant,
    order_bound_exponent,
    p_star,
    p_upper,
    s_lower_bound,
    theta_infinity,
)
from .polarweights import ModeFunction, RadialGrid
from .solutions import bump, bump_family, eigen_solution, harmonic_power, manufactured
from .ucp import (
    ThreeBallConfig,
    caccioppoli_check,
    infinity_bound,
    k0_compute,
    linfty_check,
    order_bound_check,
    propagate_smallness,
    scaled_exponent_terms,
    scaled_norms,
    three_ball_bound,
    three_ball_check,
    unroll_exponents,
    vanishing_order_fit,
)


@dataclass
class Outcome:
    name: str
    rows: list[dict]
    passed: bool
    summary: str
    extra: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.summary}"


def pmap(fn: Callable, items: Sequence, jobs: int = 1) -> list:
    """Ordered map; a process pool when jobs > 1."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


def geometric_taus(tau_min: float, tau_max: float, per_doubling: int = 2) -> np.ndarray:
    steps = int(round(math.log2(tau_max / tau_min) * per_doubling))
    return tau_min * 2.0 ** (np.arange(steps + 1) / per_doubling)


# --------------------------------------------------------------------------
# Configs
# --------------------------------------------------------------------------

@dataclass
class FamilyConfig:
    size: int = 12
    seed: int = 0
    center_lo: float = -14.0
    center_hi: float = -7.0
    width_lo: float = 1.5
    width_hi: float = 3.0
    eta_lo: float = 0.0
    eta_hi: float = 1.0
    ks: tuple = (0, 1, 2, 3)
    n: int = 3
    t0: float = -3.0

    def build(self):
        return bump_family(self.size, self.seed, (self.center_lo, self.center_hi), (self.width_lo, self.width_hi),
                           (self.eta_lo, self.eta_hi), tuple(self.ks), self.n, self.t0)


@dataclass
class ExponentsConfig:
    n: int = 3
    m: int = 1
    s: object = INF
    alpha0: int = 0
    eps: object = None
    p: object = None


@dataclass
class ConjugationConfig:
    family: FamilyConfig = field(default_factory=lambda: FamilyConfig(
        size=10, seed=3, center_lo=-30.0, center_hi=-10.0, width_lo=2.5, width_hi=4.0, eta_hi=1.0, t0=-5.0))
    taus: tuple = (2.0, 5.0)
    sigma1: int = 1
    sigma2: int = 2
    accuracy: int = 6
    tol: float = 1e-6


@dataclass
class IbpConfig:
    family: FamilyConfig = field(default_factory=lambda: FamilyConfig(
        size=5, seed=1, center_lo=-35.0, center_hi=-10.0, width_lo=1.0, width_hi=4.0, eta_hi=3.0, t0=-5.0))
    taus: tuple = (5.0, 20.0, 80.0)
    ks: tuple = (0, 1, 3)
    sigma1: int = 1
    sigma2: int = 2
    tol: float = 1e-6
    num: int = 6001


@dataclass
class CarlemanConfig:
    kind: str = "eq3.38"  # eq3.38 | prop1 | iterated | thm3 | thm4
    m: int = 1
    n: int = 3
    s: object = INF
    alpha0: int = 0
    eps: object = None
    p: object = None
    sigma1: int = 0
    sigma2: int = 0
    tau_min: float = 20.0
    tau_max: float = 320.0
    per_doubling: int = 2
    t0: float = T0_CHECK
    family: FamilyConfig = field(default_factory=FamilyConfig)

    def params(self) -> ProblemParams:
        return ProblemParams(self.n, self.m, self.alpha0, self.s, self.eps)

    def taus(self) -> np.ndarray:
        return geometric_taus(self.tau_min, self.tau_max, self.per_doubling)


def second_order_family(seed: int = 5) -> FamilyConfig:
    """Profiles supported in t < -30 where the coefficient bookkeeping is sharp."""
    return FamilyConfig(size=12, seed=seed, center_lo=-60.0, center_hi=-36.0, width_lo=2.0, width_hi=5.0,
                        eta_lo=0.0, eta_hi=2.0, ks=(0, 1, 2, 3), t0=-31.0)


# --------------------------------------------------------------------------
# Exponents
# --------------------------------------------------------------------------

def exponents_experiment(cfg: ExponentsConfig) -> Outcome:
    params = ProblemParams(cfg.n, cfg.m, cfg.alpha0, cfg.s, cfg.eps)
    table = exponent_table(params, cfg.p)
    tag = f"thm3.{params.case}"
    rows = [{"tag": tag, "quantity": "case", "value": params.case, "passed": True},
            {"tag": "eq1.4", "quantity": "nu", "value": table.nu, "passed": table.nu > 0},
            {"tag": tag, "quantity": "p", "value": table.p, "passed": True},
            {"tag": tag, "quantity": "beta0", "value": table.beta0, "passed": table.beta0 > 0},
            {"tag": "eq1.7", "quantity": "Theta", "value": table.theta, "passed": table.theta > 0},
            {"tag": "thm2", "quantity": "alpha0_threshold", "value": table.alpha0_threshold, "passed": True}]
    rows += [{"tag": tag, "quantity": f"mu[{a}]", "value": v, "passed": v > 0} for a, v in table.mu.items()]
    rows += [{"tag": tag, "quantity": f"beta[{a}]", "value": v, "passed": True} for a, v in table.beta_alpha.items()]
    ok = all(r["passed"] for r in rows)
    return Outcome("exponents", rows, ok, f"case {params.case}, nu = {table.nu}, Theta = {table.theta}",
                   {"table": table})


def random_params(rng: np.random.Generator, case: str | None = None, alpha0_branch: str | None = None,
                  tries: int = 500) -> ProblemParams:
    """Random admissible parameters (positive nu and beta0 at p_star)."""
    for _ in range(tries):
        c = case or ("I", "II", "III")[int(rng.integers(3))]
        m = int(rng.integers(2 if c == "III" else 1, 5))
        if c == "I":
            n = int(rng.integers(4 * m - 1, 4 * m + 12))
        elif c == "II":
            n = 4 * m - 2
        else:
            n = int(rng.integers(2, 4 * m - 2))
        lo = s_lower_bound(n, m)
        s = INF if rng.random() < 0.25 else lo + Fraction(int(rng.integers(1, 60)), int(rng.integers(1, 9)))
        eps = Fraction(int(rng.integers(1, 30)), 100) if c == "II" else None
        a0 = int(rng.integers(0, max_alpha0(m) + 1))
        try:
            params = ProblemParams(n, m, a0, s, eps)
            exponent_table(params)
        except AdmissibilityError:
            continue
        if alpha0_branch is not None:
            if (drift_branch(params) == "drift") != (alpha0_branch == "drift"):
                continue
        return params
    raise RuntimeError("could not draw admissible parameters")


def drift_branch(params: ProblemParams) -> str:
    terms = scaled_exponent_terms(params)
    top = max(terms.values())
    return "potential" if terms[0] == top else "drift"


def exponent_consistency_experiment(seed: int = 0, count: int = 100) -> Outcome:
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(count):
        params = random_params(rng, "I")
        p = p_star(params.s)
        via_p = (3 * params.m * Fraction(p) - params.n * (Fraction(p) - 2)) / (2 * Fraction(p)) \
            if p != INF else Fraction(3 * params.m - params.n, 2)
        closed = beta0_closed_form(params)
        rows.append({"tag": "thm3.I", "check": "beta0", "n": params.n, "m": params.m, "s": params.s,
                     "lhs": via_p, "rhs": closed, "passed": via_p == closed == beta0_variant(params, p)})
    for i in range(count // 4):
        params = random_params(rng, "I")
        n, m = params.n, params.m
        th_lo, _, _ = interpolation_theta("I", 2, n, m)
        th_hi, _, _ = interpolation_theta("I", p_upper(n, m), n, m)
        rows.append({"tag": "thm3.I", "check": "theta_endpoints", "n": n, "m": m, "s": "",
                     "lhs": th_lo, "rhs": th_hi, "passed": th_lo == 1 and th_hi == 0})
    m = 2
    n = 4 * m - 2
    for s in (Fraction(7), Fraction(25, 2), INF):
        bar = _nu_bar(n, m, s)
        seq = [nu_variant(ProblemParams(n, m, 0, s, Fraction(1, 10**j))) for j in range(2, 9)]
        gaps = [abs(float(v - bar)) for v in seq]
        ok = all(b <= a for a, b in zip(gaps, gaps[1:])) and gaps[-1] < 1e-6
        rows.append({"tag": "thm3.II", "check": "eps_limit", "n": n, "m": m, "s": s,
                     "lhs": seq[-1], "rhs": bar, "passed": ok})
    ok = all(r["passed"] for r in rows)
    return Outcome("exponent-consistency", rows, ok, f"{len(rows)} exact rational checks")


def _nu_bar(n: int, m: int, s) -> Fraction:
    """Case-III formula evaluated at n = 4m - 2 (the eps -> 0 limit of the case-II exponent)."""
    from .exponents import linfrac
    return linfrac(2, 0, 3 * m, -4 * (2 * m - 1), s)


def decay_scaling_experiment(seed: int = 0, count: int = 20, R: Fraction = Fraction(7, 2)) -> Outcome:
    rng = np.random.default_rng(seed)
    rows = []
    plan = [("I", "potential"), ("I", "drift"), ("II", "potential"), ("II", "drift"),
            ("III", "potential"), ("III", "drift")]
    for i in range(count):
        case, branch = plan[i % len(plan)]
        try:
            params = random_params(rng, case, branch)
        except RuntimeError:
            params = random_params(rng, case)
        norms = PotentialNorms({a: 1.0 for a in range(1, params.alpha0 + 1)}, 1.0, params.s)
        scaled = scaled_norms(R, params, norms)
        got = order_bound_exponent(params, scaled)
        theta, thr = theta_infinity(params)
        rows.append({"tag": "thm2", "case": params.case, "n": params.n, "m": params.m, "s": params.s,
                     "alpha0": params.alpha0, "eps": params.eps if params.eps is not None else "",
                     "branch": drift_branch(params), "alpha0_threshold": thr,
                     "r_exponent": got, "theta": theta, "passed": got == theta})
    branches = {r["branch"] for r in rows}
    ok = all(r["passed"] for r in rows) and branches == {"potential", "drift"}
    return Outcome("decay-scaling", rows, ok, f"{len(rows)} parameter sets, branches {sorted(branches)}")


# --------------------------------------------------------------------------
# Conjugation and IBP
# --------------------------------------------------------------------------

def _conj_member(args):
    v, tau, s1, s2, acc = args
    op = ConjugatedOperator(tau, s1, s2, v.n, v.k)
    grid = RadialGrid.uniform()
    e0 = conjugation_residual(v, op, grid, acc)
    e1 = conjugation_residual(v, op, grid.refine(), acc)
    return e0, e1


def conjugation_experiment(cfg: ConjugationConfig, jobs: int = 1) -> Outcome:
    fam = cfg.family.build()
    jobs_list = [(v, tau, cfg.sigma1, cfg.sigma2, cfg.accuracy) for v in fam for tau in cfg.taus]
    res = pmap(_conj_member, jobs_list, jobs)
    rows = []
    for (v, tau, *_), (e0, e1) in zip(jobs_list, res):
        rows.append({"tag": "eq3.4", "profile": v.profile.describe(), "k": v.k, "tau": tau,
                     "rel_err": e0, "rel_err_refined": e1, "passed": e0 <= cfg.tol and e1 < e0})
    worst = max(r["rel_err"] for r in rows)
    ok = all(r["passed"] for r in rows)
    return Outcome("conjugation", rows, ok, f"worst relative L2 error {worst:.3g} (tol {cfg.tol:g})")


def _ibp_member(args):
    v, tau, s1, s2, num = args
    op = ConjugatedOperator(tau, s1, s2, v.n, v.k)
    ctx = energy_context(v, op, num=num)
    return [ibp_identity(tag, ctx) for tag in IBP_CATALOG]


def ibp_experiment(cfg: IbpConfig, jobs: int = 1) -> Outcome:
    base = cfg.family.build()
    cases = [(ModeFunction(k, v.n, v.profile), tau)
             for v in base for k in cfg.ks for tau in cfg.taus]
    args = [(v, tau, cfg.sigma1, cfg.sigma2, cfg.num) for v, tau in cases]
    results = pmap(_ibp_member, args, jobs)
    rows = []
    for (v, tau), res in zip(cases, results):
        for r in res:
            env = r.envelope_ok
            ok = r.gap <= cfg.tol and (env is None or env)
            rows.append({"tag": "eq" + r.tag, "profile": v.profile.describe(), "k": v.k, "tau": tau,
                         "lhs": r.lhs, "rhs": r.rhs, "gap": r.gap,
                         "envelope_ok": "" if env is None else env, "passed": ok})
    worst = max(r["gap"] for r in rows)
    ok = all(r["passed"] for r in rows)
    return Outcome("ibp-verify", rows, ok,
                   f"{len(IBP_CATALOG)} identities x {len(cases)} cases, worst gap {worst:.3g}")


# --------------------------------------------------------------------------
# Carleman sweeps
# --------------------------------------------------------------------------

def report_rows(rep: cm.CheckReport) -> list[dict]:
    rows = []
    for r in rep.rows():
        r = dict(r)
        r["passed"] = rep.passed
        rows.append(r)
    return rows


def second_order_experiment(taus: Sequence[float] | None = None, family: FamilyConfig | None = None,
                            sigma1: int = 1, sigma2: int = 2, t0: float = T0_CHECK,
                            lower_bound_t: float = -70.0) -> Outcome:
    taus = geometric_taus(20.0, 320.0, 2) if taus is None else np.asarray(taus)
    fam = (family or second_order_family()).build()
    rep = cm.second_order_check(fam, taus, sigma1, sigma2, t0)
    rows = report_rows(rep)
    dbl = rep.diagnostics["max_doubling_factor"]
    ok = rep.passed and dbl < 2.0
    # pure coefficient claim, far from the origin of t where lower-order terms are negligible
    lb_rows = []
    far = bump_family(4, 11, (lower_bound_t - 30.0, lower_bound_t - 6.0), (2.0, 5.0), (0.0, 1.0),
                      (0, 1, 2, 3), 3, lower_bound_t)
    for v in far:
        for tau in (taus[0], taus[-1]):
            lb = energy_I_lower_bound(v, ConjugatedOperator(float(tau), sigma1, sigma2, v.n, v.k, t0=lower_bound_t))
            lb_rows.append({"tag": "eq3.23", "term": "I_over_main_terms", "tau": float(tau),
                            "value": lb.I / lb.main, "member": v.profile.describe(),
                            "passed": lb.holds})
    ok = ok and all(r["passed"] for r in lb_rows)
    summ = (f"C_hat={rep.fitted_C:.4g}, max doubling factor {dbl:.3f}, energy inequality "
            f"{'holds' if rep.diagnostics['energy_ok'] else 'FAILS'}, U >= 0 "
            f"{'holds' if rep.diagnostics['U_ok'] else 'FAILS'}")
    return Outcome("second-order", rows + lb_rows, ok, summ, {"report": rep})


def iterated_experiment(taus: Sequence[float] | None = None, family: FamilyConfig | None = None,
                        sigma1: int = 0, sigma2: int = 0) -> Outcome:
    taus = geometric_taus(20.0, 320.0, 2) if taus is None else np.asarray(taus)
    fam = (family or FamilyConfig(size=12, seed=7)).build()
    it = cm.iterated_carleman_check(fam, taus, sigma1, sigma2)
    rows = report_rows(it.direct)
    for i in range(it.composed.shape[0]):
        for j, tau in enumerate(it.direct.taus):
            for name, arr in (("step_a", it.step_a), ("step_b", it.step_b), ("composed_over_rhs", it.composed)):
                rows.append({"tag": "eq3.40", "member": i, "tau": float(tau), "term": name,
                             "log_value": float(np.log(arr[i, j])),
                             "passed": bool(arr[i, j] <= it.composed_fit.C_hat * 1.1) if name == "composed_over_rhs"
                             else it.passed})
    summ = (f"direct C={it.direct.fitted_C:.4g} (doubling {it.direct.diagnostics['max_doubling_factor']:.3f}), "
            f"composed C={it.composed_fit.C_hat:.4g} (tail slope {it.composed_fit.tail_slope:.3f})")
    return Outcome("iterated", rows, it.passed, summ, {"report": it})


def carleman_experiment(cfg: CarlemanConfig) -> Outcome:
    taus = cfg.taus()
    if cfg.kind == "eq3.38":
        return second_order_experiment(taus, cfg.family, cfg.sigma1, cfg.sigma2, cfg.t0)
    if cfg.kind == "iterated":
        return iterated_experiment(taus, cfg.family, cfg.sigma1, cfg.sigma2)
    fam = cfg.family.build()
    if cfg.kind == "prop1":
        rep = cm.l2_carleman_check(fam, cfg.m, cfg.sigma1, cfg.sigma2, taus)
    elif cfg.kind == "thm3":
        params = cfg.params()
        p = cfg.p if cfg.p is not None else p_star(params.s)
        rep = cm.lp_carleman_check(fam, params, p, taus)
    elif cfg.kind == "thm4":
        return absorption_experiment(taus=taus)
    else:
        raise ValueError(f"unknown carleman check kind {cfg.kind!r}")
    return Outcome(rep.tag, report_rows(rep), rep.passed, rep.describe(), {"report": rep})


def absorption_experiment(taus: Sequence[float] | None = None, center: float = -8.0, width: float = 3.0,
                          n: int = 3, m: int = 1, floor: float = 1e-6, below_factor: float = 4.0) -> Outcome:
    """Manufactured potential on one bump; threshold fitted, then checked above and a factor below."""
    taus = geometric_taus(4.0, 2048.0, 2) if taus is None else np.asarray(taus, dtype=float)
    params = ProblemParams(n, m)
    u = bump(center, width, 0.0, 0, n)
    grid = cm.carleman_grid(u.support, float(np.max(taus)))
    V = manufactured(u, m, grid, floor=floor * float(np.max(np.abs(u.values(grid.t)))))
    norms = V.norms(INF)
    probe = cm.potential_carleman_check([u], params, norms, V, taus, enforce_threshold=False, grid=grid)
    tau0 = probe.tau0_hat
    nu = float(nu_variant(params))
    C0 = tau0 * (1 - 1e-9) / (1 + norms.A0 ** nu)
    threshold = C0 * (1 + norms.A0 ** nu)
    above_taus = taus[taus >= tau0]
    above = cm.potential_carleman_check([u], params, norms, V, above_taus, C0=C0, grid=grid)
    below_tau = threshold / below_factor
    below = cm.potential_carleman_check([u], params, norms, V, [below_tau], enforce_threshold=False, grid=grid)
    free_below = cm.lp_carleman_check([u], params, exponent_table(params).p, [below_tau], grid=grid)
    refused = False
    try:
        cm.potential_carleman_check([u], params, norms, V, [below_tau], C0=C0, grid=grid)
    except cm.AbsorptionPreconditionUnmet:
        refused = True
    r_above = float(above.ratio.max())
    r_below = float(below.ratio[0])
    grows = r_below > (1 + cm.SLACK) * r_above
    bounded = above.passed
    env_rows = envelope_rows()
    rows = report_rows(above)
    rows.append({"tag": "thm4.I", "term": "ratio_below_threshold", "tau": below_tau,
                 "log_value": math.log(r_below), "passed": grows})
    rows.append({"tag": "thm4.I", "term": "ratio_below_without_potential", "tau": below_tau,
                 "log_value": math.log(float(free_below.ratio[0])), "passed": True})
    ok = bounded and grows and refused and all(r["passed"] for r in env_rows)
    summ = (f"A0={norms.A0:.3g}, nu={nu_variant(params)}, C0={C0:.3g}, threshold={threshold:.4g}; "
            f"max ratio above {r_above:.3g}, ratio at threshold/{below_factor:g} {r_below:.3g} "
            f"(without potential {float(free_below.ratio[0]):.3g}); {len(env_rows)} envelope exponents positive")
    return Outcome("absorption", rows + env_rows, ok, summ,
                   {"threshold": threshold, "C0": C0, "ratio_above": r_above, "ratio_below": r_below,
                    "probe": probe, "above": above, "refused_below": refused})


def envelope_rows(n_max: int = 40, m_max: int = 6) -> list[dict]:
    """2m + n/p - n/2 at p = 2s/(s-2) for a grid of admissible case-I (n, m, s)."""
    rows = []
    for m in range(1, m_max + 1):
        for n in range(4 * m - 1, n_max + 1):
            lo = s_lower_bound(n, m)
            for s in (lo + Fraction(1, 1000), lo + Fraction(1, 3), lo + 1, 2 * lo + 5, INF):
                if s != INF and s <= 2:
                    continue
                params = ProblemParams(n, m, 0, s)
                e = cm.envelope_exponent(params)
                rows.append({"tag": "eq2.8", "term": "envelope_exponent", "n": n, "m": m, "s": s,
                             "log_value": e, "passed": e > 0})
    return rows


# --------------------------------------------------------------------------
# Unique continuation
# --------------------------------------------------------------------------

def _order_row(args):
    kind, k, lam, n = args
    u = harmonic_power(k, n) if kind == "harmonic" else eigen_solution(lam, k, n)[0]
    return vanishing_order_fit(u).order


def vanishing_order_experiment(ks: Sequence[int] = tuple(range(7)), lam: float = 50.0, n: int = 3,
                               tol: float = 0.05, families=("harmonic", "eigen"), jobs: int = 1) -> Outcome:
    args = [(fam, k, lam, n) for fam in families for k in ks]
    orders = pmap(_order_row, args, jobs)
    rows = [{"tag": "vanishing_order", "family": fam, "lambda_or_k": k if fam == "harmonic" else lam, "k": k,
             "measured_order": o, "bound": k, "C_fit": "", "passed": abs(o - k) <= tol}
            for (fam, k, _, _), o in zip(args, orders)]
    worst = max(abs(r["measured_order"] - r["k"]) for r in rows)
    return Outcome("vanishing-order", rows, all(r["passed"] for r in rows), f"worst |order - k| = {worst:.2e}")


def fit_order_constant(order: float, A: float, nu: float) -> float:
    """Smallest C with order <= C (1 + A^nu), rounded up by one ulp."""
    return math.nextafter(order / (1 + A**nu), math.inf)


def eigen_order_experiment(ms=(1, 2), lams=(16, 64, 256, 1024), n: int = 3) -> Outcome:
    rows = []
    ok = True
    for m in ms:
        params = ProblemParams(n, m)
        nu = float(nu_variant(params))
        C = None
        for lam in lams:
            k = math.isqrt(lam)
            u, V0 = eigen_solution(float(lam), k, n, m)
            norms = PotentialNorms({}, abs(V0))
            if C is None:
                C = fit_order_constant(vanishing_order_fit(u).order, abs(V0), nu)
            res = order_bound_check(u, params, norms, C)
            rows.append({"tag": f"thm1.{params.case}", "family": f"eigen_m{m}", "lambda_or_k": lam, "k": k,
                         "measured_order": res.measured, "bound": res.bound, "C_fit": C, "passed": res.passed})
            ok = ok and res.passed
    return Outcome("eigen-order", rows, ok, f"{len(rows)} (m, lambda) pairs, one C per m fitted at lambda={lams[0]}")


def caccioppoli_experiment(lams=(4.0, 16.0, 64.0, 256.0), ks=(0, 1, 2), m: int = 1, n: int = 3) -> Outcome:
    harm = [harmonic_power(k, n) for k in range(6)]
    cal = caccioppoli_check(harm, m, [PotentialNorms()] * len(harm))
    eig = [eigen_solution(l, k, n, m)[0] for l in lams for k in ks]
    nms = [PotentialNorms({}, float(l) ** m) for l in lams for k in ks]
    val = caccioppoli_check(eig, m, nms, C=cal.fitted_C)
    rows = [{"tag": "eq4.1", "family": "harmonic", "case": d, "ratio": r, "C_fit": cal.fitted_C, "passed": True}
            for d, r in zip(cal.labels, cal.ratios)]
    rows += [{"tag": "eq4.1", "family": "eigen", "case": d, "ratio": r, "C_fit": cal.fitted_C,
              "passed": bool(r <= cal.fitted_C * 1.1)} for d, r in zip(val.labels, val.ratios)]
    lin_h = linfty_check(harm, m, [PotentialNorms()] * len(harm), 0.1)
    lin_e = linfty_check(eig, m, nms, 0.1, C=lin_h.fitted_C)
    rows += [{"tag": "eq4.14", "family": "harmonic", "case": d, "ratio": r, "C_fit": lin_h.fitted_C, "passed": True}
             for d, r in zip(lin_h.labels, lin_h.ratios)]
    rows += [{"tag": "eq4.14", "family": "eigen", "case": d, "ratio": r, "C_fit": lin_h.fitted_C,
              "passed": bool(r <= lin_h.fitted_C * 1.1)} for d, r in zip(lin_e.labels, lin_e.ratios)]
    ok = val.passed and lin_e.passed
    return Outcome("caccioppoli", rows, ok, f"Caccioppoli C={cal.fitted_C:.4g}, L-infinity C={lin_h.fitted_C:.4g}")


def three_ball_experiment(seed: int = 0, triples: int = 1000, calib_r: float = 0.01,
                          radii=(0.002, 0.005, 0.01), lams=(4.0, 16.0, 64.0, 256.0), n: int = 3,
                          m: int = 1) -> Outcome:
    rng = np.random.default_rng(seed)
    rows = []
    # k0 on random triples r0 < r1 < R1/2 < e^-2
    bad = 0
    for _ in range(triples):
        a, b, c = np.sort(rng.uniform(math.log(1e-8), -2.0 - 1e-6, 3))
        r0, r1, R1 = math.exp(a), math.exp(b), 2 * math.exp(c)
        if not r0 < r1 < R1 / 2:
            continue
        k0 = k0_compute(r0, r1, R1)
        bad += not 0 < k0 < 1
    rows.append({"tag": "lemma4.k0", "check": "k0_in_unit_interval", "value": triples - bad, "passed": bad == 0})
    # 1/k0 against log(1/r0) over three decades
    r0s = np.logspace(-10, -13, 7)
    q = np.array([1 / k0_compute(r, 0.04, 0.1) / math.log(1 / r) for r in r0s])
    spread = float(q.max() / q.min())
    rows.append({"tag": "lemma4.k0", "check": "inv_k0_over_log_r0_spread", "value": spread, "passed": spread <= 1.1})
    # branch logic
    cfg = ThreeBallConfig(0.001, 0.04, 0.1)
    branch_ok = True
    for _ in range(1000):
        U1, U2, B1, B2 = np.exp(rng.uniform(-20, 20, 4))
        tmin = float(rng.uniform(0, 20))
        b = three_ball_bound(U1, U2, B1, B2, cfg, tmin)
        branch_ok &= (b.branch == 2) == (b.tau1 < tmin)
    rows.append({"tag": "eq4.35", "check": "branch_two_iff_tau1_below_threshold", "value": 1000, "passed": branch_ok})
    # three-ball inequality: C fitted on harmonics at the calibration radius, reused everywhere
    params = ProblemParams(n, m)
    harm = [harmonic_power(k, n) for k in range(6)]
    zero = [PotentialNorms()] * len(harm)
    cal = three_ball_check(harm, m, params, zero, ThreeBallConfig.from_r(calib_r))
    C = cal.fitted_C
    eig = [eigen_solution(l, k, n, m)[0] for l in lams for k in (0, 1, 2)]
    enorms = [PotentialNorms({}, float(l) ** m) for l in lams for k in (0, 1, 2)]
    all_ok = True
    for r in radii:
        cfg_r = ThreeBallConfig.from_r(r)
        for fam, nm, label in ((harm, zero, "harmonic"), (eig, enorms, "eigen")):
            rep = three_ball_check(fam, m, params, nm, cfg_r, C=C)
            all_ok &= rep.passed
            for d, ratio in zip(rep.labels, rep.ratios):
                rows.append({"tag": rep.tag, "check": f"{label}@r={r:g}", "value": ratio, "C_fit": C,
                             "passed": bool(ratio <= C * 1.1)})
    ok = bad == 0 and spread <= 1.1 and branch_ok and all_ok
    return Outcome("three-ball", rows, ok,
                   f"k0 in (0,1) on {triples} triples, 1/k0/log(1/r0) spread {spread:.3f}, "
                   f"branch logic {'ok' if branch_ok else 'WRONG'}, fitted C={C:.4g}")


def propagation_experiment(dmax: int = 8, r: float = 0.0025, lam: float = 4.0, k: int = 1, n: int = 3) -> Outcome:
    rows = []
    k0 = Fraction(k0_compute(r / 2, 4 * r, 10 * r))
    sym_ok = True
    for d in range(dmax + 1):
        e = unroll_exponents(k0, d)[-1]
        good = e == k0**d
        sym_ok &= good
        rows.append({"tag": "thm1.propagation", "check": f"exponent_d{d}", "value": float(e), "passed": good})
    params = ProblemParams(n, 1)
    u, V0 = eigen_solution(lam, k, n)
    norms = PotentialNorms({}, abs(V0))
    num_ok = True
    for d in range(dmax + 1):
        pr = propagate_smallness(u, r, d, params, norms)
        num_ok &= pr.holds and pr.links_ok
        rows.append({"tag": "thm1.propagation", "check": f"lower_bound_d{d}", "value": pr.log_delta_lb,
                     "measured": pr.log_delta_measured, "links_ok": pr.links_ok, "passed": pr.holds and pr.links_ok})
    return Outcome("propagation", rows, sym_ok and num_ok,
                   f"k0 = {float(k0):.6f}; exponent k0^d exact for d <= {dmax}; lower bound below measured sup")


def infinity_experiment(params: ProblemParams | None = None, radii=(1.0, 2.0, 4.0, 8.0, 16.0)) -> Outcome:
    params = params or ProblemParams(3, 1)
    norms = PotentialNorms({a: 1.0 for a in range(1, params.alpha0 + 1)}, 1.0, params.s)
    rows = []
    for R in radii:
        b = infinity_bound(R, params, norms)
        rows.append({"tag": "eq1.7", "R": R, "log_M_lower": b.log_value, "theta": b.theta,
                     "passed": (R == 1.0 and b.log_value == 0.0) or R > 1.0})
    got = order_bound_exponent(params, scaled_norms(2.0, params, norms))
    rows.append({"tag": "thm2", "R": "", "log_M_lower": "", "theta": got,
                 "passed": got == theta_infinity(params)[0]})
    return Outcome("infinity", rows, all(r["passed"] for r in rows), f"Theta = {theta_infinity(params)[0]}")
