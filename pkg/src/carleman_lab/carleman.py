"""Carleman inequality checkers with empirical constant and threshold fitting.

Left-hand sides use the (t, mode) frame: the x-frame quantity
sum_{|alpha| = l} r^{|alpha|} |D^alpha u| for u = f Y_k is replaced by

    N_l^2 = sum_{j <= l} lam^(l - j) int W^2 |f^(j)|^2 dt,   lam = k(k+n-2),

i.e. l derivatives split between d/dt and the angular operator. Frame
equivalence constants are absorbed into the fitted C. All norms are carried
as logarithms because exp(-tau phi) spans hundreds of orders of magnitude.

A finite family can only falsify an inequality, never certify it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.special import logsumexp

from .conjugation import ConjugatedOperator, combined_terms, energy_context, T0_CHECK
from .exponents import (
    AdmissibilityError,
    PotentialNorms,
    ProblemParams,
    beta0_variant,
    check_p,
    exponent_table,
    is_inf,
    order_bound,
    p_star,
)
from .polarweights import (
    R0_DEFAULT,
    ModeFunction,
    PowerSum,
    Product,
    RadialGrid,
    apply_laplacian_mode,
    log_lp_norm,
    phi_t,
    polyharmonic_symbol,
    safe_log_abs,
)

SLACK = 0.10
IMAGE_RTOL = 1e-12


class PreconditionViolation(ValueError):
    """The inequality cannot be meaningfully tested on this input."""


class AbsorptionPreconditionUnmet(PreconditionViolation):
    """tau sweep starts below the potential-absorption threshold."""


class VacuousInequality(PreconditionViolation):
    """Right side vanishes while the left side does not (u solves the equation exactly)."""


# --------------------------------------------------------------------------
# Fitting
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FitResult:
    C_hat: float
    tau0_hat: float
    tail_slope: float
    failure: bool
    reason: str
    max_doubling_factor: float


def doubling_factors(taus: np.ndarray, values: np.ndarray) -> np.ndarray:
    """max(v(2 tau)/v(tau), v(tau)/v(2 tau)) for every sample with 2 tau in range (log-linear interpolation)."""
    lt, lv = np.log(taus), np.log(values)
    out = []
    for i, t in enumerate(taus):
        if 2 * t <= taus[-1] * (1 + 1e-12):
            other = np.interp(math.log(2 * t), lt, lv)
            out.append(math.exp(abs(other - lv[i])))
    return np.array(out)


def fit_constant_and_tau0(taus: Sequence[float], ratios: Sequence[float], slack: float = SLACK,
                          max_slope: float = 0.1) -> FitResult:
    """Fit the constant and the threshold after which a ratio sequence stabilizes.

    The stable tail is the upper half of the sweep in log tau. C_hat is the
    largest ratio at or beyond tau0_hat, the smallest tau after which every
    ratio stays within ``slack`` of the tail maximum. A tail that keeps
    growing (log-log slope above ``max_slope``) is an estimate failure.
    """
    taus = np.asarray(taus, dtype=float)
    ratios = np.asarray(ratios, dtype=float)
    order = np.argsort(taus)
    taus, ratios = taus[order], ratios[order]
    if taus.size < 8 or taus[-1] / taus[0] < 8 * (1 - 1e-9):
        raise ValueError("need at least 8 tau samples spanning 3 doublings")
    if np.any(~np.isfinite(ratios)) or np.any(ratios < 0):
        return FitResult(math.inf, math.nan, math.nan, True, "non-finite ratio", math.inf)
    mid = 0.5 * (math.log(taus[0]) + math.log(taus[-1]))
    tail = np.log(taus) >= mid - 1e-12
    if tail.sum() < 3:
        tail[-3:] = True
    tail_max = float(ratios[tail].max())
    ok = ratios <= (1 + slack) * tail_max
    # first index after which every sample is ok
    bad = np.nonzero(~ok)[0]
    start = 0 if bad.size == 0 else int(bad[-1]) + 1
    tau0 = float(taus[start])
    C_hat = float(ratios[start:].max())
    lt, lr = np.log(taus[tail]), np.log(np.maximum(ratios[tail], 1e-300))
    slope = float(np.polyfit(lt, lr, 1)[0])
    failure, reason = False, "stable"
    if slope > max_slope:
        failure, reason = True, f"ratio still growing on the tail (slope {slope:.3f})"
    dbl = doubling_factors(taus, np.maximum(ratios, 1e-300))
    return FitResult(C_hat, tau0, slope, failure, reason, float(dbl.max()) if dbl.size else math.nan)


# --------------------------------------------------------------------------
# Reports
# --------------------------------------------------------------------------

@dataclass
class CheckReport:
    tag: str
    taus: np.ndarray
    member_ratio: np.ndarray  # (members, taus)
    log_terms: dict[str, np.ndarray]  # term -> (members, taus), natural log
    log_rhs: np.ndarray  # (members, taus)
    fitted_C: float
    tau0_hat: float
    passed: bool
    slack: float = SLACK
    diagnostics: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    @property
    def ratio(self) -> np.ndarray:
        """Worst member ratio at each tau."""
        return self.member_ratio.max(axis=0)

    def rows(self) -> list[dict]:
        out = []
        for i in range(self.member_ratio.shape[0]):
            for j, tau in enumerate(self.taus):
                for name, arr in self.log_terms.items():
                    out.append({"tag": self.tag, "member": i, "tau": float(tau), "term": name,
                                "log_value": float(arr[i, j])})
                out.append({"tag": self.tag, "member": i, "tau": float(tau), "term": "rhs",
                            "log_value": float(self.log_rhs[i, j])})
                out.append({"tag": self.tag, "member": i, "tau": float(tau), "term": "ratio",
                            "log_value": float(np.log(self.member_ratio[i, j]))})
        return out

    def describe(self) -> str:
        extra = ", ".join(f"{k}={v:.4g}" if isinstance(v, float) else f"{k}={v}"
                          for k, v in self.diagnostics.items() if not isinstance(v, (list, np.ndarray, dict)))
        return (f"C_hat={self.fitted_C:.4g}, tau0_hat={self.tau0_hat:.4g}, "
                f"members={self.member_ratio.shape[0]}, taus={len(self.taus)}" + (f", {extra}" if extra else ""))

    def summary(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.tag}: {self.describe()}"


def _finish(tag: str, taus, member_ratio, log_terms, log_rhs, metadata, slack=SLACK,
            extra_ok: bool = True, diagnostics: dict | None = None) -> CheckReport:
    taus = np.asarray(taus, dtype=float)
    worst = member_ratio.max(axis=0)
    diagnostics = dict(diagnostics or {})
    if taus.size >= 8 and taus[-1] / taus[0] >= 8 * (1 - 1e-9):
        fit = fit_constant_and_tau0(taus, worst, slack)
        C, tau0, ok = fit.C_hat, fit.tau0_hat, not fit.failure
        diagnostics.update(tail_slope=fit.tail_slope, max_doubling_factor=fit.max_doubling_factor,
                           fit_status=fit.reason)
    else:
        C, tau0 = float(worst.max()), float(taus[0])
        ok = bool(np.all(np.isfinite(worst)))
        dbl = doubling_factors(taus, worst) if taus.size > 1 else np.array([])
        diagnostics.update(max_doubling_factor=float(dbl.max()) if dbl.size else math.nan, fit_status="short sweep")
    return CheckReport(tag, taus, member_ratio, log_terms, log_rhs, C, tau0, bool(ok and extra_ok),
                       slack, diagnostics, metadata)


# --------------------------------------------------------------------------
# Grids and frame norms
# --------------------------------------------------------------------------

def carleman_grid(support: tuple[float, float], tau_max: float, min_points: int = 4001,
                  max_points: int = 60001) -> RadialGrid:
    """Uniform grid over the support fine enough to resolve the weighted peak.

    For a bump of half-width w the weighted integrand peaks at distance
    eps ~ (2 tau w)^(-1/2) (in units of w) from the lower edge, with width
    ~ w (eps^3 / 2)^(1/2); the grid puts about eight points across it.
    """
    lo, hi = support
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise PreconditionViolation("Carleman checks need compactly supported profiles")
    w = 0.5 * (hi - lo)
    eps = 1.0 / math.sqrt(2.0 * max(tau_max, 1.0) * w)
    width = w * math.sqrt(eps**3 / 2.0)
    h = min(0.002, width / 8.0)
    num = int(min(max_points, max(min_points, math.ceil((hi - lo) / h) + 1)))
    return RadialGrid.covering(support, num)


@dataclass
class FrameData:
    """Derivative samples of one mode function, reused for every tau."""

    t: np.ndarray
    q: np.ndarray
    lam: float
    log_derivs: np.ndarray  # (orders, points) log|f^(j)|
    log_image: np.ndarray  # log|P(d) f| for the polyharmonic image

    @classmethod
    def build(cls, u: ModeFunction, m: int, max_order: int, grid: RadialGrid) -> "FrameData":
        d = u.derivs(grid.t, max(max_order, 2 * m))
        coef = polyharmonic_symbol(u.k, u.n, m)
        parts = [c * d[j] for j, c in enumerate(coef)]
        image = sum(parts)
        scale = max(float(np.max(np.abs(x))) for x in parts)
        if float(np.max(np.abs(image))) <= IMAGE_RTOL * scale:
            image = np.zeros_like(image)  # cancellation down to rounding: the image is zero
        return cls(grid.t, grid.weights, float(u.lam), safe_log_abs(d[: max_order + 1]), safe_log_abs(image))


def log_weight_t(t, tau, sigma1, log_power) -> np.ndarray:
    return -tau * phi_t(t) + sigma1 * t + log_power * np.log(np.abs(t))


def frame_log_norms(fd: FrameData, tau: float, sigma1: float, log_power: float, max_order: int) -> np.ndarray:
    """log N_l for l = 0..max_order with weight exp(-tau phi) r^sigma1 |t|^log_power."""
    lw = log_weight_t(fd.t, tau, sigma1, log_power)
    sq = np.array([2 * log_lp_norm(fd.log_derivs[j] + lw, fd.q, 2) for j in range(max_order + 1)])
    loglam = math.log(fd.lam) if fd.lam > 0 else -math.inf
    out = np.empty(max_order + 1)
    for l in range(max_order + 1):
        parts = [sq[j] + ((l - j) * loglam if l > j else 0.0) for j in range(l + 1)]
        out[l] = 0.5 * logsumexp(parts)
    return out


def frame_log_rhs(fd: FrameData, tau: float, sigma1: float, log_power: float) -> float:
    lw = log_weight_t(fd.t, tau, sigma1, log_power)
    return log_lp_norm(fd.log_image + lw, fd.q, 2)


def _check_compact(u: ModeFunction, R0: float) -> None:
    lo, hi = u.support
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise PreconditionViolation("checks need compactly supported u; apply a cutoff")
    if hi >= math.log(R0):
        raise PreconditionViolation(f"support reaches r = {math.exp(hi):.4g} >= R0 = {R0:.4g}")


def _grid_for(u: ModeFunction, taus, grid: RadialGrid | None) -> RadialGrid:
    if grid is not None:
        return grid
    lo, hi = u.support
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return RadialGrid.uniform()
    return carleman_grid((lo, hi), float(np.max(taus)))


# --------------------------------------------------------------------------
# Weighted L2 check
# --------------------------------------------------------------------------

def _l2_member(u, m, sigma1, sigma2, taus, max_order, grid, R0):
    _check_compact(u, R0)
    g = _grid_for(u, taus, grid)
    fd = FrameData.build(u, m, max_order, g)
    n_tau = len(taus)
    terms = np.empty((max_order + 1, n_tau))
    rhs = np.empty(n_tau)
    for j, tau in enumerate(taus):
        logs = frame_log_norms(fd, tau, sigma1, sigma2 - m, max_order)
        for l in range(max_order + 1):
            terms[l, j] = (3 * m - 2 * l) / 2 * math.log(tau) + logs[l]
        rhs[j] = frame_log_rhs(fd, tau, sigma1, sigma2)
    return terms, rhs


def l2_carleman_check(family: Sequence[ModeFunction], m: int, sigma1: int, sigma2: int,
                      taus: Sequence[float], max_order: int | None = None,
                      grid: RadialGrid | None = None, R0: float = R0_DEFAULT,
                      tag: str = "prop1") -> CheckReport:
    """sum_l tau^{(3m-2l)/2} N_l(weight |t|^{sigma2-m} r^sigma1) against ||W |t|^sigma2 r^{sigma1+2m} Delta^m u||."""
    taus = np.asarray(sorted(taus), dtype=float)
    if np.any(taus <= 1):
        raise PreconditionViolation("tau sweep must stay above 1")
    max_order = 2 * m - 1 if max_order is None else max_order
    members = len(family)
    log_terms = {f"l{l}": np.empty((members, taus.size)) for l in range(max_order + 1)}
    log_rhs = np.empty((members, taus.size))
    for i, u in enumerate(family):
        terms, rhs = _l2_member(u, m, sigma1, sigma2, taus, max_order, grid, R0)
        for l in range(max_order + 1):
            log_terms[f"l{l}"][i] = terms[l]
        log_rhs[i] = rhs
    lhs = logsumexp(np.stack(list(log_terms.values())), axis=0)
    _guard_vacuous(lhs, log_rhs, "Delta^m u vanishes on the support; no compactly supported polyharmonic u exists")
    ratio = np.exp(lhs - log_rhs)
    meta = {"m": m, "sigma1": sigma1, "sigma2": sigma2, "max_order": max_order, "R0": R0,
            "frame": "(t, mode) surrogate"}
    return _finish(tag, taus, ratio, log_terms, log_rhs, meta)


def _guard_vacuous(lhs, log_rhs, message):
    if np.any(np.isneginf(log_rhs) & np.isfinite(lhs)):
        raise VacuousInequality(message)


# --------------------------------------------------------------------------
# Second-order estimate in the conjugated frame
# --------------------------------------------------------------------------

def second_order_check(family: Sequence[ModeFunction], taus: Sequence[float], sigma1: int = 0,
                       sigma2: int = 0, t0: float = T0_CHECK, num: int = 4001,
                       tag: str = "eq3.38") -> CheckReport:
    """||Delta_tau v|| against sum_{j+|a|<=2} tau^{(3-2(j+|a|))/2} ||t^-1 d^j Omega^a v|| per mode.

    Also records the energy inequality tau I + J <= (tau + 1)||Delta_tau v||^2
    and U >= 0 for every profile and tau; either failing fails the report.
    """
    taus = np.asarray(sorted(taus), dtype=float)
    keys = ("j0a0", "j1a0", "j0a1", "j2a0", "j1a1", "j0a2")
    members = len(family)
    log_terms = {k: np.empty((members, taus.size)) for k in keys}
    log_terms["energy_gap"] = np.empty((members, taus.size))
    log_rhs = np.empty((members, taus.size))
    ratio = np.empty((members, taus.size))
    ratio_sq = np.empty((members, taus.size))
    ratio_335 = np.empty((members, taus.size))
    energy_ok, U_ok = True, True
    worst_energy = -math.inf
    for i, v in enumerate(family):
        grid = RadialGrid.covering(v.support, num)
        for j, tau in enumerate(taus):
            op = ConjugatedOperator(tau, sigma1, sigma2, v.n, v.k, t0=t0)
            c = combined_terms(v, op, grid)
            for k in keys:
                log_terms[k][i, j] = math.log(c["norm_form"][k]) if c["norm_form"][k] > 0 else -math.inf
            lhs = sum(c["norm_form"].values())
            log_rhs[i, j] = 0.5 * math.log(c["norm_dp2"])
            ratio[i, j] = lhs / math.sqrt(c["norm_dp2"])
            ratio_sq[i, j] = sum(c["weighted"].values()) / c["norm_dp2"]
            ratio_335[i, j] = c["rhs_335"] / c["energy_lhs"] if c["energy_lhs"] > 0 else math.inf
            gap = c["energy_lhs"] - c["energy_rhs"]
            rel = gap / max(abs(c["energy_rhs"]), 1e-300)
            log_terms["energy_gap"][i, j] = rel
            worst_energy = max(worst_energy, rel)
            if rel > 1e-9:
                energy_ok = False
            if c["U"] < -1e-8 * c["U_scale"]:
                U_ok = False
    diag = {"energy_ok": energy_ok, "U_ok": U_ok, "worst_energy_rel_gap": worst_energy,
            "C_squared_form": float(ratio_sq.max()), "C_eq335": float(ratio_335.max())}
    meta = {"sigma1": sigma1, "sigma2": sigma2, "t0": t0, "frame": "conjugated (t, mode)"}
    return _finish(tag, taus, ratio, log_terms, log_rhs, meta, extra_ok=energy_ok and U_ok, diagnostics=diag)


# --------------------------------------------------------------------------
# Iterated (m = 2) consistency
# --------------------------------------------------------------------------

def _shifted_laplacian_profile(u: ModeFunction) -> ModeFunction:
    """Profile of Delta u itself (r^-2 times the r^2 Delta profile)."""
    g = apply_laplacian_mode(u).profile
    return u.with_profile(Product(PowerSum(((1.0, -2.0),)), g))


@dataclass
class IteratedReport:
    direct: CheckReport
    step_a: np.ndarray  # (members, taus): middle / RHS2
    step_b: np.ndarray  # composed / middle
    composed: np.ndarray  # composed / RHS2
    composed_fit: FitResult
    passed: bool

    def summary(self) -> str:
        state = "PASS" if self.passed else "FAIL"
        return (f"[{state}] prop1 m=2 iteration: direct C={self.direct.fitted_C:.4g}, composed C="
                f"{self.composed_fit.C_hat:.4g}, composed doubling={self.composed_fit.max_doubling_factor:.3f}")


def iterated_carleman_check(family: Sequence[ModeFunction], taus: Sequence[float], sigma1: int = 0,
                            sigma2: int = 0, R0: float = R0_DEFAULT) -> IteratedReport:
    """Direct m = 2 check plus the two-step composition of second-order estimates.

    middle   = sum_{l1<=2} tau^{(3-2 l1)/2} ||W |t|^{s2-1} r^{s1+2+l1} D^{l1} Delta u||
    composed = sum_{l<=4} c_l tau^{(6-2l)/2} N_l(u; |t|^{s2-2} r^{s1}),  c_l = #{l1+l2=l, l1,l2<=2}
    """
    taus = np.asarray(sorted(taus), dtype=float)
    direct = l2_carleman_check(family, 2, sigma1, sigma2, taus, R0=R0, tag="prop1.m2")
    mult = [1, 2, 3, 2, 1]
    members = len(family)
    step_a = np.empty((members, taus.size))
    step_b = np.empty((members, taus.size))
    composed = np.empty((members, taus.size))
    for i, u in enumerate(family):
        grid = _grid_for(u, taus, None)
        fd_u = FrameData.build(u, 2, 4, grid)
        fd_w = FrameData.build(_shifted_laplacian_profile(u), 1, 2, grid)
        for j, tau in enumerate(taus):
            lt = math.log(tau)
            rhs2 = frame_log_rhs(fd_u, tau, sigma1, sigma2)
            mid_norms = frame_log_norms(fd_w, tau, sigma1 + 2, sigma2 - 1, 2)
            middle = logsumexp([(3 - 2 * l) / 2 * lt + mid_norms[l] for l in range(3)])
            comp_norms = frame_log_norms(fd_u, tau, sigma1, sigma2 - 2, 4)
            comp = logsumexp([math.log(mult[l]) + (6 - 2 * l) / 2 * lt + comp_norms[l] for l in range(5)])
            step_a[i, j] = math.exp(middle - rhs2)
            step_b[i, j] = math.exp(comp - middle)
            composed[i, j] = math.exp(comp - rhs2)
    fit = fit_constant_and_tau0(taus, composed.max(axis=0)) if taus.size >= 8 else None
    if fit is None:
        worst = composed.max(axis=0)
        dbl = doubling_factors(taus, worst)
        fit = FitResult(float(worst.max()), float(taus[0]), math.nan, False, "short sweep",
                        float(dbl.max()) if dbl.size else math.nan)
    ok = direct.passed and not fit.failure
    return IteratedReport(direct, step_a, step_b, composed, fit, ok)


# --------------------------------------------------------------------------
# L2 -> Lp and potential checks
# --------------------------------------------------------------------------

def lp_measure(case: str) -> str:
    return "r^-n dx" if case == "I" else "dx"


def _lp_member(u, params: ProblemParams, p, taus, grid, R0, extra_rhs=None):
    """Log LHS pieces and log RHS for the Lp-augmented estimate (sigma1 = sigma2 = 0)."""
    m, case = params.m, params.case
    _check_compact(u, R0)
    g = _grid_for(u, taus, grid)
    max_order = 2 * m - 1
    fd = FrameData.build(u, m, max_order, g)
    beta0 = float(beta0_variant(params, p))
    start = 1 if case == "I" else 0
    vals = u.values(g.t)
    log_u = safe_log_abs(vals)
    shift = g.t * params.n if case != "I" else np.zeros_like(g.t)
    pf = math.inf if is_inf(p) else float(p)
    log_full = fd.log_image if extra_rhs is None else safe_log_abs(_signed_image(u, m, g) + extra_rhs(g))
    n_tau = len(taus)
    out = {f"l{l}": np.empty(n_tau) for l in range(start, max_order + 1)}
    out["lp"] = np.empty(n_tau)
    rhs = np.empty(n_tau)
    for j, tau in enumerate(taus):
        norms = frame_log_norms(fd, tau, 0, -m, max_order)
        for l in range(start, max_order + 1):
            out[f"l{l}"][j] = (3 * m - 2 * l) / 2 * math.log(tau) + norms[l]
        lw = log_weight_t(g.t, tau, 0, -m)
        la = log_u + lw + (shift / pf if math.isfinite(pf) else 0.0)
        out["lp"][j] = beta0 * math.log(tau) + log_lp_norm(la, g.weights, pf)
        rhs[j] = log_lp_norm(log_full + log_weight_t(g.t, tau, 0, 0), g.weights, 2)
    return out, rhs


def _signed_image(u, m, g):
    d = u.derivs(g.t, 2 * m)
    coef = polyharmonic_symbol(u.k, u.n, m)
    return sum(c * d[j] for j, c in enumerate(coef))


def lp_carleman_check(family: Sequence[ModeFunction], params: ProblemParams, p, taus: Sequence[float],
                      grid: RadialGrid | None = None, R0: float = R0_DEFAULT) -> CheckReport:
    """Add tau^{beta0} ||W |t|^-m u||_{L^p} to the L2 sum; measure r^-n dx in case I, dx otherwise."""
    from .exponents import as_exponent
    p = as_exponent(p)
    check_p(params.case, p, params.n, params.m)
    taus = np.asarray(sorted(taus), dtype=float)
    if np.any(taus <= 1):
        raise PreconditionViolation("tau sweep must stay above 1")
    return _sweep(family, params, p, taus, grid, R0, None, f"thm3.{params.case}")


def _sweep(family, params, p, taus, grid, R0, extra_rhs_for, tag, metadata=None):
    members = len(family)
    log_terms: dict[str, np.ndarray] = {}
    log_rhs = np.empty((members, taus.size))
    for i, u in enumerate(family):
        extra = extra_rhs_for(u) if extra_rhs_for is not None else None
        terms, rhs = _lp_member(u, params, p, taus, grid, R0, extra)
        for name, arr in terms.items():
            log_terms.setdefault(name, np.empty((members, taus.size)))[i] = arr
        log_rhs[i] = rhs
    lhs = logsumexp(np.stack(list(log_terms.values())), axis=0)
    _guard_vacuous(lhs, log_rhs, "inequality vacuously violated: u solves the equation exactly; "
                                 "solutions are never compactly supported, apply a cutoff")
    ratio = np.exp(lhs - log_rhs)
    meta = {"n": params.n, "m": params.m, "case": params.case, "p": str(p), "R0": R0,
            "measure": lp_measure(params.case)}
    meta.update(metadata or {})
    return _finish(tag, taus, ratio, log_terms, log_rhs, meta)


PotentialFn = Callable[[np.ndarray], np.ndarray]


def potential_carleman_check(family: Sequence[ModeFunction], params: ProblemParams, norms: PotentialNorms,
                             V0: PotentialFn | None, taus: Sequence[float],
                             V_alpha: Mapping[int, PotentialFn] | None = None, C0: float = 1.0,
                             enforce_threshold: bool = True, grid: RadialGrid | None = None,
                             R0: float = R0_DEFAULT, vacuous_rtol: float = 1e-12) -> CheckReport:
    """Lp-augmented LHS against ||W r^{2m}(Delta^m u + sum V_a D^a u + V0 u)||.

    V0 and V_alpha are functions of t (radial potentials). The drift term uses
    the frame surrogate r^{2m-|a|} V_a d^{|a|} f.
    """
    taus = np.asarray(sorted(taus), dtype=float)
    threshold = order_bound(params, norms, C0)
    if enforce_threshold and taus[0] <= threshold:
        raise AbsorptionPreconditionUnmet(
            f"absorption precondition unmet: tau_min = {taus[0]:.4g} <= C0(1 + sum A^mu + A0^nu) = {threshold:.4g}")
    p = exponent_table(params).p
    m = params.m
    V_alpha = dict(V_alpha or {})

    def extra_for(u):
        def extra(g):
            t = g.t
            d = u.derivs(t, max(V_alpha, default=0))
            total = np.zeros_like(t)
            if V0 is not None:
                total += np.exp(2 * m * t) * V0(t) * d[0]
            for a, Va in V_alpha.items():
                total += np.exp((2 * m - a) * t) * Va(t) * d[a]
            image = _signed_image(u, m, g)
            full = image + total
            scale = float(np.max(np.abs(image))) if image.size else 0.0
            if scale > 0 and float(np.max(np.abs(full))) <= vacuous_rtol * scale:
                raise VacuousInequality("inequality vacuously violated: u solves the equation on its support; "
                                        "solutions are never compactly supported, apply a cutoff")
            return total
        return extra

    meta = {"threshold": threshold, "C0": C0, "A0": float(norms.A0)}
    report = _sweep(family, params, p, taus, grid, R0, extra_for, f"thm4.{params.case}", meta)
    report.diagnostics["threshold"] = threshold
    return report


# --------------------------------------------------------------------------
# Hoelder absorption margins
# --------------------------------------------------------------------------

def envelope_exponent(params: ProblemParams, p=None) -> Fraction:
    """2m + n/p - n/2 in case I; 2m - n/2 otherwise (plain-measure Lp term)."""
    p = p_star(params.s) if p is None else p
    inv_p = Fraction(0) if is_inf(p) else 1 / Fraction(p)
    if params.case == "I":
        return 2 * params.m + params.n * inv_p - Fraction(params.n, 2)
    return 2 * params.m - Fraction(params.n, 2)


def log_envelope(m_log: float, exponent: float, R0: float) -> float:
    """log sup_{0<r<=R0} |log r|^m_log r^exponent (finite iff exponent > 0)."""
    if exponent <= 0:
        return math.inf
    tR = math.log(R0)
    t_star = -m_log / exponent if m_log > 0 else -math.inf
    t = t_star if t_star < tR else tR
    if not math.isfinite(t):
        return exponent * tR
    return m_log * math.log(abs(t)) + exponent * t


@dataclass(frozen=True)
class AbsorptionMargin:
    """Both sides of each absorption bound, as natural logs (-inf for a zero side)."""

    exponent: Fraction
    log_envelope: float
    log_lhs: float
    log_rhs: float
    drift: dict  # |alpha| -> {"log_lhs", "log_rhs", "log_envelope"}

    @staticmethod
    def _le(a: float, b: float) -> bool:
        return a == -math.inf or a <= b + 1e-9

    @property
    def lhs(self) -> float:
        return math.exp(min(self.log_lhs, 709.0))

    @property
    def rhs(self) -> float:
        return math.exp(min(self.log_rhs, 709.0))

    @property
    def holds(self) -> bool:
        return self._le(self.log_lhs, self.log_rhs) and all(
            self._le(d["log_lhs"], d["log_rhs"]) for d in self.drift.values())


def absorption_margin(u: ModeFunction, params: ProblemParams, norms: PotentialNorms, tau: float,
                      V0: PotentialFn | None = None, V_alpha: Mapping[int, PotentialFn] | None = None,
                      grid: RadialGrid | None = None, R0: float = R0_DEFAULT) -> AbsorptionMargin:
    """Both sides of the Hoelder absorption bounds at one tau.

    The V0 bound is ||W r^{2m} V0 u||_2 <= A0 * envelope * ||W |t|^-m u||_p with
    envelope = sup |t|^m r^{2m + n/p - n/2} (case I). The angular measure is
    normalized, so with radial V0 the constant is exactly 1.
    """
    A0, A_alpha = norms.A0, norms.A_alpha
    p = exponent_table(params).p
    expo = envelope_exponent(params, p)
    le = log_envelope(params.m, float(expo), R0)
    if not math.isfinite(le):
        raise AdmissibilityError(f"weight envelope infinite: exponent {expo} <= 0")
    g = grid if grid is not None else _grid_for(u, [tau], None)
    m, t = params.m, g.t
    d = u.derivs(t, max(dict(V_alpha or {}), default=0))
    lw0 = log_weight_t(t, tau, 0, 0)
    pf = math.inf if is_inf(p) else float(p)
    shift = np.zeros_like(t) if params.case == "I" else params.n * t
    lw_lp = log_weight_t(t, tau, 0, -m) + (shift / pf if math.isfinite(pf) else 0.0)
    lhs = rhs = -math.inf
    if V0 is not None:
        lhs = log_lp_norm(safe_log_abs(V0(t) * d[0]) + 2 * m * t + lw0, g.weights, 2)
        if A0 > 0:
            rhs = math.log(A0) + log_lp_norm(safe_log_abs(d[0]) + lw_lp, g.weights, pf) + le
    drift = {}
    for a, Va in dict(V_alpha or {}).items():
        Aa = A_alpha[a]
        la = log_envelope(m, float(2 * m - a), R0)
        l_lhs = log_lp_norm(safe_log_abs(Va(t) * d[a]) + (2 * m - a) * t + lw0, g.weights, 2)
        l_u = log_lp_norm(safe_log_abs(d[a]) + log_weight_t(t, tau, 0, -m), g.weights, 2)
        drift[a] = {"log_lhs": l_lhs, "log_rhs": math.log(Aa) + l_u + la if Aa > 0 else -math.inf,
                    "log_envelope": la}
    return AbsorptionMargin(expo, le, lhs, rhs, drift)
