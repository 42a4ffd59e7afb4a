"""Acceptance criteria 1-12, each at its stated tolerance and runtime limit.

Run under pytest (a summary line per criterion is printed at the end of the
session) or directly with ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np
import pytest

from carleman_lab import experiments as ex

RESULTS: dict[int, str] = {}


@dataclass
class Criterion:
    number: int
    name: str
    limit_s: float
    run: Callable[[], tuple[bool, str]]


def _exponents():
    out = ex.exponents_experiment(ex.ExponentsConfig(n=3, m=1, alpha0=0))
    t = out.extra["table"]
    ok = out.passed and t.nu == Fraction(2, 3) and t.theta == Fraction(4, 3)
    ok = ok and isinstance(t.nu, Fraction) and isinstance(t.theta, Fraction)
    return ok, f"nu = {t.nu}, Theta = {t.theta} (exact rationals)"


def _consistency():
    out = ex.exponent_consistency_experiment(seed=0, count=100)
    beta = [r for r in out.rows if r["check"] == "beta0"]
    ends = [r for r in out.rows if r["check"] == "theta_endpoints"]
    lim = [r for r in out.rows if r["check"] == "eps_limit"]
    ok = out.passed and len(beta) == 100 and ends and lim
    return ok, f"{len(beta)} beta0 identities, {len(ends)} theta endpoint pairs, {len(lim)} eps-limit sequences"


def _conjugation():
    out = ex.conjugation_experiment(ex.ConjugationConfig())
    profiles = {r["profile"] for r in out.rows}
    worst = max(r["rel_err"] for r in out.rows)
    refined = all(r["rel_err_refined"] < r["rel_err"] for r in out.rows)
    ok = out.passed and len(profiles) == 10 and worst <= 1e-6 and refined
    return ok, f"10 profiles, worst relative L2 error {worst:.2e} <= 1e-6, refinement improves: {refined}"


def _ibp():
    out = ex.ibp_experiment(ex.IbpConfig())
    tags = {r["tag"] for r in out.rows}
    profiles = {r["profile"] for r in out.rows}
    taus = {r["tau"] for r in out.rows}
    ks = {r["k"] for r in out.rows}
    worst = max(r["gap"] for r in out.rows)
    ok = (out.passed and len(tags) == 18 and len(profiles) == 5 and taus == {5.0, 20.0, 80.0}
          and ks == {0, 1, 3} and worst <= 1e-6)
    return ok, f"{len(tags)} identities on {len(profiles)} bumps, worst gap {worst:.2e} <= 1e-6"


def _second_order():
    out = ex.second_order_experiment()
    rep = out.extra["report"]
    d = rep.diagnostics
    ok = (out.passed and rep.member_ratio.shape[0] == 12 and rep.taus[0] == 20 and rep.taus[-1] == 320
          and d["max_doubling_factor"] < 2 and d["energy_ok"] and d["U_ok"] and np.all(np.isfinite(rep.ratio)))
    return ok, (f"C_hat = {rep.fitted_C:.4g}, max factor across doublings {d['max_doubling_factor']:.3f} < 2, "
                f"energy inequality holds on every profile (largest (LHS-RHS)/RHS {d['worst_energy_rel_gap']:.3f})")


def _iterated():
    out = ex.iterated_experiment()
    it = out.extra["report"]
    ok = out.passed and it.direct.passed and not it.composed_fit.failure and np.all(np.isfinite(it.composed))
    return ok, (f"direct m=2 C = {it.direct.fitted_C:.4g}; composed/direct <= {it.composed_fit.C_hat:.4g} "
                f"(one constant, tail slope {it.composed_fit.tail_slope:.2f})")


def _absorption():
    out = ex.absorption_experiment()
    x = out.extra
    env = [r for r in out.rows if r["tag"] == "eq2.8"]
    ok = (out.passed and x["above"].passed and x["ratio_below"] > 1.1 * x["ratio_above"] and x["refused_below"]
          and env and all(r["log_value"] > 0 for r in env))
    return ok, (f"threshold {x['threshold']:.4g}: ratio above <= {x['ratio_above']:.3g}, "
                f"at threshold/4 {x['ratio_below']:.3g}; {len(env)} case-I envelope exponents > 0")


def _vanishing():
    out = ex.vanishing_order_experiment(ks=range(7), tol=0.05)
    worst = max(abs(r["measured_order"] - r["k"]) for r in out.rows)
    fams = {r["family"] for r in out.rows}
    ok = out.passed and worst <= 0.05 and fams == {"harmonic", "eigen"} and len(out.rows) == 14
    return ok, f"harmonic and eigen k = 0..6, worst |order - k| = {worst:.2e} <= 0.05"


def _eigen_order():
    out = ex.eigen_order_experiment(ms=(1, 2), lams=(16, 64, 256, 1024))
    Cs = {(r["family"]): r["C_fit"] for r in out.rows}
    per_m = {}
    for r in out.rows:
        per_m.setdefault(r["family"], set()).add(r["C_fit"])
        assert r["k"] == math.isqrt(r["lambda_or_k"])
    ok = out.passed and len(out.rows) == 8 and all(len(v) == 1 for v in per_m.values())
    return ok, "one C per m fitted at lambda = 16: " + ", ".join(f"{k} C = {v:.4g}" for k, v in Cs.items())


def _three_ball():
    out = ex.three_ball_experiment(seed=0, triples=1000)
    get = {r["check"]: r for r in out.rows if r["tag"] != "eq4.25.I"}
    spread = get["inv_k0_over_log_r0_spread"]["value"]
    fam = [r for r in out.rows if r["tag"] == "eq4.25.I"]
    Cs = {r["C_fit"] for r in fam}
    ok = (out.passed and get["k0_in_unit_interval"]["value"] == 1000 and spread <= 1.1
          and get["branch_two_iff_tau1_below_threshold"]["passed"] and len(Cs) == 1
          and {r["check"].split("@")[0] for r in fam} == {"harmonic", "eigen"})
    return ok, f"k0 in (0,1) on 1000 triples; 1/k0 / log(1/r0) spread {spread:.3f} over 3 decades; C = {Cs.pop():.4g}"


def _propagation():
    out = ex.propagation_experiment(dmax=8)
    exp_rows = [r for r in out.rows if r["check"].startswith("exponent")]
    lb_rows = [r for r in out.rows if r["check"].startswith("lower_bound")]
    ok = out.passed and len(exp_rows) == 9 and all(r["value"] <= r["measured"] for r in lb_rows)
    return ok, f"exponent k0^d exact for d = 0..8; lower bound <= measured on {len(lb_rows)} chains"


def _decay_scaling():
    out = ex.decay_scaling_experiment(seed=0, count=20)
    cases = {r["case"] for r in out.rows}
    branches = {r["branch"] for r in out.rows}
    ok = (out.passed and len(out.rows) == 20 and cases == {"I", "II", "III"} and branches == {"potential", "drift"}
          and all(isinstance(r["r_exponent"], Fraction) and r["r_exponent"] == r["theta"] for r in out.rows))
    return ok, f"20 sets, cases {sorted(cases)}, branches {sorted(branches)}, exact equality"


CRITERIA = [
    Criterion(1, "exponent reductions", 1, _exponents),
    Criterion(2, "exponent self-consistency", 1, _consistency),
    Criterion(3, "conjugation identity", 10, _conjugation),
    Criterion(4, "integration-by-parts catalog", 60, _ibp),
    Criterion(5, "second-order Carleman estimate", 120, _second_order),
    Criterion(6, "iterated Carleman estimate (m = 2)", 180, _iterated),
    Criterion(7, "potential absorption threshold", 120, _absorption),
    Criterion(8, "vanishing-order estimator", 30, _vanishing),
    Criterion(9, "order bound on the eigen family", 120, _eigen_order),
    Criterion(10, "three-ball machinery", 120, _three_ball),
    Criterion(11, "propagation of smallness", 60, _propagation),
    Criterion(12, "decay exponent by scaling", 5, _decay_scaling),
]


def evaluate(c: Criterion) -> tuple[bool, str]:
    start = time.perf_counter()
    ok, detail = c.run()
    elapsed = time.perf_counter() - start
    fast = elapsed < c.limit_s
    ok = bool(ok and fast)
    line = (f"criterion {c.number:>2} [{'PASS' if ok else 'FAIL'}] {c.name}: {detail}; "
            f"{elapsed:.2f} s (limit {c.limit_s:g} s)")
    RESULTS[c.number] = line
    return ok, line


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{c.number:02d}" for c in CRITERIA])
def test_acceptance(criterion):
    ok, line = evaluate(criterion)
    print(line)
    assert ok, line


if __name__ == "__main__":
    results = [evaluate(c) for c in CRITERIA]
    for _, line in results:
        print(line)
    raise SystemExit(0 if all(ok for ok, _ in results) else 1)
