"""The conjugated Laplacian, its reflected companion, and the energy bookkeeping.

With u = exp(tau (t + log t^2)) exp(-sigma1 t) t^(-sigma2) v, the operator
r^2 Delta acting on a degree-k mode becomes (per mode, lam = k(k+n-2))

    Delta_tau v = v'' + 2T v' - 2 tau t^-2 v + T^2 v + ((n-2) + a) v'
                  + [(n-2) T + b] v - lam v,

with T = tau (1 + 2/t), S = sigma1 + sigma2/t, a = -2S and
b = -(n-2) S + sigma2/t^2 + S^2 - 2 T S. The companion Delta_tau^- flips the
sign of every odd-order term. Splitting Delta_tau v = E + A into its even part
E and odd part A gives I = 4<E, A> and J = 2 int t^-2 (E^2 + A^2).

Every integration-by-parts identity used to bound I and J from below is kept
in a catalog with both sides written as independent quadratures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .jets import Jet
from .polarweights import (
    LinearOp,
    ModeFunction,
    Profile,
    RadialGrid,
    Sampled,
    WeightSpec,
    angular_eigenvalue,
    apply_laplacian_mode,
    phi_t,
)

T0_DEFAULT = -3.0
T0_CHECK = -30.0


class SupportError(ValueError):
    """Profile support violates the operator's admissible region."""


@dataclass(frozen=True)
class ConjugatedOperator:
    # tau = 0 is allowed so the unweighted limit can be checked; the
    # inequality checks themselves enforce tau > 1.
    tau: float
    sigma1: int = 0
    sigma2: int = 0
    n: int = 3
    k: int = 0
    t0: float = T0_DEFAULT
    printed_b: bool = False

    def __post_init__(self):
        if self.tau < 0:
            raise ValueError("tau must be nonnegative")
        if self.t0 >= 0:
            raise ValueError("support bound t0 must be negative")

    @property
    def lam(self) -> int:
        return angular_eigenvalue(self.k, self.n)


# --------------------------------------------------------------------------
# Coefficients
# --------------------------------------------------------------------------

def _check_t(t) -> np.ndarray:
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t >= 0):
        raise ValueError("coefficients need t < 0")
    return t


def coeff_a(t, sigma1, sigma2):
    t = _check_t(t)
    return -2.0 * sigma1 - 2.0 * sigma2 / t


def coeff_b(t, tau, sigma1, sigma2, n, printed: bool = False):
    """Zeroth-order coefficient b(t).

    ``printed=True`` returns the variant with (sigma1 - sigma2/t)^2, which does
    not make the conjugation identity hold when sigma1 * sigma2 != 0.
    """
    t = _check_t(t)
    S = sigma1 + sigma2 / t
    T = tau * (1.0 + 2.0 / t)
    sq = (sigma1 - sigma2 / t) ** 2 if printed else S * S
    return -(n - 2) * S + sigma2 / t**2 + sq - 2.0 * T * S


def coefficient_jets(tj: Jet, op: ConjugatedOperator) -> dict[str, Jet]:
    tau, s1, s2, n = op.tau, op.sigma1, op.sigma2, op.n
    inv = 1.0 / tj
    T = tau * (1.0 + 2.0 * inv)
    S = s1 + s2 * inv
    sq = (s1 - s2 * inv) * (s1 - s2 * inv) if op.printed_b else S * S
    b = -(n - 2) * S + s2 * inv * inv + sq - 2.0 * T * S
    return {"T": T, "S": S, "a": -2.0 * S, "b": b, "inv": inv}


def a_prime_envelope(t, sigma2):
    """|a'(t)| <= 2|sigma2| t^-2 (attained)."""
    t = _check_t(t)
    return 2.0 * abs(sigma2) / t**2


def b_prime_envelope(t, tau, sigma1, sigma2, n):
    """Explicit K(t) t^-2 bound on |b'(t)| valid for t <= -1, growing like tau."""
    t = _check_t(t)
    s1, s2 = abs(sigma1), abs(sigma2)
    K = abs(n - 2) * s2 + 2 * s2 + 2 * s2 * (s1 + s2) + 4 * tau * (s1 + s2) + 6 * tau * s2
    return K / t**2


# --------------------------------------------------------------------------
# Conjugation and the operators
# --------------------------------------------------------------------------

def _log_conj_jet(tj: Jet, w: WeightSpec) -> tuple[Jet, Jet]:
    """Jets of -tau(t + log t^2) + sigma1 t and of t^sigma2 (signed)."""
    expo = -w.tau * (tj + (tj * tj).log()) + w.sigma1 * tj
    power = Jet.constant(1.0, tj)
    base = tj if w.sigma2 >= 0 else 1.0 / tj
    for _ in range(abs(w.sigma2)):
        power = power * base
    return expo, power


def _check_support(f: ModeFunction, t0: float = 0.0) -> None:
    lo, hi = f.support
    if hi >= t0:
        raise SupportError(f"support reaches t = {hi:g}, must stay below {t0:g}")


def _weight_op(f: ModeFunction, w: WeightSpec, inverse: bool, label: str) -> ModeFunction:
    _check_support(f)
    sign = -1.0 if inverse else 1.0

    def coeffs(tj: Jet):
        expo, power = _log_conj_jet(tj, w)
        if inverse:
            return [(-1.0 * expo).exp() / power]
        return [expo.exp() * power]

    prof = f.profile
    if isinstance(prof, Sampled):
        t = prof.t
        logw = sign * (-w.tau * phi_t(t) + w.sigma1 * t)
        pw = np.power(t, float(sign * w.sigma2))
        vals = np.exp(logw) * pw * prof.values
        return f.with_profile(Sampled(t, vals, prof.compact, prof.accuracy, name=f"{label}[{prof.name}]"))
    return f.with_profile(LinearOp(prof, coeffs, 0, label))


def conjugate(u: ModeFunction, w: WeightSpec) -> ModeFunction:
    """v = exp(-tau(t + log t^2)) exp(sigma1 t) t^sigma2 u."""
    return _weight_op(u, w, inverse=False, label="conj")


def unconjugate(v: ModeFunction, w: WeightSpec) -> ModeFunction:
    return _weight_op(v, w, inverse=True, label="unconj")


def _delta_tau_coeffs(op: ConjugatedOperator, minus: bool) -> Callable[[Jet], list[Jet]]:
    sgn = -1.0 if minus else 1.0
    lam = float(op.lam)

    def coeffs(tj: Jet):
        c = coefficient_jets(tj, op)
        T, a, b, inv = c["T"], c["a"], c["b"], c["inv"]
        c0 = sgn * (-2.0 * op.tau) * inv * inv + T * T + (op.n - 2) * T + b - lam
        c1 = sgn * (2.0 * T + (op.n - 2) + a)
        return [c0, c1, Jet.constant(1.0, tj)]

    return coeffs


def _apply(v: ModeFunction, op: ConjugatedOperator, minus: bool) -> ModeFunction:
    if v.k != op.k or v.n != op.n:
        raise ValueError("mode degree or dimension mismatch between v and operator")
    _check_support(v, op.t0)
    fn = _delta_tau_coeffs(op, minus)
    label = "DeltaTauMinus" if minus else "DeltaTau"
    prof = v.profile
    if isinstance(prof, Sampled):
        d = prof.grid_derivs(2)
        cj = [c.derivatives()[0] for c in fn(Jet.variable(prof.t, 0))]
        vals = cj[0] * d[0] + cj[1] * d[1] + d[2]
        return v.with_profile(Sampled(prof.t, vals, prof.compact, prof.accuracy, name=f"{label}[{prof.name}]"))
    return v.with_profile(LinearOp(prof, fn, 2, label))


def apply_delta_tau(v: ModeFunction, op: ConjugatedOperator) -> ModeFunction:
    return _apply(v, op, minus=False)


def apply_delta_tau_minus(v: ModeFunction, op: ConjugatedOperator) -> ModeFunction:
    return _apply(v, op, minus=True)


def conjugation_residual(v: ModeFunction, op: ConjugatedOperator, grid: RadialGrid,
                         accuracy: int = 8) -> float:
    """Relative L2 mismatch between the conjugated stencil Laplacian and Delta_tau v.

    u is rebuilt from v by the inverse weight, sampled on ``grid``, and r^2 Delta u
    is taken with centered stencils; Delta_tau v uses exact derivatives.
    """
    w = WeightSpec(op.tau, op.sigma1, op.sigma2)
    u = unconjugate(v, w)
    samples = Sampled(grid.t, u.values(grid.t), compact=True, accuracy=accuracy)
    lap = apply_laplacian_mode(ModeFunction(v.k, v.n, samples)).values(grid.t)
    lhs = conjugate(ModeFunction(v.k, v.n, Sampled(grid.t, lap, compact=True, accuracy=accuracy)), w).values(grid.t)
    rhs = apply_delta_tau(v, op).values(grid.t)
    num = np.sum(grid.weights * (lhs - rhs) ** 2)
    den = np.sum(grid.weights * rhs**2)
    return float(math.sqrt(num / den))


# --------------------------------------------------------------------------
# Energy context and the identity catalog
# --------------------------------------------------------------------------

@dataclass
class EnergyContext:
    """Samples of v, its derivatives and every coefficient on one grid."""

    t: np.ndarray
    q: np.ndarray
    d0: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    T: np.ndarray
    a: np.ndarray
    a1: np.ndarray
    b: np.ndarray
    b1: np.ndarray
    h2: np.ndarray  # (t^-2 (T^2 + (n-2)T + b))''
    tb2: np.ndarray  # (t^-2 b)''
    tau: float
    n: int
    lam: float

    def integral(self, f) -> float:
        return float(np.sum(self.q * f))

    @property
    def N2a(self):
        return (self.n - 2) + self.a

    @property
    def Bc(self):
        return (self.n - 2) * self.T + self.b

    @property
    def even(self):
        return self.d2 + self.T**2 * self.d0 + self.Bc * self.d0 - self.lam * self.d0

    @property
    def odd(self):
        return 2 * self.T * self.d1 - 2 * self.tau * self.t**-2 * self.d0 + self.N2a * self.d1


def energy_context(v: ModeFunction, op: ConjugatedOperator, grid: RadialGrid | None = None,
                   num: int = 6001) -> EnergyContext:
    _check_support(v, op.t0)
    if grid is None:
        lo, hi = v.support
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise SupportError("identities need compactly supported profiles")
        grid = RadialGrid.covering((lo, hi), num)
    t = grid.t
    d = v.derivs(t, 2)
    if not _vanishes_at_ends(d):
        raise SupportError("profile does not vanish at the grid ends; boundary terms would appear")
    tj = Jet.variable(t, 2)
    c = coefficient_jets(tj, op)
    inv2 = c["inv"] * c["inv"]
    h = inv2 * (c["T"] * c["T"] + (op.n - 2) * c["T"] + c["b"])
    aD, bD = c["a"].derivatives(), c["b"].derivatives()
    return EnergyContext(
        t=t, q=grid.weights, d0=d[0], d1=d[1], d2=d[2],
        T=c["T"].derivatives()[0], a=aD[0], a1=aD[1], b=bD[0], b1=bD[1],
        h2=h.derivatives()[2], tb2=(inv2 * c["b"]).derivatives()[2],
        tau=op.tau, n=op.n, lam=float(op.lam),
    )


def _vanishes_at_ends(d: np.ndarray, tol: float = 1e-14) -> bool:
    scale = max(1.0, float(np.max(np.abs(d[0]))))
    return bool(np.all(np.abs(d[:, [0, -1]]) <= tol * scale))


@dataclass(frozen=True)
class IbpIdentity:
    tag: str
    lhs: Callable[[EnergyContext], float]
    rhs: Callable[[EnergyContext], float]
    note: str = ""
    printed_rhs: Callable[[EnergyContext], float] | None = None
    explicit_rhs: Callable[[EnergyContext], float] | None = None
    envelope: Callable[[EnergyContext], float] | None = None


def _catalog() -> dict[str, IbpIdentity]:
    I_ = lambda c, f: c.integral(f)  # noqa: E731
    cat: list[IbpIdentity] = [
        IbpIdentity("3.11",
                    lambda c: 4 * I_(c, c.d2 * 2 * c.T * c.d1),
                    lambda c: 8 * c.tau * I_(c, c.t**-2 * c.d1**2)),
        IbpIdentity("3.12",
                    lambda c: 4 * I_(c, c.d2 * (-2 * c.tau * c.t**-2 * c.d0)),
                    lambda c: -24 * c.tau * I_(c, c.t**-4 * c.d0**2) + 8 * c.tau * I_(c, c.t**-2 * c.d1**2)),
        IbpIdentity("3.13",
                    lambda c: 4 * I_(c, c.d2 * c.N2a * c.d1),
                    lambda c: -2 * I_(c, c.a1 * c.d1**2)),
        IbpIdentity("3.14",
                    lambda c: 4 * I_(c, c.T**2 * c.d0 * 2 * c.T * c.d1),
                    lambda c: 24 * c.tau * I_(c, c.T**2 * c.t**-2 * c.d0**2)),
        IbpIdentity("3.15",
                    lambda c: 4 * I_(c, c.T**2 * c.d0 * (-2 * c.tau * c.t**-2 * c.d0)),
                    lambda c: -8 * c.tau * I_(c, c.T**2 * c.t**-2 * c.d0**2)),
        IbpIdentity("3.16",
                    lambda c: 4 * I_(c, c.T**2 * c.d0 * c.N2a * c.d1),
                    lambda c: 8 * c.tau * I_(c, c.N2a * c.T * c.t**-2 * c.d0**2) - 2 * I_(c, c.a1 * c.T**2 * c.d0**2)),
        IbpIdentity("3.17",
                    lambda c: 4 * I_(c, c.Bc * c.d0 * 2 * c.T * c.d1),
                    lambda c: -4 * I_(c, (-2 * (c.n - 2) * c.tau * c.t**-2 + c.b1) * c.T * c.d0**2)
                    + 8 * c.tau * I_(c, c.Bc * c.t**-2 * c.d0**2)),
        IbpIdentity("3.18",
                    lambda c: 4 * I_(c, c.Bc * c.d0 * (-2 * c.tau * c.t**-2 * c.d0)),
                    lambda c: -8 * c.tau * I_(c, c.Bc * c.t**-2 * c.d0**2)),
        IbpIdentity("3.19",
                    lambda c: 4 * I_(c, c.Bc * c.d0 * c.N2a * c.d1),
                    lambda c: -2 * I_(c, (-2 * (c.n - 2) * c.t**-2 * c.tau + c.b1) * c.N2a * c.d0**2)
                    - 2 * I_(c, c.Bc * c.a1 * c.d0**2)),
        IbpIdentity("3.20",
                    lambda c: 4 * I_(c, -c.lam * c.d0 * 2 * c.T * c.d1),
                    lambda c: -8 * c.tau * c.lam * I_(c, c.t**-2 * c.d0**2)),
        IbpIdentity("3.21",
                    lambda c: 4 * I_(c, -c.lam * c.d0 * (-2 * c.tau * c.t**-2 * c.d0)),
                    lambda c: 8 * c.tau * c.lam * I_(c, c.t**-2 * c.d0**2)),
        IbpIdentity("3.22",
                    lambda c: 4 * I_(c, -c.lam * c.d0 * c.N2a * c.d1),
                    lambda c: 2 * c.lam * I_(c, c.a1 * c.d0**2)),
        IbpIdentity("3.26",
                    lambda c: 4 * I_(c, c.t**-2 * c.d2 * (c.T**2 + c.Bc) * c.d0),
                    lambda c: -4 * I_(c, c.t**-2 * (c.T**2 + c.Bc) * c.d1**2) + 2 * I_(c, c.h2 * c.d0**2),
                    note="exact form -4 int h (v')^2 + 2 int h'' v^2 with h = t^-2 (T^2 + (n-2)T + b)",
                    explicit_rhs=lambda c: -4 * c.tau**2 * I_(c, c.t**-2 * c.d1**2)
                    - 4 * I_(c, c.b * c.t**-2 * c.d1**2) + 2 * I_(c, c.tb2 * c.d0**2),
                    envelope=_envelope_326),
        IbpIdentity("3.27",
                    lambda c: 4 * I_(c, c.t**-2 * c.d2 * (-c.lam) * c.d0),
                    lambda c: 4 * c.lam * I_(c, c.t**-2 * c.d1**2) - 12 * c.lam * I_(c, c.t**-4 * c.d0**2),
                    note="coefficient of the t^-4 term is -12",
                    printed_rhs=lambda c: 4 * c.lam * I_(c, c.t**-2 * c.d1**2) - 24 * c.lam * I_(c, c.t**-4 * c.d0**2)),
        IbpIdentity("3.28",
                    lambda c: 4 * I_(c, c.t**-2 * c.T**2 * c.d0 * (c.Bc - c.lam) * c.d0),
                    lambda c: 4 * (c.n - 2) * I_(c, c.t**-2 * c.T**3 * c.d0**2)
                    + 4 * I_(c, c.t**-2 * c.T**2 * c.b * c.d0**2)
                    - 4 * c.lam * I_(c, c.t**-2 * c.T**2 * c.d0**2),
                    note="the b term carries T^2",
                    printed_rhs=lambda c: 4 * (c.n - 2) * I_(c, c.t**-2 * c.T**3 * c.d0**2)
                    + 4 * I_(c, c.t**-2 * c.T * c.b * c.d0**2)
                    - 4 * c.lam * I_(c, c.t**-2 * c.T**2 * c.d0**2)),
        IbpIdentity("3.29",
                    lambda c: 4 * I_(c, c.t**-2 * c.Bc * c.d0 * (-c.lam) * c.d0),
                    lambda c: -4 * c.lam * I_(c, c.t**-2 * c.Bc * c.d0**2)),
        IbpIdentity("3.30",
                    lambda c: 8 * I_(c, c.t**-2 * c.T * c.d1 * (-2 * c.t**-2 * c.tau * c.d0 + c.N2a * c.d1)),
                    lambda c: c.tau**2 * I_(c, (-32 * c.t**-5 - 80 * c.t**-6) * c.d0**2)
                    + 8 * I_(c, c.t**-2 * c.T * c.N2a * c.d1**2),
                    note="exact; no remainder"),
        IbpIdentity("3.31",
                    lambda c: 4 * I_(c, -2 * c.t**-4 * c.tau * c.d0 * c.N2a * c.d1),
                    lambda c: -16 * c.tau * I_(c, c.t**-5 * c.N2a * c.d0**2) + 4 * c.tau * I_(c, c.t**-4 * c.a1 * c.d0**2),
                    note="both terms carry a factor tau; exact",
                    printed_rhs=lambda c: -16 * I_(c, c.t**-5 * c.N2a * c.d0**2) + 4 * I_(c, c.t**-4 * c.a1 * c.d0**2)),
    ]
    return {ident.tag: ident for ident in cat}


def _envelope_326(c: EnergyContext) -> float:
    """Bound on (exact - explicit) for 3.26 from the closed forms of T."""
    tau, n2 = c.tau, abs(c.n - 2)
    at = np.abs(c.t)
    w1 = 16 * tau**2 * at**-3 + 16 * tau**2 * at**-4 + 4 * n2 * tau * (at**-2 + 2 * at**-3)
    w0 = tau**2 * (6 * at**-4 + 48 * at**-5 + 80 * at**-6) + n2 * tau * (6 * at**-4 + 24 * at**-5)
    return c.integral(w1 * c.d1**2) + 2 * c.integral(w0 * c.d0**2)


IBP_CATALOG: dict[str, IbpIdentity] = _catalog()
I_IDENTITIES = tuple(f"3.{j}" for j in range(11, 23))
J_IDENTITIES = ("3.26", "3.27", "3.28", "3.29", "3.30", "3.31")


@dataclass(frozen=True)
class IdentityResult:
    tag: str
    lhs: float
    rhs: float
    gap: float
    explicit: float | None = None
    residual: float | None = None
    envelope: float | None = None
    printed_rhs: float | None = None

    @property
    def envelope_ok(self) -> bool | None:
        if self.envelope is None:
            return None
        return abs(self.residual) <= self.envelope * (1 + 1e-9) + 1e-12 * max(abs(self.lhs), 1.0)

    @property
    def printed_gap(self) -> float | None:
        if self.printed_rhs is None:
            return None
        return abs(self.lhs - self.printed_rhs) / max(abs(self.lhs), 1.0)


def ibp_identity(tag: str, v: ModeFunction | EnergyContext, op: ConjugatedOperator | None = None,
                 grid: RadialGrid | None = None) -> IdentityResult:
    if tag not in IBP_CATALOG:
        raise KeyError(f"unknown identity {tag!r}; catalog has {sorted(IBP_CATALOG)}")
    ctx = v if isinstance(v, EnergyContext) else energy_context(v, op, grid)
    ident = IBP_CATALOG[tag]
    lhs, rhs = ident.lhs(ctx), ident.rhs(ctx)
    gap = abs(lhs - rhs) / max(abs(lhs), 1.0)
    explicit = residual = env = None
    if ident.explicit_rhs is not None:
        explicit = ident.explicit_rhs(ctx)
        residual = lhs - explicit
        env = ident.envelope(ctx)
    printed = ident.printed_rhs(ctx) if ident.printed_rhs is not None else None
    return IdentityResult(tag, lhs, rhs, gap, explicit, residual, env, printed)


# --------------------------------------------------------------------------
# Energies
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class EnergyValues:
    definition: float
    expansion: float
    integrated: float


def energy_I(v: ModeFunction, op: ConjugatedOperator, grid: RadialGrid | None = None) -> EnergyValues:
    ctx = energy_context(v, op, grid)
    dp = apply_delta_tau(v, op).values(ctx.t)
    dm = apply_delta_tau_minus(v, op).values(ctx.t)
    definition = ctx.integral(dp**2) - ctx.integral(dm**2)
    expansion = 4 * ctx.integral(ctx.even * ctx.odd)
    integrated = sum(IBP_CATALOG[tag].rhs(ctx) for tag in I_IDENTITIES)
    return EnergyValues(definition, expansion, integrated)


def _j_squares(c: EnergyContext) -> float:
    t2 = c.t**-2
    return 2 * c.integral(t2 * (c.d2**2 + 4 * c.T**2 * c.d1**2 + 4 * c.t**-4 * c.tau**2 * c.d0**2
                                + c.T**4 * c.d0**2 + c.N2a**2 * c.d1**2 + c.Bc**2 * c.d0**2
                                + c.lam**2 * c.d0**2))


def energy_J(v: ModeFunction, op: ConjugatedOperator, grid: RadialGrid | None = None) -> EnergyValues:
    ctx = energy_context(v, op, grid)
    dp = apply_delta_tau(v, op).values(ctx.t)
    dm = apply_delta_tau_minus(v, op).values(ctx.t)
    t2 = ctx.t**-2
    definition = ctx.integral(t2 * dp**2) + ctx.integral(t2 * dm**2)
    expansion = 2 * ctx.integral(t2 * (ctx.even**2 + ctx.odd**2))
    integrated = _j_squares(ctx) + sum(IBP_CATALOG[tag].rhs(ctx) for tag in J_IDENTITIES)
    return EnergyValues(definition, expansion, integrated)


def I_coefficients(c: EnergyContext) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise (P0, P1) with I = int P0 v^2 + int P1 (v')^2 after integration by parts."""
    tau, t, T = c.tau, c.t, c.T
    P1 = 16 * tau * t**-2 - 2 * c.a1
    P0 = (-24 * tau * t**-4 + 16 * tau * T**2 * t**-2 + 8 * tau * c.N2a * T * t**-2
          - 2 * c.a1 * T**2 - 4 * (-2 * (c.n - 2) * tau * t**-2 + c.b1) * T
          - 2 * (-2 * (c.n - 2) * t**-2 * tau + c.b1) * c.N2a - 2 * c.Bc * c.a1 + 2 * c.lam * c.a1)
    return P0, P1


@dataclass(frozen=True)
class LowerBoundI:
    I: float
    main: float
    envelope: float

    @property
    def holds(self) -> bool:
        return self.I >= self.main - self.envelope - 1e-9 * max(abs(self.I), 1.0)

    @property
    def holds_without_envelope(self) -> bool:
        return self.I >= self.main - 1e-9 * max(abs(self.I), 1.0)


def energy_I_lower_bound(v: ModeFunction, op: ConjugatedOperator, coefficient: float = 15.0,
                         grid: RadialGrid | None = None) -> LowerBoundI:
    """I against coefficient*(tau^3 int t^-2 v^2 + tau int t^-2 v'^2) + 2 lam int a' v^2.

    The envelope collects the negative parts of the exact pointwise remainder,
    so it is explicit rather than an O-symbol.
    """
    ctx = energy_context(v, op, grid)
    I_def = energy_I(v, op, grid).definition
    t2 = ctx.t**-2
    main = (coefficient * ctx.tau**3 * ctx.integral(t2 * ctx.d0**2)
            + coefficient * ctx.tau * ctx.integral(t2 * ctx.d1**2)
            + 2 * ctx.lam * ctx.integral(ctx.a1 * ctx.d0**2))
    P0, P1 = I_coefficients(ctx)
    r0 = P0 - coefficient * ctx.tau**3 * t2 - 2 * ctx.lam * ctx.a1
    r1 = P1 - coefficient * ctx.tau * t2
    envelope = ctx.integral(np.maximum(-r0, 0) * ctx.d0**2) + ctx.integral(np.maximum(-r1, 0) * ctx.d1**2)
    return LowerBoundI(I_def, main, envelope)


# --------------------------------------------------------------------------
# Combined lower bound
# --------------------------------------------------------------------------

def second_order_terms(ctx: EnergyContext) -> dict[str, float]:
    """Squared per-mode norms ||t^-1 d^j Omega^alpha v||^2 for j + |alpha| <= 2."""
    t2 = ctx.t**-2
    v2 = ctx.integral(t2 * ctx.d0**2)
    d12 = ctx.integral(t2 * ctx.d1**2)
    d22 = ctx.integral(t2 * ctx.d2**2)
    lam = ctx.lam
    return {
        "j0a0": v2, "j1a0": d12, "j0a1": lam * v2,
        "j2a0": d22, "j1a1": lam * d12, "j0a2": lam**2 * v2,
    }


ORDER = {"j0a0": 0, "j1a0": 1, "j0a1": 1, "j2a0": 2, "j1a1": 2, "j0a2": 2}


def combined_terms(v: ModeFunction, op: ConjugatedOperator, grid: RadialGrid | None = None) -> dict:
    """Every quantity entering the tau I + J argument, for one profile and one tau."""
    if op.tau <= 1:
        raise ValueError("the combined bound is stated for tau > 1")
    ctx = energy_context(v, op, grid)
    _check_support(v, op.t0)
    dp = apply_delta_tau(v, op).values(ctx.t)
    dm = apply_delta_tau_minus(v, op).values(ctx.t)
    t2 = ctx.t**-2
    norm_dp2 = ctx.integral(dp**2)
    I = norm_dp2 - ctx.integral(dm**2)
    J = ctx.integral(t2 * dp**2) + ctx.integral(t2 * dm**2)
    sq = second_order_terms(ctx)
    tau = op.tau
    rhs_335 = (tau**4 * sq["j0a0"] + tau**2 * sq["j1a0"] + tau**2 * sq["j0a1"]
               + sq["j2a0"] + sq["j0a2"] + sq["j1a1"])
    weighted = {key: tau ** (3 - 2 * ORDER[key]) * val for key, val in sq.items()}
    norm_form = {key: tau ** ((3 - 2 * ORDER[key]) / 2) * math.sqrt(val) for key, val in sq.items()}
    U = (49 / 4 * tau**4 - 7 * tau**2 * ctx.lam + ctx.lam**2) * sq["j0a0"]
    return {
        "tau": tau, "I": I, "J": J, "norm_dp2": norm_dp2,
        "energy_lhs": tau * I + J, "energy_rhs": (tau + 1) * norm_dp2,
        "rhs_335": rhs_335, "weighted": weighted, "norm_form": norm_form, "U": U,
        "U_scale": 49 / 4 * tau**4 * sq["j0a0"] + ctx.lam**2 * sq["j0a0"],
    }


def multimode_U(modes: list[ModeFunction], tau: float, grid: RadialGrid) -> dict[str, float]:
    """U = 49/4 tau^4 A - 7 tau^2 B + C for an orthogonal sum of modes.

    A = int t^-2 |v|^2, B = sum_j int t^-2 |Omega_j v|^2, C = int t^-2 |Delta_omega v|^2.
    Cauchy-Schwarz gives B <= sqrt(A C), hence U >= (7/2 tau^2 sqrt(A) - sqrt(C))^2 >= 0.
    """
    A = B = C = 0.0
    t2 = grid.t**-2
    for f in modes:
        v2 = float(np.sum(grid.weights * t2 * f.values(grid.t) ** 2))
        lam = float(f.lam)
        A += v2
        B += lam * v2
        C += lam**2 * v2
    U = 49 / 4 * tau**4 * A - 7 * tau**2 * B + C
    return {"A": A, "B": B, "C": C, "U": U, "cs_slack": math.sqrt(A * C) - B,
            "scale": 49 / 4 * tau**4 * A + C}
