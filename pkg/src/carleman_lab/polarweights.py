"""Log-polar coordinates, the Carleman weight, mode functions and weighted norms.

Functions of the form u(x) = f(r) Y_k(omega) are represented by their radial
profile in t = log r. With r^{-n} dx = dt domega and the angular measure
normalized so that the integral of |Y_k|^2 is 1, every per-mode norm reduces to
a one-dimensional integral in t.

Profiles expose ``derivs(t, order)``, an array whose row j is the j-th
t-derivative. Closed forms differentiate exactly (Taylor jets or recurrences);
sampled profiles use centered stencils.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from math import comb
from typing import Callable, Sequence

import numpy as np
from scipy.special import hyp0f1, logsumexp

from .jets import Jet
from .stencils import grid_derivatives, stencil_half_width

R0_DEFAULT = math.exp(-3.0)
T_MIN_DEFAULT = -40.0
T_MAX_DEFAULT = -3.0
POINTS_DEFAULT = 4096


class MarginError(ValueError):
    """Sampled data reaches into the stencil margin at the grid edge."""


# --------------------------------------------------------------------------
# Carleman weight
# --------------------------------------------------------------------------

def phi(r):
    """phi(r) = log r + log((log r)^2)."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0) or np.any(r >= 1):
        raise ValueError("phi is defined for 0 < r < 1")
    t = np.log(r)
    out = t + 2.0 * np.log(np.abs(t))
    return float(out) if out.ndim == 0 else out


def phi_t(t):
    """phi in the log-radius variable."""
    t = np.asarray(t, dtype=float)
    if np.any(t >= 0):
        raise ValueError("phi_t needs t < 0")
    out = t + 2.0 * np.log(np.abs(t))
    return float(out) if out.ndim == 0 else out


def phi_prime(r):
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0) or np.any(r >= 1):
        raise ValueError("phi_prime is defined for 0 < r < 1")
    out = 1.0 / r + 2.0 / (r * np.log(r))
    return float(out) if out.ndim == 0 else out


def angular_eigenvalue(k: int, n: int) -> int:
    if k < 0 or n < 2:
        raise ValueError("need k >= 0 and n >= 2")
    return k * (k + n - 2)


# --------------------------------------------------------------------------
# Profiles
# --------------------------------------------------------------------------

class Profile:
    """Radial profile f(t). ``support`` is a closed interval outside which f = 0."""

    support: tuple[float, float] = (-math.inf, math.inf)

    def derivs(self, t, order: int) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, t) -> np.ndarray:
        return self.derivs(t, 0)[0]

    def describe(self) -> str:
        return type(self).__name__


def _as_t(t) -> np.ndarray:
    return np.atleast_1d(np.asarray(t, dtype=float))


@dataclass(frozen=True)
class PowerSum(Profile):
    """f(t) = sum_i c_i exp(a_i t), i.e. a combination of powers r^{a_i}."""

    terms: tuple[tuple[float, float], ...]

    def derivs(self, t, order):
        t = _as_t(t)
        out = np.zeros((order + 1, t.size))
        for c, a in self.terms:
            e = c * np.exp(a * t)
            for j in range(order + 1):
                out[j] += a**j * e
        return out

    def describe(self):
        return "PowerSum(" + " + ".join(f"{c:g}*r^{a:g}" for c, a in self.terms) + ")"


def _mollifier_jet(s: Jet) -> Jet:
    """exp(-1/(1 - s^2)) as a jet."""
    return (-1.0 / (1.0 - s * s)).exp()


# exp(-1/x) below exp(-600) is treated as exactly zero
_MOLLIFIER_FLOOR = 1.0 / 600.0


@dataclass(frozen=True)
class Bump(Profile):
    """exp(-1/(1 - ((t - c)/w)^2)) cos(eta t) on |t - c| < w, zero elsewhere."""

    center: float
    width: float
    eta: float = 0.0
    amplitude: float = 1.0

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError("bump width must be positive")

    @property
    def support(self):
        return (self.center - self.width, self.center + self.width)

    def derivs(self, t, order):
        t = _as_t(t)
        out = np.zeros((order + 1, t.size))
        s = (t - self.center) / self.width
        live = 1.0 - s * s > _MOLLIFIER_FLOOR
        if not np.any(live):
            return out
        tj = Jet.variable(t[live], order)
        sj = (tj - self.center) * (1.0 / self.width)
        f = _mollifier_jet(sj)
        if self.eta != 0.0:
            f = f * (tj * self.eta).cos()
        out[:, live] = self.amplitude * f.derivatives()
        return out

    def describe(self):
        return f"Bump(center={self.center:g}, width={self.width:g}, eta={self.eta:g})"


def _smooth_step_jet(x: Jet) -> Jet:
    a = (-1.0 / x).exp()
    b = (-1.0 / (1.0 - x)).exp()
    return a / (a + b)


def smooth_step(x, order: int = 0) -> np.ndarray:
    """C-infinity step from 0 (x <= 0) to 1 (x >= 1) with derivative rows."""
    x = _as_t(x)
    out = np.zeros((order + 1, x.size))
    live = (x > _MOLLIFIER_FLOOR) & (x < 1.0 - _MOLLIFIER_FLOOR)
    out[0, (x >= 1.0 - _MOLLIFIER_FLOOR)] = 1.0
    if np.any(live):
        out[:, live] = _smooth_step_jet(Jet.variable(x[live], order)).derivatives()
    return out


@dataclass(frozen=True)
class Cutoff(Profile):
    """Smooth cutoff equal to 1 on [lo, hi], 0 outside [lo - ramp, hi + ramp]."""

    lo: float
    hi: float
    ramp: float

    @property
    def support(self):
        return (self.lo - self.ramp, self.hi + self.ramp)

    def derivs(self, t, order):
        t = _as_t(t)
        up = smooth_step((t - self.lo + self.ramp) / self.ramp, order)
        down = smooth_step((self.hi + self.ramp - t) / self.ramp, order)
        scale_up = np.array([self.ramp ** (-j) for j in range(order + 1)])[:, None]
        scale_dn = np.array([(-1.0 / self.ramp) ** j for j in range(order + 1)])[:, None]
        return _leibniz(up * scale_up, down * scale_dn, order)

    def describe(self):
        return f"Cutoff(lo={self.lo:g}, hi={self.hi:g}, ramp={self.ramp:g})"


def _leibniz(a: np.ndarray, b: np.ndarray, order: int) -> np.ndarray:
    out = np.zeros((order + 1, a.shape[1]))
    for q in range(order + 1):
        for i in range(q + 1):
            out[q] += comb(q, i) * a[i] * b[q - i]
    return out


@dataclass(frozen=True)
class Product(Profile):
    left: Profile
    right: Profile

    @property
    def support(self):
        lo = max(self.left.support[0], self.right.support[0])
        hi = min(self.left.support[1], self.right.support[1])
        return (lo, hi)

    def derivs(self, t, order):
        return _leibniz(self.left.derivs(t, order), self.right.derivs(t, order), order)

    def describe(self):
        return f"{self.left.describe()}*{self.right.describe()}"


@dataclass(frozen=True)
class Scaled(Profile):
    base: Profile
    factor: float

    @property
    def support(self):
        return self.base.support

    def derivs(self, t, order):
        return self.factor * self.base.derivs(t, order)

    def describe(self):
        return f"{self.factor:g}*{self.base.describe()}"


@dataclass(frozen=True)
class Eigen(Profile):
    """Regular radial solution of f'' + (n-1)/r f' + (lam - k(k+n-2)/r^2) f = 0.

    Normalized as f = r^k G(sqrt(lam) r) with G(0) = 1; G is a confluent
    hypergeometric limit function (a rescaled Bessel function).
    """

    lam: float
    k: int
    n: int

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("eigenvalue must be positive")

    def derivs(self, t, order):
        t = _as_t(t)
        k, n, lam = self.k, self.n, self.lam
        nu = k + n / 2.0 - 1.0
        r = np.exp(t)
        z = -lam * r * r / 4.0
        rk = np.exp(k * t)
        g0 = hyp0f1(nu + 1.0, z)
        g1 = hyp0f1(nu + 2.0, z)
        out = np.zeros((order + 1, t.size))
        out[0] = rk * g0
        if order >= 1:
            out[1] = k * out[0] - rk * (lam * r * r / (2.0 * (nu + 1.0))) * g1
        kappa = float(angular_eigenvalue(k, n))
        e2 = lam * r * r
        for j in range(0, order - 1):
            acc = sum(comb(j, i) * 2.0 ** (j - i) * out[i] for i in range(j + 1))
            out[j + 2] = -(n - 2) * out[j + 1] + kappa * out[j] - e2 * acc
        return out

    def describe(self):
        return f"Eigen(lam={self.lam:g}, k={self.k}, n={self.n})"


CoeffFn = Callable[[Jet], Sequence[Jet]]


@dataclass(frozen=True)
class LinearOp(Profile):
    """Profile of sum_j c_j(t) f^(j)(t) for coefficient functions given as jets."""

    base: Profile
    coeffs: CoeffFn
    degree: int
    label: str = "L"

    @property
    def support(self):
        return self.base.support

    def derivs(self, t, order):
        t = _as_t(t)
        fd = self.base.derivs(t, order + self.degree)
        cj = [c.derivatives() for c in self.coeffs(Jet.variable(t, order))]
        out = np.zeros((order + 1, t.size))
        for j, c in enumerate(cj):
            for q in range(order + 1):
                for i in range(q + 1):
                    if np.any(c[i]):
                        out[q] += comb(q, i) * c[i] * fd[j + q - i]
        return out

    def describe(self):
        return f"{self.label}[{self.base.describe()}]"


def constant_coeffs(poly: Sequence[float]) -> CoeffFn:
    """Coefficient function for sum_j poly[j] d^j with constant coefficients."""
    def fn(tj: Jet):
        return [Jet.constant(c, tj) for c in poly]
    return fn


@dataclass(frozen=True, eq=False)
class Sampled(Profile):
    """Profile known only on a uniform t-grid; derivatives from centered stencils.

    ``compact`` declares that the samples vanish near both grid ends, so
    stencil images are valid everywhere; otherwise margins become NaN.
    """

    t: np.ndarray
    values: np.ndarray
    compact: bool = False
    accuracy: int = 8
    name: str = "Sampled"

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.shape != v.shape or t.ndim != 1:
            raise ValueError("t and values must be equal-length 1-D arrays")
        if np.any(np.diff(t) <= 0):
            raise ValueError("t must be strictly increasing")
        h = np.diff(t)
        if not np.allclose(h, h[0], rtol=1e-9, atol=0):
            raise ValueError("sampled profiles need a uniform grid")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", v)

    @property
    def h(self) -> float:
        return float(self.t[1] - self.t[0])

    @property
    def support(self):
        live = np.nonzero(np.nan_to_num(self.values) != 0)[0]
        if live.size == 0:
            return (float(self.t[0]), float(self.t[0]))
        return (float(self.t[live[0]]), float(self.t[live[-1]]))

    def _index(self, t) -> np.ndarray:
        t = _as_t(t)
        idx = np.rint((t - self.t[0]) / self.h).astype(int)
        if np.any(idx < 0) or np.any(idx >= self.t.size) or not np.allclose(self.t[idx], t, atol=1e-9 * self.h):
            raise ValueError("sampled profile evaluated off its own grid")
        return idx

    def grid_derivs(self, order: int) -> np.ndarray:
        half = stencil_half_width(max(order, 1), self.accuracy) if order else 0
        if self.compact and half:
            edge = np.concatenate([self.values[:half], self.values[-half:]])
            if np.any(edge != 0):
                raise MarginError("compact samples reach the stencil margin")
        d = grid_derivatives(self.values, self.h, order, self.accuracy)
        if self.compact:
            d = np.nan_to_num(d, nan=0.0)
        return d

    def derivs(self, t, order):
        return self.grid_derivs(order)[:, self._index(t)]

    def describe(self):
        return f"{self.name}(points={self.t.size}, h={self.h:.3g})"


# --------------------------------------------------------------------------
# Mode functions, grids, weights
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ModeFunction:
    k: int
    n: int
    profile: Profile
    support: tuple[float, float] | None = None

    def __post_init__(self):
        if self.k < 0 or self.n < 2:
            raise ValueError("need k >= 0 and n >= 2")
        if self.support is None:
            object.__setattr__(self, "support", tuple(self.profile.support))

    @property
    def lam(self) -> int:
        return angular_eigenvalue(self.k, self.n)

    def values(self, t) -> np.ndarray:
        return self.profile.derivs(t, 0)[0]

    def derivs(self, t, order: int) -> np.ndarray:
        return self.profile.derivs(t, order)

    def with_profile(self, profile: Profile) -> "ModeFunction":
        return ModeFunction(self.k, self.n, profile, None)


@dataclass(frozen=True, eq=False)
class RadialGrid:
    t: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if t.ndim != 1 or t.shape != w.shape or t.size < 2:
            raise ValueError("grid needs matching 1-D arrays")
        if np.any(np.diff(t) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.any(t >= 0):
            raise ValueError("grid must satisfy t < 0 (r < 1)")
        if np.any(w <= 0):
            raise ValueError("quadrature weights must be positive")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, t_min=T_MIN_DEFAULT, t_max=T_MAX_DEFAULT, num=POINTS_DEFAULT) -> "RadialGrid":
        # Trapezoid weights: spectrally accurate for smooth integrands that
        # vanish to all orders at both ends, which covers every compactly
        # supported check in this package.
        t = np.linspace(t_min, t_max, num)
        h = t[1] - t[0]
        w = np.full(num, h)
        w[0] = w[-1] = h / 2.0
        return cls(t, w)

    @classmethod
    def covering(cls, support: tuple[float, float], num: int) -> "RadialGrid":
        lo, hi = support
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError("covering grid needs a finite support")
        return cls.uniform(lo, hi, num)

    @property
    def h(self) -> float:
        return float(self.t[1] - self.t[0])

    def refine(self) -> "RadialGrid":
        return RadialGrid.uniform(self.t[0], self.t[-1], 2 * self.t.size - 1)

    def describe(self) -> str:
        return f"uniform[{self.t[0]:g},{self.t[-1]:g}]x{self.t.size}"


@dataclass(frozen=True)
class WeightSpec:
    """exp(-tau phi) |log r|^(sigma2 + log_power) r^sigma1."""

    tau: float = 0.0
    sigma1: int = 0
    sigma2: int = 0
    log_power: int = 0

    def __post_init__(self):
        if self.tau < 0:
            raise ValueError("tau must be nonnegative")


def log_weight(t, w: WeightSpec) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    return -w.tau * phi_t(t) + w.sigma1 * t + (w.sigma2 + w.log_power) * np.log(np.abs(t))


def measure_shift(t, measure: str, n: int) -> np.ndarray:
    """Log density of the measure relative to dt (r^{-n}dx = dt, dx = r^n dt)."""
    if measure in ("r^-n dx", "dt", "log"):
        return np.zeros_like(np.asarray(t, dtype=float))
    if measure in ("dx", "plain"):
        return n * np.asarray(t, dtype=float)
    raise ValueError(f"unknown measure {measure!r}")


def log_lp_norm(log_abs: np.ndarray, quad_w: np.ndarray, p) -> float:
    """log of (sum_i q_i exp(p * log_abs_i))^(1/p); p = inf gives the max."""
    log_abs = np.asarray(log_abs, dtype=float)
    if math.isinf(float(p)):
        finite = log_abs[np.isfinite(log_abs)]
        return float(finite.max()) if finite.size else -math.inf
    p = float(p)
    if p < 1:
        raise ValueError("p must be >= 1")
    mask = np.isfinite(log_abs)
    if not np.any(mask):
        return -math.inf
    return float(logsumexp(p * log_abs[mask], b=quad_w[mask]) / p)


def safe_log_abs(x: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(np.abs(x))


def default_grid_for(f: ModeFunction, num: int = POINTS_DEFAULT) -> RadialGrid:
    if isinstance(f.profile, Sampled):
        t = f.profile.t
        h = t[1] - t[0]
        w = np.full(t.size, h)
        w[0] = w[-1] = h / 2.0
        return RadialGrid(t, w)
    lo, hi = f.support
    if math.isfinite(lo) and math.isfinite(hi):
        return RadialGrid.covering((lo, hi), num)
    return RadialGrid.uniform(num=num)


def log_weighted_lp_norm(f: ModeFunction, w: WeightSpec, p=2, measure: str = "r^-n dx",
                         grid: RadialGrid | None = None) -> float:
    grid = default_grid_for(f) if grid is None else grid
    _check_on_grid(f, grid)
    vals = f.values(grid.t)
    la = safe_log_abs(vals) + log_weight(grid.t, w)
    if not math.isinf(float(p)):
        la = la + measure_shift(grid.t, measure, f.n) / float(p)
    return log_lp_norm(la, grid.weights, p)


def weighted_lp_norm(f: ModeFunction, w: WeightSpec, p=2, measure: str = "r^-n dx",
                     grid: RadialGrid | None = None) -> float:
    p_f = float(p)
    if not (p_f >= 2 or math.isinf(p_f)):
        raise ValueError("weighted_lp_norm supports p in [2, inf]")
    return math.exp(log_weighted_lp_norm(f, w, p, measure, grid))


def _check_on_grid(f: ModeFunction, grid: RadialGrid) -> None:
    lo, hi = f.support
    tol = 1e-9 * max(1.0, abs(grid.t[0]))
    if lo < grid.t[0] - tol or hi > grid.t[-1] + tol:
        if math.isfinite(lo) and math.isfinite(hi):
            raise ValueError(f"support [{lo:g}, {hi:g}] not inside grid {grid.describe()}")


# --------------------------------------------------------------------------
# Per-mode Laplacian and polyharmonic operator
# --------------------------------------------------------------------------

def power_rule(a: float, k: int, n: int, shift: int = 0) -> float:
    """Coefficient c with r^2 Delta(r^a Y_k) = c r^a Y_k, evaluated at a - shift."""
    b = a - shift
    return b * (b + n - 2) - angular_eigenvalue(k, n)


def polyharmonic_symbol(k: int, n: int, m: int) -> np.ndarray:
    """Ascending coefficients of P(x) = prod_j ((x-2j)^2 + (n-2)(x-2j) - k(k+n-2))."""
    lam = angular_eigenvalue(k, n)
    poly = np.polynomial.Polynomial([1.0])
    for j in range(m):
        x = np.polynomial.Polynomial([-2.0 * j, 1.0])
        poly = poly * (x * x + (n - 2) * x - lam)
    return poly.coef


def _apply_constant_poly(f: ModeFunction, coef: np.ndarray, label: str) -> ModeFunction:
    prof = f.profile
    if isinstance(prof, PowerSum):
        poly = np.polynomial.Polynomial(coef)
        terms = tuple((c * float(poly(a)), a) for c, a in prof.terms)
        return f.with_profile(PowerSum(terms))
    if isinstance(prof, Sampled):
        deg = len(coef) - 1
        acc = max(prof.accuracy, deg + 2 + (deg % 2))
        d = Sampled(prof.t, prof.values, prof.compact, acc).grid_derivs(len(coef) - 1)
        vals = sum(c * d[j] for j, c in enumerate(coef))
        return f.with_profile(Sampled(prof.t, vals, prof.compact, prof.accuracy, name=f"{label}[{prof.name}]"))
    return f.with_profile(LinearOp(prof, constant_coeffs(list(coef)), len(coef) - 1, label))


def apply_laplacian_mode(f: ModeFunction) -> ModeFunction:
    """Profile of r^2 Delta(f Y_k) = f'' + (n-2) f' - k(k+n-2) f."""
    return _apply_constant_poly(f, polyharmonic_symbol(f.k, f.n, 1), "r2Lap")


def apply_polyharmonic_mode(f: ModeFunction, m: int) -> ModeFunction:
    """Profile of r^{2m} Delta^m (f Y_k) via the shifted factorization."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return _apply_constant_poly(f, polyharmonic_symbol(f.k, f.n, m), f"r{2*m}Lap{m}")


# --------------------------------------------------------------------------
# CSV
# --------------------------------------------------------------------------

def write_profile_csv(path, t, values, descriptor: str, value_name: str = "value") -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# {descriptor}\n")
        wr = csv.writer(fh)
        wr.writerow(["t", value_name])
        for a, b in zip(np.asarray(t), np.asarray(values)):
            wr.writerow([repr(float(a)), repr(float(b))])


def read_profile_csv(path) -> tuple[str, np.ndarray, np.ndarray]:
    with open(path, newline="") as fh:
        first = fh.readline()
        descriptor = first[2:].strip() if first.startswith("#") else ""
        rows = list(csv.reader(fh if first.startswith("#") else [first, *fh]))
    data = np.array([[float(a), float(b)] for a, b in rows[1:]])
    return descriptor, data[:, 0], data[:, 1]
