"""Explicit solutions, eigenfunction families, manufactured potentials and test bumps."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .exponents import INF, PotentialNorms, as_exponent, is_inf
from .polarweights import (
    R0_DEFAULT,
    Bump,
    Eigen,
    ModeFunction,
    PowerSum,
    RadialGrid,
    apply_polyharmonic_mode,
    log_lp_norm,
    power_rule,
    safe_log_abs,
)

__all__ = [
    "PotentialNorms", "SolutionSpec", "ManufacturedPotential", "polyharmonic_power", "harmonic_power",
    "eigen_solution", "manufactured", "bump", "bump_family", "potential_lp_norm",
    "write_potential_csv", "read_potential_csv", "sup_normalize",
]

KINDS = ("harmonic_power", "polyharmonic_power", "eigen", "manufactured", "bump")


@dataclass(frozen=True)
class SolutionSpec:
    kind: str
    params: Mapping[str, float] = field(default_factory=dict)
    vanishing_order: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown solution kind {self.kind!r}; expected one of {KINDS}")

    def to_config(self) -> dict[str, str]:
        out = {"kind": self.kind}
        out.update({k: repr(v) for k, v in self.params.items()})
        if self.vanishing_order is not None:
            out["vanishing_order"] = repr(self.vanishing_order)
        return out

    def build(self, n: int, m: int = 1) -> ModeFunction:
        p = dict(self.params)
        k = int(p.pop("k", 0))
        if self.kind == "harmonic_power":
            return harmonic_power(k, n)
        if self.kind == "polyharmonic_power":
            return polyharmonic_power(p["a"], k, n, m)[0]
        if self.kind == "eigen":
            return eigen_solution(p["lam"], k, n, m)[0]
        if self.kind == "bump":
            return bump(p["center"], p["width"], p.get("eta", 0.0), k, n)
        raise ValueError("manufactured specs carry a potential; build them with manufactured()")


# --------------------------------------------------------------------------
# Closed forms
# --------------------------------------------------------------------------

def polyharmonic_power(a: float, k: int, n: int, m: int) -> tuple[ModeFunction, list[float]]:
    """r^a on mode k and the chain c_j with Delta^m(r^a Y_k) = (prod c_j) r^{a-2m} Y_k."""
    chain = [power_rule(a, k, n, shift=2 * j) for j in range(m)]
    return ModeFunction(k, n, PowerSum(((1.0, float(a)),))), chain


def harmonic_power(k: int, n: int) -> ModeFunction:
    return polyharmonic_power(k, k, n, 1)[0]


def eigen_solution(lam: float, k: int, n: int, m: int = 1) -> tuple[ModeFunction, float]:
    """Regular solution of Delta u = -lam u on mode k; V0 = -(-lam)^m solves Delta^m u + V0 u = 0."""
    if lam <= 0:
        raise ValueError("eigenvalue must be positive")
    return ModeFunction(k, n, Eigen(float(lam), k, n)), -((-float(lam)) ** m)


def bump(center: float, width: float, eta: float = 0.0, k: int = 0, n: int = 3,
         t0: float = math.log(R0_DEFAULT), amplitude: float = 1.0) -> ModeFunction:
    """Compactly supported mollifier profile on |t - center| < width."""
    if center + width >= t0:
        raise ValueError(f"bump support [{center - width:g}, {center + width:g}] must stay below t0={t0:g}")
    return ModeFunction(k, n, Bump(center, width, eta, amplitude))


def bump_family(size: int = 12, seed: int = 0, centers=(-14.0, -7.0), widths=(1.5, 3.0),
                etas=(0.0, 1.0), ks=(0, 1, 2, 3), n: int = 3,
                t0: float = math.log(R0_DEFAULT)) -> list[ModeFunction]:
    """Deterministic random family; members cycle through ``ks`` and the first is radial and non-oscillating."""
    rng = np.random.default_rng(seed)
    fam = []
    for i in range(size):
        w = float(rng.uniform(*widths))
        c = float(rng.uniform(centers[0], min(centers[1], t0 - w - 1e-9)))
        eta = 0.0 if i == 0 else float(rng.uniform(*etas))
        fam.append(bump(c, w, eta, ks[i % len(ks)], n, t0))
    return fam


def sup_normalize(u: ModeFunction, t_max: float = 0.0, num: int = 4001,
                  t_min: float = -12.0) -> tuple[ModeFunction, float]:
    """Rescale so sup_{r <= e^t_max} |f| = 1; returns the scaled function and the factor applied."""
    from .polarweights import Scaled
    t = np.linspace(t_min, t_max, num)
    peak = float(np.max(np.abs(u.values(t))))
    if peak == 0:
        raise ValueError("cannot normalize a function vanishing on the ball")
    return u.with_profile(Scaled(u.profile, 1.0 / peak)), 1.0 / peak


# --------------------------------------------------------------------------
# Manufactured potentials
# --------------------------------------------------------------------------

def potential_lp_norm(values: np.ndarray, grid: RadialGrid, n: int, s) -> float:
    """||V||_{L^s(dx)} of a radial potential with normalized angular measure."""
    s = as_exponent(s)
    la = safe_log_abs(values)
    if is_inf(s):
        return math.exp(log_lp_norm(la, grid.weights, math.inf))
    sf = float(s)
    return math.exp(log_lp_norm(la + n * grid.t / sf, grid.weights, sf))


@dataclass(frozen=True, eq=False)
class ManufacturedPotential:
    """Sampled radial V0 with the region on which it was solved for."""

    t: np.ndarray
    values: np.ndarray
    region: np.ndarray
    n: int
    m: int

    def __call__(self, t) -> np.ndarray:
        """Linear interpolation (exact at grid nodes), zero outside the sampled range."""
        t = np.asarray(t, dtype=float)
        return np.interp(t, self.t, self.values, left=0.0, right=0.0)

    def norm(self, s) -> float:
        dt = self.t[1] - self.t[0]
        w = np.full(self.t.size, dt)
        w[0] = w[-1] = dt / 2
        return potential_lp_norm(self.values, RadialGrid(self.t, w), self.n, s)

    def norms(self, s=INF) -> PotentialNorms:
        return PotentialNorms({}, self.norm(s), s)


def manufactured(u: ModeFunction, m: int, grid: RadialGrid, V_alpha: Mapping[int, Callable] | None = None,
                 floor: float | None = None, region: tuple[float, float] | None = None) -> ManufacturedPotential:
    """V0 = -(Delta^m u + sum V_a D^a u)/u, pointwise on the grid.

    With ``region`` given, |u| must stay above ``floor`` there (else ValueError)
    and V0 is set to zero outside. Without it, the region is {|u| >= floor}
    and floor defaults to 1e-6 max|u|.
    """
    t = grid.t
    f = u.values(t)
    peak = float(np.max(np.abs(f)))
    floor = 1e-6 * peak if floor is None else float(floor)
    if region is None:
        mask = (np.abs(f) >= floor) & (f != 0)
    else:
        mask = (t >= region[0]) & (t <= region[1])
        if np.any(np.abs(f[mask]) < floor) or np.any(f[mask] == 0):
            raise ValueError("u falls below the floor inside the requested region")
    image = apply_polyharmonic_mode(u, m).values(t)  # r^{2m} Delta^m u
    total = image.copy()
    if V_alpha:
        d = u.derivs(t, max(V_alpha))
        for a, Va in V_alpha.items():
            total += np.exp((2 * m - a) * t) * Va(t) * d[a]
    V = np.zeros_like(t)
    V[mask] = -total[mask] / (f[mask] * np.exp(2 * m * t[mask]))
    return ManufacturedPotential(t, V, mask, u.n, m)


def write_potential_csv(path, pot: ManufacturedPotential) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["t", "V0"])
        for a, b in zip(pot.t, pot.values):
            wr.writerow([repr(float(a)), repr(float(b))])


def read_potential_csv(path, n: int, m: int) -> ManufacturedPotential:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    data = np.array([[float(a), float(b)] for a, b in rows[1:]])
    return ManufacturedPotential(data[:, 0], data[:, 1], data[:, 1] != 0, n, m)
