import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from carleman_lab.exponents import INF
from carleman_lab.polarweights import ModeFunction, PowerSum, RadialGrid, apply_polyharmonic_mode
from carleman_lab.solutions import (
    SolutionSpec,
    bump,
    bump_family,
    eigen_solution,
    harmonic_power,
    manufactured,
    polyharmonic_power,
    potential_lp_norm,
    read_potential_csv,
    sup_normalize,
    write_potential_csv,
)


@given(st.integers(0, 6), st.integers(2, 8))
def test_harmonic_power_is_harmonic(k, n):
    u = harmonic_power(k, n)
    t = np.linspace(-4, -1, 7)
    assert np.all(np.abs(apply_polyharmonic_mode(u, 1).values(t)) <= 1e-12 * np.exp(k * t))


def test_polyharmonic_chain_product():
    u, chain = polyharmonic_power(5.0, 1, 3, 2)
    t = np.array([-1.5])
    assert apply_polyharmonic_mode(u, 2).values(t)[0] == pytest.approx(np.prod(chain) * math.exp(5 * t[0]))
    # r^2 is biharmonic but not harmonic in three dimensions
    _, c2 = polyharmonic_power(2.0, 0, 3, 2)
    assert c2[0] != 0 and c2[1] == 0


@pytest.mark.parametrize("m", [1, 2])
def test_eigen_manufactured_recovers_constant(m):
    u, V0 = eigen_solution(9.0, 1, 3, m)
    assert V0 == -((-9.0) ** m)
    grid = RadialGrid.uniform(-8.0, -0.5, 3001)
    pot = manufactured(u, m, grid, region=(-2.5, -0.5))
    vals = pot.values[pot.region]
    np.testing.assert_allclose(vals, V0, rtol=1e-8)
    assert np.all(pot.values[~pot.region] == 0)


def test_manufactured_one_plus_r_squared():
    # u = 1 + r^2 in three dimensions: Delta u = 6, so V0 = -6 / (1 + r^2)
    u = ModeFunction(0, 3, PowerSum(((1.0, 0.0), (1.0, 2.0))))
    grid = RadialGrid.uniform(-6.0, -0.01, 801)
    pot = manufactured(u, 1, grid)
    r2 = np.exp(2 * grid.t)
    np.testing.assert_allclose(pot.values, -6 / (1 + r2), rtol=1e-12)


def test_manufactured_refuses_zero_crossing_in_region():
    u, _ = eigen_solution(400.0, 0, 3)  # first zero of sin(20 r)/(20 r) at r = pi/20
    grid = RadialGrid.uniform(-4.0, -0.1, 2001)
    with pytest.raises(ValueError):
        manufactured(u, 1, grid, floor=1e-2, region=(-3.0, -0.1))


def test_manufactured_norm_and_csv_roundtrip(tmp_path):
    u, V0 = eigen_solution(4.0, 0, 3)
    grid = RadialGrid.uniform(-3.0, -0.5, 501)
    pot = manufactured(u, 1, grid, region=(-3.0, -0.5))
    assert pot.norm(INF) == pytest.approx(4.0, rel=1e-8)
    path = tmp_path / "v.csv"
    write_potential_csv(path, pot)
    back = read_potential_csv(path, 3, 1)
    np.testing.assert_array_equal(back.values, pot.values)
    np.testing.assert_allclose(back(grid.t[:10]), pot(grid.t[:10]))


def test_potential_lp_norm_of_constant():
    # ||2||_{L^3(B_1)} with normalized angular measure: (8 * int_0^1 r^2 dr)^(1/3)
    grid = RadialGrid.uniform(-40.0, -1e-9, 200001)
    assert potential_lp_norm(np.full(grid.t.size, 2.0), grid, 3, 3) == pytest.approx((8 / 3) ** (1 / 3), rel=1e-6)


def test_bump_family_deterministic_and_admissible():
    a, b = bump_family(8, seed=4), bump_family(8, seed=4)
    assert [f.profile for f in a] == [f.profile for f in b]
    assert a[0].k == 0 and a[0].profile.eta == 0
    assert all(f.support[1] < -3.0 for f in a)
    assert [f.k for f in a[:4]] == [0, 1, 2, 3]
    with pytest.raises(ValueError):
        bump(-3.5, 1.0)


def test_sup_normalize():
    u, scale = sup_normalize(harmonic_power(2, 3), t_max=0.0)
    assert np.max(np.abs(u.values(np.linspace(-12, 0, 4001)))) == pytest.approx(1.0)
    assert scale == pytest.approx(1.0)


def test_solution_spec_config_roundtrip():
    spec = SolutionSpec("eigen", {"lam": 16.0, "k": 2}, vanishing_order=2.0)
    cfg = spec.to_config()
    assert cfg["kind"] == "eigen" and float(cfg["vanishing_order"]) == 2.0
    u = spec.build(3)
    assert u.k == 2 and u.profile.lam == 16.0
    with pytest.raises(ValueError):
        SolutionSpec("nonsense")
