import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from carleman_lab.stencils import centered_weights, fornberg_weights, grid_derivatives, stencil_half_width

from .frozen import D2_ACC4


def test_second_derivative_weights_match_table():
    np.testing.assert_allclose(centered_weights(2, 4), D2_ACC4, rtol=1e-14)


def test_odd_accuracy_rejected():
    with pytest.raises(ValueError):
        centered_weights(1, 3)


@given(st.integers(1, 4), st.sampled_from([2, 4, 6, 8]))
def test_weights_annihilate_low_degree_polynomials(deriv, acc):
    w = np.asarray(centered_weights(deriv, acc))
    half = stencil_half_width(deriv, acc)
    x = np.arange(-half, half + 1, dtype=float)
    for p in range(deriv + acc):
        exact = 0.0 if p != deriv else float(np.prod(np.arange(1, deriv + 1)))
        assert np.dot(w, x**p) == pytest.approx(exact, abs=1e-8 * max(1.0, half**p))


def test_fornberg_nonuniform_nodes():
    x = np.array([0.0, 0.3, 1.0, 1.7])
    c = fornberg_weights(0.5, x, 2)
    f = np.exp(x)
    assert np.dot(c[1], f) == pytest.approx(np.exp(0.5), rel=2e-2)
    assert np.dot(c[0], x**3) == pytest.approx(0.125, abs=1e-12)


def test_grid_derivatives_converge_at_design_order():
    errs = []
    for num in (21, 41):
        t = np.linspace(0, 2, num)
        h = t[1] - t[0]
        d = grid_derivatives(np.sin(t), h, 2, accuracy=6)
        ok = ~np.isnan(d[2])
        errs.append(np.max(np.abs(d[2][ok] + np.sin(t[ok]))))
    assert errs[0] / errs[1] == pytest.approx(2**6, rel=0.15)


def test_margins_are_nan():
    d = grid_derivatives(np.arange(30.0), 1.0, 2, accuracy=4)
    assert np.isnan(d[1, 0]) and np.isnan(d[2, -1])
    assert not np.isnan(d[0]).any()
