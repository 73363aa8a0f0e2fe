"""Quadrature primitives checked against closed-form integrals."""

import numpy as np
import pytest

from hardyheat.errors import QuadratureFailure
from hardyheat.quadrature import (cell_integrals, cumulative_from_zero,
                                  estimate_inner_exponent, inner_tail,
                                  log_grid, loglog_interp)


def test_log_grid_shape_and_spacing():
    g = log_grid(1e-3, 1e3, nodes_per_decade=10)
    assert g[0] == pytest.approx(1e-3)
    assert g[-1] == pytest.approx(1e3)
    ratios = g[1:] / g[:-1]
    np.testing.assert_allclose(ratios, ratios[0], rtol=1e-12)


def test_log_grid_rejects_bad_bounds():
    with pytest.raises(ValueError):
        log_grid(1.0, 0.5)
    with pytest.raises(ValueError):
        log_grid(0.0, 1.0)


@pytest.mark.parametrize("m", [-2.5, -1.0, -0.3, 0.0, 1.0, 3.7])
def test_cell_integrals_exact_on_power_laws(m):
    x = np.geomspace(0.1, 10.0, 40)
    y = x**m
    if abs(m + 1.0) < 1e-12:
        exact = np.log(x[-1] / x[0])
    else:
        exact = (x[-1] ** (m + 1) - x[0] ** (m + 1)) / (m + 1)
    assert cell_integrals(x, y).sum() == pytest.approx(exact, rel=1e-12)


def test_cell_integrals_sign_change_falls_back_to_trapezoid():
    x = np.array([0.5, 1.0, 2.0])
    y = np.array([-1.0, 1.0, 3.0])
    out = cell_integrals(x, y)
    # first cell changes sign: trapezoid value 0; second is the exact
    # integral of the power law x^(log2(3)) over [1, 2]
    m = np.log(3.0) / np.log(2.0)
    np.testing.assert_allclose(out, [0.0, (2.0 ** (m + 1) - 1.0) / (m + 1)])


def test_cell_integrals_second_order_on_smooth_integrand():
    exact = np.sin(5.0) - np.sin(0.01)
    errs = []
    for n in (200, 400):
        x = np.geomspace(0.01, 5.0, n)
        errs.append(abs(cell_integrals(x, np.cos(x)).sum() - exact))
    assert errs[1] < errs[0] / 3.0  # ~ factor 4 for second order


def test_inner_tail_values():
    # integral of (y0/x0^m) x^m over (0, x0] = y0*x0/(m+1)
    assert inner_tail(2.0, 3.0, 1.0) == pytest.approx(3.0)
    assert inner_tail(2.0, 0.0, -5.0) == 0.0
    assert inner_tail(1.0, 1.0, -1.0) == np.inf
    assert inner_tail(1.0, -1.0, -2.0) == -np.inf


def test_estimate_inner_exponent_recovers_slope():
    x = np.geomspace(1e-4, 1.0, 200)
    assert estimate_inner_exponent(x, 7.0 * x**2.5) == pytest.approx(2.5, abs=1e-10)


def test_cumulative_from_zero_power_law():
    x = np.geomspace(1e-3, 10.0, 300)
    y = x**2
    np.testing.assert_allclose(cumulative_from_zero(x, y, 2.0), x**3 / 3.0,
                               rtol=1e-12)


def test_cumulative_from_zero_divergent_tail_raises():
    x = np.geomspace(1e-3, 1.0, 50)
    with pytest.raises(QuadratureFailure):
        cumulative_from_zero(x, 1.0 / x, -1.0)


def test_loglog_interp_exact_on_powers_and_extends():
    grid = np.geomspace(0.1, 10.0, 30)
    vals = 2.0 * grid**1.5
    probe = np.geomspace(0.01, 100.0, 17)  # extends a decade past both ends
    np.testing.assert_allclose(loglog_interp(probe, grid, vals),
                               2.0 * probe**1.5, rtol=1e-10)
