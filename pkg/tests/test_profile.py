"""Mode profile construction checked against closed-form powers and the ODE."""

import numpy as np
import pytest

from hardyheat.potential import make_pure_hardy, make_two_scale
from hardyheat.profile import (compare_asymptotics, comparison_plus, fit_ck,
                               mass_ratio, picard_operator, solve_profile,
                               weight_fk)
from hardyheat.spectrum import indicial_exponents, sphere_eigenvalue


def _pure_exponent(lam, k, dim):
    return indicial_exponents(lam + sphere_eigenvalue(k, dim), dim)[1]


@pytest.mark.parametrize("lam", [-0.16, 0.0, 3.0])
@pytest.mark.parametrize("dim", [3, 4])
@pytest.mark.parametrize("k", [0, 1, 5])
def test_pure_hardy_profile_is_exact_power(lam, dim, k):
    spec = make_pure_hardy(lam, dim)
    prof = solve_profile(spec, k, r_max=1e3)
    a = _pure_exponent(lam, k, dim)
    probe = np.geomspace(1e-3, 1e2, 60)
    np.testing.assert_allclose(prof.h_at(probe), probe**a, rtol=1e-8)
    np.testing.assert_allclose(prof.dh_at(probe), a * probe ** (a - 1.0),
                               rtol=1e-6)


def test_pure_hardy_ck_is_one():
    prof = solve_profile(make_pure_hardy(3.0, 3), 0, r_max=1e3)
    assert prof.c_k == pytest.approx(1.0, rel=1e-8)
    assert prof.fit_residual < 1e-8


def test_profile_satisfies_ode_two_scale():
    # r^{1-N} (r^{N-1} h')' = V_k h, checked by centered differences in log r
    spec = make_two_scale(3.0, -3.0 / 16.0, 3)
    prof = solve_profile(spec, 1, r_max=1e3)
    r = prof.grid[5:-5]
    x = np.log(prof.grid)
    dx = x[1] - x[0]
    g = np.log(prof.h)  # h > 0, work with log h to tame the powers
    gp = (g[6:-4] - g[4:-6]) / (2 * dx)
    gpp = (g[6:-4] - 2 * g[5:-5] + g[4:-6]) / dx**2
    # (log h)'' + (N-2)(log h)' + ((log h)')^2 = r^2 V_k
    lhs = gpp + (spec.dim - 2) * gp + gp**2
    rhs = r**2 * spec.mode_potential(1, r)
    # tolerance is the centered-difference truncation error (dx^2 ~ 1e-3),
    # concentrated at the crossover of the two scales
    np.testing.assert_allclose(lhs, rhs, atol=2e-3)
    assert np.median(np.abs(lhs - rhs)) < 1e-5


def test_profile_matches_large_r_model():
    spec = make_two_scale(3.0, -3.0 / 16.0, 3)
    prof = solve_profile(spec, 0, r_max=1e4)
    c, residual = fit_ck(prof)
    assert np.isfinite(c) and c > 0
    assert residual < 0.05 * c
    top = prof.grid >= prof.grid[-1] / 3.0
    np.testing.assert_allclose(prof.h[top],
                               c * prof.large_r_model(prof.grid[top]),
                               rtol=2e-2)


def test_profile_sandwiched_by_comparison_functions():
    spec = make_two_scale(3.0, -3.0 / 16.0, 3)
    prof = solve_profile(spec, 2, r_max=1e3)
    rep = compare_asymptotics(prof)
    lo, hi = rep["small_r_ratio"]
    assert 0.1 < lo <= hi < 10.0
    lo, hi = rep["large_r_ratio"]
    assert 0.1 < lo <= hi < 10.0


def test_picard_contraction_metadata():
    spec = make_two_scale(3.0, -3.0 / 16.0, 3)
    for k in (0, 1, 5, 20):
        prof = solve_profile(spec, k, r_max=10.0)
        assert prof.picard_ratio <= 0.5
        assert prof.picard_radius >= 1e-8


def test_picard_ratio_decays_like_inverse_k():
    spec = make_two_scale(3.0, -3.0 / 16.0, 3)
    ratios = {k: solve_profile(spec, k, r_max=10.0).picard_ratio
              for k in (1, 5, 20)}
    scaled = [(k + 1) * v for k, v in ratios.items()]
    assert max(scaled) / min(scaled) < 5.0


def test_weight_fk_pure_power_closed_form():
    # f(r) = r^2 / (2 (N + 2A)) when h is the pure power r^A
    spec = make_pure_hardy(3.0, 3)
    prof = solve_profile(spec, 0, r_max=1e2)
    a = _pure_exponent(3.0, 0, 3)
    expected = prof.grid**2 / (2.0 * (3 + 2 * a))
    np.testing.assert_allclose(weight_fk(prof), expected, rtol=1e-7)


def test_mass_ratio_pure_power_constant():
    spec = make_pure_hardy(0.0, 3)
    prof = solve_profile(spec, 3, r_max=1e2)
    a = _pure_exponent(0.0, 3, 3)
    expected = (3 + 1) / (3 + 2 * a)
    np.testing.assert_allclose(mass_ratio(prof), expected, rtol=1e-7)


def test_picard_operator_closed_form():
    # for f = v_+ * r^m the operator has the explicit value
    #   v_+(r) r^{m+2} / ((m+2)(N + 2A + m))
    k, lam, dim, m = 1, 0.0, 3, 1.0
    v = comparison_plus(k, lam, dim)
    a = v.exponent()
    grid = np.geomspace(1e-6, 1.0, 400)
    f = v(grid) * grid**m
    out = picard_operator(k, lam, dim, grid, f)
    expected = v(grid) * grid ** (m + 2) / ((m + 2) * (dim + 2 * a + m))
    np.testing.assert_allclose(out, expected, rtol=1e-10)
