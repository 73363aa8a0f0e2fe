"""Mode evolution checked against closed-form free-Laplacian solutions."""

import math

import numpy as np
import pytest

from hardyheat.errors import AccuracyWarning, SupportEscape
from hardyheat.heat import (ModeSolver, cone_representation_residual,
                            estimate_kernel_constant, free_gaussian_mode0,
                            free_gaussian_mode1, free_kernel_shell_average,
                            initial_bump, kernel_envelope,
                            project_initial_data)
from hardyheat.lorentz import sphere_area
from hardyheat.potential import make_pure_hardy, make_two_scale
from hardyheat.profile import solve_profile


def _free_solver(k=0, **kw):
    prof = solve_profile(make_pure_hardy(0.0, 3), k, r_max=kw.get("r_max", 50.0) * 1.5)
    return ModeSolver(prof, **kw)


def test_generator_matches_radial_laplacian():
    # V = 0, h = 1: L w = w'' + (N-1)/r w', so L r^2 = 2N = 6
    solver = _free_solver(r_max=30.0)
    lw = solver.apply_generator(solver.centers**2)
    interior = slice(2, -2)
    np.testing.assert_allclose(lw[interior], 6.0, rtol=1e-3)


def test_free_gaussian_mode0_evolution():
    solver = _free_solver(r_max=40.0)
    w0 = project_initial_data(solver, lambda r: np.exp(-(r**2)))
    for t_target in (0.5, 2.0):
        _, (w,) = solver.evolve(w0, [t_target])
        v = solver.mode_field(w).values
        exact = free_gaussian_mode0(solver.centers, t_target)
        err = np.max(np.abs(v - exact)) / np.max(exact)
        assert err < 2e-3


def test_free_gaussian_mode1_evolution():
    solver = _free_solver(k=1, r_max=40.0)
    w0 = project_initial_data(
        solver, lambda r: r * np.exp(-(r**2)))
    _, (w,) = solver.evolve(w0, [2.0])
    v = solver.mode_field(w).values
    exact = free_gaussian_mode1(solver.centers, 2.0)
    err = np.max(np.abs(v - exact)) / np.max(exact)
    assert err < 5e-3


def test_kernel_slice_matches_shell_average():
    # evolved narrow unit-mass shell vs the exact N=3 kernel shell average
    solver = _free_solver(r_max=40.0)
    ry = 1.0
    w0 = initial_bump(solver, ry, unit="mass")
    _, (w,) = solver.evolve(w0, [1.0])
    v = solver.mode_field(w).values
    exact = free_kernel_shell_average(solver.centers, ry, 1.0)
    err = np.max(np.abs(v - exact)) / np.max(exact)
    assert err < 5e-3


def test_initial_bump_unit_mass():
    solver = _free_solver(r_max=20.0)
    w0 = initial_bump(solver, 1.0, unit="mass")
    assert sphere_area(3) * solver.mass(w0) == pytest.approx(1.0, rel=1e-12)


def test_reflecting_mass_conserved_and_l2_contracts():
    prof = solve_profile(make_two_scale(3.0, -3.0 / 16.0, 3), 0, r_max=40.0)
    solver = ModeSolver(prof, r_max=25.0, boundary="reflecting")
    w0 = initial_bump(solver, 1.0, unit="mass")
    m0 = solver.mass(w0)
    _, (w,) = solver.evolve(w0, [5.0])
    drift = abs(solver.mass(w) - m0) / abs(m0)
    assert drift / 5.0 < 1e-10  # per unit time
    assert solver.l2_drift <= 1e-14


def test_absorbing_detects_support_escape():
    solver = _free_solver(r_max=2.0, r_min=1e-3)
    w0 = initial_bump(solver, 1.0, unit="mass")
    with pytest.raises(SupportEscape):
        solver.evolve(w0, [0.5])


def test_project_initial_data_divides_by_profile():
    prof = solve_profile(make_pure_hardy(3.0, 3), 0, r_max=40.0)
    solver = ModeSolver(prof, r_max=25.0)
    w0 = project_initial_data(solver, lambda r: np.exp(-(r**2)))
    h = prof.h_at(solver.centers)
    np.testing.assert_allclose(w0 * h, np.exp(-(solver.centers**2)))


def test_evolve_rejects_bad_times():
    solver = _free_solver(r_max=10.0)
    w0 = initial_bump(solver, 1.0)
    with pytest.raises(ValueError):
        solver.evolve(w0, [2.0, 1.0])
    with pytest.raises(ValueError):
        solver.evolve(w0, [0.0, 1.0])


def test_time_derivative_warns_at_high_order():
    solver = _free_solver(r_max=10.0)
    w0 = project_initial_data(solver, lambda r: np.exp(-(r**2)))
    with pytest.warns(AccuracyWarning):
        solver.time_derivative(w0, order=3)


def test_kernel_envelope_formula():
    prof = solve_profile(make_pure_hardy(0.0, 3), 0, r_max=40.0)
    rx, ry, t, C = np.array([2.0]), 1.0, 1.0, 3.0
    # h = 1: envelope reduces to C t^{-3/2} exp(-(rx-ry)^2/(C t))
    expected = C * t ** (-1.5) * math.exp(-1.0 / (C * t))
    assert kernel_envelope(prof, rx, ry, t, C)[0] == pytest.approx(expected,
                                                                   rel=1e-12)


def test_kernel_constant_free_case():
    prof = solve_profile(make_pure_hardy(0.0, 3), 0, r_max=120.0)
    est = estimate_kernel_constant(prof, times=[0.5, 2.0],
                                   source_radii=[0.5, 1.5],
                                   solver_kwargs={"nodes_per_decade": 32})
    assert est.max_violation <= 0.0
    assert est.checked_pairs > 100
    assert 1.0 < est.constant < 20.0


def test_cone_representation_free_gaussian():
    solver = _free_solver(r_max=60.0)
    w0 = project_initial_data(solver, lambda r: np.exp(-(r**2)))
    times, snaps = solver.evolve(w0, [1.0, 2.0, 4.0])
    res = cone_representation_residual(solver, snaps, times, order=0,
                                       radius=lambda t: 0.5 * math.sqrt(t))
    assert res < 1e-4
