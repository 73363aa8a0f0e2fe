import numpy as np
import pytest

from hardyheat.errors import LambdaBelowCritical, NotNonnegative, ValidationFailure
from hardyheat.potential import (PotentialSpec, make_pure_hardy, make_table,
                                 make_two_scale, rayleigh_check,
                                 validate_condition_V)


def test_pure_hardy_values():
    spec = make_pure_hardy(3.0, 3)
    r = np.array([0.1, 1.0, 10.0])
    assert np.allclose(spec(r), 3.0 / r**2)
    assert spec.lambda1 == spec.lambda2 == 3.0
    validate_condition_V(spec)


def test_two_scale_limits():
    spec = make_two_scale(3.0, -3.0 / 16.0, 3)
    r_small = np.array([1e-7, 1e-6])
    r_large = np.array([1e5, 1e6])
    assert np.allclose(r_small**2 * spec(r_small), 3.0, rtol=1e-10)
    assert np.allclose(r_large**2 * spec(r_large), -3.0 / 16.0, rtol=1e-8)
    validate_condition_V(spec)
    # sup_r |r^3 V'(r)| finite (condition (V)(iii) surrogate)
    r = np.geomspace(1e-6, 1e6, 2000)
    bound = np.abs(r**3 * np.array([spec.derivative_at(x) for x in r]))
    assert np.all(np.isfinite(bound))
    assert bound.max() < 50.0


def test_mode_potential_adds_centrifugal_term():
    spec = make_pure_hardy(0.0, 3)
    r = np.array([0.5, 2.0])
    # mode k=2 on S^2 carries the eigenvalue k(N+k-2) = 6
    np.testing.assert_allclose(spec.mode_potential(2, r), 6.0 / r**2)


def test_below_threshold_rejected():
    with pytest.raises(LambdaBelowCritical):
        make_pure_hardy(-0.3, 3)
    with pytest.raises(LambdaBelowCritical):
        make_two_scale(0.0, -1.1, 4)


def test_validation_catches_wrong_tail():
    # declared as an inverse-square tail but actually r^{-3} at the origin
    lying = PotentialSpec(
        dim=3, evaluate=lambda r: 0.1 / np.asarray(r, float) ** 3,
        lambda1=0.1, lambda2=0.1, rho1=1.0, rho2=1.0, critical=False,
        env_small=1.0, env_large=1.0, name="wrong_tail")
    with pytest.raises(ValidationFailure):
        validate_condition_V(lying)


def test_rayleigh_check_positive_cases():
    for spec in (make_pure_hardy(-0.16, 3), make_pure_hardy(0.0, 4),
                 make_two_scale(3.0, -3.0 / 16.0, 3)):
        minimum, results = rayleigh_check(spec, trials=25)
        assert minimum > -1e-10
        assert len(results) >= 25


def test_rayleigh_check_detects_negative_operator():
    # declared coefficients sit at the threshold, but the actual potential
    # dips below it: the quadratic form goes negative on wide test bumps
    bad = PotentialSpec(
        dim=3, evaluate=lambda r: -0.35 / np.asarray(r, float) ** 2,
        lambda1=-0.25, lambda2=-0.25, rho1=1.0, rho2=1.0, critical=False,
        env_small=1.0, env_large=1.0, name="below_threshold")
    with pytest.raises(NotNonnegative):
        rayleigh_check(bad)


def test_table_family_roundtrip():
    r = np.geomspace(1e-4, 1e4, 400)
    spec = make_table(r, 3.0 / r**2, 3)
    probe = np.geomspace(1e-3, 1e3, 50)
    np.testing.assert_allclose(spec(probe), 3.0 / probe**2, rtol=1e-6)
    # inverse-square continuation beyond the table
    assert spec(np.array([1e6]))[0] == pytest.approx(3.0 / 1e12, rel=1e-3)
