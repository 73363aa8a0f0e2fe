import math
from math import inf

import pytest
from hypothesis import given, strategies as st

from hardyheat.errors import LambdaBelowCritical, NotAdmissible
from hardyheat.spectrum import (admissible, critical_lambda,
                                eigenspace_dimension, holder_conjugate,
                                indicial_exponents, mode_exponents,
                                require_admissible_pair, sphere_eigenvalue)
from hardyheat.potential import make_two_scale


def test_critical_lambda_values():
    assert critical_lambda(3) == -0.25
    assert critical_lambda(4) == -1.0
    assert critical_lambda(2) == 0.0
    assert critical_lambda(5) == -2.25


def test_sphere_eigenvalues():
    assert sphere_eigenvalue(0, 3) == 0
    assert sphere_eigenvalue(1, 3) == 2  # l(l+1) on S^2
    assert sphere_eigenvalue(2, 3) == 6
    assert sphere_eigenvalue(1, 4) == 3
    assert sphere_eigenvalue(3, 5) == 18


def test_multiplicities():
    # N=3: 2k+1; N=4: (k+1)^2; N=2: 1, then 2
    assert [eigenspace_dimension(k, 3) for k in range(5)] == [1, 3, 5, 7, 9]
    assert [eigenspace_dimension(k, 4) for k in range(4)] == [1, 4, 9, 16]
    assert [eigenspace_dimension(k, 2) for k in range(4)] == [1, 2, 2, 2]


def test_indicial_examples():
    a_minus, a_plus, disc = indicial_exponents(0.0, 3)
    assert a_plus == 0.0 and a_minus == -1.0 and disc == 1.0
    _, a_plus, _ = indicial_exponents(3.0, 3)
    assert a_plus == pytest.approx((-1.0 + math.sqrt(13.0)) / 2.0, rel=1e-15)
    # double root exactly at the threshold coefficient
    a_minus, a_plus, disc = indicial_exponents(-0.25, 3)
    assert a_minus == a_plus == -0.5 and disc == 0.0


def test_below_threshold_raises():
    with pytest.raises(LambdaBelowCritical):
        indicial_exponents(-0.26, 3)
    with pytest.raises(LambdaBelowCritical):
        indicial_exponents(-1.01, 4)


@given(st.floats(-0.24, 50.0), st.integers(2, 8))
def test_indicial_root_identities(lam, dim):
    """The exponents are the roots of A(A + N - 2) = lam."""
    if lam < critical_lambda(dim):
        lam = critical_lambda(dim) + 0.01
    a_minus, a_plus, _ = indicial_exponents(lam, dim)
    assert a_minus + a_plus == pytest.approx(-(dim - 2), abs=1e-9)
    assert a_minus * a_plus == pytest.approx(-lam, abs=1e-9)


def test_admissible_rules():
    assert admissible(1, inf, 1, inf)
    assert admissible(2, 3, 1.5, 7)
    assert admissible(2, 2, 2, 2)
    assert not admissible(3, 2, 1, 1)          # p > q
    assert not admissible(1, 2, 2, 2)          # p=1 needs sigma=1
    assert not admissible(2, inf, 2, 5)        # q=inf needs theta=inf
    assert not admissible(inf, inf, 2, inf)    # p=inf needs sigma=inf
    assert not admissible(2, 1, 2, 1)          # q < p
    assert not admissible(2, 2, 3, 2)          # p=q needs sigma <= theta
    assert not admissible(0.5, 2, 1, 1)        # p < 1
    with pytest.raises(NotAdmissible):
        require_admissible_pair(1, 2)


def test_holder_conjugates():
    assert holder_conjugate(1) == inf
    assert holder_conjugate(inf) == 1
    assert holder_conjugate(2) == 2
    assert holder_conjugate(4) == pytest.approx(4.0 / 3.0)


def test_mode_exponent_selection():
    sub = make_two_scale(3.0, -0.25, 3, critical=False)
    m0 = mode_exponents(0, sub)
    assert m0.small_r == pytest.approx((-1 + math.sqrt(13)) / 2)
    assert m0.large_r == -0.5
    assert m0.log_flag == 1  # k=0, lambda2 at threshold, subcritical
    assert mode_exponents(1, sub).log_flag == 0

    crit = make_two_scale(3.0, -0.25, 3, critical=True)
    mc = mode_exponents(0, crit)
    assert mc.large_r == -0.5 and mc.log_flag == 0

    away = make_two_scale(3.0, -3.0 / 16.0, 3)
    assert mode_exponents(0, away).large_r == -0.25
    assert mode_exponents(0, away).log_flag == 0
