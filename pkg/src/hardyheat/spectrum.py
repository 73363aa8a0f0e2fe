"""Sphere spectrum and indicial-exponent arithmetic.

Everything here is exact arithmetic on mode indices and inverse-square
coefficients: eigenvalues of the sphere Laplacian, eigenspace dimensions,
the roots of the indicial (Euler) equation, and admissibility of Lorentz
index quadruples.  Infinite indices are represented by ``math.inf``; no
sentinel floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import inf, isinf

from .errors import LambdaBelowCritical, NotAdmissible

#: relative tolerance for deciding lambda == lambda_* (a structural branch
#: switch that must not flip on rounding noise)
CRITICAL_RTOL = 1e-12


def critical_lambda(dim: int) -> float:
    """Hardy threshold -(N-2)^2/4 below which -Delta + lambda/r^2 is unbounded below."""
    return -((dim - 2) ** 2) / 4.0


def is_at_critical_lambda(lam: float, dim: int) -> bool:
    """True when lam equals the Hardy threshold up to CRITICAL_RTOL."""
    lam_star = critical_lambda(dim)
    scale = max(abs(lam), abs(lam_star), 1.0)
    return abs(lam - lam_star) <= CRITICAL_RTOL * scale


def sphere_eigenvalue(k: int, dim: int) -> float:
    """Eigenvalue k(N+k-2) of the Laplace-Beltrami operator on S^{N-1}."""
    if k < 0:
        raise ValueError("mode index must be >= 0")
    return float(k * (dim + k - 2))


def eigenspace_dimension(k: int, dim: int) -> int:
    """Dimension of the degree-k spherical-harmonic eigenspace.

    (N+2k-2)(N+k-3)! / ((N-2)! k!), with the k=0 space always the
    constants (dimension 1, including N=2 where the formula degenerates).
    """
    if k < 0:
        raise ValueError("mode index must be >= 0")
    if dim < 2:
        raise ValueError("dimension must be >= 2")
    if k == 0:
        return 1
    numer = (dim + 2 * k - 2) * math.factorial(dim + k - 3)
    denom = math.factorial(dim - 2) * math.factorial(k)
    return numer // denom


def indicial_exponents(lam: float, dim: int) -> tuple[float, float, float]:
    """Roots (A_minus, A_plus) of A^2 + (N-2)A - lam = 0 and the discriminant.

    Returns (A_minus, A_plus, D) with D = (N-2)^2 + 4 lam >= 0.
    """
    lam_star = critical_lambda(dim)
    if lam < lam_star and not is_at_critical_lambda(lam, dim):
        raise LambdaBelowCritical(
            f"lambda={lam} below the Hardy threshold {lam_star} for N={dim}"
        )
    disc = max((dim - 2) ** 2 + 4.0 * lam, 0.0)
    root = math.sqrt(disc)
    a_minus = (-(dim - 2) - root) / 2.0
    a_plus = (-(dim - 2) + root) / 2.0
    return a_minus, a_plus, disc


@dataclass(frozen=True)
class ModeExponents:
    """Per-mode constants controlling endpoint power behavior.

    small_r is the exponent governing the profile near 0, large_r the one
    at infinity, log_flag is 1 exactly when the large-r profile carries a
    log factor (k=0, tail coefficient at the Hardy threshold, subcritical).
    """

    k: int
    dim: int
    eigenvalue: float
    multiplicity: int
    disc_small: float
    disc_large: float
    small_r: float
    large_r: float
    log_flag: int


def mode_exponents(k: int, spec) -> ModeExponents:
    """Exponent data for mode k of a validated potential spec."""
    dim = spec.dim
    omega = sphere_eigenvalue(k, dim)
    _, a1, d1 = indicial_exponents(spec.lambda1 + omega, dim)
    if k == 0 and spec.critical:
        a2_minus, _, d2 = indicial_exponents(spec.lambda2, dim)
        a2 = a2_minus
    else:
        _, a2, d2 = indicial_exponents(spec.lambda2 + omega, dim)
    log_flag = int(
        k == 0 and not spec.critical and is_at_critical_lambda(spec.lambda2, dim)
    )
    return ModeExponents(
        k=k,
        dim=dim,
        eigenvalue=omega,
        multiplicity=eigenspace_dimension(k, dim),
        disc_small=d1,
        disc_large=d2,
        small_r=a1,
        large_r=a2,
        log_flag=log_flag,
    )


def _valid_index(x: float) -> bool:
    return x >= 1.0 or isinf(x)


def admissible(p: float, q: float, sigma: float, theta: float) -> bool:
    """Membership test for the admissible set of Lorentz index quadruples.

    Requires 1 <= p <= q <= inf with the endpoint rules: sigma pinned to 1
    at p=1 and to inf at p=inf (same for theta at q), and sigma <= theta
    when p = q.
    """
    for x in (p, q, sigma, theta):
        if not _valid_index(x):
            return False
    if not p <= q:
        return False
    if p == 1 and sigma != 1:
        return False
    if isinf(p) and not isinf(sigma):
        return False
    if q == 1 and theta != 1:
        return False
    if isinf(q) and not isinf(theta):
        return False
    if p == q and not sigma <= theta:
        return False
    return True


def require_admissible_pair(p: float, sigma: float) -> None:
    """Raise NotAdmissible unless (p,p,sigma,sigma) is an admissible quadruple."""
    if not admissible(p, p, sigma, sigma):
        raise NotAdmissible(f"(p, sigma) = ({p}, {sigma}) is not admissible")


def holder_conjugate(x: float) -> float:
    """Conjugate exponent: x' = x/(x-1), with 1' = inf and inf' = 1."""
    if isinf(x):
        return 1.0
    if x == 1:
        return inf
    return x / (x - 1.0)


def check_null_critical_window(spec) -> bool:
    """True when decay estimates apply: subcritical, or critical with the
    large-r exponent of mode 0 above -N/2 (null-critical, off the borderline)."""
    if not spec.critical:
        return True
    a20 = mode_exponents(0, spec).large_r
    return a20 > -spec.dim / 2.0
