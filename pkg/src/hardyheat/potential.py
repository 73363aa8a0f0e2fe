"""Radial inverse-square potentials: built-in families and sampled validation.

A potential here is radial, C^1 on (0, inf), behaves like lambda1/r^2 near
the origin and lambda2/r^2 at infinity, and has r^3 V'(r) bounded.
Criticality is a configuration tag: built-in families set it from known
theory, user potentials must declare it (the Rayleigh screen below is a
sanity check, not a classifier).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import LambdaBelowCritical, NotNonnegative, ValidationFailure
from .spectrum import critical_lambda, is_at_critical_lambda, sphere_eigenvalue


@dataclass(frozen=True)
class PotentialSpec:
    """A radial potential with its asymptotic data and criticality tag."""

    dim: int
    evaluate: Callable[[float], float]
    lambda1: float
    lambda2: float
    rho1: float
    rho2: float
    critical: bool
    derivative: Optional[Callable[[float], float]] = None
    env_small: float = field(default=0.0)  # constant in |V - lambda1/r^2| <= c r^{-2+rho1}
    env_large: float = field(default=0.0)  # constant in |V - lambda2/r^2| <= c r^{-2-rho2}
    name: str = "custom"

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("dimension must be >= 2")
        lam_star = critical_lambda(self.dim)
        for lam in (self.lambda1, self.lambda2):
            if lam < lam_star and not is_at_critical_lambda(lam, self.dim):
                raise LambdaBelowCritical(
                    f"lambda={lam} below threshold {lam_star} for N={self.dim}"
                )
        if self.rho1 <= 0 or self.rho2 <= 0:
            raise ValueError("asymptotic rates must be positive")

    def __call__(self, r):
        return self.evaluate(r)

    def mode_potential(self, k: int, r):
        """V(r) + omega_k / r^2, the radial potential seen by mode k."""
        omega = sphere_eigenvalue(k, self.dim)
        r = np.asarray(r, dtype=float)
        out = np.asarray(self.evaluate(r), dtype=float) + omega / r**2
        return out if out.ndim else float(out)

    def derivative_at(self, r):
        """V'(r), analytic when available, else a relative-step central difference."""
        if self.derivative is not None:
            return self.derivative(r)
        r = np.asarray(r, dtype=float)
        h = r * 1e-6
        out = (np.asarray(self.evaluate(r + h)) - np.asarray(self.evaluate(r - h))) / (2 * h)
        return out if out.ndim else float(out)


def evaluate_mode_potential(spec: PotentialSpec, k: int, r):
    return spec.mode_potential(k, r)


def make_pure_hardy(lam: float, dim: int) -> PotentialSpec:
    """V(r) = lam / r^2.  Critical exactly at the Hardy threshold."""
    lam = float(lam)
    return PotentialSpec(
        dim=dim,
        evaluate=lambda r: lam / np.asarray(r, dtype=float) ** 2,
        derivative=lambda r: -2.0 * lam / np.asarray(r, dtype=float) ** 3,
        lambda1=lam,
        lambda2=lam,
        rho1=2.0,
        rho2=2.0,
        critical=is_at_critical_lambda(lam, dim),
        env_small=0.0,
        env_large=0.0,
        name=f"pure_hardy(lambda={lam:g}, N={dim})",
    )


def make_two_scale(
    lambda1: float, lambda2: float, dim: int, critical: bool = False
) -> PotentialSpec:
    """V(r) = (lambda1 + lambda2 r^2) / (r^2 (1 + r^2)).

    Interpolates between lambda1/r^2 at the origin and lambda2/r^2 at
    infinity with rates rho1 = rho2 = 2:
        V - lambda1/r^2 = (lambda2 - lambda1)/(1 + r^2).
    """
    l1, l2 = float(lambda1), float(lambda2)

    def _eval(r):
        r = np.asarray(r, dtype=float)
        return l1 / r**2 + (l2 - l1) / (1.0 + r**2)

    def _deriv(r):
        r = np.asarray(r, dtype=float)
        return -2.0 * l1 / r**3 - 2.0 * r * (l2 - l1) / (1.0 + r**2) ** 2

    return PotentialSpec(
        dim=dim,
        evaluate=_eval,
        derivative=_deriv,
        lambda1=l1,
        lambda2=l2,
        rho1=2.0,
        rho2=2.0,
        critical=critical,
        env_small=abs(l2 - l1),
        env_large=abs(l1 - l2),
        name=f"two_scale(lambda1={l1:g}, lambda2={l2:g}, N={dim})",
    )


def make_table(radii, values, dim: int, lambda1: float = None,
               lambda2: float = None, rho1: float = 1.0, rho2: float = 1.0,
               critical: bool = False) -> PotentialSpec:
    """Tabulated radial potential with log-linear interpolation in r.

    Outside the table, V continues as lambda1/r^2 (inner) and lambda2/r^2
    (outer); when not given, the coefficients are read off the table ends.
    """
    radii = np.asarray(radii, dtype=float)
    values = np.asarray(values, dtype=float)
    if radii.ndim != 1 or radii.size < 2 or np.any(np.diff(radii) <= 0):
        raise ValueError("table radii must be strictly increasing, length >= 2")
    if lambda1 is None:
        lambda1 = radii[0] ** 2 * values[0]
    if lambda2 is None:
        lambda2 = radii[-1] ** 2 * values[-1]
    logr = np.log(radii)
    # interpolate r^2 V(r), which is exactly constant on inverse-square
    # stretches, rather than V itself
    scaled = radii**2 * values

    def _eval(r):
        r = np.asarray(r, dtype=float)
        out = np.interp(np.log(np.maximum(r, 1e-300)), logr, scaled) / r**2
        lo = r < radii[0]
        hi = r > radii[-1]
        out = np.where(lo, lambda1 / r**2, out)
        out = np.where(hi, lambda2 / r**2, out)
        return out if out.ndim else float(out)

    return PotentialSpec(
        dim=dim,
        evaluate=_eval,
        lambda1=float(lambda1),
        lambda2=float(lambda2),
        rho1=rho1,
        rho2=rho2,
        critical=critical,
        name="table",
    )


@dataclass
class EnvelopeReport:
    """Sampled check of the asymptotic envelopes and the r^3 V' bound."""

    rho_small: float
    const_small: float
    rho_large: float
    const_large: float
    sup_r3_dV: float
    passed: bool


def _envelope_fit(r, excess, sign):
    """Least-squares power-law fit |excess| ~ c r^m on log-log data.

    sign=+1 for the small-r clause (expects m >= -2 + rho), -1 for large r.
    Returns (rate rho, constant c) with excess ~= c r^{-2 + sign*rho}.
    """
    mask = excess > 0
    if mask.sum() < 2:
        # potential matches the inverse-square form exactly on this side
        return np.inf, 0.0
    x = np.log(r[mask])
    y = np.log(excess[mask])
    m, b = np.polyfit(x, y, 1)
    rho = sign * (m + 2.0)
    return rho, float(np.exp(b))


def validate_condition_V(spec: PotentialSpec, grid=None,
                         points_per_decade: int = 200) -> EnvelopeReport:
    """Check the defining conditions of the potential class on a sample grid.

    Near 0 the excess |V - lambda1/r^2| must decay like r^{-2+rho1}; near
    infinity |V - lambda2/r^2| like r^{-2-rho2}; and r^3 V' must stay
    bounded.  The check is sampled, not proved: envelopes are fitted by
    least squares on log-log data with a factor-2 tolerance on the
    constant.
    """
    if grid is None:
        n = int(12 * points_per_decade)
        grid = np.logspace(-6, 6, n)
    grid = np.asarray(grid, dtype=float)
    v = np.asarray(spec.evaluate(grid), dtype=float)

    small = grid <= 1e-2
    large = grid >= 1e2

    excess_small = np.abs(v[small] - spec.lambda1 / grid[small] ** 2)
    rho_s, c_s = _envelope_fit(grid[small], excess_small, +1)
    if rho_s <= 0:
        idx = int(np.argmax(excess_small * grid[small] ** 2))
        raise ValidationFailure("small-r envelope", grid[small][idx],
                                f"fitted rate {rho_s:g} <= 0")

    excess_large = np.abs(v[large] - spec.lambda2 / grid[large] ** 2)
    rho_l, c_l = _envelope_fit(grid[large], excess_large, -1)
    if rho_l <= 0:
        idx = int(np.argmax(excess_large * grid[large] ** 2))
        raise ValidationFailure("large-r envelope", grid[large][idx],
                                f"fitted rate {rho_l:g} <= 0")

    dv = np.asarray(spec.derivative_at(grid), dtype=float)
    r3dv = np.abs(grid**3 * dv)
    sup_r3 = float(np.max(r3dv))
    # boundedness is asymptotic: the sampled sup must not be driven by the
    # extreme ends of the grid (a growing trend there means divergence)
    tail = r3dv[-points_per_decade:]
    head = r3dv[:points_per_decade]
    for side, vals in (("large-r", tail), ("small-r", head)):
        if vals[-1 if side == "large-r" else 0] > 10.0 * np.median(r3dv) and \
                np.median(vals) > 10.0 * np.median(r3dv):
            raise ValidationFailure(f"{side} derivative bound",
                                    grid[-1] if side == "large-r" else grid[0],
                                    f"|r^3 V'| ~ {np.max(vals):g} growing")

    return EnvelopeReport(
        rho_small=rho_s, const_small=c_s,
        rho_large=rho_l, const_large=c_l,
        sup_r3_dV=sup_r3, passed=True,
    )


def _bump(r, center, width):
    """Smooth compactly supported bump of log-radius, C^infty in log r."""
    s = (np.log(r) - np.log(center)) / width
    out = np.zeros_like(r)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


def rayleigh_check(spec: PotentialSpec, trials: int = 40,
                   raise_on_negative: bool = True):
    """Evaluate the quadratic form int(|grad phi|^2 + V phi^2) on trial bumps.

    The trial family combines log-radius bumps over many scales with
    near-extremizers of the Hardy quotient: phi = r^{-(N-2)/2} psi(log r)
    with psi a half-wave over a long log window.  Returns (minimum value,
    list of per-trial values).  A negative minimum means the nonnegativity
    condition fails for this configuration.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    dim = spec.dim
    r = np.logspace(-8, 4, 6000)
    results = []

    def quad_form(phi):
        dphi = np.gradient(phi, r)
        integrand = (dphi**2 + np.asarray(spec.evaluate(r)) * phi**2) * r ** (dim - 1)
        return float(np.trapezoid(integrand, r))

    centers = np.logspace(-4, 0, max(2, trials // 2))
    for c in centers:
        results.append(quad_form(_bump(r, c, 1.0)))

    # Hardy quasi-extremizers over widening log windows
    spans = np.linspace(2.0, 16.0, trials - len(centers)) if trials > len(centers) else []
    for span in spans:
        s = np.log(r)
        s0 = np.log(1e-6)
        psi = np.where((s > s0) & (s < s0 + span),
                       np.sin(np.pi * (s - s0) / span), 0.0)
        phi = r ** (-(dim - 2) / 2.0) * psi
        results.append(quad_form(phi))

    minimum = min(results)
    if minimum < 0 and raise_on_negative:
        raise NotNonnegative(
            f"quadratic form reached {minimum:g} on a trial function"
        )
    return minimum, results
