"""Construction of the positive radial profiles h_k.

h_k solves  h'' + (N-1)/r h' - (V(r) + omega_k/r^2) h = 0  with
h_k(r) = r^{A}(1+o(1)) at the origin, A being the small-r indicial
exponent of the mode.  Near 0 the solution is built by a contracting
fixed-point iteration around the pure power r^A; outward it is continued
by integrating the de-singularized unknown g = h / r^A, whose equation
has no indicial singularity left:

    g'' + (N-1+2A)/r g' = (V(r) - lambda1/r^2) g.

The large-r constant in  h_k ~ c_k r^{A2}(log r)^{B}  is then read off
the top decade of the grid.
"""

from __future__ import annotations

import math

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    AsymptoticNotReached,
    ContractionFailure,
    EnvelopeViolation,
    ODEFailure,
)
from .potential import PotentialSpec
from .quadrature import (
    cell_integrals,
    cumulative_from_zero,
    estimate_inner_exponent,
    log_grid,
    loglog_interp,
)
from .spectrum import ModeExponents, mode_exponents

_PICARD_MAX_ITER = 80
_PICARD_DECADES = 6  # log-depth of the auxiliary grid below the matching radius


def comparison_plus(k: int, lam: float, spec_or_dim) -> "ComparisonProfile":
    return ComparisonProfile("plus", k, lam, _dim_of(spec_or_dim))


def comparison_minus(k: int, lam: float, spec_or_dim) -> "ComparisonProfile":
    return ComparisonProfile("minus", k, lam, _dim_of(spec_or_dim))


def _dim_of(spec_or_dim) -> int:
    return spec_or_dim if isinstance(spec_or_dim, int) else spec_or_dim.dim


@dataclass(frozen=True)
class ComparisonProfile:
    """Closed-form endpoint solutions of the constant-coefficient equation.

    The plus branch is the pure power with the upper indicial exponent;
    the minus branch uses the lower exponent, with the log-corrected form
    r^{-(N-2)/2} |log(r/2)| in the double-root case (threshold
    coefficient, k=0).
    """

    branch: str
    k: int
    lam: float
    dim: int

    def exponent(self) -> float:
        from .spectrum import indicial_exponents, sphere_eigenvalue

        a_minus, a_plus, _ = indicial_exponents(
            self.lam + sphere_eigenvalue(self.k, self.dim), self.dim
        )
        return a_plus if self.branch == "plus" else a_minus

    def is_log_corrected(self) -> bool:
        from .spectrum import is_at_critical_lambda

        return (
            self.branch == "minus"
            and self.k == 0
            and is_at_critical_lambda(self.lam, self.dim)
        )

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.is_log_corrected():
            out = r ** (-(self.dim - 2) / 2.0) * np.abs(np.log(r / 2.0))
        else:
            out = r ** self.exponent()
        return out if out.ndim else float(out)


@dataclass
class HarmonicProfile:
    """Sampled profile of one mode with derivative and asymptotic metadata."""

    k: int
    spec: PotentialSpec
    exponents: ModeExponents
    grid: np.ndarray
    h: np.ndarray
    dh: np.ndarray
    c_k: float
    fit_residual: float
    picard_radius: float
    picard_ratio: float
    _fk_cache: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.spec.dim

    def h_at(self, r):
        """Profile value, power-law interpolated; endpoint powers outside the grid."""
        return loglog_interp(
            r, self.grid, self.h,
            left_exponent=self.exponents.small_r,
            right_exponent=self.exponents.large_r,
        )

    def dh_at(self, r):
        # interpolate the logarithmic slope r h'/h, which varies slowly
        # between the two indicial powers, then scale by the exact h
        r = np.asarray(r, dtype=float)
        slope = np.interp(np.log(r), np.log(self.grid),
                          self.grid * self.dh / self.h,
                          left=self.exponents.small_r,
                          right=self.exponents.large_r)
        out = slope * self.h_at(r) / r
        return out if out.ndim else float(out)

    def nu(self, r=None):
        """Weight h_k^2 (on the grid by default)."""
        if r is None:
            return self.h**2
        return self.h_at(r) ** 2

    def large_r_model(self, r):
        """The asymptotic target r^{A2} (log r)^{B}."""
        r = np.asarray(r, dtype=float)
        out = r ** self.exponents.large_r
        if self.exponents.log_flag:
            out = out * np.log(np.maximum(r, 1.0 + 1e-12))
        return out if out.ndim else float(out)


def _picard_grid(r_cap: float, nodes_per_decade: int, a_exp: float,
                 dim: int) -> np.ndarray:
    # keep r^(N-1+2A) and its reciprocal inside double range on the grid
    steep = dim + 2.0 * abs(a_exp)
    decades = int(np.clip(250.0 / max(steep, 1.0), 2, _PICARD_DECADES))
    return log_grid(r_cap * 10.0**-decades, r_cap, nodes_per_decade)


def _apply_green(grid, gamma, a_exp, dim, vres):
    """One application of the small-r integral operator, in g = h/r^A units.

    Returns (new gamma, gamma', inner cumulative), where the operator maps
    gamma to  1 + int_0^r s^{-1-2A-(N-2)} (int_0^s tau^{N-1+2A} Vres gamma dtau) ds
    and gamma' is its exact derivative.
    """
    inner_integrand = grid ** (dim - 1 + 2 * a_exp) * vres * gamma
    inner_exp = estimate_inner_exponent(grid, inner_integrand)
    inner = cumulative_from_zero(grid, inner_integrand, inner_exp)
    outer_integrand = grid ** (1 - dim - 2 * a_exp) * inner
    outer_exp = estimate_inner_exponent(grid, outer_integrand)
    outer = cumulative_from_zero(grid, outer_integrand, outer_exp)
    return 1.0 + outer, outer_integrand, inner


def picard_operator(k: int, lam: float, dim: int, grid, f_values,
                    check_envelope: bool = True):
    """The variation-of-constants operator of the small-r construction.

    Maps f to  v(r) * int_0^r s^{1-N} v(s)^{-2} (int_0^s tau^{N-1} v f dtau) ds
    with v the pure power of the upper indicial exponent.  f must vanish
    faster than r^{-2} v at the origin; that envelope is checked on the
    samples (slope of f/v on the first decade must exceed -2).
    """
    grid = np.asarray(grid, dtype=float)
    f_values = np.asarray(f_values, dtype=float)
    v = comparison_plus(k, lam, dim)
    a_exp = v.exponent()
    ratio = f_values / v(grid)
    if check_envelope and np.any(np.abs(ratio) > 0):
        slope = estimate_inner_exponent(grid, ratio)
        if slope <= -2.0:
            raise EnvelopeViolation(
                f"f/v ~ r^{slope:.3g} at 0; need slope > -2"
            )
    inner_integrand = grid ** (dim - 1 + a_exp) * f_values
    inner = cumulative_from_zero(grid, inner_integrand)
    outer_integrand = grid ** (1 - dim - 2 * a_exp) * inner
    outer = cumulative_from_zero(grid, outer_integrand)
    return v(grid) * outer


def _residual_potential(spec: PotentialSpec, r):
    """V(r) - lambda1 / r^2, the perturbation around the small-r model."""
    r = np.asarray(r, dtype=float)
    return np.asarray(spec.evaluate(r), dtype=float) - spec.lambda1 / r**2


def _run_picard(spec: PotentialSpec, a_exp: float, r_cap: float,
                nodes_per_decade: int, tol: float):
    """Fixed-point iteration for gamma = h/r^A on (0, r_cap].

    Returns (grid, gamma, gamma', first-difference size, worst ratio) or
    None when the iteration is not contracting on this cap.
    """
    grid = _picard_grid(r_cap, nodes_per_decade, a_exp, spec.dim)
    vres = _residual_potential(spec, grid)
    gamma = np.ones_like(grid)
    diffs = []
    gamma_prime = np.zeros_like(grid)
    for _ in range(_PICARD_MAX_ITER):
        new_gamma, gp, _ = _apply_green(grid, gamma, a_exp, spec.dim, vres)
        d = float(np.max(np.abs(new_gamma - gamma)))
        gamma, gamma_prime = new_gamma, gp
        diffs.append(d)
        if len(diffs) >= 2 and diffs[-1] > 0.5 * diffs[-2] and diffs[-1] > tol:
            return None  # not contracting fast enough at this cap
        if d <= tol:
            break
    else:
        return None
    ratios = [b / a for a, b in zip(diffs, diffs[1:]) if a > 0]
    observed = max([diffs[0]] + ratios) if diffs else 0.0
    if observed > 0.5:
        return None
    return grid, gamma, gamma_prime, diffs[0], observed


def solve_profile(spec: PotentialSpec, k: int, r_max: float = 1e3,
                  tol: float = 1e-10, r_min: float = 1e-6,
                  nodes_per_decade: int = 64) -> HarmonicProfile:
    """Build the mode-k profile on (0, r_max].

    Near 0: contracting fixed-point iteration around the pure power, on a
    cap chosen so the observed contraction factor is at most 1/2.  From
    the cap outward: implicit adaptive integration of the de-singularized
    equation in log r.  The normalization h/r^A -> 1 at the origin is
    inherited from the iteration's base point.
    """
    exps = mode_exponents(k, spec)
    a_exp = exps.small_r
    grid = log_grid(r_min, r_max, nodes_per_decade)

    r_cap = min(1.0, r_max)
    picard = None
    while r_cap >= 1e-8:
        picard = _run_picard(spec, a_exp, r_cap, nodes_per_decade, tol)
        if picard is not None:
            break
        r_cap *= 0.25
    if picard is None:
        raise ContractionFailure(
            f"no matching radius >= 1e-8 contracts for k={k} ({spec.name})"
        )
    pgrid, gamma, gamma_prime, first_diff, observed_ratio = picard

    # outward continuation of G(x) = gamma(e^x):
    #   G'' + (N-2+2A) G' = r^2 Vres(r) G
    def rhs(x, y):
        r = np.exp(x)
        g, gp = y
        return [gp, -(spec.dim - 2 + 2 * a_exp) * gp + r**2 * float(_residual_potential(spec, r)) * g]

    x0 = np.log(r_cap)
    x_end = np.log(r_max)
    y0 = [float(gamma[-1]), float(gamma_prime[-1]) * r_cap]
    x_eval = np.log(grid[grid > r_cap * (1 + 1e-12)])
    x_eval = np.minimum(x_eval, x_end)  # guard endpoint rounding
    if x_eval.size and x_eval[-1] < x_end:
        x_eval = np.append(x_eval, x_end)
    sol = None
    if x_end > x0:
        sol = solve_ivp(rhs, (x0, x_end), y0, method="LSODA",
                        t_eval=x_eval if x_eval.size else None,
                        rtol=min(max(tol, 1e-12), 1e-8), atol=1e-13)
        if not sol.success:
            raise ODEFailure(f"continuation failed for k={k}: {sol.message}")

    # assemble gamma and gamma' on the full grid
    g_full = np.empty_like(grid)
    gp_full = np.empty_like(grid)
    low = grid <= r_cap * (1 + 1e-12)
    # inside the iteration range: interpolate; below it gamma tends to 1
    # like r^{rho1}, which the interpolation's edge slope captures
    g_full[low] = np.interp(np.log(grid[low]), np.log(pgrid), gamma,
                            left=1.0 + (gamma[0] - 1.0))
    gp_full[low] = np.interp(np.log(grid[low]), np.log(pgrid),
                             gamma_prime * pgrid) / grid[low]
    if sol is not None and sol.t.size:
        gx = np.interp(np.log(grid[~low]), sol.t, sol.y[0])
        gpx = np.interp(np.log(grid[~low]), sol.t, sol.y[1])
        g_full[~low] = gx
        gp_full[~low] = gpx / grid[~low]

    if np.any(g_full <= 0):
        raise ODEFailure(f"profile lost positivity for k={k} ({spec.name})")

    h = grid**a_exp * g_full
    dh = a_exp * h / grid + grid**a_exp * gp_full

    profile = HarmonicProfile(
        k=k, spec=spec, exponents=exps, grid=grid, h=h, dh=dh,
        c_k=np.nan, fit_residual=np.nan,
        picard_radius=r_cap, picard_ratio=observed_ratio,
    )
    try:
        c_k, residual = fit_ck(profile)
        profile.c_k = c_k
        profile.fit_residual = residual
    except AsymptoticNotReached:
        pass  # c_k stays NaN; callers needing it will re-raise via fit_ck
    return profile


def fit_ck(profile: HarmonicProfile):
    """Matched large-r constant: median of h / (r^{A2} (log r)^{B}) over the
    top decade of the grid, with the max deviation as residual."""
    grid = profile.grid
    top = grid >= grid[-1] / 10.0
    if profile.exponents.log_flag:
        top &= grid > np.e  # keep the log factor away from its zero
    target = profile.large_r_model(grid[top])
    ratios = profile.h[top] / target
    c_k = float(np.median(ratios))
    residual = float(np.max(np.abs(ratios - c_k)))
    if residual > 0.05 * abs(c_k):
        raise AsymptoticNotReached(
            f"h/v spread {residual:g} exceeds 5% of c={c_k:g}; extend r_max"
        )
    return c_k, residual


def weight_fk(profile: HarmonicProfile, r=None):
    """The supersolution weight: the double integral

        f(r) = int_0^r s^{1-N} nu(s)^{-1} (int_0^s tau^{N-1} nu dtau) ds

    with nu = h_k^2.  Equals r^2 / (2(N+2A)) for pure power profiles.
    """
    if profile._fk_cache is None:
        grid = profile.grid
        dim = profile.dim
        a2 = 2 * profile.exponents.small_r
        inner = cumulative_from_zero(grid, grid ** (dim - 1) * profile.nu(),
                                     dim - 1 + a2)
        outer_integrand = grid ** (1 - dim) / profile.nu() * inner
        profile._fk_cache = cumulative_from_zero(grid, outer_integrand, 1.0)
    if r is None:
        return profile._fk_cache
    out = loglog_interp(r, profile.grid, np.maximum(profile._fk_cache, 1e-300),
                        left_exponent=2.0, right_exponent=None)
    return out


def mass_ratio(profile: HarmonicProfile) -> np.ndarray:
    """(k+1) int_0^r s^{N-1} h^2 ds / (r^N h(r)^2) on the grid.

    Bounded uniformly in r and k for admissible potentials.  Computed in
    log scale with the running integral carried relative to the local
    denominator, so large-k profiles (h ~ r^50) neither under- nor
    overflow.
    """
    grid = profile.grid
    dim = profile.dim
    a_in = dim - 1 + 2 * profile.exponents.small_r
    logf = (dim - 1) * np.log(grid) + 2 * np.log(profile.h)  # log integrand
    m_ref = logf + np.log(grid)  # log of r^N h(r)^2
    out = np.empty_like(grid)
    # analytic power-law tail over (0, r_0], in units of exp(m_ref[0])
    acc = 1.0 / (a_in + 1.0) if a_in > -1.0 else np.inf
    out[0] = acc
    logratio = np.diff(np.log(grid))
    slope = np.diff(logf) / logratio
    for j in range(1, grid.size):
        acc *= math.exp(m_ref[j - 1] - m_ref[j])
        # cell integral of the power-law model, endpoint values scaled
        # by exp(m_ref[j]) (both O(1) on a log grid)
        y0 = math.exp(logf[j - 1] - m_ref[j])
        mp1 = slope[j - 1] + 1.0
        if abs(mp1) < 1e-8:
            cell = y0 * grid[j - 1] * logratio[j - 1]
        else:
            cell = y0 * grid[j - 1] * (math.exp(mp1 * logratio[j - 1]) - 1.0) / mp1
        acc += cell
        out[j] = acc
    return (profile.k + 1) * out


def compare_asymptotics(profile: HarmonicProfile) -> dict:
    """Sandwich ratios against the closed-form endpoint models.

    Reports sup/inf of h over the small-r power on (0,1], of h over the
    large-r model on [1, r_max], and the derivative ratio r h'/(k h) for
    k >= 1.
    """
    grid = profile.grid
    small = grid <= 1.0
    large = grid >= 1.0
    vplus = grid[small] ** profile.exponents.small_r
    ratio_small = profile.h[small] / vplus
    model = profile.large_r_model(grid[large])
    if profile.exponents.log_flag:
        ok = grid[large] > np.e
        ratio_large = profile.h[large][ok] / model[ok]
    else:
        ratio_large = profile.h[large] / model
    report = {
        "small_r_ratio": (float(ratio_small.min()), float(ratio_small.max())),
        "large_r_ratio": (float(ratio_large.min()), float(ratio_large.max())),
    }
    if profile.k >= 1:
        dratio = grid * profile.dh / (profile.k * profile.h)
        report["derivative_ratio"] = (float(dratio.min()), float(dratio.max()))
    return report
