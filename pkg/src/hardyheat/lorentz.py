"""Rearrangements and Lorentz norms of radial (and low-mode) fields.

A radial field is sampled on a strictly increasing radius grid, either as
node values (interpreted as a power law within each cell) or as cell
values (piecewise constant).  Rearrangements of piecewise-constant fields
are exact; monotone node fields integrate their Lorentz norms with
power-law-exact cell quadrature; general node fields go through the
distribution function, evaluated analytically within each cell.

Norms over a ball or a ball complement are norms of the zero extension.
Divergent norms are returned as +inf, never as a large float.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import inf, isinf
from typing import Optional

import numpy as np

from .errors import NotAdmissible, UnsupportedMode
from .quadrature import cell_integrals, estimate_inner_exponent
from .spectrum import require_admissible_pair


def unit_ball_volume(dim: int) -> float:
    return math.pi ** (dim / 2.0) / math.gamma(dim / 2.0 + 1.0)


def sphere_area(dim: int) -> float:
    """Surface measure of S^{N-1} in R^N."""
    return dim * unit_ball_volume(dim)


@dataclass
class RadialField:
    """Samples of a radial function.

    kind="nodes": values at the grid nodes, power-law in between, zero
    beyond the last node, power-law continuation with `inner_exponent`
    below the first node (no continuation when the first value is 0).
    kind="cells": len(values) == len(grid)-1 piecewise-constant cell
    values, zero outside.
    """

    grid: np.ndarray
    values: np.ndarray
    dim: int
    kind: str = "nodes"
    inner_exponent: Optional[float] = None

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if np.any(np.diff(self.grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        expected = self.grid.size if self.kind == "nodes" else self.grid.size - 1
        if self.values.size != expected:
            raise ValueError("values length does not match kind")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")

    def abs(self) -> "RadialField":
        return RadialField(self.grid, np.abs(self.values), self.dim,
                           self.kind, self.inner_exponent)

    def tail_exponent(self) -> float:
        """Power behavior at the origin (given, or estimated from the grid)."""
        if self.inner_exponent is not None:
            return self.inner_exponent
        if self.kind == "cells" or self.values[0] == 0:
            return 0.0
        return estimate_inner_exponent(self.grid, np.abs(self.values))

    def has_inner_tail(self) -> bool:
        return self.kind == "nodes" and self.values[0] != 0

    def restrict_ball(self, radius: float) -> "RadialField":
        """Zero-extension restriction to the ball of the given radius."""
        g, v = self.grid, self.values
        if radius >= g[-1]:
            return self
        if self.kind == "nodes":
            keep = g < radius
            if keep.sum() < 1:
                raise ValueError("ball smaller than the innermost node")
            boundary = _interp_powerlaw(radius, g, v)
            return RadialField(np.append(g[keep], radius),
                               np.append(v[keep], boundary),
                               self.dim, "nodes", self.inner_exponent)
        keep_face = g <= radius
        ng = g[keep_face]
        nv = v[: keep_face.sum() - 1]
        if ng[-1] < radius:
            ng = np.append(ng, radius)
            nv = np.append(nv, v[ng.size - 2])
        return RadialField(ng, nv, self.dim, "cells")

    def restrict_complement(self, radius: float) -> "RadialField":
        """Zero-extension restriction to the exterior of the ball."""
        g, v = self.grid, self.values
        if radius <= g[0]:
            return self
        if self.kind == "nodes":
            keep = g > radius
            if keep.sum() < 1:
                return RadialField(g[-2:], np.zeros(2), self.dim, "nodes")
            boundary = _interp_powerlaw(radius, g, v)
            return RadialField(np.append(radius, g[keep]),
                               np.append(boundary, v[keep]),
                               self.dim, "nodes", inner_exponent=None)
        if radius >= g[-1]:
            return RadialField(np.array([radius, radius + 1.0]),
                               np.zeros(1), self.dim, "cells")
        j = int(np.searchsorted(g, radius, side="left"))
        if g[j] > radius:
            # radius splits cell j-1; keep its value on [radius, g[j]]
            ng = np.concatenate([[radius], g[j:]])
            nv = v[j - 1:]
        else:
            ng = g[j:]
            nv = v[j:]
        return RadialField(ng, nv, self.dim, "cells")


def _interp_powerlaw(r, grid, values):
    j = np.searchsorted(grid, r) - 1
    j = min(max(j, 0), grid.size - 2)
    v0, v1 = values[j], values[j + 1]
    if v0 > 0 and v1 > 0:
        m = np.log(v1 / v0) / np.log(grid[j + 1] / grid[j])
        return v0 * (r / grid[j]) ** m
    frac = (r - grid[j]) / (grid[j + 1] - grid[j])
    return v0 + frac * (v1 - v0)


@dataclass
class StepFunction:
    """Non-increasing step function on (0, inf): value[i] on [s[i], s[i+1])."""

    breaks: np.ndarray  # length n+1, increasing, breaks[0] == 0 allowed
    heights: np.ndarray  # length n, non-increasing

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        idx = np.searchsorted(self.breaks, s, side="right") - 1
        out = np.where((idx >= 0) & (idx < self.heights.size),
                       self.heights[np.clip(idx, 0, self.heights.size - 1)], 0.0)
        return out if out.ndim else float(out)

    def total_volume(self) -> float:
        return float(self.breaks[-1])

    def lorentz_norm(self, p: float, sigma: float) -> float:
        require_admissible_pair(p, sigma)
        s0, s1 = self.breaks[:-1], self.breaks[1:]
        a = self.heights
        if isinf(p):
            return float(a[0]) if a.size else 0.0
        if isinf(sigma):
            return float(np.max(a * s1 ** (1.0 / p))) if a.size else 0.0
        e = sigma / p
        chunks = a**sigma * (s1**e - s0**e) / e
        return float(np.sum(chunks) ** (1.0 / sigma))

    def pair_integral(self, other: "StepFunction") -> float:
        """int f*(s) g*(s) ds over the common support."""
        cuts = np.union1d(self.breaks, other.breaks)
        mids = 0.5 * (cuts[:-1] + cuts[1:])
        return float(np.sum(self(mids) * other(mids) * np.diff(cuts)))


def _step_from_cells(field: RadialField) -> StepFunction:
    alpha = unit_ball_volume(field.dim)
    vols = alpha * np.diff(field.grid**field.dim)
    # volume of the hole inside the first face counts as a zero-value cell
    order = np.argsort(np.abs(field.values))[::-1]
    heights = np.abs(field.values)[order]
    widths = vols[order]
    breaks = np.concatenate([[0.0], np.cumsum(widths)])
    keep = heights > 0
    return StepFunction(np.concatenate([[0.0], np.cumsum(widths[keep])]),
                        heights[keep]) if not np.all(keep) else \
        StepFunction(breaks, heights)


def _is_nonincreasing(values) -> bool:
    v = np.abs(values)
    return bool(np.all(np.diff(v) <= 1e-12 * (v[:-1] + v[1:] + 1e-300)))


def _norm_monotone_nodes(field: RadialField, p: float, sigma: float) -> float:
    """Exact Lorentz norm of a radially non-increasing node field.

    Uses f*(alpha r^N) = f(r): the norm integral becomes a radial integral
    whose integrand is a power law on every cell.
    """
    g = field.grid
    v = np.abs(field.values)
    dim = field.dim
    alpha = unit_ball_volume(dim)
    m0 = field.tail_exponent() if field.has_inner_tail() else 0.0
    if field.has_inner_tail():
        crit = p * m0 + dim if not isinf(p) else (0.0 if m0 >= 0 else -1.0)
        if isinf(sigma):
            if crit < 0:
                return inf
        elif crit <= 0:
            return inf
    if isinf(p):
        # sigma == inf forced; ess sup
        return float(np.max(v)) if not (field.has_inner_tail() and m0 < 0) else (
            inf if m0 < 0 else float(np.max(v)))
    weight = alpha ** (1.0 / p) * g ** (dim / p) * v
    if isinf(sigma):
        sup = float(np.max(weight))
        return sup
    integrand = weight**sigma * dim / g
    total = float(np.sum(cell_integrals(g, integrand)))
    if field.has_inner_tail() and v[0] > 0:
        e = sigma * (dim / p + m0)  # tail integrand ~ r^{e-1}
        if e <= 0:
            return inf
        total += integrand[0] * g[0] / e
    return total ** (1.0 / sigma)


def _mu_of_levels(field: RadialField, lams: np.ndarray) -> np.ndarray:
    """Distribution function |{|f| > lam}| with per-cell analytic inversion."""
    g = field.grid
    v = np.abs(field.values)
    dim = field.dim
    alpha = unit_ball_volume(dim)
    r0, r1 = g[:-1], g[1:]
    v0, v1 = v[:-1], v[1:]
    mus = np.zeros_like(lams)
    pos = (v0 > 0) & (v1 > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        m = np.where(pos, np.log(np.where(pos, v1 / np.where(v0 > 0, v0, 1.0), 1.0))
                     / np.log(r1 / r0), 0.0)
    for i, lam in enumerate(lams):
        above0 = v0 > lam
        above1 = v1 > lam
        vol = np.zeros(r0.size)
        both = above0 & above1
        vol[both] = r1[both] ** dim - r0[both] ** dim
        cross = above0 ^ above1
        if np.any(cross):
            c = cross & pos & (np.abs(m) > 1e-14)
            rc = np.where(c, r0 * np.where(c, (lam / np.where(v0 > 0, v0, 1.0)), 1.0)
                          ** np.where(np.abs(m) > 1e-14, 1.0 / np.where(np.abs(m) > 1e-14, m, 1.0), 0.0), r0)
            lin = cross & ~c
            if np.any(lin):
                frac = (lam - v0[lin]) / np.where(v1[lin] != v0[lin], v1[lin] - v0[lin], 1.0)
                rc_lin = r0[lin] + frac * (r1[lin] - r0[lin])
                rc[lin] = rc_lin
            rc = np.clip(rc, r0, r1)
            vol[cross & above1] = r1[cross & above1] ** dim - rc[cross & above1] ** dim
            vol[cross & above0] = rc[cross & above0] ** dim - r0[cross & above0] ** dim
        mu = alpha * float(np.sum(vol))
        # analytic inner continuation below the first node
        if field.has_inner_tail():
            m0 = field.tail_exponent()
            f0 = v[0]
            if m0 < 0 and lam >= f0 > 0:
                mu += alpha * (g[0] * (lam / f0) ** (1.0 / m0)) ** dim
            elif m0 < 0 and lam < f0:
                mu += alpha * g[0] ** dim
            elif m0 > 0 and lam < f0:
                mu += alpha * (g[0] ** dim - (g[0] * (lam / f0) ** (1.0 / m0)) ** dim)
            elif m0 == 0 and lam < f0:
                mu += alpha * g[0] ** dim
        mus[i] = mu
    return mus


def _level_grid(field: RadialField, refine: int = 4) -> np.ndarray:
    v = np.abs(field.values)
    vmax = float(np.max(v))
    levels = np.unique(v[v > 0])
    if levels.size == 0:
        return np.array([])
    # reach a few decades below the smallest node value; the analytic
    # bottom piece covers the remaining (0, lam_min) sliver
    out = [levels,
           np.geomspace(levels[0] * 1e-4, levels[0], 8 * refine + 1)[:-1]]
    for a, b in zip(levels[:-1], levels[1:]):
        if b / a > 1.0 + 1e-12:
            out.append(np.geomspace(a, b, refine + 2)[1:-1])
    return np.unique(np.concatenate(out + [[vmax]]))


def _norm_general_nodes(field: RadialField, p: float, sigma: float) -> float:
    """Lorentz norm via the distribution function:

        ||f||^sigma = int_0^{max f} sigma lam^{sigma-1} mu(lam)^{sigma/p} dlam
    (sup of lam mu(lam)^{1/p} when sigma = inf).
    """
    v = np.abs(field.values)
    if np.max(v) == 0:
        return 0.0
    m0 = field.tail_exponent() if field.has_inner_tail() else 0.0
    unbounded = field.has_inner_tail() and m0 < 0
    if not isinf(p):
        crit = p * m0 + field.dim
        if unbounded and (crit < 0 or (crit == 0 and not isinf(sigma))):
            return inf
    elif unbounded:
        return inf
    if isinf(p):
        return float(np.max(v))
    lams = _level_grid(field)
    mus = _mu_of_levels(field, lams)
    if isinf(sigma):
        sup = float(np.max(lams * mus ** (1.0 / p)))
        if unbounded:
            # tail sup as lam -> inf: lam mu^{1/p} ~ lam^{1 + N/(p m0)}
            e = 1.0 + field.dim / (p * m0)
            if e > 0:
                return inf
        return sup
    integrand = sigma * lams ** (sigma - 1.0) * mus ** (sigma / p)
    total = float(np.trapezoid(integrand, lams))
    # bottom piece lam in (0, lam_min): mu is constant there
    total += mus[0] ** (sigma / p) * lams[0] ** sigma
    if unbounded:
        # top piece lam > lam_max from the power tail, integrated exactly
        e = sigma * (1.0 + field.dim / (p * m0))
        if e >= 0:
            return inf
        total += -integrand[-1] * lams[-1] / e
    return total ** (1.0 / sigma)


def decreasing_rearrangement(field, levels_refine: int = 4) -> StepFunction:
    """Non-increasing rearrangement as an explicit step function.

    Exact for piecewise-constant fields; node fields are resolved through
    the distribution function on a refined level grid.  A (k, field)
    tuple requests the mode-k angular form; only k=1 in dimension 3 is
    implemented.
    """
    if isinstance(field, tuple):
        k, radial = field
        if k == 0:
            field = radial
        elif k == 1 and radial.dim == 3:
            return _rearrangement_mode1(radial, levels_refine)
        else:
            raise UnsupportedMode(f"no angular rearrangement for mode k={k}, N={radial.dim}")
    if field.kind == "cells":
        return _step_from_cells(field)
    lams = _level_grid(field, levels_refine)
    if lams.size == 0:
        return StepFunction(np.array([0.0, 1.0]), np.array([0.0]))
    mus = _mu_of_levels(field, lams)
    return _step_from_mu(lams, mus)


def _step_from_mu(lams: np.ndarray, mus: np.ndarray) -> StepFunction:
    order = np.argsort(lams)[::-1]
    lam_desc = lams[order]
    mu_asc = mus[order]  # mu increases as lam decreases
    breaks = np.concatenate([[0.0], mu_asc])
    breaks = np.maximum.accumulate(breaks)
    # block i carries f* values between consecutive levels; the midpoint
    # makes the step approximation second order in the level spacing
    heights = np.concatenate([[lam_desc[0]],
                              0.5 * (lam_desc[1:] + lam_desc[:-1])])
    keep = np.diff(breaks) > 0
    b = np.concatenate([[0.0], breaks[1:][keep]])
    return StepFunction(b, heights[keep])


def _rearrangement_mode1(v_field: RadialField, levels_refine: int) -> StepFunction:
    """Rearrangement of v(r) * cos(theta)-type fields in dimension 3.

    For fixed r the sphere fraction where |cos theta| exceeds c is (1-c),
    so the distribution function is an explicit radial integral.
    """
    g = v_field.grid
    v = np.abs(v_field.values)
    lams = _level_grid(v_field, levels_refine)
    if lams.size == 0:
        return StepFunction(np.array([0.0, 1.0]), np.array([0.0]))
    area = sphere_area(3)  # 4 pi
    mus = np.empty_like(lams)
    for i, lam in enumerate(lams):
        frac = np.clip(1.0 - lam / np.where(v > 0, v, 1e-300), 0.0, 1.0)
        frac[v <= lam] = np.where(v[v <= lam] > lam, frac[v <= lam], 0.0)
        mus[i] = float(np.sum(cell_integrals(g, area * g**2 * frac)))
    return _step_from_mu(lams, mus)


def lorentz_norm(field, p: float, sigma: float, region=None) -> float:
    """Lorentz norm of a radial field (or (k, field) modal pair).

    region: None for the whole space, ("ball", R) or ("complement", R)
    for the zero extension from that set.
    """
    require_admissible_pair(p, sigma)
    if isinstance(field, tuple):
        k, radial = field
        if k != 0:
            star = decreasing_rearrangement(field)
            return star.lorentz_norm(p, sigma)
        field = radial
    if region is not None:
        what, radius = region
        field = (field.restrict_ball(radius) if what == "ball"
                 else field.restrict_complement(radius))
    a = field.abs()
    if field.kind == "cells":
        return _step_from_cells(a).lorentz_norm(p, sigma)
    if _is_nonincreasing(a.values):
        return _norm_monotone_nodes(a, p, sigma)
    return _norm_general_nodes(a, p, sigma)


def lp_norm(field: RadialField, p: float) -> float:
    """Direct L^p quadrature over R^N (independent of the rearrangement path)."""
    g = field.grid
    dim = field.dim
    area = sphere_area(dim)
    if field.kind == "cells":
        vols = unit_ball_volume(dim) * np.diff(g**dim)
        if isinf(p):
            return float(np.max(np.abs(field.values)))
        return float(np.sum(np.abs(field.values) ** p * vols) ** (1.0 / p))
    v = np.abs(field.values)
    if isinf(p):
        return float(np.max(v))
    integrand = area * g ** (dim - 1) * v**p
    total = float(np.sum(cell_integrals(g, integrand)))
    if field.has_inner_tail():
        m0 = field.tail_exponent()
        e = dim + p * m0
        if e <= 0:
            return inf
        total += integrand[0] * g[0] / e
    return total ** (1.0 / p)


def overlap_integral(f: RadialField, g: RadialField) -> float:
    """int |f g| over R^N for two cell fields on a common grid."""
    if f.kind != "cells" or g.kind != "cells" or f.grid.shape != g.grid.shape \
            or not np.allclose(f.grid, g.grid):
        raise ValueError("overlap_integral needs cell fields on one grid")
    vols = unit_ball_volume(f.dim) * np.diff(f.grid**f.dim)
    return float(np.sum(np.abs(f.values * g.values) * vols))


def check_rearrangement_inequalities(trials: int, dim: int = 3,
                                     p: float = 2.0, sigma: float = 2.0,
                                     seed: int = 0) -> dict:
    """Monte-Carlo audit of the rearrangement product inequality.

    For random piecewise-constant radial pairs, asserts the constant-free
    bound  int |f g| <= int f*(s) g*(s) ds  and tracks the empirical
    constant of the dual-norm product bound for the given (p, sigma).
    """
    from .spectrum import holder_conjugate

    rng = np.random.default_rng(seed)
    violations = 0
    worst_gap = 0.0
    best_const = 0.0
    for _ in range(trials):
        n = rng.integers(4, 24)
        grid = np.sort(rng.uniform(0.05, 5.0, size=n + 1))
        grid += np.arange(n + 1) * 1e-6  # enforce strict increase
        fv = rng.uniform(0.0, 3.0, size=n)
        gv = rng.uniform(0.0, 3.0, size=n)
        f = RadialField(grid, fv, dim, "cells")
        g = RadialField(grid, gv, dim, "cells")
        lhs = overlap_integral(f, g)
        rhs = _step_from_cells(f).pair_integral(_step_from_cells(g))
        gap = lhs - rhs
        worst_gap = max(worst_gap, gap)
        if gap > 1e-10 * max(rhs, 1e-300):
            violations += 1
        nf = lorentz_norm(f, p, sigma)
        ng = lorentz_norm(g, holder_conjugate(p), holder_conjugate(sigma))
        if nf > 0 and ng > 0:
            best_const = max(best_const, lhs / (nf * ng))
    return {"trials": trials, "violations": violations,
            "worst_gap": worst_gap, "empirical_product_constant": best_const}


def profile_field(profile, use_derivative: bool = False) -> RadialField:
    """Node field of h_k (or |h_k'|) with the correct inner power exponent."""
    if use_derivative:
        vals = np.abs(profile.dh)
        inner = profile.exponents.small_r - 1.0
    else:
        vals = profile.h
        inner = profile.exponents.small_r
    return RadialField(profile.grid, vals, profile.dim, "nodes",
                       inner_exponent=inner)


def norm_ratio_h0(profile, p: float, sigma: float, t: float) -> float:
    """||h||_{L^{p,sigma}(ball of sqrt t)} / h(sqrt t); +inf when the norm
    diverges."""
    root_t = math.sqrt(t)
    if root_t > profile.grid[-1]:
        raise ValueError("sqrt(t) beyond the profile grid")
    field = profile_field(profile)
    norm = lorentz_norm(field, p, sigma, region=("ball", root_t))
    return norm / profile.h_at(root_t)
