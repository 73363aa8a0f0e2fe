"""Log-graded grids and power-law-exact quadrature.

All singular integrands in this package behave like powers of r at the
endpoints.  On a log grid the honest move is to integrate each cell under
a local power-law model (fit the exponent from the two endpoint values,
integrate the power exactly); the result is exact for pure power laws and
second-order otherwise, uniformly in the exponent.  The open interval
(0, r_min] below the grid is handled by an analytic power-law tail.
"""

from __future__ import annotations

import numpy as np

from .errors import QuadratureFailure


def log_grid(r_min: float, r_max: float, nodes_per_decade: int = 64) -> np.ndarray:
    """Logarithmically equispaced nodes on [r_min, r_max], endpoints included."""
    if not 0 < r_min < r_max:
        raise ValueError("need 0 < r_min < r_max")
    decades = np.log10(r_max / r_min)
    n = max(int(np.ceil(decades * nodes_per_decade)) + 1, 2)
    return np.logspace(np.log10(r_min), np.log10(r_max), n)


def cell_integrals(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Integral of y over each cell [x_j, x_{j+1}] under a local power law.

    Cells where y changes sign or touches zero fall back to the trapezoid
    rule; everywhere else the local model c*x^m is integrated exactly
    (with the m ~ -1 case handled by its log limit).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x0, x1 = x[:-1], x[1:]
    y0, y1 = y[:-1], y[1:]
    out = 0.5 * (y0 + y1) * (x1 - x0)  # trapezoid fallback

    same_sign = (y0 * y1) > 0
    if not np.any(same_sign):
        return out
    s = np.sign(y0[same_sign])
    a0 = np.abs(y0[same_sign])
    a1 = np.abs(y1[same_sign])
    u0 = x0[same_sign]
    u1 = x1[same_sign]
    logt = np.log(u1 / u0)
    m = np.log(a1 / a0) / logt
    mp1 = m + 1.0
    near = np.abs(mp1) < 1e-8
    with np.errstate(over="ignore", invalid="ignore"):
        val = a0 * u0 * (np.power(u1 / u0, mp1) - 1.0) / np.where(near, 1.0, mp1)
    val = np.where(near, a0 * u0 * logt * (1.0 + 0.5 * mp1 * logt), val)
    bad = ~np.isfinite(val)
    if np.any(bad):
        val[bad] = (0.5 * (a0 + a1) * (u1 - u0))[bad]
    out[same_sign] = s * val
    return out


def inner_tail(x0: float, y0: float, exponent: float) -> float:
    """Integral of the power-law continuation c*x^m over (0, x0].

    `exponent` is the power behavior of the integrand at 0; the constant
    is matched to the first sample.  Divergent tails (m <= -1 with a
    nonzero sample) return +inf.
    """
    if y0 == 0.0:
        return 0.0
    if exponent <= -1.0:
        return np.inf if y0 > 0 else -np.inf
    return y0 * x0 / (exponent + 1.0)


def estimate_inner_exponent(x: np.ndarray, y: np.ndarray) -> float:
    """Power-law slope of |y| near the small end of the grid (first decade)."""
    mask = (x <= x[0] * 10.0) & (np.abs(y) > 0)
    if mask.sum() < 2:
        return 0.0
    lx = np.log(x[mask])
    ly = np.log(np.abs(y[mask]))
    m, _ = np.polyfit(lx, ly, 1)
    return float(m)


def cumulative_from_zero(x: np.ndarray, y: np.ndarray,
                         inner_exponent: float | None = None) -> np.ndarray:
    """Array of integrals of y over (0, x_j] for every node x_j.

    The piece below the grid uses the analytic power-law tail, with the
    exponent supplied by the caller or estimated from the first samples.
    A divergent tail raises QuadratureFailure.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if inner_exponent is None:
        inner_exponent = estimate_inner_exponent(x, y)
    tail = inner_tail(x[0], y[0], inner_exponent)
    if not np.isfinite(tail):
        raise QuadratureFailure(
            f"integrand ~ r^{inner_exponent:g} at 0 is not integrable"
        )
    out = np.empty_like(x)
    out[0] = tail
    out[1:] = tail + np.cumsum(cell_integrals(x, y))
    return out


def loglog_interp(r, grid: np.ndarray, values: np.ndarray,
                  left_exponent: float | None = None,
                  right_exponent: float | None = None):
    """Interpolate a positive function as a power law between grid nodes.

    Outside the grid the function continues as a power with the given
    exponents (defaults: slopes of the first/last cell).
    """
    r = np.asarray(r, dtype=float)
    grid = np.asarray(grid, dtype=float)
    values = np.asarray(values, dtype=float)
    if np.any(values <= 0):
        out = np.interp(r, grid, values)
        return out if out.ndim else float(out)
    lg = np.log(grid)
    lv = np.log(values)
    out = np.exp(np.interp(np.log(r), lg, lv))
    if left_exponent is None:
        left_exponent = (lv[1] - lv[0]) / (lg[1] - lg[0])
    if right_exponent is None:
        right_exponent = (lv[-1] - lv[-2]) / (lg[-1] - lg[-2])
    below = r < grid[0]
    above = r > grid[-1]
    if np.any(below):
        out = np.where(below, values[0] * (r / grid[0]) ** left_exponent, out)
    if np.any(above):
        out = np.where(above, values[-1] * (r / grid[-1]) ** right_exponent, out)
    return out if out.ndim else float(out)
