"""L^p norms for the measure dt/t and the interpolation norm ||x||_{theta,p}.

Integrals over (0, inf) are split into a quadrature part on a
:class:`LogGrid` and two tails outside its cells. In ``u = log t`` the
measure is ``du`` and the nodes are cell midpoints, so the quadrature is
the midpoint rule with step ``h``. Tail contributions are supplied in
closed form by the caller: for ``p < inf`` as integrals of ``f^p``, for
``p = inf`` as suprema of ``f``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from qinterp.interpolation.kfunctional import KGrid, k_functional_grid
from qinterp.interpolation.norms import Couple, LogGrid


def is_inf(p) -> bool:
    return math.isinf(float(p))


def check_p(p) -> float:
    p = float(p)
    if not (p >= 1.0):
        raise ValueError(f"p must lie in [1, inf], got {p}")
    return p


def inv_p(p: float) -> float:
    """``1/p`` with ``1/inf = 0``, so that ``|alpha|^{1/inf} = 1``."""
    return 0.0 if is_inf(p) else 1.0 / p


def _sample(f, grid: LogGrid) -> np.ndarray:
    vals = f(grid.points) if callable(f) else f
    vals = np.asarray(vals, dtype=float)
    if vals.shape != grid.points.shape:
        raise ValueError(f"{vals.shape[0] if vals.ndim else 0} samples for a grid of {grid.count}")
    if np.any(vals < 0):
        raise ValueError("L^p_* norms need a nonnegative integrand")
    return vals


def lp_star_power_sum(vals: np.ndarray, grid: LogGrid, p: float) -> float:
    """Midpoint quadrature of ``int f^p dt/t`` over the grid cells."""
    return grid.h * float(np.sum(vals**p))


def lp_star_norm(f, grid: LogGrid, p, tails=(0.0, 0.0)) -> float:
    """``||f||_{L^p_*}`` from samples (or a callable) on ``grid`` plus tail contributions."""
    p = check_p(p)
    if grid.count < 1:
        raise ValueError("empty grid")
    vals = _sample(f, grid)
    lo, hi = (float(tails[0]), float(tails[1]))
    if is_inf(p):
        return max(float(vals.max(initial=0.0)), lo, hi)
    return (lp_star_power_sum(vals, grid, p) + lo + hi) ** (1.0 / p)


def richardson_error(vals: np.ndarray, grid: LogGrid, p: float) -> float:
    """Error estimate of the quadrature part of the norm.

    Compares the rule on all nodes with the rule on every other node (step
    ``2h``); for a second-order rule the error of the fine rule is about
    a third of their difference.
    """
    if is_inf(p) or vals.size < 3:
        return 0.0
    fine = lp_star_power_sum(vals, grid, p)
    coarse = 2.0 * grid.h * float(np.sum(vals[::2] ** p))
    # same tails on both sides would cancel, so compare the p-th roots directly
    return abs(fine ** (1.0 / p) - coarse ** (1.0 / p)) / 3.0


@dataclass
class InterpNorm:
    """Estimates of ``||x||_{theta,p}`` from one K-functional grid."""

    upper: float
    lower: float
    quad_err: float
    solver_gap: float
    kgrid: KGrid
    grid_value: float | None = None  # node values and edge tails only, from upper K

    def __post_init__(self):
        if self.grid_value is None:
            self.grid_value = self.upper

    @property
    def value(self) -> float:
        return self.upper


def _tails_upper(theta, p, t_lo, t_hi, nx, ny):
    """Tails from ``K <= t ||x||_Y`` below and ``K <= ||x||_X`` above the grid."""
    if is_inf(p):
        return ny * t_lo ** (1 - theta), nx * t_hi ** (-theta)
    return (
        ny**p * t_lo ** ((1 - theta) * p) / ((1 - theta) * p),
        nx**p * t_hi ** (-theta * p) / (theta * p),
    )


def _tails_lower(theta, p, grid: LogGrid, k_lo):
    """Tails from concavity: ``K(t) >= t K(t_min)/t_min`` below, ``K(t) >= K(t_max)`` above."""
    slope = k_lo[0] / grid.points[0]
    top = k_lo[-1]
    t_lo, t_hi = grid.lower_edge, grid.upper_edge
    if is_inf(p):
        return slope * t_lo ** (1 - theta), top * t_hi ** (-theta)
    return (
        slope**p * t_lo ** ((1 - theta) * p) / ((1 - theta) * p),
        top**p * t_hi ** (-theta * p) / (theta * p),
    )


def _cell_sup_upper(ts, k_up, theta):
    """Upper bound of ``sup t^-theta K(t)`` between consecutive nodes.

    On ``[t_k, t_k+1]`` monotonicity of ``K`` and of ``K(t)/t`` give
    ``K(t) <= min(K_k+1, t K_k / t_k)``; the weighted bound peaks where
    the two pieces meet.
    """
    t0, t1 = ts[:-1], ts[1:]
    k0, k1 = k_up[:-1], k_up[1:]
    with np.errstate(divide="ignore", invalid="ignore"):
        tc = np.where(k0 > 0, np.clip(t0 * k1 / k0, t0, t1), t1)
        env = np.minimum(k1, tc * k0 / t0)
    return float(np.max(tc ** (-theta) * env, initial=0.0))


def interp_norm_from_k(kgrid: KGrid, grid: LogGrid, couple: Couple, theta: float, p) -> InterpNorm:
    p = check_p(p)
    if not 0 < theta < 1:
        raise ValueError("theta must lie in (0, 1)")
    ts = grid.points
    x = kgrid.x
    if not np.any(x):
        return InterpNorm(0.0, 0.0, 0.0, 0.0, kgrid)
    weight = ts ** (-theta)
    up_vals = weight * kgrid.upper
    lo_vals = weight * kgrid.lower
    nx, ny = float(couple.X(x)), float(couple.Y(x))
    lower = lp_star_norm(lo_vals, grid, p, _tails_lower(theta, p, grid, kgrid.lower))
    on_grid = lp_star_norm(up_vals, grid, p, _tails_upper(theta, p, grid.lower_edge, grid.upper_edge, nx, ny))
    if is_inf(p):
        # a sup has no quadrature error, but nodes can miss the peak: bound every cell
        tails = _tails_upper(theta, p, ts[0], ts[-1], nx, ny)
        upper = max(lp_star_norm(up_vals, grid, p, tails), _cell_sup_upper(ts, kgrid.upper, theta))
        return InterpNorm(upper, lower, upper - on_grid, kgrid.rel_gap, kgrid, on_grid)
    return InterpNorm(on_grid, lower, richardson_error(up_vals, grid, p), kgrid.rel_gap, kgrid, on_grid)


def interp_norm(couple: Couple, theta: float, p, x, grid: LogGrid | None = None, warm_starts=None) -> InterpNorm:
    """``||t^{-theta} K(t, x)||_{L^p_*}`` with certified-side bookkeeping.

    ``upper`` uses the solver's attained values and the analytic tails
    ``K <= min(||x||_X, t ||x||_Y)``; ``lower`` uses the dual bounds and
    tails implied by monotonicity and concavity of ``K``.
    """
    grid = grid or LogGrid.default()
    kgrid = k_functional_grid(couple, grid.points, x, warm_starts)
    return interp_norm_from_k(kgrid, grid, couple, theta, p)
