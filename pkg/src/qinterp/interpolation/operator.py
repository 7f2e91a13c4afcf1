"""Boundedness of an operator between interpolation spaces of two couples."""

from __future__ import annotations

import numpy as np

from qinterp.interpolation.kfunctional import k_functional_grid
from qinterp.interpolation.lpstar import interp_norm_from_k
from qinterp.interpolation.norms import Couple, LogGrid, Norm
from qinterp.qlinalg import DenseOp, QMatrix
from qinterp.report import DEFAULT_TOL, VerificationReport, margin_of


def _as_dense(op, n: int) -> DenseOp:
    if op is None:
        return DenseOp.identity(n)
    if isinstance(op, QMatrix):
        return DenseOp(op.complex_adjoint())
    return op.to_dense()


def _single_term(norm: Norm, n: int) -> tuple[float, DenseOp]:
    if len(norm.terms) != 1:
        raise ValueError("restriction norms need single-term norms c*||L x||")
    coef, op = norm.terms[0]
    return coef, _as_dense(op, n)


def restriction_norm(T, source: Norm, target: Norm, n: int) -> float:
    """``sup ||T x||_target / ||x||_source`` for single-term norms ``c ||L x||``."""
    cs, Ls = _single_term(source, n)
    ct, Lt = _single_term(target, n)
    return ct / cs * (Lt @ _as_dense(T, n) @ Ls.inv()).norm()


def operator_interpolation_check(
    xy: Couple, vw: Couple, T, theta: float, p, samples, grid: LogGrid | None = None, *, tol: float = DEFAULT_TOL
) -> VerificationReport:
    """``||T x||_{(V,W)theta,p} <= ||T|_X||^{1-theta} ||T|_Y||^theta ||x||_{(X,Y)theta,p}``.

    The right side is evaluated on the grid scaled by ``||T|_Y|| / ||T|_X||``,
    which lines its quadrature nodes up with the left side's after the change
    of variables behind the inequality.
    """
    if xy.dim != vw.dim:
        raise ValueError("couples of different dimension")
    n = xy.dim
    grid = grid or LogGrid.default()
    op = _as_dense(T, n)
    norm_x = restriction_norm(op, xy.X, vw.X, n)
    norm_y = restriction_norm(op, xy.Y, vw.Y, n)
    const = norm_x ** (1 - theta) * norm_y**theta
    lam = norm_y / norm_x if norm_x > 0 and norm_y > 0 else 1.0
    src_grid = grid.scaled(lam)
    worst = None
    gap = 0.0
    quad = 0.0
    for x in np.asarray(samples, dtype=float):
        tx = op.apply(x)
        left_k = k_functional_grid(vw, grid.points, tx)
        left = interp_norm_from_k(left_k, grid, vw, theta, p)
        right_k = k_functional_grid(xy, src_grid.points, x)
        right = interp_norm_from_k(right_k, src_grid, xy, theta, p)
        # the inequality holds node by node on matched grids, so compare node values
        measured, bound = left.grid_value, const * right.lower
        gap = max(gap, left.solver_gap, right.solver_gap)
        quad = max(quad, left.quad_err, right.quad_err)
        m = margin_of(measured, bound)
        if worst is None or m < worst[0]:
            worst = (m, measured, bound)
    if worst is None:
        worst = (0.0, 0.0, 0.0)
    return VerificationReport.build(
        "op-interp",
        {"theta": theta, "p": p, "samples": len(samples), "dim": n, "grid": grid.to_list()},
        worst[1],
        worst[2],
        tol=tol,
        solver_gap=2.0 * gap,
        quad_err=quad,
        notes={"norm_X_to_V": norm_x, "norm_Y_to_W": norm_y, "constant": const},
    )
