"""K-functional ``K(t, x) = inf_{x=a+b} ||a||_X + t ||b||_Y``.

The infimum is a sum-of-norms minimization over ``b``. It is solved by a
smoothed Newton method (see ``_kernels``) that returns both the best exact
objective found, a certified upper bound attained by a stored
decomposition, and a dual lower bound.

For couples whose norms are all diagonal the problem separates into
moduli: an optimal ``b`` can be taken of the form ``b_j = beta_j x_j``
with real ``beta_j``, which shrinks the problem from ``4N`` to ``N`` real
unknowns without changing the minimum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from qinterp import _kernels
from qinterp.interpolation.norms import Couple
from qinterp.report import DEFAULT_TOL, VerificationReport

REL_GAP = 1e-6


@dataclass
class KEstimate:
    t: float
    value: float
    lower: float
    a: np.ndarray
    b: np.ndarray
    solver_iterations: int

    @property
    def gap_estimate(self) -> float:
        return max(self.value - self.lower, 0.0)


@dataclass
class KGrid:
    """K-functional estimates of one vector over a list of ``t``."""

    ts: np.ndarray
    upper: np.ndarray
    lower: np.ndarray
    b: np.ndarray  # (len(ts), N, 4)
    iterations: np.ndarray
    x: np.ndarray

    @property
    def a(self) -> np.ndarray:
        return self.x[None] - self.b

    def estimate(self, k: int) -> KEstimate:
        return KEstimate(
            float(self.ts[k]), float(self.upper[k]), float(self.lower[k]),
            self.a[k], self.b[k], int(self.iterations[k]),
        )

    @property
    def rel_gap(self) -> float:
        """Largest relative gap ``(upper - lower) / upper`` on the grid."""
        with np.errstate(divide="ignore", invalid="ignore"):
            g = np.where(self.upper > 0, (self.upper - self.lower) / self.upper, 0.0)
        return float(np.max(g, initial=0.0))


def _problem_diagonal(couple: Couple, x: np.ndarray):
    """Reduced problem in ``beta`` over the coordinates where ``x_j != 0``."""
    n = couple.dim
    mod = np.sqrt(np.sum(x * x, axis=-1))
    active = np.nonzero(mod > 0)[0]
    blocks, ys, w0, side = [], [], [], []
    for which, norm in ((0, couple.X), (1, couple.Y)):
        for coef, lj in norm.diagonal_moduli(n):
            Ak = np.diag(lj[active] * mod[active])
            blocks.append(Ak)
            ys.append(Ak.sum(axis=1) if which == 0 else np.zeros(active.size))
            w0.append(coef)
            side.append(which)
    return active, mod, blocks, ys, np.array(w0), np.array(side)


def _problem_dense(couple: Couple, x: np.ndarray):
    n = couple.dim
    xf = x.reshape(-1)
    blocks, ys, w0, side = [], [], [], []
    for which, norm in ((0, couple.X), (1, couple.Y)):
        for coef, L in norm.real_terms(n):
            blocks.append(L)
            ys.append(L @ xf if which == 0 else np.zeros(L.shape[0]))
            w0.append(coef)
            side.append(which)
    return blocks, ys, np.array(w0), np.array(side)


def _stack(blocks, ys):
    offsets = np.zeros(len(blocks) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([b.shape[0] for b in blocks])
    return np.vstack(blocks), np.concatenate(ys), offsets


def _normalize_starts(warm_starts, n_t: int, n: int) -> np.ndarray | None:
    if warm_starts is None:
        return None
    w = np.asarray(warm_starts, dtype=float)
    if w.ndim == 3:  # one start per t
        w = w[:, None]
    if w.shape[0] != n_t or w.shape[-2:] != (n, 4):
        raise ValueError(f"warm starts need shape ({n_t}, S, {n}, 4), got {w.shape}")
    return w


def k_functional_grid(couple: Couple, ts, x, warm_starts=None, rel_gap: float = REL_GAP) -> KGrid:
    """K(t, x) for every ``t`` in ``ts``.

    ``warm_starts`` optionally supplies candidate ``b`` vectors, shape
    ``(len(ts), S, N, 4)`` or ``(len(ts), N, 4)``. The trivial splits
    ``b = 0`` and ``b = x`` are always tried.
    """
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    if np.any(ts <= 0):
        raise ValueError("K-functional needs t > 0")
    x = np.asarray(x, dtype=float)
    n = couple.dim
    if x.shape != (n, 4):
        raise ValueError(f"vector shape {x.shape} does not match couple dimension {n}")
    n_t = ts.size
    warm = _normalize_starts(warm_starts, n_t, n)
    zeros = np.zeros(n_t)
    if not np.any(x):
        return KGrid(ts, zeros, zeros.copy(), np.zeros((n_t, n, 4)), np.zeros(n_t, dtype=np.int64), x)

    if couple.is_diagonal:
        active, mod, blocks, ys, w0, side = _problem_diagonal(couple, x)
        A, y, offsets = _stack(blocks, ys)
        d = active.size
        n_s = 2 + (0 if warm is None else warm.shape[1])
        starts = np.zeros((n_t, n_s, d))
        starts[:, 1] = 1.0
        if warm is not None:
            wm = np.sqrt(np.sum(warm[:, :, active] ** 2, axis=-1))
            starts[:, 2:] = np.minimum(wm / mod[active], 1.0)
        Z, up, lo, it = _kernels.minimize_norm_sums(A, y, offsets, w0, side, ts, starts, rel_gap)
        beta = np.zeros((n_t, n))
        beta[:, active] = Z
        b = beta[:, :, None] * x[None]
    else:
        blocks, ys, w0, side = _problem_dense(couple, x)
        A, y, offsets = _stack(blocks, ys)
        d = 4 * n
        n_s = 2 + (0 if warm is None else warm.shape[1])
        starts = np.zeros((n_t, n_s, d))
        starts[:, 1] = x.reshape(-1)
        if warm is not None:
            starts[:, 2:] = warm.reshape(n_t, -1, d)
        Z, up, lo, it = _kernels.minimize_norm_sums(A, y, offsets, w0, side, ts, starts, rel_gap)
        b = Z.reshape(n_t, n, 4)
    # re-evaluate the objective at the stored split so the value is attained exactly
    value = couple.X(x[None] - b) + ts * couple.Y(b)
    lower = np.minimum(lo, value)
    return KGrid(ts, value, lower, b, np.asarray(it), x)


def k_functional(couple: Couple, t: float, x, warm_starts=None, rel_gap: float = REL_GAP) -> KEstimate:
    """Upper estimate of ``K(t, x)`` together with the split attaining it."""
    if not t > 0:
        raise ValueError(f"K-functional needs t > 0, got {t}")
    warm = None
    if warm_starts is not None:
        warm = np.asarray(warm_starts, dtype=float)
        if warm.ndim == 2:
            warm = warm[None]
        warm = warm[None]
    return k_functional_grid(couple, [t], x, warm, rel_gap).estimate(0)


def _rel(est: KEstimate) -> float:
    return est.gap_estimate / est.value if est.value > 0 else 0.0


def k_swap_identity_check(couple: Couple, t: float, x, *, tol: float = DEFAULT_TOL) -> VerificationReport:
    """``K_{X,Y}(t, x) = t K_{Y,X}(1/t, x)``, each side warmed by the other's split."""
    x = np.asarray(x, dtype=float)
    left = k_functional(couple, t, x)
    right = k_functional(couple.swapped(), 1.0 / t, x, warm_starts=[left.a])
    left = k_functional(couple, t, x, warm_starts=[right.a])
    diff = abs(left.value - t * right.value)
    allowance = 2.0 * (left.gap_estimate + t * right.gap_estimate)
    return VerificationReport.build(
        "couple-props",
        {"property": "k-swap", "t": t, "dim": couple.dim},
        diff,
        allowance,
        tol=tol,
        solver_gap=max(_rel(left), _rel(right)),
        notes={"K_xy": left.value, "t_K_yx": t * right.value},
    )


def intermediate_constants(couple: Couple, e_norm, theta: float, samples, grid) -> tuple[float, float]:
    """Smallest empirical J- and K-class constants of the norm ``e_norm`` over the samples."""
    if not 0 < theta < 1:
        raise ValueError("theta must lie in (0, 1)")
    ts = np.asarray(getattr(grid, "points", grid), dtype=float)
    c_j = 0.0
    c_k = 0.0
    for x in np.asarray(samples, dtype=float):
        ex = float(e_norm(x))
        den = float(couple.X(x)) ** (1 - theta) * float(couple.Y(x)) ** theta
        if den > 0:
            c_j = max(c_j, ex / den)
        if ex > 0:
            kg = k_functional_grid(couple, ts, x)
            c_k = max(c_k, float(np.max(kg.upper / (ts**theta * ex))))
    return c_j, c_k
