"""The resolvent functional psi_x(t) and the trinomial splittings built from Q_s(T).

Along the ray ``s = t e^{i omega}`` one has ``Q_s(T) = T^2 - 2t cos(omega) T + t^2``,
so ``(T^2 - 2t cos(omega) T + t^2)^m Q_s^{-m}(T) x = x``. Expanding the
power by the trinomial theorem and sorting the terms by the exponent of
``T`` gives splittings ``x = a + b`` with explicit control of both parts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import factorial

import numpy as np

from qinterp.interpolation.lpstar import check_p, is_inf, lp_star_norm, richardson_error
from qinterp.interpolation.norms import LogGrid
from qinterp.qlinalg import to_complex, vnorm
from qinterp.spectral import DiagonalModel, _check_ray_diag, _diag_q_moduli, ray_factors, sectorial_scan


def trinomial_terms(m: int):
    """``(alpha, beta, gamma, m!/(alpha! beta! gamma!))`` with ``alpha + beta + gamma = m``."""
    for alpha in range(m + 1):
        for beta in range(m - alpha + 1):
            gamma = m - alpha - beta
            yield alpha, beta, gamma, factorial(m) // (factorial(alpha) * factorial(beta) * factorial(gamma))


def trinomial_weight_total(m: int) -> int:
    """``sum m! 2^beta / (alpha! beta! gamma!) = 4^m``."""
    return sum(c * 2**beta for _, beta, _, c in trinomial_terms(m))


def psi_constant(M: float, n: int) -> float:
    """``c_n`` with ``psi_x(t) <= c_n (||a|| + ||T^n b|| / t^n)`` for every split ``x = a + b``."""
    if n % 2 == 0:
        return (1.0 + 3.0 * M) ** (n // 2)
    return 2.0 * (1.0 + 3.0 * M) ** ((n + 1) // 2)


def _as_batch(x):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 2
    return (x[None] if single else x), single


def psi_grid(T, omega: float, n: int, ts, x) -> np.ndarray:
    """``psi_x(t)`` for every ``t`` in ``ts`` and every vector in ``x``; shape ``(len(ts), S)``."""
    if n < 1:
        raise ValueError("psi needs n >= 1")
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    X, _ = _as_batch(x)
    if isinstance(T, DiagonalModel):
        qmod = _diag_q_moduli(T, ts, omega)
        _check_ray_diag(T, ts, omega, qmod)
        r = T.moduli[None, :]
        xm = np.sqrt(np.sum(X * X, axis=-1))  # (S, N)
        if n % 2 == 0:
            coefs = [r**n / qmod ** (n // 2)]
        else:
            h = (n + 1) // 2
            coefs = [r ** (n + 1) / qmod**h, ts[:, None] * r**n / qmod**h]
        out = np.zeros((ts.size, X.shape[0]))
        for c in coefs:
            out += np.sqrt(np.einsum("tj,sj->ts", c**2, xm**2))
        return out
    Xc = to_complex(X)  # (S, 2N)
    out = np.empty((ts.size, X.shape[0]))
    h = (n + 1) // 2
    for k, t in enumerate(ts):
        f = ray_factors(T, t, omega)
        if n % 2 == 0:
            out[k] = np.linalg.norm(Xc @ f.power_resolvent(n, n // 2).C.T, axis=-1)
        else:
            out[k] = np.linalg.norm(Xc @ f.power_resolvent(n + 1, h).C.T, axis=-1) + t * np.linalg.norm(
                Xc @ f.power_resolvent(n, h).C.T, axis=-1
            )
    return out


def psi(T, omega: float, n: int, t: float, x):
    """``psi_x(t)``: ``||T^n Q^{-n/2} x||`` for even ``n``,
    ``||T^{n+1} Q^{-(n+1)/2} x|| + t ||T^n Q^{-(n+1)/2} x||`` for odd ``n``."""
    X, single = _as_batch(x)
    vals = psi_grid(T, omega, n, [t], X)[0]
    return float(vals[0]) if single else vals


def trinomial_split_ops(T, omega: float, order: int, threshold: int, tau: float):
    """Operators ``(A, B)`` with ``A + B = I`` from the expansion of
    ``(T^2 - 2 tau cos(omega) T + tau^2)^order Q^{-order}``.

    Terms with ``2 alpha + beta >= threshold`` go to ``A``, the rest to ``B``;
    either may be ``None`` when it has no terms.
    """
    if order < 1:
        raise ValueError("expansion order must be >= 1")
    c = -2.0 * math.cos(omega)
    coef = np.zeros(2 * order + 1)
    for alpha, beta, gamma, mult in trinomial_terms(order):
        coef[2 * alpha + beta] += mult * c**beta * tau ** (beta + 2 * gamma)
    f = ray_factors(T, tau, omega)
    a_op = None
    b_op = None
    for j in range(2 * order + 1):
        if coef[j] != 0.0:
            term = f.power_resolvent(j, order) * coef[j]
            if j >= threshold:
                a_op = term if a_op is None else a_op + term
            else:
                b_op = term if b_op is None else b_op + term
    return a_op, b_op


def trinomial_split(T, omega: float, order: int, threshold: int, tau: float, x):
    """Split ``x = a + b`` from the trinomial expansion; see :func:`trinomial_split_ops`."""
    a_op, b_op = trinomial_split_ops(T, omega, order, threshold, tau)
    x = np.asarray(x, dtype=float)
    a = np.zeros_like(x) if a_op is None else a_op.apply(x)
    b = np.zeros_like(x) if b_op is None else b_op.apply(x)
    return a, b


def proof_decomposition(T, omega: float, n: int, t: float, x):
    """Split of order ``n`` at ``tau = t``: ``a`` collects ``2 alpha + beta >= n + 1``."""
    if n < 1:
        raise ValueError("decomposition needs n >= 1")
    return trinomial_split(T, omega, n, n + 1, t, x)


@dataclass
class StarNorm:
    """``||x||* = ||x|| + ||t^{n theta} psi_x||_{L^p_*}`` with both estimates of the integral part."""

    norm_x: float
    psi_upper: float
    psi_lower: float
    quad_err: float

    @property
    def upper(self) -> float:
        return self.norm_x + self.psi_upper

    @property
    def lower(self) -> float:
        return self.norm_x + self.psi_lower

    @property
    def value(self) -> float:
        return self.upper


def star_norm_from_psi(psi_vals, grid: LogGrid, n: int, theta: float, p, M: float, norm_x: float, norm_tnx: float) -> StarNorm:
    p = check_p(p)
    ts = grid.points
    vals = ts ** (n * theta) * np.asarray(psi_vals, dtype=float)
    c = psi_constant(M, n)
    t_lo, t_hi = grid.lower_edge, grid.upper_edge
    # psi <= c ||x|| (split a = x) below the grid, psi <= c ||T^n x|| / t^n (b = x) above it
    if is_inf(p):
        tails = (c * norm_x * t_lo ** (n * theta), c * norm_tnx * t_hi ** (-n * (1 - theta)))
    else:
        tails = (
            (c * norm_x) ** p * t_lo ** (n * theta * p) / (n * theta * p),
            (c * norm_tnx) ** p * t_hi ** (-n * (1 - theta) * p) / (n * (1 - theta) * p),
        )
    upper = lp_star_norm(vals, grid, p, tails)
    lower = lp_star_norm(vals, grid, p)
    return StarNorm(norm_x, upper, lower, richardson_error(vals, grid, p))


def interp_norm_star(T, omega: float, n: int, theta: float, p, x, grid: LogGrid | None = None, M: float | None = None) -> StarNorm:
    """``||x|| + ||t^{n theta} psi_x(t)||_{L^p_*}``; ``M`` defaults to the grid scan with 1% safety."""
    if not 0 < theta < 1:
        raise ValueError("theta must lie in (0, 1)")
    grid = grid or LogGrid.default()
    x = np.asarray(x, dtype=float)
    if not np.any(x):
        return StarNorm(0.0, 0.0, 0.0, 0.0)
    if M is None:
        M = sectorial_scan(T, omega, grid).M
    vals = psi_grid(T, omega, n, grid.points, x)[:, 0]
    return star_norm_from_psi(
        vals, grid, n, theta, p, M, float(vnorm(x)), float(vnorm(T.power(n).apply(x)))
    )

