"""Explicit constants of the inequalities verified by the checks.

All take the ray-sectoriality constant ``M``. ``p = inf`` follows the
convention ``alpha^{1/inf} = 1``.
"""

from __future__ import annotations

from qinterp.interpolation.lpstar import inv_p, is_inf
from qinterp.interpolation.psi import psi_constant
from qinterp.spectral import embedding_constant, power_bound

__all__ = [
    "embedding_constant",
    "power_bound",
    "psi_constant",
    "lemma_iv_inf_constant",
    "lemma_iv_pq_constant",
    "lemma_iv_cap_constant",
    "lemma_iv_sum_constant",
    "l2_interp_constant",
    "thm35_sub_constant",
    "thm35_sup_constants",
    "thm35_sup_constant",
    "thm36_constant",
    "thm36_step_constant",
    "thm37_large_t_constant",
    "thm37_small_t_constant",
    "theta_of",
]


def _base(theta: float, p: float) -> float:
    return theta * (1.0 - theta) * p


def l2_interp_constant(theta: float, p) -> float:
    """``||x||_{theta,p} = c ||x||`` when both spaces of the couple carry the same norm."""
    if is_inf(p):
        return 1.0
    return _base(theta, p) ** (-1.0 / p)


def lemma_iv_cap_constant(theta: float, p) -> float:
    """``||x||_{theta,p} <= c max(||x||_X, ||x||_Y)``."""
    return l2_interp_constant(theta, p)


def lemma_iv_inf_constant(theta: float, p) -> float:
    """``||x||_{theta,inf} <= c ||x||_{theta,p}``."""
    if is_inf(p):
        return 1.0
    return _base(theta, p) ** (1.0 / p)


def lemma_iv_pq_constant(theta: float, p, q) -> float:
    """``||x||_{theta,q} <= c ||x||_{theta,p}`` for ``p <= q``."""
    if float(p) > float(q):
        raise ValueError("need p <= q")
    if is_inf(p):
        return 1.0
    return _base(theta, p) ** ((1.0 / p) * (1.0 - p * inv_p(q)))


def lemma_iv_sum_constant(theta: float, q) -> float:
    """``K(1, x) = ||x||_{X+Y} <= c ||x||_{theta,q}``."""
    return lemma_iv_inf_constant(theta, q)


def thm35_sub_constant(M: float, n: int, theta: float, p) -> float:
    """``||x||* <= c ||x||_{theta,p}``: the embedding constant of ``X+D(T^n) -> X``
    plus ``c_n / n^{1/p}`` from the pointwise bound ``psi(t) <= c_n K(t^{-n})``."""
    return lemma_iv_sum_constant(theta, p) + psi_constant(M, n) / n ** inv_p(p)


def thm35_sup_constants(M: float, n: int) -> tuple[float, float]:
    """``(M1, M2)`` with ``K(t^{-n}, x) <= M1 psi(t) + M2 ||x|| / t^n`` for ``t >= 1``."""
    c = 1.0 + 3.0 * M
    m2 = 4.0**n * c**n
    if n % 2 == 0:
        return 4.0**n * c ** (n / 2), m2
    return 4.0**n * c ** ((n - 1) / 2), m2


def thm35_sup_constant(M: float, n: int, theta: float, p) -> float:
    """``||x||_{theta,p} <= c ||x||*``."""
    m1, m2 = thm35_sup_constants(M, n)
    if is_inf(p):
        first = 1.0 + m2
    else:
        first = p ** (-1.0 / p) * (theta ** (-1.0 / p) + m2 * (1.0 - theta) ** (-1.0 / p))
    return max(first, m1 * n ** inv_p(p))


def thm36_step_constant(M: float, n: int, k: int) -> float:
    """``C_{n,k,k+1}``."""
    d = k - n
    return (d + 1) * 4.0 ** (d / (d + 1)) * (1.0 + 3.0 * M) ** (d * (d + 2) / (d + 1))


def thm36_constant(M: float, n: int, k: int, m: int) -> float:
    """``C_{n,k,m}`` by the induction ``C_{n,k,m+1} = C_{n,k,m} C_{n,m,m+1}^{(k-n)/(m-n)}``."""
    if not n < k < m:
        raise ValueError(f"need n < k < m, got {(n, k, m)}")
    c = thm36_step_constant(M, n, k)
    for mm in range(k + 1, m):
        c *= thm36_step_constant(M, n, mm) ** ((k - n) / (mm - n))
    return c


def thm37_large_t_constant(M: float, n: int, m: int) -> float:
    """Embedding constant of ``D(T^m) -> D(T^n)`` at ``|s| = 1``, used for ``t >= 1``."""
    return embedding_constant(M, n, m, 1.0)


def thm37_small_t_constant(M: float, m: int) -> float:
    return 3.0 * (4.0 + 12.0 * M) ** m


def theta_of(n: int, k: int, m: int) -> float:
    return (k - n) / (m - n)

