"""Norm evaluators on H^N, interpolation couples and logarithmic grids."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from qinterp.qlinalg import DiagOp, real_matrix, vnorm


@dataclass(frozen=True)
class Norm:
    """``x -> sum_k coef_k * ||L_k x||`` with ``L_k`` an operator or ``None`` (identity).

    Every norm used in the package has this shape: plain l2, weighted l2
    (``L`` a positive real diagonal) and graph norms ``||x|| + ||T^n x||``.
    """

    terms: tuple
    label: str = "norm"

    def __post_init__(self):
        if not self.terms:
            raise ValueError("a norm needs at least one term")
        for coef, _ in self.terms:
            if not coef > 0:
                raise ValueError(f"norm coefficients must be positive, got {coef}")
        if not any(op is None or _is_injective(op) for _, op in self.terms):
            raise ValueError("norm is not definite: no injective term")

    def __call__(self, x) -> np.ndarray | float:
        x = np.asarray(x, dtype=float)
        total = 0.0
        for coef, op in self.terms:
            y = x if op is None else op.apply(x)
            total = total + coef * vnorm(y)
        return total

    def scaled(self, c: float) -> Norm:
        return Norm(tuple((coef * c, op) for coef, op in self.terms), f"{c:g}*{self.label}")

    @property
    def is_diagonal(self) -> bool:
        return all(op is None or isinstance(op, DiagOp) for _, op in self.terms)

    def diagonal_moduli(self, n: int) -> list[tuple[float, np.ndarray]]:
        """``(coef, |l_j|)`` per term for a diagonal norm."""
        out = []
        for coef, op in self.terms:
            out.append((coef, np.ones(n) if op is None else np.abs(op.d)))
        return out

    def real_terms(self, n: int) -> list[tuple[float, np.ndarray]]:
        """``(coef, 4N x 4N real matrix)`` per term."""
        out = []
        for coef, op in self.terms:
            out.append((coef, np.eye(4 * n) if op is None else real_matrix(op)))
        return out


def _is_injective(op) -> bool:
    try:
        return op.is_invertible()
    except AttributeError:
        return False


def l2_norm() -> Norm:
    return Norm(((1.0, None),), "l2")


def weighted_norm(weights, units=None) -> Norm:
    """``||diag(w) x||`` for positive real weights."""
    w = np.asarray(weights, dtype=float)
    if np.any(w <= 0):
        raise ValueError("weights must be positive")
    if units is None:
        units = np.tile([1.0, 0.0, 0.0], (w.size, 1))
    return Norm(((1.0, DiagOp(w.astype(complex), units)),), "weighted")


def graph_norm(T, n: int) -> Norm:
    """``||x|| + ||T^n x||`` for an operator model; ``n = 0`` gives ``2||x||``."""
    if n < 0:
        raise ValueError("graph norm needs n >= 0")
    op = T.identity if n == 0 else T.power(n)
    return Norm(((1.0, None), (1.0, op)), f"D(T^{n})")


@dataclass(frozen=True)
class Couple:
    """Two norms on the same coordinates of H^N."""

    dim: int
    X: Norm
    Y: Norm

    def swapped(self) -> Couple:
        return Couple(self.dim, self.Y, self.X)

    @property
    def is_diagonal(self) -> bool:
        return self.X.is_diagonal and self.Y.is_diagonal


def l2_couple(n: int) -> Couple:
    return Couple(n, l2_norm(), l2_norm())


def graph_couple(T, n: int, m: int | None = None) -> Couple:
    """``(X, D(T^n))`` when ``m`` is None, otherwise ``(D(T^n), D(T^m))``."""
    if m is None:
        return Couple(T.dim, l2_norm(), graph_norm(T, n))
    return Couple(T.dim, graph_norm(T, n), graph_norm(T, m))


@dataclass
class LogGrid:
    """Geometric nodes ``t_k``; node ``k`` is the log-midpoint of its cell."""

    t_min: float
    t_max: float
    count: int
    _points: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if not (0 < self.t_min < self.t_max):
            raise ValueError(f"need 0 < t_min < t_max, got {self.t_min}, {self.t_max}")
        if self.count < 2:
            raise ValueError("a log grid needs at least 2 points")

    @classmethod
    def default(cls) -> LogGrid:
        return cls(1e-3, 1e3, 200)

    @property
    def points(self) -> np.ndarray:
        if self._points is None:
            self._points = np.exp(np.linspace(math.log(self.t_min), math.log(self.t_max), self.count))
        return self._points

    @property
    def h(self) -> float:
        """Step in ``log t``."""
        return math.log(self.t_max / self.t_min) / (self.count - 1)

    @property
    def lower_edge(self) -> float:
        return self.t_min * math.exp(-self.h / 2)

    @property
    def upper_edge(self) -> float:
        return self.t_max * math.exp(self.h / 2)

    def power(self, alpha: float) -> LogGrid:
        """Grid with nodes ``t_k^alpha`` (sorted), reusing the exact node values."""
        if alpha == 0:
            raise ValueError("alpha must be nonzero")
        pts = self.points**alpha
        if alpha < 0:
            pts = pts[::-1].copy()
        return LogGrid(float(pts[0]), float(pts[-1]), self.count, pts)

    def scaled(self, lam: float) -> LogGrid:
        """Grid with nodes ``lam * t_k``."""
        if not lam > 0:
            raise ValueError("scale must be positive")
        pts = self.points * lam
        return LogGrid(float(pts[0]), float(pts[-1]), self.count, pts)

    def to_list(self) -> list:
        return [self.t_min, self.t_max, self.count]
