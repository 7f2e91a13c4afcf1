"""S-spectrum, pseudo S-resolvent and ray-sectorial estimates of operator models.

``Q_s(T) = T^2 - 2 Re(s) T + |s|^2`` depends on ``s`` only through
``Re(s)`` and ``|s|``; on the ray ``s = t e^{i omega}`` that is
``T^2 - 2 t cos(omega) T + t^2`` whatever the unit ``i``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from qinterp.qlinalg import (
    DenseOp,
    DiagOp,
    QMatrix,
    SingularMatrixError,
    eigenvalue_spheres,
    op_norm,
    vnorm,
)
from qinterp.quaternion import E1, Quaternion, ray_point, same_sphere, unit_of
from qinterp.report import DEFAULT_TOL, VerificationReport, margin_of

SAFETY = 0.01


class SpectralPointError(ValueError):
    """A point of the S-spectrum was hit where a resolvent point was required."""

    def __init__(self, t: float | None, s: Quaternion | None = None, msg: str = ""):
        self.t = t
        self.s = s
        where = f"t={t!r}" if t is not None else f"s={s!r}"
        super().__init__(msg or f"point of the S-spectrum at {where}")


class PreconditionError(ValueError):
    pass


# ------------------------------------------------------------------- models


class OperatorModel:
    """Right-linear operator on H^N, dense or diagonal."""

    kind = "abstract"

    @property
    def dim(self) -> int:
        raise NotImplementedError

    @property
    def T(self):
        raise NotImplementedError

    @property
    def identity(self):
        raise NotImplementedError

    def q(self, s) -> DenseOp | DiagOp:
        s = Quaternion.coerce(s)
        return self.q_real(s.w, s.norm2())

    def q_real(self, re: float, abs2: float):
        T, one = self.T, self.identity
        return T @ T - T * (2.0 * re) + one * abs2

    def q_ray(self, t: float, omega: float):
        return self.q_real(t * math.cos(omega), t * t)

    def power(self, n: int):
        if n == 0:
            return self.identity
        return self.T.power(n)

    def to_dense(self) -> DenseModel:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


class DenseModel(OperatorModel):
    kind = "dense"

    def __init__(self, matrix: QMatrix):
        self.matrix = matrix
        self._op = DenseOp(matrix.complex_adjoint())
        self._id = DenseOp.identity(matrix.n)

    @property
    def dim(self) -> int:
        return self.matrix.n

    @property
    def T(self) -> DenseOp:
        return self._op

    @property
    def identity(self) -> DenseOp:
        return self._id

    @cached_property
    def norm(self) -> float:
        return self._op.norm()

    def to_dense(self) -> DenseModel:
        return self

    def to_json(self) -> dict:
        e = self.matrix.entries
        return {"kind": "dense", "n": self.dim, "entries": e.reshape(-1, 4).tolist()}

    def __repr__(self) -> str:
        return f"DenseModel(n={self.dim})"


class DiagonalModel(OperatorModel):
    kind = "diagonal"

    def __init__(self, entries):
        q = np.array([Quaternion.coerce(v).to_array() for v in entries], dtype=float).reshape(-1, 4)
        self.entries = q
        quats = [Quaternion.from_array(row) for row in q]
        units = np.array([unit_of(v).to_array()[1:] for v in quats]).reshape(-1, 3)
        d = np.array([complex(v.w, v.imag_norm) for v in quats], dtype=complex)
        self._op = DiagOp(d, units)
        self._id = DiagOp(np.ones(len(d), dtype=complex), units)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def T(self) -> DiagOp:
        return self._op

    @property
    def identity(self) -> DiagOp:
        return self._id

    @property
    def moduli(self) -> np.ndarray:
        return np.abs(self._op.d)

    def to_dense(self) -> DenseModel:
        return DenseModel(self._op.to_qmatrix())

    def to_json(self) -> dict:
        return {"kind": "diagonal", "entries": self.entries.tolist()}

    def __repr__(self) -> str:
        return f"DiagonalModel(n={self.dim})"


def model_from_op(op) -> OperatorModel:
    if isinstance(op, DiagOp):
        return DiagonalModel(op.quaternions())
    return DenseModel(op.to_qmatrix())


def model_from_json(spec: dict) -> OperatorModel:
    kind = spec.get("kind")
    try:
        entries = np.asarray(spec["entries"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed operator entries: {exc}") from None
    if entries.ndim != 2 or entries.shape[1] != 4:
        raise ValueError("operator entries must be a list of [w, x, y, z] rows")
    if kind == "diagonal":
        return DiagonalModel(entries)
    if kind == "dense":
        n = int(spec["n"])
        if entries.shape[0] != n * n:
            raise ValueError(f"dense operator with n={n} needs {n * n} entries, got {entries.shape[0]}")
        return DenseModel(QMatrix(entries.reshape(n, n, 4)))
    raise ValueError(f"unknown operator kind {kind!r}")


def load_operator(path) -> OperatorModel:
    with open(Path(path)) as fh:
        return model_from_json(json.load(fh))


def save_operator(model: OperatorModel, path) -> None:
    with open(Path(path), "w") as fh:
        json.dump(model.to_json(), fh)


# --------------------------------------------------------- S-resolvent basics


def q_op(T: OperatorModel, s) -> OperatorModel:
    """``Q_s(T) = T^2 - 2 Re(s) T + |s|^2``."""
    return model_from_op(T.q(s))


def in_resolvent_set(T: OperatorModel, s) -> bool:
    s = Quaternion.coerce(s)
    if isinstance(T, DiagonalModel):
        return not any(same_sphere(Quaternion.from_array(q), s) for q in T.entries)
    return T.q(s).is_invertible()


def _sphere_key(q: Quaternion) -> tuple[float, float]:
    return (q.w, q.imag_norm)


def s_spectrum(T: OperatorModel) -> list[Quaternion]:
    """Sorted canonical representatives ``Re + |Im| e1`` of the spheres in sigma_S(T)."""
    if isinstance(T, DiagonalModel):
        lam = [complex(*_sphere_key(Quaternion.from_array(q))) for q in T.entries]
    else:
        lam = np.linalg.eigvals(T.T.C)
        lam = [z for z in lam if z.imag >= -1e-8 * max(1.0, abs(z))]
    return [Quaternion(re, im) for re, im in eigenvalue_spheres(lam)]


def _ray_q(T: OperatorModel, t: float, omega: float):
    """``Q`` on the ray, rejected when singular relative to ``max(||T||^2, t^2)``.

    ``Q`` is a difference of terms of that size, so its own norm is no
    yardstick: at a spectral point it can be pure rounding noise.
    """
    Q = T.q_ray(t, omega)
    if isinstance(Q, DenseOp):
        scale = max(T.norm**2, t * t)
        sv = np.linalg.svd(Q.C, compute_uv=False)
        if sv.size and sv[-1] <= 1e-13 * scale:
            raise SpectralPointError(t)
    return Q


def resolvent(T: OperatorModel, t: float, omega: float):
    """``Q_{t e^{i omega}}(T)^{-1}``; raises :class:`SpectralPointError`."""
    try:
        return _ray_q(T, t, omega).inv()
    except SingularMatrixError:
        raise SpectralPointError(t) from None


@dataclass
class RayFactors:
    """``Q^{-1}``, ``T Q^{-1}`` and ``T^2 Q^{-1}`` at one point of the ray.

    Every ``T^n Q^{-m}`` with ``n <= 2m`` is a product of these three
    factors, each of norm at most ``(1 + 3M) / |s|^k``. Multiplying them
    avoids forming ``T^n`` and ``Q^{-m}`` separately, whose norms can be
    many orders of magnitude above their product and swamp it in rounding.
    """

    identity: object
    R: object
    TR: object
    T2R: object

    def power_resolvent(self, n: int, m: int):
        """``T^n Q^{-m}`` for ``0 <= n <= 2m``."""
        if not 0 <= n <= 2 * m:
            raise PreconditionError(f"need 0 <= n <= 2m, got n={n}, m={m}")
        a = max(0, n - m)
        b = n - 2 * a
        c = m - a - b
        out = self.identity
        for factor, count in ((self.T2R, a), (self.TR, b), (self.R, c)):
            if count:
                out = out @ factor.power(count)
        return out


def ray_factors(T: OperatorModel, t: float, omega: float) -> RayFactors:
    s0 = t * math.cos(omega)
    Q = _ray_q(T, t, omega)
    try:
        R = Q.inv()
    except SingularMatrixError:
        raise SpectralPointError(t) from None
    if isinstance(Q, DenseOp):
        # T^2 Q^{-1} = I + (2 s0 T - t^2) Q^{-1}; all these operators commute
        TR = DenseOp(np.linalg.solve(Q.C, T.T.C))
        rest = (T.T * (2.0 * s0) - T.identity * (t * t)).C
        T2R = DenseOp(np.eye(Q.C.shape[0]) + np.linalg.solve(Q.C, rest))
    else:
        TR = T.T @ R
        T2R = T.T @ TR
    return RayFactors(T.identity, R, TR, T2R)


def power_resolvent(T: OperatorModel, n: int, m: int, t: float, omega: float):
    """``T^n Q_{t e^{i omega}}^{-m}(T)`` for ``0 <= n <= 2m``."""
    return ray_factors(T, t, omega).power_resolvent(n, m)


# ------------------------------------------------------------ sectoriality


@dataclass
class SectorialProfile:
    omega: float
    grid: np.ndarray
    measured_M: float
    q_values: np.ndarray  # t^2 ||Q^{-1}||
    tq_values: np.ndarray  # t ||T Q^{-1}||

    @property
    def M(self) -> float:
        """Constant used by downstream checks: grid maximum inflated by the safety factor."""
        return self.measured_M * (1.0 + SAFETY)

    def to_dict(self) -> dict:
        return {
            "omega": self.omega,
            "measured_M": self.measured_M,
            "M": self.M,
            "grid": self.grid.tolist(),
            "q_values": self.q_values.tolist(),
            "tq_values": self.tq_values.tolist(),
        }


def _diag_q_moduli(T: DiagonalModel, ts: np.ndarray, omega: float) -> np.ndarray:
    d = T.T.d[None, :]
    t = ts[:, None]
    return np.abs(d * d - 2.0 * t * math.cos(omega) * d + t * t)


def _check_ray_diag(T: DiagonalModel, ts: np.ndarray, omega: float, qmod: np.ndarray) -> None:
    scale = np.maximum(np.abs(T.T.d)[None, :] ** 2, ts[:, None] ** 2)
    bad = np.nonzero(np.any(qmod <= 1e-13 * scale, axis=1))[0]
    if bad.size:
        raise SpectralPointError(float(ts[bad[0]]))


def sectorial_scan(T: OperatorModel, omega: float, grid) -> SectorialProfile:
    ts = np.asarray(getattr(grid, "points", grid), dtype=float)
    if isinstance(T, DiagonalModel):
        qmod = _diag_q_moduli(T, ts, omega)
        _check_ray_diag(T, ts, omega, qmod)
        qv = ts**2 * np.max(1.0 / qmod, axis=1)
        tqv = ts * np.max(T.moduli[None, :] / qmod, axis=1)
    else:
        qv = np.empty(ts.size)
        tqv = np.empty(ts.size)
        for k, t in enumerate(ts):
            f = ray_factors(T, t, omega)
            qv[k] = t * t * f.R.norm()
            tqv[k] = t * f.TR.norm()
    measured = float(max(qv.max(initial=0.0), tqv.max(initial=0.0)))
    return SectorialProfile(omega, ts, measured, qv, tqv)


def power_resolvent_norms(T: OperatorModel, omega: float, ts, pairs) -> np.ndarray:
    """``||T^n Q^{-m}||`` for every ``(n, m)`` in ``pairs`` at every ``t``; shape (len(ts), len(pairs))."""
    ts = np.asarray(ts, dtype=float)
    out = np.empty((ts.size, len(pairs)))
    if isinstance(T, DiagonalModel):
        qmod = _diag_q_moduli(T, ts, omega)
        _check_ray_diag(T, ts, omega, qmod)
        r = T.moduli[None, :]
        for j, (n, m) in enumerate(pairs):
            out[:, j] = np.max(r**n / qmod**m, axis=1)
        return out
    for k, t in enumerate(ts):
        f = ray_factors(T, t, omega)
        for j, (n, m) in enumerate(pairs):
            out[k, j] = f.power_resolvent(n, m).norm()
    return out


def power_bound(M: float, n: int, m: int, s_abs) -> np.ndarray:
    """``(1 + 3M)^m / |s|^(2m - n)``."""
    return (1.0 + 3.0 * M) ** m / np.asarray(s_abs, dtype=float) ** (2 * m - n)


def power_resolvent_bound_check(T, omega, grid, n, m, M, *, tol=DEFAULT_TOL, values=None) -> VerificationReport:
    """``||T^n Q_s^{-m}(T)|| <= (1+3M)^m / |s|^(2m-n)`` at every grid point."""
    if not (0 <= n <= 2 * m):
        raise PreconditionError(f"need 0 <= n <= 2m, got n={n}, m={m}")
    ts = np.asarray(getattr(grid, "points", grid), dtype=float)
    if values is None:
        values = power_resolvent_norms(T, omega, ts, [(n, m)])[:, 0]
    bounds = power_bound(M, n, m, ts)
    margins = np.array([margin_of(v, b) for v, b in zip(values, bounds)])
    k = int(np.argmin(margins))
    return VerificationReport.build(
        "lemma-power-bound",
        {"n": n, "m": m, "omega": omega, "M": M, "grid": [float(ts[0]), float(ts[-1]), int(ts.size)], "dim": T.dim},
        values[k],
        bounds[k],
        tol=tol,
        notes={"worst_t": float(ts[k])},
    )


def power_resolvent_sweep(T, omega, grid, M, max_two_m: int = 8, *, tol=DEFAULT_TOL) -> list[VerificationReport]:
    pairs = [(n, m) for m in range(0, max_two_m // 2 + 1) for n in range(0, 2 * m + 1)]
    ts = np.asarray(getattr(grid, "points", grid), dtype=float)
    norms = power_resolvent_norms(T, omega, ts, pairs)
    return [
        power_resolvent_bound_check(T, omega, ts, n, m, M, tol=tol, values=norms[:, j])
        for j, (n, m) in enumerate(pairs)
    ]


# ------------------------------------------------------ graph norms, embedding


def graph_norm(T: OperatorModel, n: int, x) -> np.ndarray:
    """``||x|| + ||T^n x||``; with ``T^0 = I`` this is ``2||x||`` for ``n = 0``."""
    if n < 0:
        raise PreconditionError("graph norm needs n >= 0")
    x = np.asarray(x, dtype=float)
    return vnorm(x) + vnorm(T.power(n).apply(x))


def embedding_constant(M: float, n: int, m: int, s_abs: float) -> float:
    """Constant of ``||x||_{D(T^n)} <= C ||x||_{D(T^m)}`` for ``n <= m``."""
    c = (4.0 + 12.0 * M) ** m
    return max(1.0 + c * s_abs**n, c / s_abs ** (m - n))


def embedding_constant_check(T, omega, M, n, m, s, samples, *, tol=DEFAULT_TOL) -> VerificationReport:
    if n > m:
        raise PreconditionError(f"embedding needs n <= m, got n={n}, m={m}")
    s = Quaternion.coerce(s)
    if not in_resolvent_set(T, s):
        raise SpectralPointError(None, s)
    X = np.asarray(samples, dtype=float)
    num = graph_norm(T, n, X)
    den = graph_norm(T, m, X)
    ok = den > 0
    ratio = float(np.max(num[ok] / den[ok])) if np.any(ok) else 0.0
    bound = embedding_constant(M, n, m, abs(s))
    return VerificationReport.build(
        "embedding",
        {"n": n, "m": m, "omega": omega, "M": M, "s": s.to_list(), "samples": int(X.shape[0]), "dim": T.dim},
        ratio,
        bound,
        tol=tol,
    )


# ------------------------------------------------------------ series identity


def resolvent_series_check(T, s, n_terms: int, *, tol=DEFAULT_TOL) -> VerificationReport:
    """Partial sums of ``sum T^n s^{-n-1}`` against ``Q_s^{-1}(T)(conj(s) - T)``."""
    matrix = T.matrix if isinstance(T, DenseModel) else T
    if isinstance(matrix, OperatorModel):
        matrix = matrix.to_dense().matrix
    s = Quaternion.coerce(s)
    norm_t = op_norm(matrix)
    if not abs(s) > norm_t:
        raise PreconditionError(f"series needs |s| > ||T||: |s|={abs(s)!r}, ||T||={norm_t!r}")
    n = matrix.n
    s_inv = s.inverse()
    power = QMatrix.identity(n)
    scalar = s_inv
    partial = QMatrix.zeros(n)
    for _ in range(n_terms + 1):
        partial = partial + power.right_scale(scalar)
        power = power @ matrix
        scalar = scalar * s_inv
    Q = matrix @ matrix - matrix * (2.0 * s.w) + QMatrix.identity(n) * s.norm2()
    Qinv = QMatrix.from_complex_adjoint(np.linalg.inv(Q.complex_adjoint()))
    target = Qinv @ (QMatrix.identity(n).right_scale(s.conj()) - matrix)
    residual = op_norm(partial - target)
    q = norm_t / abs(s)
    bound = norm_t ** (n_terms + 1) * abs(s) ** (-n_terms - 2) / (1.0 - q)
    return VerificationReport.build(
        "series",
        {"N_terms": n_terms, "s": s.to_list(), "norm_T": norm_t, "dim": n},
        residual,
        bound,
        tol=tol,
    )


def ray_unit_point(t: float, omega: float, unit: Quaternion = E1) -> Quaternion:
    return ray_point(t, omega, unit)
