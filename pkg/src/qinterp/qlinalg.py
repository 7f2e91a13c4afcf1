"""Right-linear operators on H^N.

A quaternionic matrix ``T`` acts on column vectors from the left, so
``T(v s) = (T v) s`` for quaternion scalars ``s``. Linear algebra is done
on the complex adjoint: splitting ``T = A + B e2`` with ``A, B`` over the
plane C_{e1}, the 2N x 2N matrix ``[[A, B], [-conj(B), conj(A)]]`` is a
multiplicative, norm-preserving image of ``T``. A vector ``v = a + b e2``
maps to ``[a; -conj(b)]`` so that ``adjoint(T) @ vec(v) == vec(T v)``.

Vectors are float arrays of shape ``(..., N, 4)``.
"""

from __future__ import annotations

import numpy as np

from qinterp import _kernels
from qinterp.quaternion import Quaternion, qabs, qmul

SINGULAR_RTOL = 1e-13


class SingularMatrixError(ArithmeticError):
    pass


# ------------------------------------------------------------------ vectors


def vnorm(v) -> np.ndarray:
    """Quaternionic l2 norm over the last two axes."""
    v = np.asarray(v, dtype=float)
    return np.sqrt(np.sum(v * v, axis=(-2, -1)))


def to_complex(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    a = v[..., 0] + 1j * v[..., 1]
    b = v[..., 2] + 1j * v[..., 3]
    return np.concatenate([a, -np.conj(b)], axis=-1)


def from_complex(c) -> np.ndarray:
    c = np.asarray(c)
    n = c.shape[-1] // 2
    a = c[..., :n]
    b = -np.conj(c[..., n:])
    return np.stack([a.real, a.imag, b.real, b.imag], axis=-1)


def basis_vector(n: int, j: int) -> np.ndarray:
    e = np.zeros((n, 4))
    e[j, 0] = 1.0
    return e


# ----------------------------------------------------------------- matrices


class QMatrix:
    """Square quaternionic matrix, entries stored as an ``(N, N, 4)`` array."""

    __slots__ = ("entries",)

    def __init__(self, entries):
        e = np.array(entries, dtype=float)
        if e.ndim != 3 or e.shape[2] != 4 or e.shape[0] != e.shape[1]:
            raise ValueError(f"expected an (N, N, 4) array, got shape {e.shape}")
        e.setflags(write=False)
        self.entries = e

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def identity(cls, n: int) -> QMatrix:
        e = np.zeros((n, n, 4))
        e[np.arange(n), np.arange(n), 0] = 1.0
        return cls(e)

    @classmethod
    def zeros(cls, n: int) -> QMatrix:
        return cls(np.zeros((n, n, 4)))

    @classmethod
    def diag(cls, entries) -> QMatrix:
        q = np.array([Quaternion.coerce(v).to_array() for v in entries])
        n = len(q)
        e = np.zeros((n, n, 4))
        e[np.arange(n), np.arange(n)] = q
        return cls(e)

    @classmethod
    def from_complex_adjoint(cls, C) -> QMatrix:
        C = np.asarray(C)
        n = C.shape[0] // 2
        A = C[:n, :n]
        B = C[:n, n:]
        return cls(np.stack([A.real, A.imag, B.real, B.imag], axis=-1))

    def complex_adjoint(self) -> np.ndarray:
        e = self.entries
        A = e[..., 0] + 1j * e[..., 1]
        B = e[..., 2] + 1j * e[..., 3]
        return np.block([[A, B], [-np.conj(B), np.conj(A)]])

    def conj_transpose(self) -> QMatrix:
        e = self.entries.transpose(1, 0, 2).copy()
        e[..., 1:] *= -1.0
        return QMatrix(e)

    def right_scale(self, s: Quaternion) -> QMatrix:
        """Entrywise ``T_jk * s``."""
        return QMatrix(qmul(self.entries, Quaternion.coerce(s).to_array()))

    def __matmul__(self, other):
        if isinstance(other, QMatrix):
            return QMatrix(_kernels.qmatmul(self.entries, other.entries))
        return matvec(self, other)

    def __add__(self, other: QMatrix) -> QMatrix:
        return QMatrix(self.entries + other.entries)

    def __sub__(self, other: QMatrix) -> QMatrix:
        return QMatrix(self.entries - other.entries)

    def __mul__(self, c: float) -> QMatrix:
        return QMatrix(self.entries * float(c))

    __rmul__ = __mul__

    def __neg__(self) -> QMatrix:
        return QMatrix(-self.entries)

    def allclose(self, other: QMatrix, atol: float = 1e-10) -> bool:
        return bool(np.allclose(self.entries, other.entries, rtol=0.0, atol=atol))

    def __repr__(self) -> str:
        return f"QMatrix(n={self.n})"


def matvec(T: QMatrix, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape[-2:] != (T.n, 4):
        raise ValueError(f"dimension mismatch: matrix {T.n}x{T.n}, vector {v.shape}")
    return np.sum(qmul(T.entries, v[..., None, :, :]), axis=-2)


def complex_adjoint(T: QMatrix) -> np.ndarray:
    return T.complex_adjoint()


def _check_invertible(C: np.ndarray) -> None:
    sv = np.linalg.svd(C, compute_uv=False)
    if sv.size == 0:
        return
    if sv[-1] <= SINGULAR_RTOL * max(sv[0], 1e-300):
        raise SingularMatrixError(
            f"singular operator (smallest singular value {sv[-1]:.3e}, largest {sv[0]:.3e})"
        )


def inverse(T: QMatrix) -> QMatrix:
    C = T.complex_adjoint()
    _check_invertible(C)
    return QMatrix.from_complex_adjoint(np.linalg.inv(C))


def op_norm(T: QMatrix) -> float:
    """Induced l2 operator norm: the top singular value of the adjoint."""
    if T.n == 0:
        return 0.0
    return float(np.linalg.norm(T.complex_adjoint(), 2))


def eigenvalue_spheres(eigvals, tol: float = 1e-8) -> list[tuple[float, float]]:
    """Collapse complex eigenvalues to distinct ``(Re, |Im|)`` sphere labels."""
    reps: list[tuple[float, float]] = []
    keys = []
    for lam in eigvals:
        scale = max(1.0, abs(lam))
        # snap rounding noise so that the lexicographic order is stable
        re = 0.0 if abs(lam.real) <= tol * scale else float(lam.real)
        im = 0.0 if abs(lam.imag) <= tol * scale else float(abs(lam.imag))
        keys.append((re, im, scale))
    for re, im, scale in sorted(keys):
        key = (re, im)
        if any(abs(key[0] - r[0]) <= tol * scale and abs(key[1] - r[1]) <= tol * scale for r in reps):
            continue
        reps.append(key)
    return sorted(reps)


def eigen_spheres(T: QMatrix, tol: float = 1e-8) -> list[Quaternion]:
    """Canonical representatives ``Re + |Im| e1`` of the right eigen-spheres."""
    lam = np.linalg.eigvals(T.complex_adjoint())
    lam = lam[lam.imag >= -tol * np.maximum(1.0, np.abs(lam))]
    return [Quaternion(re, im) for re, im in eigenvalue_spheres(lam, tol)]


# --------------------------------------------------- operators for the models
#
# DenseOp and DiagOp form a tiny algebra (sum, real scaling, composition,
# inverse, apply, norm) shared by the spectral and interpolation code.


class DenseOp:
    """Operator held as its complex adjoint."""

    __slots__ = ("C",)

    def __init__(self, C):
        self.C = np.asarray(C, dtype=complex)

    @property
    def n(self) -> int:
        return self.C.shape[0] // 2

    @classmethod
    def identity(cls, n: int) -> DenseOp:
        return cls(np.eye(2 * n, dtype=complex))

    def _coerce(self, other):
        if isinstance(other, DiagOp):
            return other.to_dense()
        return other

    def __add__(self, other) -> DenseOp:
        return DenseOp(self.C + self._coerce(other).C)

    def __sub__(self, other) -> DenseOp:
        return DenseOp(self.C - self._coerce(other).C)

    def __mul__(self, c: float) -> DenseOp:
        return DenseOp(self.C * float(c))

    __rmul__ = __mul__

    def __matmul__(self, other) -> DenseOp:
        return DenseOp(self.C @ self._coerce(other).C)

    def power(self, k: int) -> DenseOp:
        return DenseOp(np.linalg.matrix_power(self.C, k))

    def inv(self) -> DenseOp:
        _check_invertible(self.C)
        return DenseOp(np.linalg.inv(self.C))

    def is_invertible(self) -> bool:
        try:
            _check_invertible(self.C)
        except SingularMatrixError:
            return False
        return True

    def norm(self) -> float:
        return float(np.linalg.norm(self.C, 2)) if self.C.size else 0.0

    def apply(self, x) -> np.ndarray:
        return from_complex(to_complex(x) @ self.C.T)

    def to_dense(self) -> DenseOp:
        return self

    def to_qmatrix(self) -> QMatrix:
        return QMatrix.from_complex_adjoint(self.C)


class DiagOp:
    """Diagonal operator with entries ``Re d_j + Im d_j * i_j``.

    ``d`` holds the entries as complex numbers in a reference plane and
    ``units`` the imaginary unit of each coordinate. Real-coefficient
    polynomials and rational functions of a diagonal model keep the units,
    so all arithmetic reduces to complex arithmetic on ``d``.
    """

    __slots__ = ("d", "units")

    def __init__(self, d, units):
        self.d = np.asarray(d, dtype=complex)
        self.units = np.asarray(units, dtype=float)

    @property
    def n(self) -> int:
        return self.d.shape[0]

    def _same(self, other) -> DiagOp:
        if not isinstance(other, DiagOp):
            raise TypeError("mixing DiagOp with a dense operator needs to_dense()")
        if other.units is not self.units and not np.array_equal(other.units, self.units):
            raise ValueError("diagonal operators with different imaginary units")
        return other

    def __add__(self, other):
        if isinstance(other, DenseOp):
            return self.to_dense() + other
        return DiagOp(self.d + self._same(other).d, self.units)

    def __sub__(self, other):
        if isinstance(other, DenseOp):
            return self.to_dense() - other
        return DiagOp(self.d - self._same(other).d, self.units)

    def __mul__(self, c: float) -> DiagOp:
        return DiagOp(self.d * float(c), self.units)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, DenseOp):
            return self.to_dense() @ other
        return DiagOp(self.d * self._same(other).d, self.units)

    def power(self, k: int) -> DiagOp:
        return DiagOp(self.d**k, self.units)

    def inv(self) -> DiagOp:
        mod = np.abs(self.d)
        if mod.size and mod.min() <= SINGULAR_RTOL * max(mod.max(), 1e-300):
            raise SingularMatrixError(f"singular diagonal operator (min |entry| {mod.min():.3e})")
        return DiagOp(1.0 / self.d, self.units)

    def is_invertible(self) -> bool:
        mod = np.abs(self.d)
        return not (mod.size and mod.min() <= SINGULAR_RTOL * max(mod.max(), 1e-300))

    def norm(self) -> float:
        return float(np.abs(self.d).max()) if self.d.size else 0.0

    def moduli(self) -> np.ndarray:
        return np.abs(self.d)

    def quaternions(self) -> np.ndarray:
        q = np.empty((self.n, 4))
        q[:, 0] = self.d.real
        q[:, 1:] = self.d.imag[:, None] * self.units
        return q

    def apply(self, x) -> np.ndarray:
        return qmul(self.quaternions(), np.asarray(x, dtype=float))

    def to_qmatrix(self) -> QMatrix:
        n = self.n
        e = np.zeros((n, n, 4))
        e[np.arange(n), np.arange(n)] = self.quaternions()
        return QMatrix(e)

    def to_dense(self) -> DenseOp:
        return DenseOp(self.to_qmatrix().complex_adjoint())


def real_matrix(op) -> np.ndarray:
    """4N x 4N real matrix of ``op`` acting on flattened vectors ``(N, 4)``."""
    n = op.n
    eye = np.eye(4 * n).reshape(4 * n, n, 4)
    cols = op.apply(eye).reshape(4 * n, 4 * n)
    return cols.T


def abs_entries(T: QMatrix) -> np.ndarray:
    return qabs(T.entries)
