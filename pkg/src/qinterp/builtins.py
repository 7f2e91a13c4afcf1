"""Builtin operator families and sample vectors for the verification suites.

``a``  diagonal, purely imaginary entries ``r_j i_j``, radii log-spaced in [1e-2, 1e2]
``b``  dense similarity transform ``U D U^{-1}`` of a family-``a`` diagonal
``c``  diagonal with positive real entries log-spaced in [1e-2, 1e2]
``r``  dense Gaussian matrix scaled by ``1/sqrt(N)`` (series checks only)

Families a-c use the ray ``omega = pi`` (negative reals), which misses every
spectral sphere.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import expm

from qinterp.qlinalg import QMatrix
from qinterp.quaternion import ImaginaryUnit
from qinterp.spectral import DenseModel, DiagonalModel, OperatorModel

DEFAULT_OMEGA = math.pi
DEFAULT_DIMS = {"a": 16, "b": 6, "c": 16, "r": 6}
ALIASES = {
    "a": "a", "diag-imag": "a",
    "b": "b", "dense-similar": "b",
    "c": "c", "diag-real": "c",
    "r": "r", "dense-random": "r",
}


def radii(n: int) -> np.ndarray:
    if n == 1:
        return np.ones(1)
    return np.logspace(-2.0, 2.0, n)


def diag_imaginary(n: int, rng: np.random.Generator) -> DiagonalModel:
    r = radii(n)
    units = np.array([ImaginaryUnit.random(rng).to_array() for _ in range(n)])
    return DiagonalModel(units * r[:, None])


def diag_real(n: int) -> DiagonalModel:
    q = np.zeros((n, 4))
    q[:, 0] = radii(n)
    return DiagonalModel(q)


def random_qmatrix(n: int, rng: np.random.Generator) -> QMatrix:
    return QMatrix(rng.normal(size=(n, n, 4)))


def random_unitary_like(n: int, rng: np.random.Generator, perturbation: float = 0.1) -> QMatrix:
    """``exp(S)(I + eps G)`` with ``S`` skew-Hermitian: unitary up to a small perturbation."""
    G = random_qmatrix(n, rng)
    S = G - G.conj_transpose()
    U = QMatrix.from_complex_adjoint(expm(0.5 * S.complex_adjoint()))
    P = QMatrix.identity(n) + random_qmatrix(n, rng) * (perturbation / math.sqrt(n))
    return U @ P


def dense_similar(n: int, rng: np.random.Generator) -> DenseModel:
    D = diag_imaginary(n, rng)
    U = random_unitary_like(n, rng)
    Uinv = QMatrix.from_complex_adjoint(np.linalg.inv(U.complex_adjoint()))
    return DenseModel(U @ D.T.to_qmatrix() @ Uinv)


def builtin(name: str, dim: int | None = None, seed: int = 0) -> OperatorModel:
    key = ALIASES.get(name)
    if key is None:
        raise ValueError(f"unknown builtin family {name!r}; choose from {sorted(ALIASES)}")
    n = dim or DEFAULT_DIMS[key]
    if n < 1:
        raise ValueError("dimension must be positive")
    rng = np.random.default_rng([seed, ord(key)])
    if key == "a":
        return diag_imaginary(n, rng)
    if key == "b":
        return dense_similar(n, rng)
    if key == "r":
        return DenseModel(random_qmatrix(n, rng) * (1.0 / math.sqrt(n)))
    return diag_real(n)


def sample_vectors(n: int, count: int = 32, seed: int = 0) -> np.ndarray:
    """Basis vectors, then the normalized all-ones vector, then random unit vectors."""
    out = []
    for j in range(min(n, count)):
        e = np.zeros((n, 4))
        e[j, 0] = 1.0
        out.append(e)
    if len(out) < count:
        ones = np.zeros((n, 4))
        ones[:, 0] = 1.0 / math.sqrt(n)
        out.append(ones)
    rng = np.random.default_rng([seed, 1])
    while len(out) < count:
        v = rng.normal(size=(n, 4))
        out.append(v / np.linalg.norm(v))
    return np.array(out).reshape(count, n, 4) if count else np.zeros((0, n, 4))


