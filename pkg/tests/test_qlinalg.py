import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from qinterp.qlinalg import (
    DenseOp,
    QMatrix,
    SingularMatrixError,
    complex_adjoint,
    eigen_spheres,
    from_complex,
    inverse,
    matvec,
    op_norm,
    real_matrix,
    to_complex,
    vnorm,
)
from qinterp.quaternion import E1, E2, ONE, Quaternion
from qinterp.spectral import DiagonalModel


def random_matrix(rng, n):
    return QMatrix(rng.normal(size=(n, n, 4)))


seeds = st.integers(min_value=0, max_value=2**31)
dims = st.integers(min_value=1, max_value=5)


# ------------------------------------------------------------------ matvec


def test_identity_matvec():
    v = np.random.default_rng(0).normal(size=(3, 4))
    np.testing.assert_allclose(QMatrix.identity(3) @ v, v)


def test_diag_e1_times_one():
    out = QMatrix.diag([E1]) @ np.array([[1.0, 0, 0, 0]])
    np.testing.assert_allclose(out, [[0, 1, 0, 0]])


def test_offdiagonal_example():
    T = QMatrix(np.array([[[0, 0, 0, 0], E1.to_list()], [E2.to_list(), [0, 0, 0, 0]]], dtype=float))
    v = np.array([[1.0, 0, 0, 0], [1.0, 0, 0, 0]])
    np.testing.assert_allclose(T @ v, [E1.to_list(), E2.to_list()])


@given(seeds, dims)
def test_matvec_matches_oracle(seed, n):
    rng = np.random.default_rng(seed)
    T = random_matrix(rng, n)
    v = rng.normal(size=(n, 4))
    np.testing.assert_allclose(matvec(T, v), oracles.matvec(T.entries, v), atol=1e-10)


def test_matvec_dimension_mismatch():
    with pytest.raises(ValueError):
        matvec(QMatrix.identity(2), np.zeros((3, 4)))


# ---------------------------------------------------------- complex adjoint


def test_adjoint_of_e2():
    np.testing.assert_allclose(complex_adjoint(QMatrix.diag([E2])), [[0, 1], [-1, 0]])


def test_adjoint_of_e1():
    np.testing.assert_allclose(complex_adjoint(QMatrix.diag([E1])), [[1j, 0], [0, -1j]])


def test_adjoint_of_identity():
    np.testing.assert_allclose(complex_adjoint(QMatrix.identity(3)), np.eye(6))


@given(seeds, dims)
def test_adjoint_is_a_homomorphism(seed, n):
    rng = np.random.default_rng(seed)
    S, T = random_matrix(rng, n), random_matrix(rng, n)
    np.testing.assert_allclose(
        complex_adjoint(S @ T), complex_adjoint(S) @ complex_adjoint(T), atol=1e-10
    )
    np.testing.assert_allclose((S @ T).entries, oracles.matmul(S.entries, T.entries), atol=1e-10)


@given(seeds, dims)
def test_adjoint_round_trip(seed, n):
    T = random_matrix(np.random.default_rng(seed), n)
    assert QMatrix.from_complex_adjoint(T.complex_adjoint()).allclose(T, atol=0.0)


@given(seeds, dims)
def test_vector_complex_round_trip(seed, n):
    v = np.random.default_rng(seed).normal(size=(n, 4))
    np.testing.assert_array_equal(from_complex(to_complex(v)), v)
    assert float(np.linalg.norm(to_complex(v))) == pytest.approx(float(vnorm(v)))


@given(seeds, dims)
def test_real_matrix_represents_action(seed, n):
    rng = np.random.default_rng(seed)
    T = random_matrix(rng, n)
    v = rng.normal(size=(n, 4))
    R = real_matrix(DenseOp(T.complex_adjoint()))
    np.testing.assert_allclose(R @ v.reshape(-1), (T @ v).reshape(-1), atol=1e-10)


# ----------------------------------------------------------------- inverse


def test_inverse_examples():
    assert inverse(QMatrix.identity(2)).allclose(QMatrix.identity(2))
    assert inverse(QMatrix.diag([ONE + E1])).allclose(QMatrix.diag([(ONE - E1) / 2.0]))
    with pytest.raises(SingularMatrixError):
        inverse(QMatrix.diag([0.0, 1.0]))


@given(seeds, dims)
def test_inverse_twice_is_identity(seed, n):
    T = random_matrix(np.random.default_rng(seed), n)
    if np.linalg.cond(T.complex_adjoint()) > 1e6:
        return
    assert inverse(inverse(T)).allclose(T, atol=1e-8 * (1 + op_norm(T)))
    assert (T @ inverse(T)).allclose(QMatrix.identity(n), atol=1e-8)


# ------------------------------------------------------------ operator norm


def test_norm_examples():
    assert op_norm(QMatrix.identity(4)) == pytest.approx(1.0)
    assert op_norm(QMatrix.diag([2.0 * E1])) == pytest.approx(2.0)
    assert op_norm(QMatrix.zeros(3)) == 0.0


@given(seeds, st.integers(min_value=1, max_value=6))
def test_norm_dominates_rayleigh_samples(seed, n):
    rng = np.random.default_rng(seed)
    T = random_matrix(rng, n)
    samples = oracles.rayleigh_samples(T.entries, rng, 200)
    assert samples.max() <= op_norm(T) * (1 + 1e-12)


def test_norm_matches_power_iteration(rng):
    for n in (1, 2, 5, 8):
        T = random_matrix(rng, n)
        assert op_norm(T) == pytest.approx(oracles.power_iteration_norm(T.entries, rng), rel=1e-6)


def test_rayleigh_maximum_approaches_norm():
    rng = np.random.default_rng(11)
    T = random_matrix(rng, 2)
    best = oracles.rayleigh_samples(T.entries, rng, 10_000).max()
    assert best <= op_norm(T) * (1 + 1e-12)
    assert best >= op_norm(T) * 0.97


# ----------------------------------------------------------- eigen-spheres


def test_eigen_spheres_examples():
    def spheres(T):
        return [q.sphere() for q in eigen_spheres(T)]

    np.testing.assert_allclose(spheres(QMatrix.diag([E1, 2.0 * E2])), [(0.0, 1.0), (0.0, 2.0)], atol=1e-12)
    np.testing.assert_allclose(spheres(QMatrix.identity(3)), [(1.0, 0.0)], atol=1e-12)
    np.testing.assert_allclose(spheres(QMatrix.diag([3.0])), [(3.0, 0.0)], atol=1e-12)


@given(seeds, dims)
def test_eigen_spheres_of_diagonal(seed, n):
    rng = np.random.default_rng(seed)
    q = rng.normal(size=(n, 4))
    got = sorted(r.sphere() for r in eigen_spheres(QMatrix(np.einsum("ij,jk->ijk", np.eye(n), q))))
    want = sorted({(round(a[0], 6), round(float(np.linalg.norm(a[1:])), 6)) for a in q})
    assert len(got) == len(want)
    np.testing.assert_allclose(got, want, atol=1e-6)


def test_eigen_spheres_are_similarity_invariant(rng):
    D = QMatrix.diag([E1, Quaternion(0.5, 0, 2, 0), Quaternion(-1.0)])
    U = random_matrix(rng, 3)
    T = U @ D @ inverse(U)
    got = [q.sphere() for q in eigen_spheres(T)]
    np.testing.assert_allclose(got, [q.sphere() for q in eigen_spheres(D)], atol=1e-8)


# ------------------------------------------------------- operator algebra


@given(seeds, dims)
def test_diagonal_and_dense_operators_agree(seed, n):
    rng = np.random.default_rng(seed)
    q = rng.normal(size=(n, 4))
    D = DiagonalModel(q).T
    dense = D.to_dense()
    v = rng.normal(size=(n, 4))
    np.testing.assert_allclose(D.apply(v), dense.apply(v), atol=1e-10)
    np.testing.assert_allclose((D @ D).apply(v), (dense @ dense).apply(v), atol=1e-9)
    assert D.norm() == pytest.approx(dense.norm(), rel=1e-12)
    if D.is_invertible() and np.min(np.abs(D.d)) > 1e-3:
        np.testing.assert_allclose(D.inv().apply(v), dense.inv().apply(v), atol=1e-7)
    assert D.to_qmatrix().allclose(QMatrix(np.einsum("ij,jk->ijk", np.eye(n), q)), atol=1e-12)
