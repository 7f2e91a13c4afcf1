import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from qinterp.builtins import builtin, sample_vectors
from qinterp.interpolation import (
    Couple,
    LogGrid,
    Norm,
    graph_couple,
    intermediate_constants,
    interp_norm,
    interp_norm_star,
    k_functional,
    k_functional_grid,
    k_swap_identity_check,
    l2_couple,
    l2_norm,
    lp_star_norm,
    operator_interpolation_check,
    proof_decomposition,
    psi,
    psi_grid,
    restriction_norm,
    trinomial_weight_total,
    weighted_norm,
)
from qinterp.interpolation.psi import trinomial_split
from qinterp.qlinalg import DenseOp, QMatrix, qmul, vnorm
from qinterp.quaternion import E1, ImaginaryUnit, Quaternion
from qinterp.spectral import DenseModel, DiagonalModel

E1_MODEL = DiagonalModel([E1])
ONE_VEC = np.array([[1.0, 0.0, 0.0, 0.0]])
seeds = st.integers(min_value=0, max_value=2**31)
ts_strategy = st.floats(min_value=1e-3, max_value=1e3)


def random_vector(rng, n):
    return rng.normal(size=(n, 4))


def random_weighted_couple(rng, n):
    return Couple(n, weighted_norm(np.exp(rng.normal(size=n))), weighted_norm(np.exp(rng.normal(size=n))))


def random_dense_couple(rng, n):
    def norm():
        A = QMatrix(rng.normal(size=(n, n, 4))) + QMatrix.identity(n) * 3.0
        return Norm(((1.0, DenseOp(A.complex_adjoint())),), "dense")

    return Couple(n, norm(), norm())


# ---------------------------------------------------------------- norms


def test_norm_validation():
    with pytest.raises(ValueError):
        Norm(())
    with pytest.raises(ValueError):
        Norm(((-1.0, None),))
    with pytest.raises(ValueError):
        weighted_norm([1.0, 0.0])
    singular = DenseOp(QMatrix.diag([0.0, 1.0]).complex_adjoint())
    with pytest.raises(ValueError):
        Norm(((1.0, singular),))


def test_log_grid():
    g = LogGrid.default()
    assert g.points[0] == pytest.approx(1e-3) and g.points[-1] == pytest.approx(1e3)
    assert g.h == pytest.approx(math.log(1e6) / 199)
    p = g.power(-2)
    np.testing.assert_array_equal(p.points, (g.points**-2)[::-1])
    np.testing.assert_allclose(g.scaled(3.0).points, 3 * g.points)
    with pytest.raises(ValueError):
        LogGrid(1.0, 0.5, 10)


# ---------------------------------------------------------- K-functional


@given(seeds, ts_strategy)
def test_k_equal_norms_closed_form(seed, t):
    x = random_vector(np.random.default_rng(seed), 3)
    est = k_functional(l2_couple(3), t, x)
    assert est.value == pytest.approx(oracles.k_equal_l2(t, float(vnorm(x))), rel=1e-6)
    assert est.lower <= est.value


@given(seeds, ts_strategy)
def test_k_scaled_y_closed_form(seed, t):
    x = random_vector(np.random.default_rng(seed), 2)
    couple = Couple(2, l2_norm(), l2_norm().scaled(2.0))
    est = k_functional(couple, t, x)
    assert est.value == pytest.approx(oracles.k_equal_l2(t, float(vnorm(x)), 2.0), rel=1e-6)


def test_k_of_zero_is_zero():
    kg = k_functional_grid(l2_couple(2), [0.1, 1.0, 10.0], np.zeros((2, 4)))
    np.testing.assert_array_equal(kg.upper, 0.0)


@given(seeds)
def test_k_attained_split_and_trivial_bounds(seed):
    rng = np.random.default_rng(seed)
    couple = random_dense_couple(rng, 3)
    x = random_vector(rng, 3)
    ts = np.logspace(-2, 2, 9)
    kg = k_functional_grid(couple, ts, x)
    np.testing.assert_allclose(kg.a + kg.b, np.broadcast_to(x, kg.b.shape), atol=1e-12)
    attained = couple.X(kg.a) + ts * couple.Y(kg.b)
    np.testing.assert_allclose(kg.upper, attained, rtol=1e-12)
    trivial = np.minimum(float(couple.X(x)), ts * float(couple.Y(x)))
    assert np.all(kg.upper <= trivial * (1 + 1e-12))
    assert np.all(kg.lower <= kg.upper)


@given(seeds)
def test_k_monotone_and_concave(seed):
    rng = np.random.default_rng(seed)
    couple = random_weighted_couple(rng, 4)
    x = random_vector(rng, 4)
    ts = np.logspace(-2, 2, 15)
    kg = k_functional_grid(couple, ts, x)
    slack = 2 * kg.rel_gap * kg.upper.max()
    assert np.all(np.diff(kg.upper) >= -slack)
    for i in range(len(ts) - 2):
        t1, t2, t3 = ts[i : i + 3]
        chord = kg.upper[i] + (kg.upper[i + 2] - kg.upper[i]) * (t2 - t1) / (t3 - t1)
        assert kg.upper[i + 1] >= chord - slack


def test_diagonal_and_dense_couples_agree(rng):
    w1, w2 = np.exp(rng.normal(size=3)), np.exp(rng.normal(size=3))
    diag = Couple(3, weighted_norm(w1), weighted_norm(w2))
    dense = Couple(
        3,
        Norm(((1.0, DenseOp(QMatrix.diag(list(w1)).complex_adjoint())),)),
        Norm(((1.0, DenseOp(QMatrix.diag(list(w2)).complex_adjoint())),)),
    )
    x = random_vector(rng, 3)
    ts = np.logspace(-2, 2, 7)
    a = k_functional_grid(diag, ts, x)
    b = k_functional_grid(dense, ts, x)
    np.testing.assert_allclose(a.upper, b.upper, rtol=1e-5)


@given(seeds, st.sampled_from([1e-2, 0.3, 1.0, 3.0, 1e2]))
def test_swap_identity(seed, t):
    rng = np.random.default_rng(seed)
    x = random_vector(rng, 3)
    for couple in (random_weighted_couple(rng, 3), random_dense_couple(rng, 3)):
        rep = k_swap_identity_check(couple, t, x)
        assert rep.passed, rep


def test_swap_identity_equal_norms_and_zero():
    rep = k_swap_identity_check(l2_couple(2), 0.5, random_vector(np.random.default_rng(0), 2))
    assert rep.passed and rep.measured <= 1e-12
    rep = k_swap_identity_check(l2_couple(2), 0.5, np.zeros((2, 4)))
    assert rep.passed and rep.measured == 0.0


# ------------------------------------------------------------- L^p_* norms


def test_lp_star_indicator():
    g = LogGrid(1e-3, 1e3, 20001)
    ind = ((g.points >= 1.0) & (g.points <= math.e)).astype(float)
    assert lp_star_norm(ind, g, 1) == pytest.approx(1.0, abs=2 * g.h)
    assert lp_star_norm(np.zeros(g.count), g, 2) == 0.0
    assert lp_star_norm(ind, g, math.inf) == 1.0


def test_lp_star_scaling_law():
    # [PAPER] ||f(t)|| = |alpha|^{1/p} ||f(t^alpha)|| on L^p_*, with |alpha|^{1/inf} = 1
    g = LogGrid(1e-16, 1e16, 8001)  # wide enough that the slowest tail, t^{1/2}, is negligible

    def f(t):
        return t / (1 + t * t)

    for alpha in (2.0, -0.5, 3.0):
        for p in (1.0, 2.0, math.inf):
            lhs = lp_star_norm(f, g, p)
            rhs = lp_star_norm(f(g.points**alpha), g, p)
            factor = 1.0 if math.isinf(p) else abs(alpha) ** (1 / p)
            assert lhs == pytest.approx(factor * rhs, rel=1e-3)


def test_lp_star_rejects_bad_input():
    g = LogGrid.default()
    with pytest.raises(ValueError):
        lp_star_norm(-np.ones(g.count), g, 1)
    with pytest.raises(ValueError):
        lp_star_norm(np.ones(g.count), g, 0.5)
    with pytest.raises(ValueError):
        lp_star_norm(np.ones(3), g, 1)


# ---------------------------------------------------- interpolation norms


@pytest.mark.parametrize("theta,p", [(0.5, 2.0), (0.5, 1.0), (0.25, 2.0), (0.75, 3.0), (0.5, math.inf)])
def test_interp_norm_equal_norms(theta, p):
    x = random_vector(np.random.default_rng(5), 3)
    res = interp_norm(l2_couple(3), theta, p, x)
    want = oracles.l2_interp_norm(theta, p, float(vnorm(x)))
    assert res.upper == pytest.approx(want, rel=1e-3)
    assert res.lower <= res.upper


def test_interp_norm_sqrt2_and_four():
    x = random_vector(np.random.default_rng(1), 2)
    nx = float(vnorm(x))
    assert interp_norm(l2_couple(2), 0.5, 2, x).upper == pytest.approx(math.sqrt(2) * nx, rel=1e-3)
    assert interp_norm(l2_couple(2), 0.5, 1, x).upper == pytest.approx(4 * nx, rel=1e-3)
    assert interp_norm(l2_couple(2), 0.5, 2, np.zeros((2, 4))).upper == 0.0


@given(seeds)
def test_interp_norm_right_homogeneous(seed):
    rng = np.random.default_rng(seed)
    couple = random_weighted_couple(rng, 3)
    x = random_vector(rng, 3)
    s = rng.normal(size=4)
    a = interp_norm(couple, 0.5, 2, x).upper
    b = interp_norm(couple, 0.5, 2, qmul(x, s)).upper
    assert b == pytest.approx(a * np.linalg.norm(s), rel=1e-6)


@given(seeds, st.sampled_from([0.25, 0.5, 0.75]), st.sampled_from([1.0, 2.0, math.inf]))
def test_interp_norm_swap_symmetry(seed, theta, p):
    # (X,Y)_{theta,p} = (Y,X)_{1-theta,p} with equal norms
    rng = np.random.default_rng(seed)
    couple = random_weighted_couple(rng, 3)
    x = random_vector(rng, 3)
    a = interp_norm(couple, theta, p, x)
    b = interp_norm(couple.swapped(), 1 - theta, p, x, LogGrid(1e-3, 1e3, 200).power(-1))
    assert a.upper == pytest.approx(b.upper, rel=1e-5)


def test_intermediate_constants_equal_norms():
    X = sample_vectors(3, 6)
    # C_K is a maximum over the grid; an odd node count puts t = 1, where min(1,t)/t^theta peaks, on it
    c_j, c_k = intermediate_constants(l2_couple(3), l2_norm(), 0.5, X, LogGrid(1e-3, 1e3, 201))
    assert c_j == pytest.approx(1.0)
    assert c_k == pytest.approx(1.0, rel=1e-6)
    assert intermediate_constants(l2_couple(3), l2_norm(), 0.5, np.zeros((1, 3, 4)), LogGrid.default()) == (0.0, 0.0)


# ---------------------------------------------------------------- psi


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_psi_scalar_closed_form(n):
    ts = np.logspace(-3, 3, 50)
    vals = psi_grid(E1_MODEL, math.pi, n, ts, ONE_VEC)[:, 0]
    np.testing.assert_allclose(vals, [oracles.scalar_psi_e1(n, t) for t in ts], rtol=1e-12)
    dense = psi_grid(E1_MODEL.to_dense(), math.pi, n, ts, ONE_VEC)[:, 0]
    np.testing.assert_allclose(dense, vals, rtol=1e-9)


def test_psi_examples():
    assert psi(E1_MODEL, math.pi, 1, 2.0, ONE_VEC) == pytest.approx(3 / 5)
    assert psi(E1_MODEL, math.pi, 2, 2.0, ONE_VEC) == pytest.approx(1 / 5)
    assert psi(E1_MODEL, math.pi, 1, 2.0, np.zeros((1, 4))) == 0.0


@given(seeds, ts_strategy)
def test_psi_independent_of_the_unit(seed, t):
    # Q on the ray depends only on t and omega, so any unit gives the same psi
    rng = np.random.default_rng(seed)
    T = builtin("b", dim=3, seed=seed % 7)
    x = random_vector(rng, 3)
    u = ImaginaryUnit.random(rng)
    s = Quaternion(-t) + u * 0.0
    q1 = T.q(s)
    q2 = T.q_ray(t, math.pi)
    np.testing.assert_allclose(q1.C, q2.C, atol=1e-12 * (1 + t * t))
    assert psi(T, math.pi, 2, t, x) == pytest.approx(float(psi_grid(T, math.pi, 2, [t], x)[0, 0]))


def test_interp_norm_star_examples():
    g = LogGrid(1e-4, 1e4, 801)
    assert interp_norm_star(E1_MODEL, math.pi, 2, 0.5, math.inf, ONE_VEC, g).upper == pytest.approx(1.5, rel=1e-4)
    ts = np.logspace(-4, 4, 100001)
    want = 1 + np.max(np.sqrt(ts) * (1 + ts) / (1 + ts**2))
    got = interp_norm_star(E1_MODEL, math.pi, 1, 0.5, math.inf, ONE_VEC, g).upper
    assert got == pytest.approx(want, rel=1e-3)
    assert interp_norm_star(E1_MODEL, math.pi, 1, 0.5, 2, np.zeros((1, 4))).upper == 0.0


# ------------------------------------------------------- decomposition


def test_trinomial_weights():
    assert trinomial_weight_total(2) == 16
    assert [trinomial_weight_total(m) for m in range(5)] == [4**m for m in range(5)]


@given(seeds, ts_strategy, st.integers(min_value=1, max_value=4))
def test_decomposition_sums_to_x(seed, t, n):
    rng = np.random.default_rng(seed)
    T = builtin("b", dim=3, seed=seed % 5)
    x = random_vector(rng, 3)
    a, b = proof_decomposition(T, math.pi, n, t, x)
    np.testing.assert_allclose(a + b, x, atol=1e-10 * float(vnorm(x)) * (1 + t**n))


def test_decomposition_zero_operator():
    Z = DenseModel(QMatrix.zeros(2))
    x = random_vector(np.random.default_rng(0), 2)
    a, b = proof_decomposition(Z, math.pi, 1, 2.0, x)
    np.testing.assert_allclose(a, 0.0, atol=1e-15)
    np.testing.assert_allclose(b, x, atol=1e-14)


def test_trinomial_split_diagonal_matches_dense():
    T = builtin("a", dim=4)
    x = random_vector(np.random.default_rng(2), 4)
    for order, threshold, tau in [(2, 3, 0.5), (3, 2, 4.0)]:
        a1, b1 = trinomial_split(T, math.pi, order, threshold, tau, x)
        a2, b2 = trinomial_split(T.to_dense(), math.pi, order, threshold, tau, x)
        np.testing.assert_allclose(a1, a2, atol=1e-9)
        np.testing.assert_allclose(b1, b2, atol=1e-9)


# ----------------------------------------------------- operator interpolation


def test_op_interp_identity_and_scalar():
    X = sample_vectors(3, 5)
    rep = operator_interpolation_check(l2_couple(3), l2_couple(3), DenseOp.identity(3), 0.5, 2, X)
    assert rep.passed
    assert rep.notes["constant"] == pytest.approx(1.0)
    scaled = DenseOp(3.0 * np.eye(6, dtype=complex))
    rep = operator_interpolation_check(l2_couple(3), l2_couple(3), scaled, 0.5, 2, X)
    assert rep.passed
    assert rep.notes["constant"] == pytest.approx(3.0)


@given(seeds, st.sampled_from([0.25, 0.5, 0.75]), st.sampled_from([1.0, 2.0, math.inf]))
def test_op_interp_random_diagonal(seed, theta, p):
    rng = np.random.default_rng(seed)
    T = DiagonalModel(rng.normal(size=(3, 4))).T
    rep = operator_interpolation_check(
        random_weighted_couple(rng, 3), random_weighted_couple(rng, 3), T, theta, p, sample_vectors(3, 4, seed)
    )
    assert rep.passed, rep


def test_restriction_norm_weighted():
    T = DenseOp.identity(2)
    src = weighted_norm([1.0, 2.0])
    tgt = weighted_norm([3.0, 3.0])
    assert restriction_norm(T, src, tgt, 2) == pytest.approx(3.0)


def test_graph_couple_norms():
    T = builtin("r", dim=3)
    c = graph_couple(T, 1)
    x = random_vector(np.random.default_rng(4), 3)
    assert float(c.Y(x)) == pytest.approx(float(vnorm(x) + vnorm(T.T.apply(x))))
