"""The numba kernels and their numpy fallbacks must agree."""

import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qinterp import _kernels
from qinterp._jit import USE_NUMBA

seeds = st.integers(min_value=0, max_value=2**31)


def py(func):
    """Uncompiled source of a kernel (identity when numba is off)."""
    return getattr(func, "py_func", func)


@given(seeds, st.integers(min_value=1, max_value=6))
def test_qmul_paths_agree(seed, n):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, 3, 4))
    b = rng.normal(size=(3, 4))
    np.testing.assert_allclose(_kernels.qmul_numba(a, b), _kernels.qmul_numpy(a, b), atol=1e-13)


@given(seeds, st.integers(min_value=1, max_value=6))
def test_qmatmul_paths_agree(seed, n):
    rng = np.random.default_rng(seed)
    A, B = rng.normal(size=(n, n, 4)), rng.normal(size=(n, n, 4))
    np.testing.assert_allclose(_kernels.qmatmul_numba(A, B), _kernels.qmatmul_numpy(A, B), atol=1e-12)


def _sum_of_norms_problem(rng, d=6, blocks=3):
    # full column rank blocks, as produced by the norm operators of a couple
    sizes = rng.integers(d, d + 3, size=blocks)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    A = rng.normal(size=(offsets[-1], d))
    y = rng.normal(size=offsets[-1])
    w0 = np.exp(rng.normal(size=blocks))
    side = np.array([0, 1, 1])
    return A, y, offsets, w0, side


@given(seeds)
def test_minimizer_compiled_matches_source(seed):
    rng = np.random.default_rng(seed)
    A, y, offsets, w0, side = _sum_of_norms_problem(rng)
    ts = np.array([0.1, 1.0, 10.0])
    starts = np.zeros((3, 1, A.shape[1]))
    args = (A, y, offsets.astype(np.int64), w0, side.astype(np.int64), ts, starts, 1e-6, 10, 40)
    Z1, up1, lo1, _ = _kernels._minimize_batch(*args)
    Z2, up2, lo2, _ = py(_kernels._minimize_batch)(*args)
    np.testing.assert_allclose(up1, up2, rtol=1e-9)
    np.testing.assert_allclose(lo1, lo2, rtol=1e-6, atol=1e-12)
    assert np.all(lo1 <= up1 * (1 + 1e-12))


def test_minimizer_against_scipy():
    from scipy.optimize import minimize

    rng = np.random.default_rng(7)
    A, y, offsets, w0, side = _sum_of_norms_problem(rng)
    t = 0.7
    w = np.where(side == 1, t * w0, w0)

    def f(z):
        r = A @ z - y
        return sum(w[k] * np.linalg.norm(r[offsets[k] : offsets[k + 1]]) for k in range(len(w)))

    ref = minimize(f, np.zeros(A.shape[1]), method="Nelder-Mead", options={"maxiter": 40000, "xatol": 1e-10, "fatol": 1e-12})
    _, up, lo, _ = _kernels.minimize_norm_sums(A, y, offsets, w0, side, [t], np.zeros((1, 1, A.shape[1])))
    assert up[0] <= ref.fun * (1 + 1e-6)
    assert lo[0] <= ref.fun * (1 + 1e-9)


@pytest.mark.slow
@pytest.mark.skipif(not USE_NUMBA, reason="numba disabled in this process")
def test_env_switch_selects_numpy_path():
    code = "import qinterp._kernels as k, qinterp._jit as j; print(j.USE_NUMBA, k.qmul is k.qmul_numpy)"
    env = dict(os.environ, QINTERP_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["False", "True"]
