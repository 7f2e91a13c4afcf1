"""Compare the numba kernels with their numpy / pure-Python fallbacks.

    python benchmarks/bench_kernels.py [--repeat 5]

The last section runs a full K-functional sweep twice in fresh interpreters,
once with QINTERP_DISABLE_NUMBA=1, so the fallback is timed end to end.
That sweep is dominated by the sum-of-norms solver, whose helpers call each
other, so ``py_func`` alone cannot time it uncompiled.
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from qinterp import _kernels
from qinterp._jit import USE_NUMBA


def best_of(func, repeat):
    func()  # warm-up / compile
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        func()
        times.append(time.perf_counter() - start)
    return min(times)


def row(label, slow, fast):
    print(f"  {label:<34} fallback {slow * 1e3:9.2f} ms   numba {fast * 1e3:9.2f} ms   x{slow / fast:6.1f}")


def bench_products(repeat):
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=(200_000, 4)), rng.normal(size=(200_000, 4))
    assert np.allclose(_kernels.qmul_numba(a, b), _kernels.qmul_numpy(a, b))
    row("qmul, 2e5 pairs", best_of(lambda: _kernels.qmul_numpy(a, b), repeat),
        best_of(lambda: _kernels.qmul_numba(a, b), repeat))
    for n in (16, 64):
        A, B = rng.normal(size=(n, n, 4)), rng.normal(size=(n, n, 4))
        assert np.allclose(_kernels.qmatmul_numba(A, B), _kernels.qmatmul_numpy(A, B))
        row(f"qmatmul, N={n}", best_of(lambda: _kernels.qmatmul_numpy(A, B), repeat),
            best_of(lambda: _kernels.qmatmul_numba(A, B), repeat))


SWEEP = """
import time
from qinterp.builtins import builtin, sample_vectors
from qinterp.interpolation import LogGrid, graph_couple, k_functional_grid
model = builtin("a", dim=8)
couple = graph_couple(model, 2)
grid = LogGrid(1e-3, 1e3, 60)
X = sample_vectors(8, 4, 0)
k_functional_grid(couple, grid.points[:2], X[0])
start = time.perf_counter()
for x in X:
    k_functional_grid(couple, grid.points, x)
print(time.perf_counter() - start)
"""


def bench_end_to_end():
    def run(disable):
        env = dict(os.environ)
        env.pop("QINTERP_DISABLE_NUMBA", None)
        if disable:
            env["QINTERP_DISABLE_NUMBA"] = "1"
        out = subprocess.run([sys.executable, "-c", SWEEP], env=env, capture_output=True, text=True, check=True)
        return float(out.stdout.strip().splitlines()[-1])

    row("K-functional sweep (subprocess)", run(True), run(False))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if not USE_NUMBA:
        sys.exit("numba is disabled in this interpreter; unset QINTERP_DISABLE_NUMBA to compare")
    print("quaternion products")
    bench_products(args.repeat)
    print("end to end")
    bench_end_to_end()


if __name__ == "__main__":
    main()
