"""Hot numeric kernels.

Each kernel exists twice: a numba version (loops, compiled) and a numpy
version (vectorized, or the same source left uncompiled). The public
dispatchers at the bottom pick one according to ``_jit.USE_NUMBA``.
"""

import numpy as np

from qinterp._jit import USE_NUMBA, maybe_njit

# Structure constants of the Hamilton product: (a*b)_r = sum a_p b_q MUL[p, q, r].
MUL = np.zeros((4, 4, 4))
for _p, _q, _r, _sign in [
    (0, 0, 0, 1), (1, 1, 0, -1), (2, 2, 0, -1), (3, 3, 0, -1),
    (0, 1, 1, 1), (1, 0, 1, 1), (2, 3, 1, 1), (3, 2, 1, -1),
    (0, 2, 2, 1), (1, 3, 2, -1), (2, 0, 2, 1), (3, 1, 2, 1),
    (0, 3, 3, 1), (1, 2, 3, 1), (2, 1, 3, -1), (3, 0, 3, 1),
]:
    MUL[_p, _q, _r] = _sign


# ---------------------------------------------------------------- products


def qmul_numpy(a, b):
    a, b = np.broadcast_arrays(a, b)
    out = np.empty(a.shape)
    a0, a1, a2, a3 = a[..., 0], a[..., 1], a[..., 2], a[..., 3]
    b0, b1, b2, b3 = b[..., 0], b[..., 1], b[..., 2], b[..., 3]
    out[..., 0] = a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3
    out[..., 1] = a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2
    out[..., 2] = a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1
    out[..., 3] = a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0
    return out


@maybe_njit
def _qmul_flat(a, b, out):
    for j in range(a.shape[0]):
        a0, a1, a2, a3 = a[j, 0], a[j, 1], a[j, 2], a[j, 3]
        b0, b1, b2, b3 = b[j, 0], b[j, 1], b[j, 2], b[j, 3]
        out[j, 0] = a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3
        out[j, 1] = a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2
        out[j, 2] = a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1
        out[j, 3] = a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0


def qmul_numba(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    shape = np.broadcast_shapes(a.shape, b.shape)
    fa = np.require(np.broadcast_to(a, shape), float, ["C", "W"]).reshape(-1, 4)
    fb = np.require(np.broadcast_to(b, shape), float, ["C", "W"]).reshape(-1, 4)
    out = np.empty_like(fa)
    _qmul_flat(fa, fb, out)
    return out.reshape(shape)


def qmatmul_numpy(A, B):
    return np.einsum("ijp,jkq,pqr->ikr", A, B, MUL, optimize=True)


@maybe_njit
def _qmatmul_loops(A, B, out):
    n, m = A.shape[0], A.shape[1]
    k = B.shape[1]
    for i in range(n):
        for c in range(k):
            s0 = 0.0
            s1 = 0.0
            s2 = 0.0
            s3 = 0.0
            for j in range(m):
                a0, a1, a2, a3 = A[i, j, 0], A[i, j, 1], A[i, j, 2], A[i, j, 3]
                b0, b1, b2, b3 = B[j, c, 0], B[j, c, 1], B[j, c, 2], B[j, c, 3]
                s0 += a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3
                s1 += a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2
                s2 += a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1
                s3 += a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0
            out[i, c, 0] = s0
            out[i, c, 1] = s1
            out[i, c, 2] = s2
            out[i, c, 3] = s3


def qmatmul_numba(A, B):
    A = np.ascontiguousarray(A, dtype=float)
    B = np.ascontiguousarray(B, dtype=float)
    out = np.empty((A.shape[0], B.shape[1], 4))
    _qmatmul_loops(A, B, out)
    return out


# ------------------------------------------------ sum-of-norms minimization
#
# Minimize F(z) = sum_k w_k ||A_k z - y_k||_2 over z in R^d, where the blocks
# A_k are consecutive row ranges offsets[k]:offsets[k+1] of A. The K-functional
# of a couple whose norms are sums of Euclidean norms of linear maps is exactly
# of this form. Method: Newton on the smoothing sum_k w_k sqrt(||r_k||^2+mu^2)
# with mu driven to zero, tracking the best exact objective seen (upper bound)
# and a projected dual certificate (lower bound).


@maybe_njit
def _exact_objective(A, y, offsets, w, z):
    r = A @ z - y
    total = 0.0
    for k in range(w.shape[0]):
        acc = 0.0
        for i in range(offsets[k], offsets[k + 1]):
            acc += r[i] * r[i]
        total += w[k] * np.sqrt(acc)
    return total


@maybe_njit
def _smoothed_value(A, y, offsets, w, z, mu):
    r = A @ z - y
    total = 0.0
    for k in range(w.shape[0]):
        acc = mu * mu
        for i in range(offsets[k], offsets[k + 1]):
            acc += r[i] * r[i]
        total += w[k] * np.sqrt(acc)
    return total


@maybe_njit
def _smoothed_newton_system(A, y, offsets, w, P, z, mu):
    d = z.shape[0]
    r = A @ z - y
    f = 0.0
    g = np.zeros(d)
    H = np.zeros((d, d))
    for k in range(w.shape[0]):
        o0 = offsets[k]
        o1 = offsets[k + 1]
        rk = r[o0:o1]
        s = np.sqrt(rk @ rk + mu * mu)
        f += w[k] * s
        v = rk @ A[o0:o1]
        c1 = w[k] / s
        c3 = w[k] / (s * s * s)
        g += c1 * v
        H += c1 * P[k] - c3 * np.outer(v, v)
    return f, g, H


@maybe_njit
def _dual_lower_bound(A, y, offsets, w, P, H0, z, mu):
    d = z.shape[0]
    r = A @ z - y
    G = np.empty(r.shape[0])
    scale = np.empty(w.shape[0])
    H = np.zeros((d, d))
    for k in range(w.shape[0]):
        o0 = offsets[k]
        o1 = offsets[k + 1]
        rk = r[o0:o1]
        s = np.sqrt(rk @ rk + mu * mu)
        scale[k] = s
        G[o0:o1] = (w[k] / s) * rk
        v = rk @ A[o0:o1]
        H += (w[k] / s) * P[k] - (w[k] / (s * s * s)) * np.outer(v, v)
    for i in range(d):
        H[i, i] += 1e-300
    # Linearized Newton update of the dual blocks: sum_k A_k^T dg_k = -c
    # exactly, and the stiff (kink) blocks absorb most of the correction.
    c = G @ A
    dz = np.linalg.solve(H, -c)
    for k in range(w.shape[0]):
        o0 = offsets[k]
        o1 = offsets[k + 1]
        rk = r[o0:o1]
        s = scale[k]
        u = A[o0:o1] @ dz
        G[o0:o1] += (w[k] / s) * (u - rk * ((rk @ u) / (s * s)))
    # clean the rounding residual, then shrink into the dual balls
    c = G @ A
    G = G - A @ np.linalg.solve(H0, c)
    rho = 1.0
    for k in range(w.shape[0]):
        o0 = offsets[k]
        o1 = offsets[k + 1]
        nk = np.sqrt(G[o0:o1] @ G[o0:o1])
        if nk > rho * w[k]:
            rho = nk / w[k]
    lb = -(G @ y) / rho
    if lb < 0.0:
        lb = 0.0
    return lb


@maybe_njit
def _minimize_one(A, y, offsets, w, P, H0, z0, rel_gap, max_stages, max_newton):
    d = z0.shape[0]
    best_z = z0.copy()
    best = _exact_objective(A, y, offsets, w, z0)
    if best <= 0.0:
        return best_z, 0.0, 0.0, 0
    wsum = 0.0
    for k in range(w.shape[0]):
        wsum += w[k]
    mu0 = 0.1 * best / wsum
    z = z0.copy()
    lower = 0.0
    iters = 0
    for stage in range(max_stages):
        mu = mu0 * 0.1 ** stage
        for _ in range(max_newton):
            f, g, H = _smoothed_newton_system(A, y, offsets, w, P, z, mu)
            # H is positive definite whenever A^T A is; a trace-scaled ridge
            # would swamp the flat directions once mu is small.
            for i in range(d):
                H[i, i] += 1e-300
            delta = np.linalg.solve(H, -g)
            dec = -(g @ delta)
            if not dec > 1e-14 * best:
                break
            step = 1.0
            moved = False
            for _ls in range(60):
                zn = z + step * delta
                fn = _smoothed_value(A, y, offsets, w, zn, mu)
                if fn <= f - 1e-4 * step * dec:
                    moved = True
                    break
                step *= 0.5
            if not moved:
                break
            z = zn
            iters += 1
            fz = _exact_objective(A, y, offsets, w, z)
            if fz < best:
                best = fz
                best_z = z.copy()
        fz = _exact_objective(A, y, offsets, w, z)
        if fz < best:
            best = fz
            best_z = z.copy()
        lb = _dual_lower_bound(A, y, offsets, w, P, H0, z, mu)
        if lb > lower:
            lower = lb
        if best - lower <= rel_gap * best:
            break
    if lower > best:
        lower = best
    return best_z, best, lower, iters


@maybe_njit
def _minimize_batch(A, y, offsets, w0, side, ts, starts, rel_gap, max_stages, max_newton):
    n_t = ts.shape[0]
    n_s = starts.shape[1]
    d = A.shape[1]
    K = w0.shape[0]
    P = np.empty((K, d, d))
    for k in range(K):
        Ak = A[offsets[k]:offsets[k + 1]]
        P[k] = Ak.T @ Ak
    H0 = A.T @ A
    Z = np.empty((n_t, d))
    upper = np.empty(n_t)
    lower = np.empty(n_t)
    iters = np.zeros(n_t, dtype=np.int64)
    w = np.empty(K)
    prev = np.zeros(d)
    for p in range(n_t):
        for k in range(K):
            w[k] = w0[k] * ts[p] if side[k] == 1 else w0[k]
        z0 = starts[p, 0].copy()
        f0 = _exact_objective(A, y, offsets, w, z0)
        for s in range(1, n_s):
            fs = _exact_objective(A, y, offsets, w, starts[p, s])
            if fs < f0:
                f0 = fs
                z0 = starts[p, s].copy()
        if p > 0:
            fs = _exact_objective(A, y, offsets, w, prev)
            if fs < f0:
                f0 = fs
                z0 = prev.copy()
        zb, ub, lb, it = _minimize_one(A, y, offsets, w, P, H0, z0, rel_gap, max_stages, max_newton)
        Z[p] = zb
        upper[p] = ub
        lower[p] = lb
        iters[p] = it
        prev = zb
    return Z, upper, lower, iters


def minimize_norm_sums(A, y, offsets, w0, side, ts, starts, rel_gap=1e-6, max_stages=10, max_newton=40):
    """Batched minimization of ``sum_k w_k(t) ||A_k z - y_k||`` over a list of ``t``.

    ``w_k(t) = w0[k]`` for ``side[k] == 0`` and ``t * w0[k]`` for ``side[k] == 1``.
    Every block ``A_k`` must have full column rank, as the norm operators of
    a couple do; otherwise the smoothed Hessian degenerates as ``mu -> 0``.
    ``starts`` has shape ``(len(ts), n_starts, d)``; the previous ``t``'s
    minimizer is always added as an extra start. Returns ``(Z, upper, lower,
    iterations)`` where ``upper`` is the exact objective at ``Z`` and
    ``lower`` a dual lower bound on the minimum.
    """
    return _minimize_batch(
        np.ascontiguousarray(A, dtype=np.float64),
        np.ascontiguousarray(y, dtype=np.float64),
        np.ascontiguousarray(offsets, dtype=np.int64),
        np.ascontiguousarray(w0, dtype=np.float64),
        np.ascontiguousarray(side, dtype=np.int64),
        np.ascontiguousarray(ts, dtype=np.float64),
        np.ascontiguousarray(starts, dtype=np.float64),
        float(rel_gap),
        int(max_stages),
        int(max_newton),
    )


if USE_NUMBA:
    qmul = qmul_numba
    qmatmul = qmatmul_numba
else:
    qmul = qmul_numpy
    qmatmul = qmatmul_numpy
