"""Verification suites: each check turns a configuration into VerificationReports.

Checks needing ``K`` from above use the solver's attained values; checks
needing ``K`` from below use its dual bounds. Where an inequality compares
an L^p_* norm on one side with a rescaled one on the other, the second
side is evaluated on the correspondingly rescaled grid so both quadratures
see the same nodes.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from qinterp import constants as C
from qinterp.builtins import builtin, sample_vectors
from qinterp.interpolation.kfunctional import k_functional_grid, k_swap_identity_check
from qinterp.interpolation.lpstar import interp_norm, interp_norm_from_k
from qinterp.interpolation.norms import Couple, LogGrid, graph_couple, l2_couple, weighted_norm
from qinterp.interpolation.operator import operator_interpolation_check
from qinterp.interpolation.psi import psi_grid, star_norm_from_psi, trinomial_split_ops
from qinterp.qlinalg import QMatrix, vnorm
from qinterp.quaternion import ImaginaryUnit, ray_point
from qinterp.report import DEFAULT_TOL, VerificationReport, margin_of
from qinterp.spectral import (
    OperatorModel,
    PreconditionError,
    SpectralPointError,
    embedding_constant_check,
    graph_norm,
    load_operator,
    power_resolvent_sweep,
    power_resolvent_bound_check,
    resolvent_series_check,
    sectorial_scan,
    s_spectrum,
)

CHECKS = (
    "lemma-power-bound",
    "embedding",
    "series",
    "thm35",
    "thm36",
    "thm37",
    "couple-props",
    "op-interp",
)
THETAS = (0.25, 0.5, 0.75)
PS = (1.0, 2.0, math.inf)
TRIPLES = ((0, 1, 2), (0, 2, 3), (1, 2, 4))
GRID_DENSITY = 200 / 6  # nodes per decade of the default grid


@dataclass(frozen=True)
class CheckConfig:
    check: str
    operator: str | None = None
    builtin: str | None = None
    dim: int | None = None
    omega: float = math.pi
    theta: float | None = None
    p: float | None = None
    n: int | None = None
    k: int | None = None
    m: int | None = None
    samples: int = 32
    seed: int = 0
    tol: float = DEFAULT_TOL
    grid: tuple = (1e-3, 1e3, 200)
    n_terms: int = 40
    timing: bool = False

    def validate(self) -> None:
        if self.check not in CHECKS:
            raise PreconditionError(f"unknown check {self.check!r}; choose from {', '.join(CHECKS)}")
        if self.theta is not None and not 0 < self.theta < 1:
            raise PreconditionError("theta must lie in (0, 1)")
        if self.p is not None and not self.p >= 1:
            raise PreconditionError("p must lie in [1, inf]")
        if self.samples < 0:
            raise PreconditionError("sample count must be nonnegative")
        for name in ("n", "k", "m"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise PreconditionError(f"{name} must be nonnegative")
        if self.check in ("thm36", "thm37"):
            given = [v is not None for v in (self.n, self.k, self.m)]
            if any(given) and not all(given):
                raise PreconditionError(f"{self.check} needs all of n, k, m or none")
            if all(given) and not self.n < self.k < self.m:
                raise PreconditionError(f"{self.check} needs n < k < m")
        if self.check == "thm35" and self.n is not None and self.n < 1:
            raise PreconditionError("thm35 needs n >= 1")
        if self.check in ("lemma-power-bound", "embedding") and self.n is not None and self.m is not None:
            if self.check == "lemma-power-bound" and not self.n <= 2 * self.m:
                raise PreconditionError("lemma-power-bound needs 0 <= n <= 2m")
            if self.check == "embedding" and not self.n <= self.m:
                raise PreconditionError("embedding needs n <= m")
        t_min, t_max, count = self.grid
        if not (0 < t_min < t_max) or count < 2:
            raise PreconditionError("grid needs 0 < TMIN < TMAX and COUNT >= 2")

    def log_grid(self) -> LogGrid:
        return LogGrid(float(self.grid[0]), float(self.grid[1]), int(self.grid[2]))

    def echo(self) -> dict:
        return {
            "source": self.operator if self.operator else f"builtin:{self.builtin or 'a'}",
            "seed": self.seed,
        }


# ---------------------------------------------------------------- plumbing


def workers() -> int:
    try:
        return max(1, int(os.environ.get("QINTERP_WORKERS", "0")) or (os.cpu_count() or 1))
    except ValueError:
        return 1


def run_tasks(tasks):
    """Run callables in a bounded thread pool; results come back in task order."""
    if not tasks:
        return []
    w = min(workers(), len(tasks))
    if w == 1:
        return [t() for t in tasks]
    with ThreadPoolExecutor(max_workers=w) as pool:
        return list(pool.map(lambda f: f(), tasks))


@dataclass
class Context:
    cfg: CheckConfig
    model: OperatorModel
    samples: np.ndarray
    grid: LogGrid
    M: float = field(default=math.nan)
    measured_M: float = field(default=math.nan)

    @property
    def omega(self) -> float:
        return self.cfg.omega

    def params(self, **extra) -> dict:
        out = {"omega": self.omega, "dim": self.model.dim, "samples": int(self.samples.shape[0])}
        out.update(self.cfg.echo())
        out.update(extra)
        return out


def load_model(cfg: CheckConfig) -> OperatorModel:
    if cfg.operator:
        return load_operator(cfg.operator)
    return builtin(cfg.builtin or "a", cfg.dim, cfg.seed)


def _span_grid(model: OperatorModel, base: LogGrid) -> LogGrid:
    """``base`` widened so it reaches three decades beyond the spectral moduli on both sides."""
    mods = [abs(q) for q in s_spectrum(model)]
    mods = [r for r in mods if r > 0] or [1.0]
    lo = min(base.t_min, 1e-3 * min(mods))
    hi = max(base.t_max, 1e3 * max(mods))
    if lo == base.t_min and hi == base.t_max:
        return base
    count = max(base.count, int(math.ceil(GRID_DENSITY * math.log10(hi / lo))) + 1)
    return LogGrid(lo, hi, count)


def make_context(cfg: CheckConfig, need_M: bool = True) -> Context:
    cfg.validate()
    model = load_model(cfg)
    samples = sample_vectors(model.dim, cfg.samples, cfg.seed)
    ctx = Context(cfg, model, samples, cfg.log_grid())
    if need_M:
        prof = sectorial_scan(model, cfg.omega, _span_grid(model, ctx.grid))
        ctx.measured_M = prof.measured_M
        ctx.M = prof.M
    return ctx


def _worst(pairs):
    best = None
    for measured, bound, extra in pairs:
        mg = margin_of(measured, bound)
        if best is None or mg < best[0]:
            best = (mg, measured, bound, extra)
    if best is None:
        return 0.0, 0.0, {}
    return best[1], best[2], best[3]


# ------------------------------------------------------------------- checks


def check_power_bound(ctx: Context) -> list[VerificationReport]:
    cfg = ctx.cfg
    if cfg.n is not None and cfg.m is not None:
        reps = [power_resolvent_bound_check(ctx.model, ctx.omega, ctx.grid, cfg.n, cfg.m, ctx.M, tol=cfg.tol)]
    else:
        reps = power_resolvent_sweep(ctx.model, ctx.omega, ctx.grid, ctx.M, 8, tol=cfg.tol)
    for r in reps:
        r.params.update(cfg.echo())
        r.params["measured_M"] = ctx.measured_M
    return reps


def check_embedding(ctx: Context) -> list[VerificationReport]:
    cfg = ctx.cfg
    if cfg.n is not None and cfg.m is not None:
        pairs = [(cfg.n, cfg.m)]
    else:
        pairs = [(n, m) for m in range(0, 4) for n in range(0, m + 1)]
    out = []
    for n, m in pairs:
        for radius in (0.1, 1.0, 10.0):
            s = ray_point(radius, ctx.omega)
            rep = embedding_constant_check(ctx.model, ctx.omega, ctx.M, n, m, s, ctx.samples, tol=cfg.tol)
            rep.params.update(cfg.echo())
            out.append(rep)
    return out


def check_series(ctx: Context) -> list[VerificationReport]:
    cfg = ctx.cfg
    dense = ctx.model.to_dense()
    norm_t = dense.T.norm()
    rng = np.random.default_rng([cfg.seed, 7])
    out = []
    units = [ImaginaryUnit(0.0, 1.0, 0.0, 0.0), ImaginaryUnit.random(rng)]
    for unit in units:
        s = ray_point(2.0 * norm_t if norm_t > 0 else 1.0, ctx.omega, unit)
        rep = resolvent_series_check(dense, s, cfg.n_terms, tol=cfg.tol)
        rep.params.update(cfg.echo())
        out.append(rep)
    return out


def _thm35_one_n(ctx: Context, n: int, thetas, ps) -> list[VerificationReport]:
    T, omega, M = ctx.model, ctx.omega, ctx.M
    grid_t = _span_grid(T, ctx.grid)
    ts = grid_t.points
    X = ctx.samples
    psi_vals = psi_grid(T, omega, n, ts, X)
    s_grid = grid_t.power(-n)  # nodes s_i = t_{count-1-i}^{-n}
    couple = graph_couple(T, n)
    # proof splits at every t >= 1, in s order
    split_ops = [trinomial_split_ops(T, omega, n, n + 1, t) if t >= 1 else None for t in ts[::-1]]
    Tn = T.power(n)
    per_sample = []
    for j, x in enumerate(X):
        warm = np.zeros((ts.size, T.dim, 4))
        for i, ops in enumerate(split_ops):
            if ops is not None and ops[1] is not None:
                warm[i] = ops[1].apply(x)
        kg = k_functional_grid(couple, s_grid.points, x, warm)
        per_sample.append((kg, float(vnorm(x)), float(vnorm(Tn.apply(x)))))
    reports = []
    for theta in thetas:
        for p in ps:
            sub_pairs, sup_pairs = [], []
            gap = quad = 0.0
            for j, (kg, nx, ntx) in enumerate(per_sample):
                inorm = interp_norm_from_k(kg, s_grid, couple, theta, p)
                star = star_norm_from_psi(psi_vals[:, j], grid_t, n, theta, p, M, nx, ntx)
                gap = max(gap, inorm.solver_gap)
                quad = max(quad, inorm.quad_err, star.quad_err)
                sub_pairs.append((star.upper, C.thm35_sub_constant(M, n, theta, p) * inorm.lower, {"sample": j}))
                sup_pairs.append((inorm.upper, C.thm35_sup_constant(M, n, theta, p) * star.lower, {"sample": j}))
            for direction, pairs, const in (
                ("sub", sub_pairs, C.thm35_sub_constant(M, n, theta, p)),
                ("sup", sup_pairs, C.thm35_sup_constant(M, n, theta, p)),
            ):
                measured, bound, extra = _worst(pairs)
                reports.append(
                    VerificationReport.build(
                        "thm35",
                        ctx.params(direction=direction, n=n, theta=theta, p=p, M=M, grid=grid_t.to_list()),
                        measured,
                        bound,
                        tol=ctx.cfg.tol,
                        solver_gap=gap,
                        quad_err=quad,
                        notes={"constant": const, "constant_base": "1+3M", **extra},
                    )
                )
    return reports


def check_thm35(ctx: Context) -> list[VerificationReport]:
    cfg = ctx.cfg
    ns = [cfg.n] if cfg.n is not None else [1, 2, 3]
    thetas = [cfg.theta] if cfg.theta is not None else list(THETAS)
    ps = [cfg.p] if cfg.p is not None else list(PS)
    results = run_tasks([lambda n=n: _thm35_one_n(ctx, n, thetas, ps) for n in ns])
    return [r for batch in results for r in batch]


def _triples(cfg: CheckConfig):
    if cfg.n is not None:
        return [(cfg.n, cfg.k, cfg.m)]
    return list(TRIPLES)


def _power_norms(model: OperatorModel, X: np.ndarray, j: int) -> np.ndarray:
    return vnorm(model.power(j).apply(X))


def check_thm36(ctx: Context) -> list[VerificationReport]:
    T, M, X = ctx.model, ctx.M, ctx.samples
    out = []
    for n, k, m in _triples(ctx.cfg):
        theta = C.theta_of(n, k, m)
        const = C.thm36_constant(M, n, k, m)
        tn, tk, tm = (_power_norms(T, X, j) for j in (n, k, m))
        pairs = [
            (tk[i], const * tn[i] ** (1 - theta) * tm[i] ** theta, {"sample": i}) for i in range(X.shape[0])
        ]
        measured, bound, extra = _worst(pairs)
        out.append(
            VerificationReport.build(
                "thm36", ctx.params(form="power", n=n, k=k, m=m, M=M), measured, bound,
                tol=ctx.cfg.tol, notes={"constant": const, **extra},
            )
        )
        gn, gk, gm = (graph_norm(T, j, X) for j in (n, k, m))
        jconst = max(1.0, const)
        pairs = [
            (gk[i], jconst * gn[i] ** (1 - theta) * gm[i] ** theta, {"sample": i}) for i in range(X.shape[0])
        ]
        measured, bound, extra = _worst(pairs)
        out.append(
            VerificationReport.build(
                "thm36", ctx.params(form="graph", n=n, k=k, m=m, M=M), measured, bound,
                tol=ctx.cfg.tol, notes={"constant": jconst, **extra},
            )
        )
    return out


def _thm37_one(ctx: Context, n: int, k: int, m: int) -> list[VerificationReport]:
    T, omega, M, X = ctx.model, ctx.omega, ctx.M, ctx.samples
    ts = ctx.grid.points
    theta = C.theta_of(n, k, m)
    couple = graph_couple(T, n, m)
    small = ts <= 1.0
    split_ops = [
        trinomial_split_ops(T, omega, m, k, t ** (-1.0 / (m - n))) if s else None for t, s in zip(ts, small)
    ]
    gk = graph_norm(T, k, X)
    c_large = C.thm37_large_t_constant(M, n, m)
    c_small = C.thm37_small_t_constant(M, m)
    large_pairs, small_pairs = [], []
    gap = 0.0
    for j, x in enumerate(X):
        warm = np.zeros((ts.size, T.dim, 4))
        for i, ops in enumerate(split_ops):
            if ops is not None and ops[1] is not None:
                warm[i] = ops[1].apply(x)
        kg = k_functional_grid(couple, ts, x, warm)
        gap = max(gap, kg.rel_gap)
        for i, t in enumerate(ts):
            if t >= 1.0:
                large_pairs.append((kg.upper[i], c_large * t**theta * gk[j], {"sample": j, "t": float(t)}))
            if t <= 1.0:
                small_pairs.append((kg.upper[i], c_small * t**theta * gk[j], {"sample": j, "t": float(t)}))
    out = []
    for branch, pairs, const in (("t>=1", large_pairs, c_large), ("t<=1", small_pairs, c_small)):
        measured, bound, extra = _worst(pairs)
        out.append(
            VerificationReport.build(
                "thm37",
                ctx.params(branch=branch, n=n, k=k, m=m, M=M, grid=ctx.grid.to_list()),
                measured, bound, tol=ctx.cfg.tol, solver_gap=gap, notes={"constant": const, **extra},
            )
        )
    return out


def check_thm37(ctx: Context) -> list[VerificationReport]:
    results = run_tasks([lambda t=t: _thm37_one(ctx, *t) for t in _triples(ctx.cfg)])
    return [r for batch in results for r in batch]


def _random_weighted_couple(n: int, rng: np.random.Generator) -> Couple:
    return Couple(n, weighted_norm(rng.uniform(0.5, 2.0, n)), weighted_norm(rng.uniform(0.5, 2.0, n)))


def _random_dense_couple(n: int, rng: np.random.Generator) -> Couple:
    from qinterp.interpolation.norms import Norm
    from qinterp.qlinalg import DenseOp

    def op():
        G = QMatrix.identity(n) + QMatrix(rng.normal(size=(n, n, 4))) * (0.3 / math.sqrt(n))
        return DenseOp(G.complex_adjoint())

    return Couple(n, Norm(((1.0, op()),), "dense"), Norm(((1.0, None), (0.5, op())), "dense-sum"))


def check_couple_props(ctx: Context) -> list[VerificationReport]:
    cfg = ctx.cfg
    n = ctx.model.dim
    rng = np.random.default_rng([cfg.seed, 11])
    X = ctx.samples
    theta = cfg.theta if cfg.theta is not None else 0.5
    p = cfg.p if cfg.p is not None else 2.0
    out = []
    # Lemma i): swap identity on a weighted and a dense couple
    couples = [("weighted", _random_weighted_couple(n, rng), X)]
    nd = min(n, 4)
    couples.append(("dense", _random_dense_couple(nd, rng), sample_vectors(nd, min(8, cfg.samples), cfg.seed)))
    for label, couple, samples in couples:
        reps = [k_swap_identity_check(couple, t, x, tol=cfg.tol) for x in samples for t in (1e-2, 0.3, 1.0, 3.0, 1e2)]
        worst = min(reps, key=lambda r: r.margin - r.solver_gap) if reps else None
        if worst is not None:
            worst.params.update(ctx.params(couple=label))
            out.append(worst)
    # Lemma ii): equal norms give a multiple of the norm
    const = C.l2_interp_constant(theta, p)
    pairs = []
    quad = 0.0
    for x in X:
        nx = float(vnorm(x))
        if nx == 0:
            continue
        res = interp_norm(l2_couple(n), theta, p, x, ctx.grid)
        quad = max(quad, res.quad_err)
        pairs.append((abs(res.upper - const * nx) / (const * nx), 1e-3, {}))
    measured, bound, _ = _worst(pairs)
    out.append(
        VerificationReport.build(
            "couple-props", ctx.params(property="equal-norms", theta=theta, p=p, grid=ctx.grid.to_list()),
            measured, bound if pairs else 1e-3, tol=cfg.tol, quad_err=quad,
            notes={"constant": const, "measured_is": "relative error"},
        )
    )
    # Lemma iv): X cap Y -> (X,Y)_{theta,p} -> (X,Y)_{theta,q} -> X + Y
    couple = _random_weighted_couple(n, rng)
    chain = {"cap": [], "pq": [], "sum": []}
    gap = 0.0
    quad = 0.0
    for x in X:
        kg = k_functional_grid(couple, ctx.grid.points, x)
        gap = max(gap, kg.rel_gap)
        cap = max(float(couple.X(x)), float(couple.Y(x)))
        k1 = k_functional_grid(couple, [1.0], x)
        for pp, qq in ((1.0, 2.0), (1.0, math.inf), (2.0, math.inf)):
            np_ = interp_norm_from_k(kg, ctx.grid, couple, theta, pp)
            nq = interp_norm_from_k(kg, ctx.grid, couple, theta, qq)
            quad = max(quad, np_.quad_err, nq.quad_err)
            chain["cap"].append((np_.grid_value, C.lemma_iv_cap_constant(theta, pp) * cap, {"p": pp}))
            chain["pq"].append(
                (nq.grid_value, C.lemma_iv_pq_constant(theta, pp, qq) * np_.lower, {"p": pp, "q": qq})
            )
            nq_lower = nq.lower
            if math.isinf(qq):
                # the sup over t includes t = 1, which the grid may miss
                nq_lower = max(nq_lower, float(k1.lower[0]))
            chain["sum"].append((float(k1.upper[0]), C.lemma_iv_sum_constant(theta, qq) * nq_lower, {"q": qq}))
    for step, pairs in chain.items():
        measured, bound, extra = _worst(pairs)
        out.append(
            VerificationReport.build(
                "couple-props", ctx.params(property=f"embedding-{step}", theta=theta, grid=ctx.grid.to_list()),
                measured, bound, tol=cfg.tol, solver_gap=gap, quad_err=quad, notes=extra,
            )
        )
    return out


def check_op_interp(ctx: Context) -> list[VerificationReport]:
    cfg = ctx.cfg
    n = ctx.model.dim
    rng = np.random.default_rng([cfg.seed, 13])
    xy = _random_weighted_couple(n, rng)
    vw = _random_weighted_couple(n, rng)
    thetas = [cfg.theta] if cfg.theta is not None else [0.5]
    ps = [cfg.p] if cfg.p is not None else [2.0]
    T = ctx.model.T
    out = []
    for theta in thetas:
        for p in ps:
            rep = operator_interpolation_check(xy, vw, T, theta, p, ctx.samples, ctx.grid, tol=cfg.tol)
            rep.params.update(ctx.params(theta=theta, p=p))
            out.append(rep)
    return out


DISPATCH = {
    "lemma-power-bound": (check_power_bound, True),
    "embedding": (check_embedding, True),
    "series": (check_series, False),
    "thm35": (check_thm35, True),
    "thm36": (check_thm36, True),
    "thm37": (check_thm37, True),
    "couple-props": (check_couple_props, False),
    "op-interp": (check_op_interp, False),
}


def run_check(cfg: CheckConfig) -> list[VerificationReport]:
    """Run one named check; raises PreconditionError / SpectralPointError on invalid input."""
    cfg.validate()
    func, need_M = DISPATCH[cfg.check]
    start = time.perf_counter()
    ctx = make_context(cfg, need_M)
    reports = func(ctx)
    if cfg.timing:
        ms = (time.perf_counter() - start) * 1000.0
        for r in reports:
            r.ms = ms
    return reports


__all__ = [
    "CHECKS",
    "CheckConfig",
    "PreconditionError",
    "SpectralPointError",
    "run_check",
    "run_tasks",
]
