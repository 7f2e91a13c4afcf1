import dataclasses
import json
import math

import numpy as np
import pytest

from qinterp import constants as C
from qinterp.checks import CHECKS, CheckConfig, _thm37_one, make_context, run_check, run_tasks
from qinterp.report import VerificationReport, margin_of
from qinterp.spectral import PreconditionError, save_operator, DiagonalModel
from qinterp.quaternion import E1


# ------------------------------------------------------------- constants


def test_thm36_step_constant_formula():
    # (k-n+1) 4^{(k-n)/(k-n+1)} (1+3M)^{(k-n)(k-n+2)/(k-n+1)}
    M = 0.7
    for n, k in [(0, 1), (0, 2), (1, 3)]:
        d = k - n
        want = (d + 1) * 4 ** (d / (d + 1)) * (1 + 3 * M) ** (d * (d + 2) / (d + 1))
        assert C.thm36_step_constant(M, n, k) == pytest.approx(want)


def test_thm36_chained_constant():
    M = 1.0
    assert C.thm36_constant(M, 0, 1, 2) == pytest.approx(C.thm36_step_constant(M, 0, 1))
    want = C.thm36_step_constant(M, 1, 2) * C.thm36_step_constant(M, 1, 3) ** (1 / 2)
    assert C.thm36_constant(M, 1, 2, 4) == pytest.approx(want)
    with pytest.raises(ValueError):
        C.thm36_constant(M, 1, 1, 2)


def test_thm37_small_t_constant():
    assert C.thm37_small_t_constant(1.0, 2) == pytest.approx(3 * 16**2)


def test_l2_interp_constant_matches_closed_form():
    assert C.l2_interp_constant(0.5, 2) == pytest.approx(math.sqrt(2))
    assert C.l2_interp_constant(0.5, 1) == pytest.approx(4.0)
    assert C.l2_interp_constant(0.3, math.inf) == 1.0


def test_infinite_p_convention():
    # [PAPER] |alpha|^{1/inf} := 1
    assert C.lemma_iv_inf_constant(0.5, math.inf) == 1.0
    assert C.thm35_sub_constant(1.0, 3, 0.5, math.inf) == pytest.approx(1.0 + C.psi_constant(1.0, 3))


def test_psi_constant_parity():
    M = 0.5
    assert C.psi_constant(M, 2) == pytest.approx((1 + 3 * M) ** 1)
    assert C.psi_constant(M, 3) == pytest.approx(2 * (1 + 3 * M) ** 2)


def test_theta_of():
    assert C.theta_of(0, 1, 2) == 0.5
    assert C.theta_of(1, 2, 4) == pytest.approx(1 / 3)


# ----------------------------------------------------------------- reports


def test_report_round_trip_and_pass_rule():
    rep = VerificationReport.build("thm36", {"n": 0, "p": math.inf}, 1.0, 2.0, tol=1e-9, solver_gap=1e-7)
    again = VerificationReport.from_json(rep.to_json())
    assert again.to_json() == rep.to_json()
    assert again.recomputed_pass() == rep.passed
    assert rep.margin == pytest.approx(0.5)
    assert margin_of(0.0, 0.0) == 0.0
    barely = VerificationReport.build("x", {}, 1.0 + 5e-8, 1.0, tol=1e-9, solver_gap=1e-7)
    assert barely.passed and barely.recomputed_pass()
    assert not VerificationReport.build("x", {}, 1.0 + 5e-8, 1.0, tol=1e-9).passed


# ------------------------------------------------------------------ config


@pytest.mark.parametrize(
    "kwargs",
    [
        {"check": "nope"},
        {"check": "thm35", "theta": 1.0},
        {"check": "thm35", "p": 0.5},
        {"check": "thm36", "n": 1, "k": 1, "m": 2},
        {"check": "thm36", "n": 0, "k": 1},
        {"check": "lemma-power-bound", "n": 5, "m": 2},
        {"check": "thm35", "n": 0},
        {"check": "thm35", "grid": (1.0, 0.1, 10)},
    ],
)
def test_invalid_configs(kwargs):
    with pytest.raises(PreconditionError):
        run_check(CheckConfig(**kwargs))


def test_run_tasks_keeps_order(monkeypatch):
    monkeypatch.setenv("QINTERP_WORKERS", "4")
    assert run_tasks([lambda i=i: i * i for i in range(20)]) == [i * i for i in range(20)]
    monkeypatch.setenv("QINTERP_WORKERS", "1")
    assert run_tasks([lambda: 1, lambda: 2]) == [1, 2]


# --------------------------------------------------------------- the suites


def _e1_file(tmp_path):
    path = tmp_path / "e1.json"
    save_operator(DiagonalModel([E1]), path)
    return str(path)


def test_thm36_on_e1(tmp_path):
    reps = run_check(CheckConfig("thm36", operator=_e1_file(tmp_path), n=0, k=1, m=2, samples=8))
    assert reps and all(r.passed and r.margin > 0 for r in reps)


def test_thm37_zero_vector():
    ctx = make_context(CheckConfig("thm37", builtin="a", dim=4, samples=2))
    ctx = dataclasses.replace(ctx, samples=np.zeros((2, 4, 4)))
    reps = _thm37_one(ctx, 0, 1, 2)
    assert all(r.passed and r.measured == 0.0 for r in reps)


@pytest.mark.parametrize("check", [c for c in CHECKS if c not in ("thm35", "thm37")])
@pytest.mark.parametrize("family", ["a", "b", "c"])
def test_fast_suites_pass(check, family):
    reps = run_check(CheckConfig(check, builtin=family, samples=8))
    assert reps
    failed = [r for r in reps if not r.passed]
    assert not failed, failed[0]


@pytest.mark.slow
@pytest.mark.parametrize("check", ["thm35", "thm37"])
@pytest.mark.parametrize("family", ["b", "c"])
def test_slow_suites_pass(check, family):
    reps = run_check(CheckConfig(check, builtin=family, samples=8))
    assert reps and all(r.passed for r in reps)


def test_diagonal_and_dense_margins_agree(tmp_path):
    from qinterp.builtins import builtin

    model = builtin("a", dim=5)
    diag_path, dense_path = tmp_path / "d.json", tmp_path / "D.json"
    save_operator(model, diag_path)
    save_operator(model.to_dense(), dense_path)
    for check in ("lemma-power-bound", "thm36", "embedding"):
        a = run_check(CheckConfig(check, operator=str(diag_path), samples=6))
        b = run_check(CheckConfig(check, operator=str(dense_path), samples=6))
        np.testing.assert_allclose([r.margin for r in a], [r.margin for r in b], atol=1e-9)


def test_reports_are_deterministic():
    cfg = CheckConfig("couple-props", builtin="b", samples=6, seed=3)
    a = [r.to_json() for r in run_check(cfg)]
    b = [r.to_json() for r in run_check(cfg)]
    assert a == b
    for line in a:
        d = json.loads(line)
        assert set(d) >= {"check", "params", "measured", "bound", "margin", "pass", "solver_gap", "quad_err", "ms"}
        assert d["ms"] is None
