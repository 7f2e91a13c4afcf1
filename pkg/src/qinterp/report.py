"""Verification report records shared by every check."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

DEFAULT_TOL = 1e-9


def margin_of(measured: float, bound: float) -> float:
    """Relative slack ``(bound - measured) / bound``; absolute when the bound is 0."""
    if bound > 0:
        return (bound - measured) / bound
    return -measured if measured > 0 else 0.0


def jsonable(value):
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return value
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if hasattr(value, "item"):  # numpy scalars
        return jsonable(value.item())
    return value


@dataclass
class VerificationReport:
    check: str
    params: dict
    measured: float
    bound: float
    margin: float
    passed: bool
    solver_gap: float = 0.0
    quad_err: float = 0.0
    ms: float | None = None
    notes: dict = field(default_factory=dict)

    @classmethod
    def build(
        cls,
        check: str,
        params: dict,
        measured: float,
        bound: float,
        *,
        tol: float = DEFAULT_TOL,
        solver_gap: float = 0.0,
        quad_err: float = 0.0,
        notes: dict | None = None,
    ) -> VerificationReport:
        params = dict(params)
        params["tol"] = tol
        m = margin_of(float(measured), float(bound))
        # a solver with relative duality gap g can misplace a value by g, so
        # its gap widens the acceptance band; pass stays recomputable
        # from (measured, bound, tol, solver_gap)
        return cls(
            check=check,
            params=jsonable(params),
            measured=float(measured),
            bound=float(bound),
            margin=m,
            passed=bool(m >= -(tol + float(solver_gap))),
            solver_gap=float(solver_gap),
            quad_err=float(quad_err),
            notes=jsonable(notes or {}),
        )

    def recomputed_pass(self) -> bool:
        tol = float(self.params.get("tol", DEFAULT_TOL))
        return margin_of(self.measured, self.bound) >= -(tol + self.solver_gap)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        if not d["notes"]:
            d.pop("notes")
        return d

    def to_json(self) -> str:
        return json.dumps(jsonable(self.to_dict()), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict) -> VerificationReport:
        return cls(
            check=d["check"],
            params=d["params"],
            measured=float(d["measured"]),
            bound=float(d["bound"]),
            margin=float(d["margin"]),
            passed=bool(d["pass"]),
            solver_gap=float(d.get("solver_gap", 0.0)),
            quad_err=float(d.get("quad_err", 0.0)),
            ms=d.get("ms"),
            notes=d.get("notes", {}),
        )

    @classmethod
    def from_json(cls, line: str) -> VerificationReport:
        return cls.from_dict(json.loads(line))

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"[{status}] {self.check} measured={self.measured:.6g} "
            f"bound={self.bound:.6g} margin={self.margin:.3e}"
        )


def worst(candidates):
    """Pick the ``(measured, bound)`` pair with the smallest margin."""
    best = None
    for measured, bound in candidates:
        m = margin_of(measured, bound)
        if best is None or m < best[0]:
            best = (m, measured, bound)
    if best is None:
        return 0.0, 0.0
    return best[1], best[2]
