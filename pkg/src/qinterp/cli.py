"""``qinterp`` command line: spectrum, sectorial profile, verification suites, CSV reports.

Exit codes: 0 all pass, 1 any fail, 2 precondition or spectral violation,
3 I/O or parse error.
"""

from __future__ import annotations

import argparse
import csv
import glob
import json
import math
import sys
from pathlib import Path

import numpy as np

from qinterp.checks import CHECKS, CheckConfig, run_check
from qinterp.interpolation.norms import LogGrid
from qinterp.report import VerificationReport
from qinterp.spectral import PreconditionError, SpectralPointError, load_operator, s_spectrum, sectorial_scan

EXIT_OK, EXIT_FAIL, EXIT_PRECONDITION, EXIT_IO = 0, 1, 2, 3
CSV_COLUMNS = ("check", "params", "measured", "bound", "margin", "pass", "dedup")


class CliError(Exception):
    def __init__(self, code: int, msg: str):
        super().__init__(msg)
        self.code = code


def _fmt(v: float, digits: int = 8) -> str:
    v = round(float(v), digits)
    return f"{v + 0.0:.{digits}g}"


def format_spheres(reps) -> str:
    return ", ".join(f"({_fmt(q.w)},{_fmt(q.imag_norm)})" for q in reps)


def _load(path):
    try:
        return load_operator(path)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read {path}: {exc.strerror or exc}") from None
    except (ValueError, KeyError, TypeError) as exc:
        raise CliError(EXIT_IO, f"cannot parse {path}: {exc}") from None


def parse_p(text: str) -> float:
    if text.strip().lower() in ("inf", "infinity", "oo"):
        return math.inf
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"p must be a number >= 1 or 'inf', got {text!r}") from None


# ---------------------------------------------------------------- commands


def cmd_spectrum(args) -> int:
    model = _load(args.file)
    print(format_spheres(s_spectrum(model)))
    return EXIT_OK


def cmd_sectorial(args) -> int:
    model = _load(args.file)
    t_min, t_max, count = args.grid
    try:
        grid = LogGrid(t_min, t_max, int(count))
    except ValueError as exc:
        raise CliError(EXIT_PRECONDITION, str(exc)) from None
    profile = sectorial_scan(model, args.omega, grid.points)
    worst_q = int(np.argmax(profile.q_values))
    worst_tq = int(np.argmax(profile.tq_values))
    print(f"measured_M = {profile.measured_M:.12g}")
    print(f"max t^2 ||Q^-1||   = {profile.q_values[worst_q]:.12g} at t = {profile.grid[worst_q]:.6g}")
    print(f"max t ||T Q^-1||   = {profile.tq_values[worst_tq]:.12g} at t = {profile.grid[worst_tq]:.6g}")
    if args.json:
        _write_text(args.json, json.dumps(profile.to_dict(), sort_keys=True) + "\n")
    return EXIT_OK


def config_from_args(args) -> CheckConfig:
    if args.operator and args.builtin:
        raise CliError(EXIT_PRECONDITION, "give either --operator or --builtin, not both")
    return CheckConfig(
        check=args.check,
        operator=args.operator,
        builtin=args.builtin,
        dim=args.dim,
        omega=args.omega,
        theta=args.theta,
        p=args.p,
        n=args.n,
        k=args.k,
        m=args.m,
        samples=args.samples,
        seed=args.seed,
        tol=args.tol,
        grid=(args.grid[0], args.grid[1], int(args.grid[2])),
        timing=args.timing,
    )


def cmd_verify(args) -> int:
    cfg = config_from_args(args)
    if cfg.operator:
        _load(cfg.operator)  # surface I/O problems with exit code 3
    try:
        reports = run_check(cfg)
    except ValueError as exc:  # builtin names, dims
        raise CliError(EXIT_PRECONDITION, str(exc)) from None
    lines = "".join(r.to_json() + "\n" for r in reports)
    summary = sys.stdout
    if args.json:
        _write_text(args.json, lines)
    else:
        sys.stdout.write(lines)
        summary = sys.stderr
    failed = [r for r in reports if not r.passed]
    for r in reports:
        print(
            f"{'PASS' if r.passed else 'FAIL'} {r.check} margin={r.margin:.3e} "
            f"measured={r.measured:.6g} bound={r.bound:.6g} {_short_params(r.params)}",
            file=summary,
        )
    print(f"{len(reports) - len(failed)}/{len(reports)} passed", file=summary)
    return EXIT_FAIL if failed else EXIT_OK


def _short_params(params: dict) -> str:
    skip = {"grid", "tol", "source", "seed", "omega", "samples", "dim"}
    return " ".join(f"{k}={v}" for k, v in sorted(params.items()) if k not in skip)


def read_reports(paths) -> list[VerificationReport]:
    reports, errors = [], []
    for path in paths:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            errors.append(f"{path}: {exc.strerror or exc}")
            continue
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            try:
                reports.append(VerificationReport.from_json(line))
            except (ValueError, KeyError, TypeError) as exc:
                errors.append(f"{path}:{lineno}: {exc}")
    if errors:
        raise CliError(EXIT_IO, "unparseable report lines:\n" + "\n".join(errors))
    return reports


def report_rows(reports) -> list[dict]:
    keyed = [(r.check, json.dumps(r.params, sort_keys=True, separators=(",", ":")), r) for r in reports]
    keyed.sort(key=lambda item: (item[0], item[1]))  # stable: input order breaks ties
    counts: dict = {}
    for check, params, _ in keyed:
        counts[(check, params)] = counts.get((check, params), 0) + 1
    return [
        {
            "check": check,
            "params": params,
            "measured": repr(r.measured),
            "bound": repr(r.bound),
            "margin": repr(r.margin),
            "pass": "true" if r.passed else "false",
            "dedup": "duplicate" if counts[(check, params)] > 1 else "",
        }
        for check, params, r in keyed
    ]


def cmd_report(args) -> int:
    paths = sorted(glob.glob(args.pattern))
    reports = read_reports(paths)
    rows = report_rows(reports)
    out = open(args.csv, "w", newline="") if args.csv else sys.stdout
    try:
        writer = csv.DictWriter(out, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_FAIL if any(not r.passed for r in reports) else EXIT_OK


def _write_text(path, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write {path}: {exc.strerror or exc}") from None


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qinterp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="print S-spectrum sphere representatives (Re, |Im|)")
    sp.add_argument("file")
    sp.set_defaults(func=cmd_spectrum)

    grid_kw = dict(nargs=3, type=float, metavar=("TMIN", "TMAX", "COUNT"), default=[1e-3, 1e3, 200])

    se = sub.add_parser("sectorial", help="measure the ray-sectoriality constant M")
    se.add_argument("file")
    se.add_argument("--omega", type=float, default=math.pi)
    se.add_argument("--grid", **grid_kw)
    se.add_argument("--json", metavar="OUT")
    se.set_defaults(func=cmd_sectorial)

    ve = sub.add_parser("verify", help="run one verification suite")
    ve.add_argument("check", choices=CHECKS)
    src = ve.add_mutually_exclusive_group()
    src.add_argument("--operator", metavar="FILE")
    src.add_argument("--builtin", metavar="NAME")
    ve.add_argument("--dim", type=int)
    ve.add_argument("--omega", type=float, default=math.pi)
    ve.add_argument("--theta", type=float)
    ve.add_argument("--p", type=parse_p)
    ve.add_argument("--n", type=int)
    ve.add_argument("--k", type=int)
    ve.add_argument("--m", type=int)
    ve.add_argument("--samples", type=int, default=32)
    ve.add_argument("--seed", type=int, default=0)
    ve.add_argument("--tol", type=float, default=1e-9)
    ve.add_argument("--grid", **grid_kw)
    ve.add_argument("--json", metavar="OUT")
    ve.add_argument("--timing", action="store_true", help="record wall time (makes output nondeterministic)")
    ve.set_defaults(func=cmd_verify)

    re_ = sub.add_parser("report", help="summarize JSON-lines reports as CSV")
    re_.add_argument("pattern", metavar="GLOB")
    re_.add_argument("--csv", metavar="OUT")
    re_.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors, which matches the precondition code
        return int(exc.code or 0)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"qinterp: {exc}", file=sys.stderr)
        return exc.code
    except SpectralPointError as exc:
        print(f"qinterp: spectral point on the ray: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except PreconditionError as exc:
        print(f"qinterp: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
