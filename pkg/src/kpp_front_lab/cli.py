"""Command-line entry point: ``kpp-front-lab <subcommand> ...``.

Exit status is 0 on success, 1 when a validation fails or a numerical error
is raised, and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .errors import KppLabError
from .profiles import ThreePatch, profile_from_dict
from .reporting import (
    FIGURE1_PRESETS,
    REPORT_HEADER,
    CANONICAL_POINTS,
    cross_validate,
    figure1_sweep,
    ordered_map,
    write_csv,
)
from .speeds import SpeedInputs, baseline_speed, leftward_speed, rightward_speed


class UsageError(Exception):
    pass


def _read_json(path: str) -> dict:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"file not found: {path}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc})") from None


def _times(text: Optional[str]) -> list[float]:
    """Parse 't=100,200,400' (or '100,200')."""
    if not text:
        return []
    body = text.split("=", 1)[1] if text.startswith("t=") else text
    try:
        return [float(v) for v in body.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"cannot parse times from {text!r}") from None


def _speed_inputs(args) -> SpeedInputs:
    return SpeedInputs(args.c1, args.r_minus, args.r_plus, args.lambda1)


def _emit(payload: dict, args, config) -> None:
    if getattr(args, "json", False):
        print(json.dumps(payload, sort_keys=True, default=str))
    else:
        for k, v in payload.items():
            print(f"{k}: {v}")


# -- subcommands -------------------------------------------------------------

def cmd_eigen(args) -> int:
    from .eigen import lambda1

    if args.profile:
        profile = profile_from_dict(_read_json(args.profile))
    elif args.three_patch:
        profile = ThreePatch(*args.three_patch)
    else:
        raise UsageError("eigen needs --profile or --three-patch")
    res = lambda1(profile, h=args.h, tol=args.tol)
    config = {"cmd": "eigen", "profile": profile.to_dict(), "h": args.h, "tol": args.tol}
    payload = {
        "lambda1": res.lambda1,
        "converged": res.converged,
        "tail_dominated": res.tail_dominated,
        "decay_rate_plus": res.decay_rate_plus,
        "decay_rate_minus": res.decay_rate_minus,
        "domain_half_width": res.domain_half_width,
    }
    if args.emit:
        write_csv(args.emit, ["y", "phi"], res.eigenfunction.tolist(), config)
    _emit(payload, args, config)
    return 0


def cmd_speed(args) -> int:
    inp = _speed_inputs(args)
    if args.baseline:
        res = baseline_speed(inp)
    elif args.direction == "left":
        res = leftward_speed(inp)
    else:
        res = rightward_speed(inp)
    _emit({"c_star": res.c_star, "regime": res.regime.value}, args, vars(args))
    return 0


def cmd_sweep(args) -> int:
    try:
        a, b, n = args.c1_range.split(":")
        lo, hi, points = float(a), float(b), int(n)
    except ValueError:
        raise UsageError(f"--c1-range expects a:b:n, got {args.c1_range!r}") from None
    if points < 2:
        raise UsageError("--c1-range needs at least 2 points")
    cs = np.linspace(lo, hi, points).tolist()

    def row(c):
        inp = SpeedInputs(c, args.r_minus, args.r_plus, args.lambda1)
        right, left = rightward_speed(inp), leftward_speed(inp)
        return (c, right.c_star, left.c_star, right.regime.value, baseline_speed(inp).c_star)

    rows = ordered_map(row, cs)
    config = {k: v for k, v in vars(args).items() if k != "func"}
    write_csv(args.emit, ["c1", "c_star_right", "c_star_left", "regime", "s_base"], rows, config)
    return 0


def cmd_fl_explicit(args) -> int:
    from .explicit import construct_explicit, verify_viscosity

    inp = _speed_inputs(args)
    sol = construct_explicit(inp)
    config = {k: v for k, v in vars(args).items() if k != "func"}
    if args.emit:
        top = args.s_max if args.s_max else 2.0 * max([b for b in sol.breakpoints if math.isfinite(b)] + [sol.s_hat, 1.0])
        s = np.linspace(0.0, top, args.samples)
        write_csv(args.emit, ["s", "rho", "piece"],
                  zip(s.tolist(), sol.evaluate(s).tolist(), sol.tags(s)), config)
    payload = {"s_hat": sol.s_hat, "regime": sol.regime.value, "junction_value": sol.junction_value,
               "breakpoints": sol.breakpoints}
    status = 0
    if args.verify:
        rep = verify_viscosity(sol)
        payload["residuals"] = rep.to_dict()
        status = 0 if rep.passed else 1
    _emit(payload, args, config)
    return status


def cmd_fl_solve(args) -> int:
    from .junction import JunctionProblem, solve

    problem = JunctionProblem.from_dict(_read_json(args.problem))
    grid = solve(problem, h=args.h, tol=args.tol, init=args.init)
    config = {"cmd": "fl-solve", "problem": problem.to_dict(), "h": args.h, "tol": args.tol}
    cols = ["s", "rho"]
    data = [grid.s.tolist(), grid.values.tolist()]
    payload = {"s_hat_numeric": grid.s_hat_numeric, "iterations": grid.iterations,
               "residual": grid.residual}
    status = 0
    if args.compare_explicit:
        if len(problem.junctions) != 1:
            raise UsageError("--compare-explicit needs a single-junction problem")
        from .explicit import construct_explicit

        c1 = problem.junctions[0]
        inp = SpeedInputs(c1, problem.segment_rates[0], problem.segment_rates[1],
                          problem.flux_limiters[0] + c1 * c1 / 4.0)
        exact = construct_explicit(inp).evaluate(grid.s)
        cols.append("rho_explicit")
        data.append(exact.tolist())
        payload["sup_error"] = float(np.max(np.abs(exact - grid.values)))
        payload["s_hat_explicit"] = rightward_speed(inp).c_star
        status = 0 if abs(payload["s_hat_explicit"] - grid.s_hat_numeric) <= 10 * grid.h else 1
    if args.emit:
        write_csv(args.emit, cols, zip(*data), config)
    _emit(payload, args, config)
    return status


def _sim_config(data: dict):
    from .simulator import Bump, Shift, SimConfig

    try:
        profile = profile_from_dict(data["profile"])
    except KeyError:
        raise UsageError("simulation config needs a 'profile'") from None
    kw = {k: data[k] for k in ("c1", "t_end", "dx", "dt", "x_min", "x_max", "scheme", "record_dt")
          if k in data}
    if "u0" in data:
        kw["u0"] = Bump(**data["u0"])
    if "shifts" in data:
        kw["shifts"] = tuple(Shift(float(s["speed"]), profile_from_dict(s["profile"])) for s in data["shifts"])
    if "levels" in data:
        kw["levels"] = tuple(float(v) for v in data["levels"])
    return SimConfig(profile=profile, **kw)


def cmd_simulate(args) -> int:
    from .simulator import front_speed, rate_function, simulate

    data = _read_json(args.config)
    cfg = _sim_config(data)
    snaps = _times(args.emit_snapshots)
    rate_times = _times(args.emit_rate_function)
    cfg.snapshot_times = tuple(sorted(set(snaps + rate_times)))
    handle = simulate(cfg)
    trace = front_speed(handle)
    config = {"cmd": "simulate", "config": data}
    out = Path(args.emit)
    lv = cfg.levels[0]
    write_csv(out, ["t", "x_front", "u_max"],
              zip(handle.times.tolist(), handle.fronts[lv].tolist(), handle.u_max.tolist()), config)
    for t in snaps:
        W = handle.log_density(t)
        write_csv(out.with_name(f"{out.stem}_snapshot_t{t:g}.csv"), ["x", "u", "w"],
                  zip(handle.x.tolist(), np.exp(-W).tolist(), W.tolist()), config)
    for t in rate_times:
        s, w = rate_function(handle, t)
        write_csv(out.with_name(f"{out.stem}_rate_t{t:g}.csv"), ["s", "w"],
                  zip(s.tolist(), w.tolist()), config)
    _emit({"fitted_speed": trace.fitted_speed, "level": lv, "fit_residual": trace.fit_residual},
          args, config)
    return 0


def cmd_validate(args) -> int:
    numeric_h = 1e-3 if args.suite in ("full", "pde") else None
    report = cross_validate(CANONICAL_POINTS, numeric_h=numeric_h, empirical=args.suite == "pde")
    print(report.summary())
    if args.emit:
        write_csv(args.emit, REPORT_HEADER, report.table(), {"cmd": "validate", "suite": args.suite})
    return 0 if report.passed else 1


def cmd_figure1(args) -> int:
    rows = figure1_sweep(args.panel, args.points)
    rm, rp, lam = FIGURE1_PRESETS[args.panel]
    config = {"cmd": "figure1", "panel": args.panel, "points": args.points}
    write_csv(args.emit, ["c1", "c_star", "regime"], rows, config)
    print(f"panel {args.panel}: r_minus={rm:g} r_plus={rp:g} lambda1={lam:g}, {len(rows)} points -> {args.emit}")
    return 0


# -- parser --------------------------------------------------------------------

def _add_speed_args(p, with_c1=True):
    if with_c1:
        p.add_argument("--c1", type=float, required=True)
    p.add_argument("--r-minus", type=float, required=True)
    p.add_argument("--r-plus", type=float, required=True)
    p.add_argument("--lambda1", type=float, required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kpp-front-lab",
                                     description="Spreading speeds of KPP fronts in shifting environments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eigen", help="generalised principal eigenvalue of a profile")
    p.add_argument("--profile", help="profile JSON file")
    p.add_argument("--three-patch", type=float, nargs=4, metavar=("R_MINUS", "R_MID", "R_PLUS", "L"))
    p.add_argument("--h", type=float, default=0.005)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--emit", help="eigenfunction CSV")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_eigen)

    p = sub.add_parser("speed", help="closed-form spreading speed")
    _add_speed_args(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--direction", choices=("right", "left"), default="right")
    g.add_argument("--baseline", action="store_true", help="speed ignoring the eigenvalue (Lambda_1 = max r)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_speed)

    p = sub.add_parser("sweep", help="speeds over a range of c1")
    _add_speed_args(p, with_c1=False)
    p.add_argument("--c1-range", required=True, help="a:b:n, n evenly spaced values of c1")
    p.add_argument("--emit", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fl-explicit", help="explicit flux-limited solution")
    _add_speed_args(p)
    p.add_argument("--emit")
    p.add_argument("--samples", type=int, default=2001)
    p.add_argument("--s-max", type=float)
    p.add_argument("--verify", action="store_true", help="run the viscosity residual checks")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_fl_explicit)

    p = sub.add_parser("fl-solve", help="grid solution of the junction problem")
    p.add_argument("--problem", required=True)
    p.add_argument("--h", type=float, default=1e-3)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--init", choices=("zero", "large"), default="large")
    p.add_argument("--emit")
    p.add_argument("--compare-explicit", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_fl_solve)

    p = sub.add_parser("simulate", help="direct PDE simulation with front tracking")
    p.add_argument("--config", required=True)
    p.add_argument("--emit", required=True, help="front CSV (t, x_front, u_max)")
    p.add_argument("--emit-snapshots", help="e.g. t=100,200,400")
    p.add_argument("--emit-rate-function", help="e.g. t=400")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", help="cross-validate speeds on the canonical regime points")
    p.add_argument("--suite", choices=("quick", "full", "pde"), default="quick")
    p.add_argument("--emit")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("figure1", help="c1 sweep for one panel of the speed figure")
    p.add_argument("--panel", choices=sorted(FIGURE1_PRESETS), required=True)
    p.add_argument("--points", type=int, default=400)
    p.add_argument("--emit", required=True)
    p.set_defaults(func=cmd_figure1)
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except KppLabError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
