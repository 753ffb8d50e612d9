"""``foops`` command-line entry point.

Subcommands::

    foops run            run one experiment (default method: foops)
    foops compare        run several methods on the same problem and tabulate
    foops sweep          linear-scalarization weight sweep
    foops merit-surface  dump v_{l,tau}(x) and the grid max-min gap on a 1-D problem

A JSON file given with ``--config`` supplies :class:`ExperimentSpec` fields;
command-line flags override it.  Exit codes: 0 success, 1 configuration
error, 2 runtime failure (including any failed run inside a batch).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from foops.errors import FoopsError, InvalidInputError
from foops.experiments import (
    ExperimentSpec,
    SolverParams,
    compare_methods,
    format_table,
    merit_surface,
    run_experiment,
    write_table_csv,
)
from foops.merit import GridSpec
from foops.problems import make_example1, make_fig2_problem, make_quadratic_pair
from foops.trace import write_json

log = logging.getLogger("foops")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2

# flag name -> SolverParams field
_SOLVER_FLAGS = {
    "gamma0": "gamma0",
    "gamma_step": "gamma_step",
    "gamma_max": "gamma_max",
    "alpha": "alpha",
    "beta": "beta",
    "K": "K",
    "tau": "tau",
    "l": "l",
    "theta": "theta",
    "eps": "eps",
    "T_max": "T_max",
}


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON experiment config")
    p.add_argument("--problem", choices=["example1", "fig2", "quadratic_pair"])
    p.add_argument("--q", type=int)
    p.add_argument("--scaling", choices=["unit", "literal"])
    p.add_argument("--seed", type=int)
    p.add_argument("--repeats", type=int)
    p.add_argument("--init", choices=["easy", "hard", "gaussian", "fixed"])
    p.add_argument("--x0", type=float, nargs="+")
    p.add_argument("--n-rays", dest="n_rays", type=int)
    p.add_argument("--ray", dest="rays", type=float, nargs="+", action="append",
                   help="preference ray; repeat for several")
    p.add_argument("--workers", type=int)
    p.add_argument("--out", type=Path)
    g = p.add_argument_group("solver")
    g.add_argument("--gamma0", type=float)
    g.add_argument("--gamma-step", dest="gamma_step", type=float)
    g.add_argument("--gamma-max", dest="gamma_max", type=float)
    g.add_argument("--alpha", type=float)
    g.add_argument("--beta", type=float, help="inner step; omit for the automatic stable step")
    g.add_argument("--K", type=int, help="inner iterations per outer step")
    g.add_argument("--tau", type=float)
    g.add_argument("--l", type=float)
    g.add_argument("--theta", type=float)
    g.add_argument("--eps", type=float, help="stop when the squared gradient mapping is below this")
    g.add_argument("--T-max", dest="T_max", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="foops", description="Preference-guided multi-objective optimization.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment")
    _common(run)
    run.add_argument("--method", choices=["foops", "ls", "ls_sweep"])

    cmp_ = sub.add_parser("compare", help="compare methods on one problem")
    _common(cmp_)
    cmp_.add_argument("--methods", default="foops,ls_sweep", help="comma-separated methods")
    cmp_.add_argument("--n-weights", dest="n_weights", type=int)

    sweep = sub.add_parser("sweep", help="linear-scalarization weight sweep")
    _common(sweep)
    sweep.add_argument("--n-weights", dest="n_weights", type=int, default=101)

    ms = sub.add_parser("merit-surface", help="dump the smoothed merit on a 1-D problem")
    ms.add_argument("--problem", choices=["fig2", "quadratic_pair", "example1"], default="fig2")
    ms.add_argument("--l", type=float, nargs="+", default=[0.0, 1.0])
    ms.add_argument("--tau", type=float, nargs="+", default=[0.01, 0.1])
    ms.add_argument("--low", type=float, default=-1.5)
    ms.add_argument("--high", type=float, default=1.5)
    ms.add_argument("--n", type=int, default=61)
    ms.add_argument("--grid-n", dest="grid_n", type=int, default=3001)
    ms.add_argument("--out", type=Path, required=True)
    return parser


def spec_from_args(args: argparse.Namespace, **forced) -> ExperimentSpec:
    """Merge ``--config`` with flag overrides into a validated ExperimentSpec."""
    base = {}
    if args.config is not None:
        try:
            base = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidInputError(f"cannot read config {args.config}: {exc}") from exc
    solver = dict(base.pop("solver", {}) or {})
    for flag, fld in _SOLVER_FLAGS.items():
        v = getattr(args, flag, None)
        if v is not None:
            solver[fld] = v
    for key in ("problem", "q", "scaling", "seed", "repeats", "init", "x0", "n_rays", "rays",
                "workers", "method", "n_weights"):
        v = getattr(args, key, None)
        if v is not None:
            base[key] = v
    if getattr(args, "out", None) is not None:
        base["out"] = str(args.out)
    base.update(forced)
    try:
        base["solver"] = SolverParams(**solver)
    except TypeError as exc:
        raise InvalidInputError(f"bad solver settings: {exc}") from exc
    return ExperimentSpec.from_dict(base)


def _cmd_run(args) -> int:
    spec = spec_from_args(args)
    report = run_experiment(spec)
    for r in report.runs:
        row = r.row
        if r.error:
            print(f"{r.run_id}: FAILED {r.error}")
        else:
            print(f"{r.run_id}: {row['status']} iters={row['iterations']} "
                  f"pref_violation={row['pref_violation']:.3e} merit_gap={row['certified_merit_gap']:.3e}")
    print(f"hypervolume={report.hypervolume:.6f}")
    return EXIT_RUNTIME if report.failures else EXIT_OK


def _cmd_sweep(args) -> int:
    args.method = "ls_sweep"
    return _cmd_run(args)


def _cmd_compare(args) -> int:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    base = spec_from_args(args)
    out = Path(base.out) if base.out else None
    specs, reports = [], []
    for m in methods:
        s = replace(base, method=m, out=None if out is None else str(out / m))
        specs.append(s)
        reports.append(run_experiment(s))
    table = compare_methods(specs, reports)
    print(format_table(table))
    if out is not None:
        write_table_csv(table, out / "comparison.csv")
    return EXIT_RUNTIME if any(r.failures for r in reports) else EXIT_OK


def _cmd_merit_surface(args) -> int:
    problem = {"fig2": make_fig2_problem, "quadratic_pair": make_quadratic_pair,
               "example1": lambda: make_example1(1)[0]}[args.problem]()
    if args.n < 1 or args.grid_n < 2 or not args.high > args.low:
        raise InvalidInputError("need n >= 1, grid-n >= 2 and high > low")
    xs = np.linspace(args.low, args.high, args.n)
    span = args.high - args.low
    grid = GridSpec(args.low - span, args.high + span, args.grid_n)
    with warnings.catch_warnings():
        # l = 0 is a legitimate surface setting; the inner solve is still run to tolerance
        warnings.simplefilter("ignore")
        rows = merit_surface(problem, args.l, args.tau, xs, grid)
    args.out.mkdir(parents=True, exist_ok=True)
    write_table_csv(rows, args.out / "merit_surface.csv")
    write_json({"problem": args.problem, "l": args.l, "tau": args.tau, "grid": [grid.low, grid.high, grid.n]},
               args.out / "merit_surface.json")
    print(f"wrote {len(rows)} rows to {args.out / 'merit_surface.csv'}")
    return EXIT_OK


_COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep, "compare": _cmd_compare, "merit-surface": _cmd_merit_surface}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return _COMMANDS[args.command](args)
    except (InvalidInputError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FoopsError, OSError, RuntimeError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
