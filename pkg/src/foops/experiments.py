"""Batch experiments: config, execution, output files and method comparison.

Output layout of :func:`run_experiment` (inside ``spec.out``)::

    runs/<method>_p<k>_r<j>.csv   per-run trace (schema foops-trace/1)
    summary.csv                   one row per run
    summary.json                  same rows plus the resolved config
    trajectories.csv              run_id, iter, F_1..F_M   (objective-space polylines)
    front.csv                     grid sample of the Pareto front (q = 1 problems)

Numbers in ``summary.csv`` are taken from each trace's final row; only the
certified merit gap and the stationarity residual are computed afterwards.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from foops.baselines import LSConfig, ls_solve, simplex_grid
from foops.errors import FoopsError, InvalidComparisonError, InvalidInputError
from foops.merit import GridSpec, MeritConfig, brute_u_bar, merit_curve, objective_table
from foops.metrics import FrontSample, hypervolume_2d, pareto_stationarity_residual
from foops.oracles import OracleKind
from foops.penalty import PenaltyConfig
from foops.problems import (
    MOProblem,
    PreferenceSpec,
    make_example1,
    make_fig2_problem,
    make_quadratic_pair,
    preference_rays,
    preference_violation,
    with_preference,
)
from foops.solver import KSchedule, SolverConfig, certified_metrics, initial_point, solve
from foops.trace import SolveTrace, write_json

PROBLEMS = ("example1", "fig2", "quadratic_pair")
METHODS = ("foops", "ls", "ls_sweep")
INITS = ("easy", "hard", "gaussian", "fixed")


@dataclass
class SolverParams:
    """Flat, JSON-friendly solver settings; defaults are the synthetic-run defaults."""

    alpha: float = 0.2
    beta: float | None = None
    K: int = 100
    K_growth: float = 0.0
    l: float = 1.0
    tau: float = 0.01
    theta: float = 1.0
    gamma0: float = 0.05
    gamma_step: float = 0.01
    gamma_max: float = 1.5
    eps: float = 1e-10
    T_max: int = 1000
    oracle_x: str = "pgd"
    oracle_y: str = "pgd"
    oracle_coef: float = 0.0

    def _oracle(self, name: str) -> OracleKind:
        if name in ("momentum", "nesterov"):
            return OracleKind(name, coef=self.oracle_coef)
        return OracleKind(name)

    def solver_config(self, seed: int, init: str, x0=None) -> SolverConfig:
        return SolverConfig(
            alpha=self.alpha,
            beta=self.beta,
            K=KSchedule(self.K, self.K_growth),
            penalty=PenaltyConfig(self.theta, self.gamma0, self.gamma_step, self.gamma_max),
            merit=MeritConfig(l=self.l, tau=self.tau),
            oracle_x=self._oracle(self.oracle_x),
            oracle_y=self._oracle(self.oracle_y),
            eps_stop=self.eps,
            T_max=self.T_max,
            seed=seed,
            init="hard" if init == "fixed" else init,
            x0=None if x0 is None else np.asarray(x0, dtype=float),
        )


@dataclass
class ExperimentSpec:
    """One experiment: problem, preferences, initialization, method and outputs.

    Preferences come from ``rays`` when given, else ``n_rays`` equally spaced
    angles.  ``scaling="unit"`` places the example1 centers at
    ``+-1_q / sqrt(q)``; ``"literal"`` at ``+-1_q``.
    """

    problem: str = "example1"
    q: int = 1
    scaling: str = "unit"
    rays: list | None = None
    n_rays: int = 5
    init: str = "hard"
    x0: list | None = None
    method: str = "foops"
    n_weights: int = 11
    repeats: int = 1
    seed: int = 0
    solver: SolverParams = field(default_factory=SolverParams)
    ls_alpha: float = 0.2
    ls_T_max: int = 1000
    workers: int = 1
    out: str | None = None

    def __post_init__(self):
        if isinstance(self.solver, dict):
            self.solver = SolverParams(**self.solver)
        if self.problem not in PROBLEMS:
            raise InvalidInputError(f"unknown problem {self.problem!r}; choose from {PROBLEMS}")
        if self.method not in METHODS:
            raise InvalidInputError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.init not in INITS:
            raise InvalidInputError(f"unknown init {self.init!r}; choose from {INITS}")
        if self.init == "fixed" and self.x0 is None:
            raise InvalidInputError("init 'fixed' needs x0")
        if self.scaling not in ("unit", "literal"):
            raise InvalidInputError("scaling must be 'unit' or 'literal'")
        if self.repeats < 1 or self.workers < 1 or self.q < 1:
            raise InvalidInputError("repeats, workers, q must all be positive")
        if self.rays is None and self.n_rays < 1:
            raise InvalidInputError("at least one preference is required")
        if self.method == "ls_sweep" and self.n_weights < 2:
            raise InvalidInputError("n_weights must be at least 2")
        # surface bad numbers now rather than once per run
        self.solver.solver_config(self.seed, self.init)
        LSConfig(np.array([0.5, 0.5]), self.ls_alpha, self.ls_T_max)

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentSpec:
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise InvalidInputError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> ExperimentSpec:
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return asdict(self)

    def base_problem(self) -> MOProblem:
        if self.problem == "example1":
            return make_example1(self.q, normalized=self.scaling == "unit")[0]
        if self.q != 1:
            raise InvalidInputError(f"{self.problem} is one-dimensional")
        return make_fig2_problem() if self.problem == "fig2" else make_quadratic_pair()

    def preferences(self) -> list[PreferenceSpec]:
        if self.rays is not None:
            if len(self.rays) == 0:
                raise InvalidInputError("at least one preference is required")
            return [PreferenceSpec(np.asarray(r, dtype=float)) for r in self.rays]
        return preference_rays(self.n_rays)


def nadir_point(spec: ExperimentSpec, problem: MOProblem) -> np.ndarray:
    """``(1, 1)`` for example1 (objective supremum), else the worst single-task value."""
    if spec.problem == "example1":
        return np.ones(2)
    centers = problem.well.centers
    return np.max(np.array([problem.F(c) for c in centers]), axis=0)


@dataclass
class RunResult:
    run_id: str
    method: str
    pref_index: int
    repeat: int
    seed: int
    trace: SolveTrace | None
    row: dict
    error: str | None = None


@dataclass
class ExperimentReport:
    spec: ExperimentSpec
    runs: list[RunResult]
    hypervolume: float
    out: Path | None

    @property
    def failures(self) -> list[RunResult]:
        return [r for r in self.runs if r.error is not None]

    def rows(self) -> list[dict]:
        return [r.row for r in self.runs]


SUMMARY_COLUMNS = (
    "run_id", "method", "pref_index", "repeat", "seed", "status", "iterations",
    "f0", "pref_violation", "merit_gap", "certified_merit_gap", "stationarity_residual",
    "wall_time", "error", "F", "x",
)


def _start(spec: ExperimentSpec, seed: int, q: int):
    if spec.init == "fixed":
        x0 = np.asarray(spec.x0, dtype=float).ravel()
        if x0.shape != (q,):
            raise InvalidInputError(f"x0 has {x0.size} entries, expected {q}")
        return x0
    return initial_point(spec.init, q, seed)


def _one_run(spec: ExperimentSpec, problem: MOProblem, pref: PreferenceSpec, k: int, j: int,
             lam=None, tag: str | None = None) -> RunResult:
    seed = spec.seed + j
    method = spec.method if tag is None else tag
    run_id = f"{method}_p{k}_r{j}"
    try:
        x0 = _start(spec, seed, problem.dim)
        if spec.method == "foops":
            trace = solve(problem, spec.solver.solver_config(seed, spec.init, x0))
        else:
            if lam is None:
                lam = pref.ray / pref.ray.sum()
            trace = ls_solve(problem, LSConfig(np.asarray(lam, dtype=float), spec.ls_alpha, spec.ls_T_max, x0))
            mcfg = MeritConfig(l=spec.solver.l, tau=spec.solver.tau)
            trace.extras.update(certified_metrics(problem, mcfg, trace.x_final))
        final = trace.final
        row = {
            "run_id": run_id,
            "method": method,
            "pref_index": k,
            "repeat": j,
            "seed": seed,
            "status": trace.status,
            "iterations": final.iter,
            "f0": float(final.f0),
            "pref_violation": preference_violation(pref, final.F),
            "merit_gap": float(final.merit_gap),
            "certified_merit_gap": trace.extras.get("certified_merit_gap", float("nan")),
            "stationarity_residual": pareto_stationarity_residual(problem, final.x),
            "wall_time": trace.wall_time,
            "error": "",
            "x": final.x.tolist(),
            "F": final.F.tolist(),
        }
        return RunResult(run_id, method, k, j, seed, trace, row)
    except FoopsError as exc:
        row = {c: "" for c in SUMMARY_COLUMNS}
        row.update(run_id=run_id, method=method, pref_index=k, repeat=j, seed=seed,
                   status="diverged", error=f"{type(exc).__name__}: {exc}")
        trace = getattr(exc, "trace", None)
        return RunResult(run_id, method, k, j, seed, trace, row, error=row["error"])


def _tasks(spec: ExperimentSpec, base: MOProblem):
    for k, pref in enumerate(spec.preferences()):
        problem = with_preference(base, pref)
        for j in range(spec.repeats):
            if spec.method == "ls_sweep":
                for w, lam in enumerate(simplex_grid(spec.n_weights)):
                    yield (problem, pref, k, j, lam, f"ls_w{w}")
            else:
                yield (problem, pref, k, j, None, None)


def run_experiment(spec: ExperimentSpec, out=None) -> ExperimentReport:
    """Execute every (preference, repeat) run and write the output files.

    Individual run failures are recorded in the summary and never abort the
    batch.  The output directory is created and checked before any solve.
    """
    out = Path(out) if out is not None else (Path(spec.out) if spec.out else None)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "runs").mkdir(exist_ok=True)
        probe = out / ".write_probe"
        probe.write_text("")
        probe.unlink()
    base = spec.base_problem()
    tasks = list(_tasks(spec, base))
    if spec.workers == 1:
        runs = [_one_run(spec, *t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            runs = list(pool.map(lambda t: _one_run(spec, *t), tasks))

    nadir = nadir_point(spec, base)
    finals = [r.row["F"] for r in runs if r.error is None]
    hv = hypervolume_2d(FrontSample(np.array(finals).reshape(-1, 2), nadir)) if finals else 0.0
    report = ExperimentReport(spec, runs, hv, out)
    if out is not None:
        _write_outputs(report, base)
    return report


def _write_outputs(report: ExperimentReport, base: MOProblem) -> None:
    out = report.out
    for r in report.runs:
        if r.trace is not None and len(r.trace):
            r.trace.write_csv(out / "runs" / f"{r.run_id}.csv")
    with (out / "summary.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for r in report.runs:
            w.writerow([_cell(r.row.get(c, "")) for c in SUMMARY_COLUMNS])
    summary = {
        "config": report.spec.to_dict(),
        "hypervolume": report.hypervolume,
        "runs": report.rows(),
    }
    write_json(summary, out / "summary.json")
    m = base.num_objectives
    with (out / "trajectories.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["run_id", "iter"] + [f"F_{i + 1}" for i in range(m)])
        for r in report.runs:
            if r.trace is None:
                continue
            for row in r.trace.rows:
                w.writerow([r.run_id, row.iter] + [repr(float(v)) for v in row.F])
    if base.dim == 1:
        write_front_csv(base, out / "front.csv")


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, list):
        return ";".join(repr(float(t)) for t in v)
    return v


def pareto_front_sample(problem: MOProblem, grid: GridSpec | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Non-dominated grid points ``(xs, F)`` of a one-dimensional problem, sorted by ``F_1``."""
    if problem.dim != 1:
        raise InvalidInputError("front sampling is implemented for one-dimensional problems")
    if grid is None:
        c = problem.well.centers[:, 0] if problem.well is not None else np.array([-1.0, 1.0])
        grid = GridSpec(float(c.min()) - 0.5, float(c.max()) + 0.5, 2001)
    xs = grid.points(1)
    table = objective_table(problem, xs)
    keep = np.ones(len(xs), dtype=bool)
    order = np.lexsort((table[:, 1], table[:, 0]))
    best = np.inf
    for i in order:
        if table[i, 1] < best:
            best = table[i, 1]
        else:
            keep[i] = False
    idx = order[keep[order]]
    return xs[idx, 0], table[idx]


def write_front_csv(problem: MOProblem, path) -> None:
    xs, table = pareto_front_sample(problem)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x"] + [f"F_{i + 1}" for i in range(table.shape[1])])
        for x, f in zip(xs, table):
            w.writerow([repr(float(x))] + [repr(float(v)) for v in f])


# --------------------------------------------------------------------------
# comparison


def compare_methods(specs: list[ExperimentSpec], reports: list[ExperimentReport] | None = None) -> list[dict]:
    """One row per (method, preference) with aggregated final metrics.

    Columns: ``method``, ``pref_index``, ``runs``, ``min_pref_violation``,
    ``mean_pref_violation``, ``min_merit_gap``, ``mean_merit_gap``,
    ``hypervolume`` (of that method's full final set).
    """
    if not specs:
        raise InvalidComparisonError("nothing to compare")
    key = (specs[0].problem, specs[0].q, specs[0].scaling,
           [tuple(p.ray) for p in specs[0].preferences()])
    for s in specs[1:]:
        if (s.problem, s.q, s.scaling, [tuple(p.ray) for p in s.preferences()]) != key:
            raise InvalidComparisonError("compared experiments must share problem and preferences")
    if reports is None:
        reports = [run_experiment(replace(s, out=None)) for s in specs]
    table = []
    for rep in reports:
        ok = [r for r in rep.runs if r.error is None]
        method = rep.spec.method
        for k in sorted({r.pref_index for r in ok}):
            sel = [r.row for r in ok if r.pref_index == k]
            viol = np.array([r["pref_violation"] for r in sel])
            gap = np.array([r["certified_merit_gap"] for r in sel])
            table.append({
                "method": method,
                "pref_index": k,
                "runs": len(sel),
                "min_pref_violation": float(viol.min()),
                "mean_pref_violation": float(viol.mean()),
                "min_merit_gap": float(gap.min()),
                "mean_merit_gap": float(gap.mean()),
                "hypervolume": rep.hypervolume,
            })
    return table


def format_table(rows: list[dict]) -> str:
    """Fixed-width text rendering of :func:`compare_methods` rows."""
    if not rows:
        return ""
    cols = list(rows[0])
    cells = [[_fmt_cell(r[c]) for c in cols] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths))]
    lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(lines)


def _fmt_cell(v) -> str:
    return f"{v:.4e}" if isinstance(v, float) else str(v)


def write_table_csv(rows: list[dict], path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if rows:
            w.writerow(list(rows[0]))
            for r in rows:
                w.writerow([_cell(v) for v in r.values()])


# --------------------------------------------------------------------------
# merit surface


def merit_surface(problem: MOProblem, ls, taus, xs, grid: GridSpec) -> list[dict]:
    """``v_{l,tau}(x)`` and the grid max-min gap at every ``x`` for each ``(l, tau)``.

    Only one-dimensional problems are supported by the grid oracle.
    """
    table = objective_table(problem, grid.points(problem.dim))
    pts = [np.atleast_1d(float(x)) for x in xs]
    u = [brute_u_bar(problem, x, grid, table) for x in pts]
    rows = []
    for l in ls:
        for tau in taus:
            evs = merit_curve(MeritConfig(l=float(l), tau=float(tau)), problem, pts)
            for x, ev, ub in zip(pts, evs, u):
                rows.append({"l": float(l), "tau": float(tau), "x": float(x[0]),
                             "v": float(ev.value), "u_bar_grid": ub})
    return rows

