"""Linear scalarization (LS) baseline.

Projected gradient descent on ``lambda^T F`` for a fixed simplex weight.
Traces share the FOOPS CSV schema; merit columns are ``nan``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from foops.errors import DivergedError, InvalidInputError
from foops.problems import MOProblem
from foops.solver import DIVERGENCE_BOUND
from foops.trace import SolveTrace, TraceRow

_NAN = float("nan")


@dataclass(frozen=True)
class LSConfig:
    """Weight ``lam`` on the simplex, step ``alpha``, budget and stopping tolerance."""

    lam: np.ndarray
    alpha: float = 0.2
    T_max: int = 1000
    x0: np.ndarray | None = field(default=None, compare=False)
    tol: float = 1e-8

    def __post_init__(self):
        lam = np.array(self.lam, dtype=float).ravel()
        if np.any(lam < 0) or abs(lam.sum() - 1.0) > 1e-12:
            raise InvalidInputError(f"lambda must lie on the simplex, got {lam}")
        object.__setattr__(self, "lam", lam)
        if not (self.alpha > 0 and self.tol > 0):
            raise InvalidInputError("alpha and tol must be positive")
        if self.T_max < 1:
            raise InvalidInputError("T_max must be at least 1")


def ls_solve(problem: MOProblem, cfg: LSConfig) -> SolveTrace:
    """Run projected gradient descent on the scalarized objective.

    Raises:
        InvalidInputError: weight length or ``x0`` shape mismatch.
        DivergedError: iterate non-finite or beyond the divergence bound.
    """
    if cfg.lam.size != problem.num_objectives:
        raise InvalidInputError("lambda length does not match the number of objectives")
    x = np.zeros(problem.dim) if cfg.x0 is None else np.asarray(cfg.x0, dtype=float)
    if x.shape != (problem.dim,):
        raise InvalidInputError(f"x0 has shape {x.shape}, expected ({problem.dim},)")
    x = problem.project(x)
    trace = SolveTrace("ls", extras={"lambda": cfg.lam.tolist(), "alpha": cfg.alpha})
    start = time.perf_counter()
    t = 0
    while True:
        fx = problem.F(x)
        g = cfg.lam @ problem.jac_F(x)
        x_next = problem.feasible_set.project(x - cfg.alpha * g)
        gm = float(np.linalg.norm(x - x_next)) / cfg.alpha
        trace.append(TraceRow(t, x.copy(), fx, float(problem.f0(x)), _NAN, _NAN, _NAN, _NAN, gm, 0, _NAN))
        if gm <= cfg.tol:
            trace.status = "converged"
            break
        if t >= cfg.T_max:
            trace.status = "max_iter"
            break
        if not np.all(np.isfinite(x_next)) or np.linalg.norm(x_next) > DIVERGENCE_BOUND:
            trace.status = "diverged"
            trace.wall_time = time.perf_counter() - start
            raise DivergedError(f"iterate left the bounded region at iteration {t + 1}", trace)
        x = x_next
        t += 1
    trace.wall_time = time.perf_counter() - start
    return trace


def simplex_grid(n: int) -> np.ndarray:
    """``n`` evenly spaced weights ``(s, 1 - s)`` from ``(1, 0)`` to ``(0, 1)``."""
    if n < 2:
        raise InvalidInputError("a sweep needs at least two weights")
    s = np.linspace(1.0, 0.0, n)
    return np.stack([s, 1.0 - s], axis=1)


@dataclass(frozen=True)
class SweepPoint:
    lam: np.ndarray
    x: np.ndarray
    F: np.ndarray
    f0: float
    status: str


def ls_weight_sweep(problem: MOProblem, n_weights: int, shared: LSConfig | None = None) -> list[SweepPoint]:
    """Run :func:`ls_solve` for every weight of :func:`simplex_grid`.

    ``shared`` supplies every setting except the weight, which comes from
    the grid.  Only two objectives are supported.
    """
    if problem.num_objectives != 2:
        raise InvalidInputError("weight sweeps are implemented for two objectives")
    shared = LSConfig(np.array([0.5, 0.5])) if shared is None else shared
    out = []
    for lam in simplex_grid(n_weights):
        tr = ls_solve(problem, replace(shared, lam=lam))
        r = tr.final
        out.append(SweepPoint(lam, r.x, r.F, r.f0, tr.status))
    return out
