"""Double-loop penalty solver (FOOPS).

Each outer iteration ``t``

1. runs ``K_t`` oracle steps on ``y -> h(x_t, y)`` warm-started at the
   previous inner iterate, giving ``y_{t+1}``;
2. forms ``v_t = tau log M - h(x_t, y_{t+1})`` and the direction
   ``dx = grad f0(x_t) - gamma_t theta sign(v_t)|v_t|^(theta-1) grad_x h(x_t, y_{t+1})``;
3. stops when the gradient mapping ``||x_t - Proj(x_t - alpha dx)|| / alpha``
   squared is at most ``eps_stop``, else applies the outer oracle to ``x_t``.

The x and y oracles keep independent states for the whole run.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from foops import kernels
from foops.errors import DivergedError, InvalidInputError
from foops.kernels import lse_softmax
from foops.merit import MeritConfig, inner_step, merit_eval, merit_gap
from foops.oracles import OracleKind, OracleState, advance
from foops.penalty import PenaltyConfig, penalty_grad_contrib, penalty_value, penalty_weight
from foops.problems import MOProblem
from foops.trace import SolveTrace, TraceRow

DIVERGENCE_BOUND = 1e8


@dataclass(frozen=True)
class KSchedule:
    """Inner iterations ``K_t = K0 + growth * t``."""

    K0: int = 100
    growth: float = 0.0

    def __post_init__(self):
        if self.K0 < 1 or self.growth < 0:
            raise InvalidInputError("K0 must be positive and growth non-negative")

    @classmethod
    def constant(cls, K: int) -> KSchedule:
        return cls(K, 0.0)

    @classmethod
    def linear(cls, K0: int, growth: float) -> KSchedule:
        return cls(K0, growth)

    def __call__(self, t: int) -> int:
        return int(self.K0 + self.growth * t)


@dataclass(frozen=True)
class SolverConfig:
    """Step sizes, schedules, oracles and stopping rule.

    ``beta=None`` uses the stable inner step of :func:`foops.merit.inner_step`.
    ``x0`` overrides the seeded initializer named by ``init``
    (``"easy"``, ``"hard"`` or ``"gaussian"``).
    """

    alpha: float = 0.2
    beta: float | None = None
    K: KSchedule = KSchedule()
    penalty: PenaltyConfig = PenaltyConfig()
    merit: MeritConfig = MeritConfig(l=1.0, tau=0.01)
    oracle_x: OracleKind = OracleKind()
    oracle_y: OracleKind = OracleKind()
    eps_stop: float = 1e-10
    T_max: int = 1000
    seed: int = 0
    init: str = "hard"
    x0: np.ndarray | None = field(default=None, compare=False)
    certify: bool = True

    def __post_init__(self):
        if not (self.alpha > 0 and self.eps_stop > 0):
            raise InvalidInputError("alpha and eps_stop must be positive")
        if self.beta is not None and not self.beta > 0:
            raise InvalidInputError("beta must be positive")
        if self.T_max < 1:
            raise InvalidInputError("T_max must be at least 1")
        if self.init not in INITIALIZERS:
            raise InvalidInputError(f"unknown initializer {self.init!r}")


def _easy(rng, q):
    return rng.uniform(-0.3, 0.3, q)


def _hard(rng, q):
    # magnitude in [0.15, 0.5] with an independent sign per coordinate
    return rng.choice([-1.0, 1.0], size=q) * rng.uniform(0.15, 0.5, q)


def _gaussian(rng, q):
    return rng.normal(size=q)


INITIALIZERS = {"easy": _easy, "hard": _hard, "gaussian": _gaussian}


def initial_point(kind: str, q: int, seed: int) -> np.ndarray:
    """Seeded starting point: ``easy`` U[-0.3, 0.3]^q, ``hard`` +-U[0.15, 0.5]^q, ``gaussian`` N(0, I)."""
    if kind not in INITIALIZERS:
        raise InvalidInputError(f"unknown initializer {kind!r}")
    return INITIALIZERS[kind](np.random.default_rng(seed), q)


def _h_and_weights(problem, x, fx, y, l, tau):
    lse, pi = lse_softmax((problem.F(y) - fx) / tau)
    d = x - y
    return tau * lse + 0.5 * l * float(d @ d), pi


def solve(problem: MOProblem, cfg: SolverConfig = SolverConfig()) -> SolveTrace:
    """Run the double loop and return the full trace.

    Raises:
        DivergedError: when an iterate becomes non-finite or exceeds the
            divergence bound; the partial trace is attached.
    """
    mcfg = cfg.merit
    tau, l = mcfg.tau, mcfg.l
    M, q = problem.num_objectives, problem.dim
    log_m = tau * np.log(M)
    x = cfg.x0 if cfg.x0 is not None else initial_point(cfg.init, q, cfg.seed)
    x = problem.project(np.asarray(x, dtype=float))
    if x.shape != (q,):
        raise InvalidInputError(f"initial point has shape {x.shape}, expected ({q},)")
    beta = cfg.beta if cfg.beta is not None else inner_step(mcfg, problem, x)
    feas = problem.feasible_set
    state_x = OracleState.fresh(q)
    state_y = OracleState.fresh(q)
    y = x.copy()
    trace = SolveTrace("foops", extras={"beta": beta, "alpha": cfg.alpha})
    start = time.perf_counter()

    t = 0
    while True:
        K = cfg.K(t)
        y, iters, residual = kernels.inner_loop(problem, x, y, l, tau, beta, K, 0.0, cfg.oracle_y, state_y)
        fx = problem.F(x)
        h, pi = _h_and_weights(problem, x, fx, y, l, tau)
        vt = log_m - h
        grad_v = pi @ problem.jac_F(x) - l * (x - y)
        gamma = cfg.penalty.gamma(t)
        dx = problem.grad_f0(x) + gamma * penalty_weight(cfg.penalty.theta, vt) * grad_v
        mapped = feas.project(x - cfg.alpha * dx) if np.all(np.isfinite(dx)) else dx
        gm = float(np.linalg.norm(x - mapped)) / cfg.alpha
        p = float(np.sign(vt) * abs(vt) ** cfg.penalty.theta)
        trace.append(TraceRow(t, x.copy(), fx, float(problem.f0(x)), -h, vt, p, gamma, gm, iters, residual))

        if not (np.isfinite(gm) and np.isfinite(h)):
            trace.status = "diverged"
            trace.wall_time = time.perf_counter() - start
            raise DivergedError(f"non-finite quantities at iteration {t}", trace)
        if gm * gm <= cfg.eps_stop:
            trace.status = "inner_warning" if residual > np.sqrt(cfg.eps_stop) else "converged"
            break
        if t >= cfg.T_max:
            trace.status = "max_iter"
            break
        x = advance(cfg.oracle_x, feas.lower, feas.upper, x, dx, cfg.alpha, state_x)
        if not np.all(np.isfinite(x)) or np.linalg.norm(x) > DIVERGENCE_BOUND:
            trace.status = "diverged"
            trace.wall_time = time.perf_counter() - start
            raise DivergedError(f"iterate left the bounded region at iteration {t + 1}", trace)
        t += 1

    trace.wall_time = time.perf_counter() - start
    if cfg.certify:
        trace.extras.update(certified_metrics(problem, mcfg, trace.x_final, y))
    return trace


def certified_metrics(problem: MOProblem, mcfg: MeritConfig, x, y_init=None) -> dict:
    """Merit gap at ``x`` with a tight inner solve, independent of the run's inner budget."""
    tight = MeritConfig(l=mcfg.l, tau=mcfg.tau, inner_tol=1e-10, inner_max_iter=200_000)
    ev = merit_eval(tight, problem, x, y_init)
    return {
        "certified_merit_gap": float(merit_gap(ev, tight.tau, problem.num_objectives)),
        "certified_inner_residual": float(ev.inner_residual),
    }


def stationarity_measure(problem: MOProblem, cfg: SolverConfig, x, gamma: float, y_certified=None,
                         inner_tol: float = 1e-10) -> float:
    """``||x - Proj(x - alpha grad phi_gamma(x))|| / alpha`` with a certified merit gradient."""
    x = np.asarray(x, dtype=float)
    mcfg = MeritConfig(l=cfg.merit.l, tau=cfg.merit.tau, inner_tol=inner_tol,
                       inner_max_iter=max(cfg.merit.inner_max_iter, 200_000))
    ev = merit_eval(mcfg, problem, x, y_certified)
    grad = problem.grad_f0(x) + gamma * penalty_grad_contrib(cfg.penalty, ev, mcfg.tau, problem.num_objectives)
    return float(np.linalg.norm(x - problem.project(x - cfg.alpha * grad))) / cfg.alpha


def running_average(values) -> np.ndarray:
    """``(1/T) sum_{t < T} values_t`` for every prefix length ``T``."""
    values = np.asarray(values, dtype=float)
    return np.cumsum(values) / np.arange(1, values.size + 1)


__all__ = [
    "KSchedule",
    "SolverConfig",
    "initial_point",
    "solve",
    "stationarity_measure",
    "certified_metrics",
    "running_average",
    "penalty_value",
]
