"""Smoothed merit function for weak Pareto optimality.

For ``l >= 0`` and ``tau > 0``

    h(x, y) = tau * log(sum_m exp((f_m(y) - f_m(x)) / tau)) + l/2 ||x - y||^2
    v(x)    = -min_{y in X} h(x, y)

``v(x) + tau log M`` is non-negative and small exactly near weakly Pareto
optimal points.  Its gradient only needs the inner minimizer ``y*``:

    grad v(x) = sum_m pi_m grad f_m(x) - l (x - y*),

with ``pi`` the softmax of ``(f_m(y*) - f_m(x)) / tau``.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np

from foops import kernels
from foops.errors import InvalidInputError
from foops.kernels import lse_softmax
from foops.oracles import OracleKind, OracleState
from foops.problems import MOProblem

MIN_TAU = 1e-6


class InnerSolveWarning(UserWarning):
    """The inner minimization may be inexact (budget hit or weak convexity)."""


@dataclass(frozen=True)
class MeritConfig:
    """Smoothing parameters and inner-solve controls.

    ``beta=None`` picks ``1 / (l + L_F + D^2 / (4 tau))``, where ``L_F`` bounds
    the objective curvature and ``D`` the spread of objective gradients; the
    last term bounds the curvature the log-sum-exp adds.
    """

    l: float = 1.0
    tau: float = 0.01
    inner_tol: float = 1e-8
    inner_max_iter: int = 20_000
    beta: float | None = None
    oracle: OracleKind = OracleKind()

    def __post_init__(self):
        if not self.tau >= MIN_TAU:
            raise InvalidInputError(f"tau must be at least {MIN_TAU}, got {self.tau}")
        if not self.l >= 0:
            raise InvalidInputError("l must be non-negative")
        if not self.inner_tol > 0:
            raise InvalidInputError("inner_tol must be positive")
        if self.inner_max_iter < 1:
            raise InvalidInputError("inner_max_iter must be positive")
        if self.beta is not None and not self.beta > 0:
            raise InvalidInputError("beta must be positive")


@dataclass(frozen=True)
class MeritEval:
    value: float
    y_star: np.ndarray
    pi: np.ndarray
    grad: np.ndarray
    inner_iters: int
    inner_residual: float
    converged: bool
    beta: float


def merit_gap(ev: MeritEval, tau: float, num_objectives: int) -> float:
    """``v + tau log M``: zero at the global minimum of the merit."""
    return ev.value + tau * np.log(num_objectives)


# --------------------------------------------------------------------------
# h and its gradients


def _weights(cfg: MeritConfig, problem: MOProblem, x, y) -> tuple[float, np.ndarray]:
    lse, pi = lse_softmax((problem.F(y) - problem.F(x)) / cfg.tau)
    return cfg.tau * lse, pi


def h_value(cfg: MeritConfig, problem: MOProblem, x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lse, _ = _weights(cfg, problem, x, y)
    d = x - y
    return lse + 0.5 * cfg.l * float(d @ d)


def softmax_weights(cfg: MeritConfig, problem: MOProblem, x, y) -> np.ndarray:
    return _weights(cfg, problem, np.asarray(x, float), np.asarray(y, float))[1]


def h_grad_y(cfg: MeritConfig, problem: MOProblem, x, y) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    pi = softmax_weights(cfg, problem, x, y)
    return pi @ problem.jac_F(y) + cfg.l * (y - x)


def h_grad_x(cfg: MeritConfig, problem: MOProblem, x, y) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    pi = softmax_weights(cfg, problem, x, y)
    return -(pi @ problem.jac_F(x)) - cfg.l * (y - x)


# --------------------------------------------------------------------------
# step size and smoothness constants


def estimate_constants(problem: MOProblem, center, radius: float = 1.0, n_points: int = 16,
                       power_iters: int = 20, seed: int = 0) -> tuple[float, float]:
    """Sampled estimates of the objective smoothness and gradient spread.

    Curvature comes from power iteration on finite-difference Hessian-vector
    products of every objective at points drawn around ``center``.
    """
    rng = np.random.default_rng(seed)
    center = np.asarray(center, dtype=float)
    q = problem.dim
    smooth = 0.0
    spread = 0.0
    for _ in range(n_points):
        z = problem.project(center + radius * rng.uniform(-1.0, 1.0, q))
        J = problem.jac_F(z)
        for a, b in itertools.combinations(range(problem.num_objectives), 2):
            spread = max(spread, float(np.linalg.norm(J[a] - J[b])))
        eps = 1e-5 * (1.0 + float(np.linalg.norm(z)))
        for m in range(problem.num_objectives):
            v = rng.normal(size=q)
            v /= np.linalg.norm(v)
            lam = 0.0
            for _ in range(power_iters):
                hv = (problem.jac_F(z + eps * v)[m] - problem.jac_F(z - eps * v)[m]) / (2 * eps)
                lam = float(np.linalg.norm(hv))
                if lam == 0.0:
                    break
                v = hv / lam
            smooth = max(smooth, lam)
    return smooth, spread


def inner_smoothness(cfg: MeritConfig, problem: MOProblem, x=None) -> float:
    """Upper bound on the curvature of ``y -> h(x, y)``."""
    smooth, spread = problem.smoothness, problem.grad_spread
    if smooth is None or spread is None:
        center = np.zeros(problem.dim) if x is None else x
        est_s, est_d = estimate_constants(problem, center)
        # sampled estimates get a safety factor
        smooth = 2.0 * est_s if smooth is None else smooth
        spread = 2.0 * est_d if spread is None else spread
    return cfg.l + smooth + spread**2 / (4.0 * cfg.tau)


def inner_strong_convexity(cfg: MeritConfig, problem: MOProblem) -> float | None:
    """``l - rho`` when the weak-convexity modulus ``rho`` is known, else ``None``."""
    if problem.weak_convexity is None:
        return None
    return cfg.l - problem.weak_convexity


def inner_step(cfg: MeritConfig, problem: MOProblem, x=None) -> float:
    if cfg.beta is not None:
        return cfg.beta
    return 1.0 / inner_smoothness(cfg, problem, x)


# --------------------------------------------------------------------------
# inner solve and merit evaluation


@dataclass(frozen=True)
class InnerResult:
    y: np.ndarray
    iters: int
    residual: float
    converged: bool


def inner_solve(cfg: MeritConfig, problem: MOProblem, x, y_init=None, oracle: OracleKind | None = None,
                beta: float | None = None, max_iter: int | None = None, tol: float | None = None,
                state: OracleState | None = None) -> InnerResult:
    """Minimize ``h(x, .)`` over the feasible set.

    Iterates the oracle (projected gradient by default) from ``y_init``
    (``x`` when omitted) until the gradient-mapping norm
    ``||y - Proj(y - beta grad_y h)|| / beta`` is at most ``tol`` or the
    iteration budget runs out.  A budget hit emits
    :class:`InnerSolveWarning` and returns the last iterate.
    """
    x = np.asarray(x, dtype=float)
    y = problem.project(x if y_init is None else y_init)
    oracle = cfg.oracle if oracle is None else oracle
    beta = inner_step(cfg, problem, x) if beta is None else beta
    max_iter = cfg.inner_max_iter if max_iter is None else max_iter
    tol = cfg.inner_tol if tol is None else tol
    mu = inner_strong_convexity(cfg, problem)
    if mu is not None and mu <= 0:
        warnings.warn(
            f"l={cfg.l} does not dominate the weak convexity {problem.weak_convexity:.4g}; "
            "inner minimizer may not be unique",
            InnerSolveWarning,
            stacklevel=2,
        )
    state = OracleState.fresh(problem.dim) if state is None else state
    y, iters, residual = kernels.inner_loop(problem, x, y, cfg.l, cfg.tau, beta, max_iter, tol, oracle, state)
    converged = residual <= tol
    if not converged and tol > 0:
        warnings.warn(
            f"inner solve stopped after {iters} iterations with residual {residual:.3e} > {tol:.1e}",
            InnerSolveWarning,
            stacklevel=2,
        )
    return InnerResult(y, iters, residual, converged)


def merit_from_inner(cfg: MeritConfig, problem: MOProblem, x, inner: InnerResult, beta: float) -> MeritEval:
    """Assemble the merit evaluation from an (approximate) inner minimizer."""
    x = np.asarray(x, dtype=float)
    y = inner.y
    fx = problem.F(x)
    lse, pi = lse_softmax((problem.F(y) - fx) / cfg.tau)
    d = x - y
    value = -(cfg.tau * lse + 0.5 * cfg.l * float(d @ d))
    grad = pi @ problem.jac_F(x) - cfg.l * d
    return MeritEval(value, y, pi, grad, inner.iters, inner.residual, inner.converged, beta)


def merit_eval(cfg: MeritConfig, problem: MOProblem, x, y_init=None) -> MeritEval:
    """Evaluate ``v(x)``, ``y*``, ``pi`` and ``grad v(x)`` with a certified inner solve."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("merit evaluation at a non-finite point")
    beta = inner_step(cfg, problem, x)
    inner = inner_solve(cfg, problem, x, y_init, beta=beta)
    return merit_from_inner(cfg, problem, x, inner, beta)


def merit_curve(cfg: MeritConfig, problem: MOProblem, xs) -> list[MeritEval]:
    """Merit evaluations along a sequence of points, warm-starting each inner solve."""
    out = []
    y = None
    for x in xs:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        ev = merit_eval(cfg, problem, x, y)
        out.append(ev)
        y = ev.y_star
    return out


# --------------------------------------------------------------------------
# brute-force merit oracle


@dataclass(frozen=True)
class GridSpec:
    """Tensor grid ``linspace(low, high, n)`` in every coordinate."""

    low: float
    high: float
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise InvalidInputError("empty grid")
        if not self.high >= self.low:
            raise InvalidInputError("grid needs high >= low")

    @property
    def spacing(self) -> float:
        return 0.0 if self.n == 1 else (self.high - self.low) / (self.n - 1)

    def points(self, dim: int) -> np.ndarray:
        """Grid points as an array of shape ``(n**dim, dim)``."""
        axis = np.linspace(self.low, self.high, self.n)
        mesh = np.meshgrid(*([axis] * dim), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


def objective_table(problem: MOProblem, pts: np.ndarray) -> np.ndarray:
    return np.array([problem.F(p) for p in pts])


def brute_u_bar(problem: MOProblem, x, grid: GridSpec, table: np.ndarray | None = None) -> float:
    """``max_y min_m (f_m(x) - f_m(y))`` over grid points ``y`` (and ``y = x``).

    Only meant for low-dimensional problems; pass a precomputed
    ``objective_table`` when calling repeatedly with the same grid.
    """
    if problem.dim > 2:
        raise InvalidInputError("grid merit oracle supports at most two variables")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if table is None:
        table = objective_table(problem, grid.points(problem.dim))
    if table.shape[0] == 0:
        raise InvalidInputError("empty grid")
    gains = np.min(problem.F(x)[None, :] - table, axis=1)
    return max(0.0, float(np.max(gains)))
