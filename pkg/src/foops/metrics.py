"""Pareto-quality metrics for solver outputs."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from foops.errors import InvalidInputError, UnsupportedConfigurationError, UnsupportedDimensionError
from foops.merit import GridSpec, objective_table
from foops.problems import MOProblem, preference_violation  # noqa: F401  (re-export)


@dataclass(frozen=True)
class FrontSample:
    """Objective vectors ``points`` (shape ``(n, M)``) and the reference point ``nadir``.

    Points exceeding the nadir in some coordinate add no volume; ``outside``
    flags them.
    """

    points: np.ndarray
    nadir: np.ndarray

    def __post_init__(self):
        nadir = np.array(self.nadir, dtype=float).ravel()
        pts = np.array(self.points, dtype=float).reshape(-1, nadir.size)
        if not (np.all(np.isfinite(pts)) and np.all(np.isfinite(nadir))):
            raise InvalidInputError("front sample must be finite")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "nadir", nadir)

    @property
    def num_objectives(self) -> int:
        return self.nadir.size

    @property
    def outside(self) -> np.ndarray:
        """Boolean mask of points that exceed the nadir somewhere."""
        return np.any(self.points > self.nadir, axis=1)

    def inside_points(self) -> np.ndarray:
        return self.points[~self.outside]


def hypervolume_2d(sample: FrontSample) -> float:
    """Exact dominated area for two objectives by a sweep over sorted points."""
    if sample.num_objectives != 2:
        raise UnsupportedDimensionError("exact hypervolume is two-objective only; use hypervolume_mc")
    pts = sample.inside_points()
    if pts.shape[0] == 0:
        return 0.0
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]
    r1, r2 = sample.nadir
    area = 0.0
    level = r2
    for a, b in pts:
        if b < level:
            area += (r1 - a) * (level - b)
            level = b
    return float(area)


def hypervolume_mc(sample: FrontSample, n_samples: int = 100_000, seed: int = 0) -> tuple[float, float]:
    """Monte Carlo hypervolume as ``(estimate, standard_error)``.

    Samples uniformly in the box between the componentwise minimum of the
    points and the nadir.
    """
    if n_samples < 1000:
        raise InvalidInputError("n_samples must be at least 1000")
    pts = sample.inside_points()
    if pts.shape[0] == 0:
        return 0.0, 0.0
    low = pts.min(axis=0)
    width = sample.nadir - low
    box = float(np.prod(width))
    if box == 0.0:
        return 0.0, 0.0
    rng = np.random.default_rng(seed)
    hit = np.zeros(n_samples, dtype=bool)
    chunk = 200_000
    for s in range(0, n_samples, chunk):
        n = min(chunk, n_samples - s)
        z = low + width * rng.random((n, sample.num_objectives))
        dom = np.zeros(n, dtype=bool)
        for p in pts:
            dom |= np.all(p <= z, axis=1)
        hit[s:s + n] = dom
    frac = hit.mean()
    return float(box * frac), box * float(np.sqrt(frac * (1.0 - frac) / n_samples))


def _simplex_projection(v: np.ndarray) -> np.ndarray:
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, v.size + 1)
    rho = k[u - css / k > 0][-1]
    return np.maximum(v - css[rho - 1] / rho, 0.0)


def min_norm_combination(J: np.ndarray, iters: int = 5000, tol: float = 1e-14) -> np.ndarray:
    """Weights ``lam`` on the simplex minimizing ``||J^T lam||`` (rows of ``J`` are gradients)."""
    J = np.asarray(J, dtype=float)
    m = J.shape[0]
    if m == 1:
        return np.ones(1)
    if m == 2:
        d = J[0] - J[1]
        dd = float(d @ d)
        # ||lam1 d + J1||^2 is a quadratic in lam1
        lam1 = 0.5 if dd == 0.0 else float(np.clip(-(J[1] @ d) / dd, 0.0, 1.0))
        return np.array([lam1, 1.0 - lam1])
    G = J @ J.T
    step = 1.0 / max(np.linalg.eigvalsh(G)[-1], 1e-300)
    lam = np.full(m, 1.0 / m)
    for _ in range(iters):
        nxt = _simplex_projection(lam - step * (G @ lam))
        if np.linalg.norm(nxt - lam) <= tol:
            return nxt
        lam = nxt
    return lam


def pareto_stationarity_residual(problem: MOProblem, x) -> float:
    """``min over the simplex of ||grad F(x)^T lam||``; zero iff ``x`` is Pareto stationary.

    Only unconstrained problems are supported.
    """
    if problem.feasible_set.is_box:
        raise UnsupportedConfigurationError("stationarity residual is implemented for unconstrained problems")
    x = np.asarray(x, dtype=float)
    J = problem.jac_F(x)
    lam = min_norm_combination(J)
    return float(np.linalg.norm(lam @ J))


def eps_weak_pareto_certify(problem: MOProblem, x, grid: GridSpec, eps: float,
                            lipschitz: float | None = None, table: np.ndarray | None = None) -> bool:
    """True iff no grid point improves every objective by more than ``eps``.

    When ``lipschitz`` (a bound on the objective Lipschitz constants) is given
    and the grid slack ``spacing * lipschitz`` exceeds ``eps``, a warning is
    raised since the grid cannot resolve that tolerance.
    """
    if problem.dim > 2:
        raise InvalidInputError("grid certification supports at most two variables")
    if lipschitz is not None and grid.spacing * lipschitz > eps:
        warnings.warn(
            f"grid slack {grid.spacing * lipschitz:.3g} exceeds eps={eps:.3g}",
            UserWarning,
            stacklevel=2,
        )
    if table is None:
        table = objective_table(problem, grid.points(problem.dim))
    fx = problem.F(np.atleast_1d(np.asarray(x, dtype=float)))
    better = np.all(table < fx - eps, axis=1)
    return not bool(np.any(better))
