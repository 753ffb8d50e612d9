"""Multi-objective problems and preference constructions.

A problem bundles a vector objective ``F: R^q -> R^M`` with its Jacobian, a
scalar preference objective ``f0`` with its gradient, and a closed convex
feasible set.  Gradients are analytic callables supplied by the user; see
:mod:`foops.gradcheck` for the finite-difference guard.

The bundled test problems all belong to the *well* family

    f_m(x) = phi(||x - c_m||^2)

for a radial profile ``phi`` and centers ``c_m``.  Problems of that family
carry a :class:`WellSpec`, which lets the compiled kernel run the inner loop
without calling back into Python.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field, replace

import numpy as np

from foops.errors import InvalidInputError, InvalidPreferenceError

Array = np.ndarray

# radial profile codes shared with the compiled kernel
WELL_EXP = 0  # phi(d) = 1 - exp(-d)
WELL_QUAD = 1  # phi(d) = d
WELL_POW = 2  # phi(d) = (d + offset) ** power


@dataclass(frozen=True)
class FeasibleSet:
    """Either all of R^q (both bounds ``None``) or a box ``[lower, upper]``."""

    lower: Array | None = None
    upper: Array | None = None

    def __post_init__(self):
        if (self.lower is None) != (self.upper is None):
            raise InvalidInputError("box needs both lower and upper bounds")
        if self.lower is not None:
            lo = np.array(self.lower, dtype=float)
            hi = np.array(self.upper, dtype=float)
            if lo.shape != hi.shape or lo.ndim != 1:
                raise InvalidInputError("box bounds must be 1-D arrays of equal length")
            if np.any(lo > hi):
                raise InvalidInputError("box requires lower <= upper componentwise")
            lo.setflags(write=False)
            hi.setflags(write=False)
            object.__setattr__(self, "lower", lo)
            object.__setattr__(self, "upper", hi)

    @classmethod
    def all_space(cls) -> FeasibleSet:
        return cls()

    @classmethod
    def box(cls, lower, upper) -> FeasibleSet:
        return cls(np.asarray(lower, dtype=float), np.asarray(upper, dtype=float))

    @property
    def kind(self) -> str:
        return "all_space" if self.lower is None else "box"

    @property
    def is_box(self) -> bool:
        return self.lower is not None

    def project(self, x: Array) -> Array:
        return project(self, x)

    def contains(self, x: Array, tol: float = 0.0) -> bool:
        if self.lower is None:
            return bool(np.all(np.isfinite(x)))
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))


def project(feasible: FeasibleSet, x) -> Array:
    """Euclidean projection onto ``feasible``.

    Identity on R^q, a componentwise clamp on boxes.

    Raises:
        InvalidInputError: if ``x`` has non-finite entries or the wrong length.
    """
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("cannot project a non-finite point")
    if feasible.lower is None:
        return x.copy()
    if x.shape != feasible.lower.shape:
        raise InvalidInputError(
            f"point of shape {x.shape} does not match box of shape {feasible.lower.shape}"
        )
    return np.minimum(np.maximum(x, feasible.lower), feasible.upper)


@dataclass(frozen=True)
class WellSpec:
    """Native description of a well-family objective for the compiled kernel."""

    family: int
    centers: Array  # (M, q)
    offset: float = 0.0
    power: float = 1.0

    def profile(self, d: Array) -> tuple[Array, Array, Array]:
        """Return ``phi(d)``, ``phi'(d)`` and ``phi''(d)``."""
        if self.family == WELL_EXP:
            e = np.exp(-d)
            return 1.0 - e, e, -e
        if self.family == WELL_QUAD:
            return d, np.ones_like(d), np.zeros_like(d)
        if self.family == WELL_POW:
            b = d + self.offset
            p = self.power
            return b**p, p * b ** (p - 1.0), p * (p - 1.0) * b ** (p - 2.0)
        raise InvalidInputError(f"unknown well family {self.family}")

    def values(self, x: Array) -> Array:
        d = np.sum((x - self.centers) ** 2, axis=1)
        return self.profile(d)[0]

    def jacobian(self, x: Array) -> Array:
        u = x - self.centers
        d = np.sum(u * u, axis=1)
        return 2.0 * self.profile(d)[1][:, None] * u

    def radial_constants(self, radius: float = 50.0, n: int = 200_001) -> tuple[float, float, float]:
        """Curvature constants and gradient bound of one well.

        Along the radial direction the curvature of ``phi(||u||^2)`` is
        ``2 phi' + 4 d phi''``, across it ``2 phi'``; the gradient norm is
        ``2 |phi'| sqrt(d)``.  Scanned on a dense radial grid.
        """
        r = np.linspace(0.0, radius, n)
        d = r * r
        _, d1, d2 = self.profile(d)
        radial = 2.0 * d1 + 4.0 * d * d2
        across = 2.0 * d1
        smooth = float(max(np.max(np.abs(radial)), np.max(np.abs(across))))
        weak = float(max(0.0, -min(np.min(radial), np.min(across))))
        gbound = float(np.max(2.0 * np.abs(d1) * r))
        return smooth, weak, gbound


def _zero_f0(x: Array) -> float:
    return 0.0


@dataclass(frozen=True)
class MOProblem:
    """A vector objective with a preference objective on a feasible set.

    Attributes:
        dim: number of decision variables ``q``.
        num_objectives: number of objectives ``M`` (at least 2).
        F: ``x -> R^M``.
        jac_F: ``x -> (M, q)`` Jacobian, rows are objective gradients.
        f0, grad_f0: preference objective and its gradient.
        feasible_set: where ``x`` lives.
        smoothness: Lipschitz constant of every ``grad f_m`` if known.
        weak_convexity: ``rho >= 0`` with every ``f_m + rho/2 ||x||^2`` convex, if known.
        grad_spread: bound on ``max_{m,n} ||grad f_m - grad f_n||`` if known.
        well: native description for the compiled kernel, if any.
    """

    dim: int
    num_objectives: int
    F: Callable[[Array], Array]
    jac_F: Callable[[Array], Array]
    f0: Callable[[Array], float] = _zero_f0
    grad_f0: Callable[[Array], Array] | None = None
    feasible_set: FeasibleSet = field(default_factory=FeasibleSet)
    name: str = "custom"
    smoothness: float | None = None
    weak_convexity: float | None = None
    grad_spread: float | None = None
    well: WellSpec | None = None

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidInputError("dim must be a positive integer")
        if self.num_objectives < 2:
            raise InvalidInputError("need at least two objectives")
        if self.grad_f0 is None:
            dim = self.dim
            object.__setattr__(self, "grad_f0", lambda x: np.zeros(dim))
        if self.feasible_set.is_box and self.feasible_set.lower.shape != (self.dim,):
            raise InvalidInputError("box dimension does not match problem dimension")

    def project(self, x: Array) -> Array:
        return project(self.feasible_set, x)


# --------------------------------------------------------------------------
# preferences


@dataclass(frozen=True)
class PreferenceSpec:
    """Desired direction ``ray`` (all components > 0) in objective space."""

    ray: Array

    def __post_init__(self):
        r = np.array(self.ray, dtype=float).ravel()
        if r.size < 2:
            raise InvalidPreferenceError("preference ray needs at least two components")
        if not np.all(np.isfinite(r)) or np.any(r <= 0):
            raise InvalidPreferenceError(f"preference ray must be positive, got {r}")
        r.setflags(write=False)
        object.__setattr__(self, "ray", r)

    @classmethod
    def from_angle(cls, angle: float) -> PreferenceSpec:
        """Unit ray at ``angle`` radians from the first objective axis (M = 2)."""
        return cls(np.array([np.cos(angle), np.sin(angle)]))

    @property
    def num_objectives(self) -> int:
        return self.ray.size

    def residual_matrix(self) -> Array:
        """``A`` with ``H(F) = A @ F``; row ``i`` is ``r_{i+1} e_1 - r_1 e_{i+1}``."""
        r = self.ray
        m = r.size
        a = np.zeros((m - 1, m))
        a[:, 0] = r[1:]
        a[np.arange(m - 1), np.arange(1, m)] = -r[0]
        return a


def preference_residual(spec: PreferenceSpec, F_val) -> Array:
    """``H_i = r_{i+1} F_1 - r_1 F_{i+1}`` for ``i = 1..M-1``.

    Vanishes exactly when ``F_val`` is parallel to the ray.
    """
    F_val = np.asarray(F_val, dtype=float)
    if F_val.shape != (spec.num_objectives,):
        raise InvalidInputError(
            f"objective vector of shape {F_val.shape} does not match ray of length {spec.num_objectives}"
        )
    return spec.ray[1:] * F_val[0] - spec.ray[0] * F_val[1:]


def preference_violation(spec: PreferenceSpec, F_val) -> float:
    """Squared norm of :func:`preference_residual`."""
    h = preference_residual(spec, F_val)
    return float(h @ h)


def preference_f0(spec: PreferenceSpec, problem: MOProblem):
    """Build ``f0(x) = ||H(F(x))||^2`` and its gradient via the chain rule."""
    if spec.num_objectives != problem.num_objectives:
        raise InvalidInputError("preference and problem disagree on the number of objectives")
    A = spec.residual_matrix()
    F, jac = problem.F, problem.jac_F

    def f0(x):
        h = A @ F(x)
        return float(h @ h)

    def grad_f0(x):
        h = A @ F(x)
        return 2.0 * (jac(x).T @ (A.T @ h))

    return f0, grad_f0


def with_preference(problem: MOProblem, spec: PreferenceSpec) -> MOProblem:
    """Copy of ``problem`` whose preference objective is ``||H(F(x))||^2``."""
    f0, grad_f0 = preference_f0(spec, problem)
    return replace(problem, f0=f0, grad_f0=grad_f0)


def preference_rays(n: int, low: float = np.pi / 20, high: float = 9 * np.pi / 20) -> list[PreferenceSpec]:
    """``n`` unit rays with angles equally spaced in ``[low, high]``."""
    if n < 1:
        raise InvalidInputError("need at least one ray")
    angles = np.linspace(low, high, n) if n > 1 else np.array([(low + high) / 2])
    return [PreferenceSpec.from_angle(a) for a in angles]


# --------------------------------------------------------------------------
# bundled problems


def make_well_problem(
    well: WellSpec,
    name: str,
    feasible_set: FeasibleSet | None = None,
) -> MOProblem:
    """Wrap a :class:`WellSpec` as an :class:`MOProblem` with analytic constants."""
    centers = np.array(well.centers, dtype=float)
    centers.setflags(write=False)
    well = replace(well, centers=centers)
    m, q = centers.shape
    smooth, weak, gbound = well.radial_constants()
    if well.family == WELL_QUAD:
        diffs = centers[:, None, :] - centers[None, :, :]
        spread = 2.0 * float(np.sqrt(np.max(np.sum(diffs**2, axis=-1))))
    else:
        spread = 2.0 * gbound
    return MOProblem(
        dim=q,
        num_objectives=m,
        F=well.values,
        jac_F=well.jacobian,
        feasible_set=feasible_set or FeasibleSet(),
        name=name,
        smoothness=smooth,
        weak_convexity=weak,
        grad_spread=spread,
        well=well,
    )


def make_example1(q: int = 1, normalized: bool = False) -> tuple[MOProblem, PreferenceSpec]:
    """Two exponential wells ``f_{1,2} = 1 - exp(-||x -+ c||^2)``.

    With ``normalized=False`` the centers are ``+-1_q``.  With
    ``normalized=True`` they are ``+-1_q / sqrt(q)``, which keeps the Pareto
    front independent of ``q`` (both coincide for ``q = 1``).  The attached
    preference objective uses the ray ``(4, 5)``, i.e. ``H = 5 f1 - 4 f2``.
    """
    if q < 1:
        raise InvalidInputError("q must be positive")
    c = np.ones(q) / (np.sqrt(q) if normalized else 1.0)
    well = WellSpec(WELL_EXP, np.stack([c, -c]))
    name = f"example1(q={q}{', normalized' if normalized else ''})"
    problem = make_well_problem(well, name)
    spec = PreferenceSpec(np.array([4.0, 5.0]))
    return with_preference(problem, spec), spec


def make_fig2_problem() -> MOProblem:
    """One-dimensional pair ``f_{1,2} = ((x +- 1/2)^2 + 1/8)^(1/6)``."""
    well = WellSpec(WELL_POW, np.array([[-0.5], [0.5]]), offset=0.125, power=1.0 / 6.0)
    return make_well_problem(well, "fig2")


def make_quadratic_pair() -> MOProblem:
    """``F(x) = ((x - 1)^2, (x + 1)^2)`` on R; Pareto set ``[-1, 1]``."""
    well = WellSpec(WELL_QUAD, np.array([[1.0], [-1.0]]))
    return make_well_problem(well, "quadratic_pair")


def make_example2() -> MOProblem:
    """``F(x) = ((x1 - 1)^2 + x2^2, x1^2 / 2 + x2^2)`` on R^2.

    At ``x = (3, 0)`` the objective gradients are ``(4, 0)`` and ``(3, 0)``,
    so the point is feasible for ``H = 9 f1 - 8 f2`` but not Pareto stationary.
    """

    def F(x):
        return np.array([(x[0] - 1.0) ** 2 + x[1] ** 2, 0.5 * x[0] ** 2 + x[1] ** 2])

    def jac(x):
        return np.array([[2.0 * (x[0] - 1.0), 2.0 * x[1]], [x[0], 2.0 * x[1]]])

    return MOProblem(
        dim=2,
        num_objectives=2,
        F=F,
        jac_F=jac,
        name="example2",
        smoothness=2.0,
        weak_convexity=0.0,
    )


def example1_preferred_point(spec: PreferenceSpec, tol: float = 1e-14) -> float:
    """Point ``x*`` in (-1, 1) of the scalar example1 problem with ``F(x*)`` parallel to ``spec.ray``.

    Bisection on ``H(x) = r2 f1(x) - r1 f2(x)``, which is strictly decreasing on
    the Pareto set ``[-1, 1]``.
    """
    f1 = lambda s: 1.0 - np.exp(-((s - 1.0) ** 2))  # noqa: E731
    f2 = lambda s: 1.0 - np.exp(-((s + 1.0) ** 2))  # noqa: E731
    r1, r2 = spec.ray[0], spec.ray[1]

    def H(s):
        return r2 * f1(s) - r1 * f2(s)

    lo, hi = -1.0, 1.0
    if not H(lo) > 0 > H(hi):
        raise InvalidInputError("preference ray does not cross the Pareto front")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if H(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
