"""Penalty objective ``phi_gamma(x) = f0(x) + gamma * p(x)``.

``p(x) = (v(x) + tau log M) ** theta`` measures distance from weak Pareto
optimality through the smoothed merit.  Inexact inner solves can leave
``v + tau log M`` marginally negative, so powers are taken as signed powers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from foops.errors import InvalidInputError, UnsupportedConfigurationError
from foops.merit import MeritConfig, MeritEval, merit_eval
from foops.problems import MOProblem


@dataclass(frozen=True)
class PenaltyConfig:
    """Exponent ``theta`` and the schedule ``gamma_t = min(gamma0 + gamma_step * t, gamma_max)``."""

    theta: float = 1.0
    gamma0: float = 0.05
    gamma_step: float = 0.01
    gamma_max: float = 1.5

    def __post_init__(self):
        if self.theta < 1.0:
            raise UnsupportedConfigurationError("penalty exponent theta < 1 is not supported")
        if not self.gamma0 > 0:
            raise InvalidInputError("gamma0 must be positive")
        if self.gamma_step < 0:
            raise InvalidInputError("gamma_step must be non-negative")
        if self.gamma_max < self.gamma0:
            raise InvalidInputError("gamma_max must be at least gamma0")

    def gamma(self, t: int) -> float:
        return min(self.gamma0 + self.gamma_step * t, self.gamma_max)


def _shifted(merit: MeritEval, tau: float, num_objectives: int) -> float:
    return merit.value + tau * np.log(num_objectives)


def penalty_value(pcfg: PenaltyConfig, merit: MeritEval, tau: float, num_objectives: int) -> float:
    """``sign(v_t) |v_t| ** theta`` with ``v_t = v + tau log M``."""
    vt = _shifted(merit, tau, num_objectives)
    return float(np.sign(vt) * abs(vt) ** pcfg.theta)


def penalty_weight(theta: float, vt: float) -> float:
    """``theta * sign(v_t) * |v_t| ** (theta - 1)``, the chain-rule factor on ``grad v``."""
    if theta < 1.0:
        raise UnsupportedConfigurationError("penalty exponent theta < 1 is not supported")
    return float(theta * np.sign(vt) * abs(vt) ** (theta - 1.0))


def penalty_grad_contrib(pcfg: PenaltyConfig, merit: MeritEval, tau: float, num_objectives: int) -> np.ndarray:
    """Penalty gradient without the ``gamma`` factor.

    Uses ``grad v = -grad_x h(x, y*)``, so this is the negative of the
    ``grad_x h`` term in the outer update direction.
    """
    vt = _shifted(merit, tau, num_objectives)
    return penalty_weight(pcfg.theta, vt) * merit.grad


def phi_gamma(pcfg: PenaltyConfig, problem: MOProblem, mcfg: MeritConfig, x, gamma: float,
              y_init=None) -> tuple[float, np.ndarray, MeritEval]:
    """Value and gradient of ``f0 + gamma * p`` at ``x``, plus the merit evaluation."""
    x = np.asarray(x, dtype=float)
    ev = merit_eval(mcfg, problem, x, y_init)
    m = problem.num_objectives
    value = problem.f0(x) + gamma * penalty_value(pcfg, ev, mcfg.tau, m)
    grad = problem.grad_f0(x) + gamma * penalty_grad_contrib(pcfg, ev, mcfg.tau, m)
    return float(value), grad, ev
