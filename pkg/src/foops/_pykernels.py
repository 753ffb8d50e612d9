"""Pure-Python inner loop; the fallback when the compiled kernel is absent.

Also serves every problem without a native :class:`~foops.problems.WellSpec`,
since arbitrary Python callables cannot be fused into the compiled loop.
"""

from __future__ import annotations

import numpy as np

from foops.oracles import OracleKind, OracleState, advance


def lse_softmax(a: np.ndarray) -> tuple[float, np.ndarray]:
    """Max-shifted ``log(sum(exp(a)))`` and ``softmax(a)``."""
    amax = float(np.max(a))
    e = np.exp(a - amax)
    s = float(np.sum(e))
    return amax + np.log(s), e / s


def inner_loop(F, jac_F, x, y, fx, l, tau, beta, max_iter, tol,
               kind: OracleKind, lower, upper, state: OracleState):
    """Oracle steps on ``y -> h_{l,tau}(x, y)``.

    Stops after ``max_iter`` updates, or earlier once the projected
    gradient-mapping norm drops to ``tol`` (``tol <= 0`` disables the test).

    Returns:
        ``(y, iters, residual)``, the residual measured at the returned ``y``.
    """
    it = 0
    while True:
        _, pi = lse_softmax((F(y) - fx) / tau)
        g = pi @ jac_F(y) + l * (y - x)
        trial = y - beta * g
        if lower is not None:
            trial = np.minimum(np.maximum(trial, lower), upper)
        res = float(np.linalg.norm(y - trial)) / beta
        if it >= max_iter or (tol > 0.0 and res <= tol):
            return y, it, res
        y = advance(kind, lower, upper, y, g, beta, state)
        it += 1
