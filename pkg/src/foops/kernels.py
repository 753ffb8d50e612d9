"""Backend selection for the inner-loop kernel.

The compiled extension ``foops._ckernels`` is used when it imports and the
environment variable ``FOOPS_PURE_PYTHON`` is unset; otherwise the
pure-Python loop in :mod:`foops._pykernels` runs.  Problems without a native
well description always take the Python path.
"""

from __future__ import annotations

import os
from contextlib import contextmanager

import numpy as np

from foops import _pykernels
from foops._pykernels import lse_softmax  # noqa: F401  (re-export)
from foops.oracles import OracleKind, OracleState

try:
    from foops import _ckernels
except ImportError:  # extension not built
    _ckernels = None

AVAILABLE = ("cython", "python") if _ckernels is not None else ("python",)
_backend = "python" if (_ckernels is None or os.environ.get("FOOPS_PURE_PYTHON")) else "cython"


def backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    global _backend
    if name not in AVAILABLE:
        raise ValueError(f"backend {name!r} not available (have {AVAILABLE})")
    _backend = name


@contextmanager
def use_backend(name: str):
    previous = _backend
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def inner_loop(problem, x, y, l, tau, beta, max_iter, tol, kind: OracleKind, state: OracleState):
    """Run the inner y-loop of ``h_{l,tau}(x, .)`` from ``y``.

    ``state`` is updated in place.  Returns ``(y, iters, residual)``.
    """
    feas = problem.feasible_set
    x = np.ascontiguousarray(x, dtype=float)
    y = np.array(y, dtype=float)
    if _backend == "cython" and problem.well is not None:
        well = problem.well
        s1 = np.ascontiguousarray(state.first, dtype=float)
        s2 = np.ascontiguousarray(state.second, dtype=float)
        c1, c2, c3 = kind.kernel_params()
        lower = feas.lower if feas.is_box else x
        upper = feas.upper if feas.is_box else x
        it, res, count = _ckernels.inner_loop(
            well.family, np.ascontiguousarray(well.centers), well.offset, well.power,
            x, y, float(l), float(tau), float(beta), int(max_iter), float(tol),
            kind.code, c1, c2, c3, s1, s2, state.count,
            feas.is_box, np.ascontiguousarray(lower), np.ascontiguousarray(upper),
        )
        state.first, state.second, state.count = s1, s2, count
        return y, it, res
    fx = problem.F(x)
    return _pykernels.inner_loop(
        problem.F, problem.jac_F, x, y, fx, l, tau, beta, max_iter, tol,
        kind, feas.lower, feas.upper, state,
    )
