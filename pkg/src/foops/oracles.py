"""First-order update oracles ``U(w, dw; alpha, t)``.

All oracles end with a projection onto the feasible set.  Momentum-type
oracles carry an :class:`OracleState` that the caller owns and threads
through successive calls.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from foops.errors import InvalidInputError
from foops.problems import FeasibleSet

# integer codes shared with the compiled kernel
PGD, MOMENTUM, NESTEROV, ADAM = 0, 1, 2, 3
_CODES = {"pgd": PGD, "momentum": MOMENTUM, "nesterov": NESTEROV, "adam": ADAM}


@dataclass(frozen=True)
class OracleKind:
    """Which update rule to apply and its coefficients.

    ``coef`` is the heavy-ball / lookahead coefficient for momentum and
    Nesterov; ``beta1``, ``beta2``, ``eps`` parametrize Adam.
    """

    variant: str = "pgd"
    coef: float = 0.0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.variant not in _CODES:
            raise InvalidInputError(f"unknown oracle {self.variant!r}")
        if self.variant in ("momentum", "nesterov") and not 0.0 <= self.coef < 1.0:
            raise InvalidInputError("momentum coefficient must lie in [0, 1)")
        if self.variant == "adam":
            if not (0.0 < self.beta1 < 1.0 and 0.0 < self.beta2 < 1.0):
                raise InvalidInputError("adam betas must lie in (0, 1)")
            if self.eps <= 0:
                raise InvalidInputError("adam eps must be positive")

    @classmethod
    def pgd(cls) -> OracleKind:
        return cls("pgd")

    @classmethod
    def momentum(cls, coef: float = 0.9) -> OracleKind:
        return cls("momentum", coef=coef)

    @classmethod
    def nesterov(cls, coef: float = 0.9) -> OracleKind:
        return cls("nesterov", coef=coef)

    @classmethod
    def adam(cls, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> OracleKind:
        return cls("adam", beta1=beta1, beta2=beta2, eps=eps)

    @property
    def code(self) -> int:
        return _CODES[self.variant]

    def kernel_params(self) -> tuple[float, float, float]:
        if self.variant == "adam":
            return self.beta1, self.beta2, self.eps
        return self.coef, 0.0, 0.0

    def to_dict(self) -> dict:
        if self.variant == "adam":
            return {"variant": "adam", "beta1": self.beta1, "beta2": self.beta2, "eps": self.eps}
        if self.variant == "pgd":
            return {"variant": "pgd"}
        return {"variant": self.variant, "coef": self.coef}


@dataclass
class OracleState:
    """Mutable buffers of a stateful oracle.

    ``count`` is the number of updates applied so far.  ``first`` holds the
    momentum velocity, the previous Nesterov point, or Adam's first moment;
    ``second`` holds Adam's second moment.
    """

    count: int
    first: np.ndarray
    second: np.ndarray

    @classmethod
    def fresh(cls, dim: int) -> OracleState:
        return cls(0, np.zeros(dim), np.zeros(dim))

    def copy(self) -> OracleState:
        return OracleState(self.count, self.first.copy(), self.second.copy())


def advance(kind: OracleKind, lower, upper, w: np.ndarray, delta_w: np.ndarray, alpha: float,
            state: OracleState) -> np.ndarray:
    """Unchecked oracle step: mutates ``state`` and returns the clamped point.

    ``lower``/``upper`` are the box bounds or ``None`` for R^q.  Non-finite
    values propagate instead of raising; callers own the divergence check.
    """
    state.count += 1
    variant = kind.variant
    if variant == "pgd":
        step = w - alpha * delta_w
    elif variant == "momentum":
        state.first = kind.coef * state.first + delta_w
        step = w - alpha * state.first
    elif variant == "nesterov":
        prev = w if state.count == 1 else state.first
        v_next = w - alpha * delta_w
        step = v_next + kind.coef * (v_next - prev)
        state.first = v_next
    else:
        state.first = kind.beta1 * state.first + (1.0 - kind.beta1) * delta_w
        state.second = kind.beta2 * state.second + (1.0 - kind.beta2) * delta_w**2
        m_hat = state.first / (1.0 - kind.beta1**state.count)
        v_hat = state.second / (1.0 - kind.beta2**state.count)
        step = w - alpha * m_hat / (np.sqrt(v_hat) + kind.eps)
    if lower is None:
        return step
    return np.minimum(np.maximum(step, lower), upper)


def oracle_update(
    kind: OracleKind,
    feasible: FeasibleSet,
    w: np.ndarray,
    delta_w: np.ndarray,
    alpha: float,
    state: OracleState | None = None,
) -> tuple[np.ndarray, OracleState]:
    """One oracle step; returns the new point and a new state.

    Raises:
        InvalidInputError: on dimension mismatches between ``w``, ``delta_w``
            and the state buffers, or non-finite input.
    """
    w = np.asarray(w, dtype=float)
    delta_w = np.asarray(delta_w, dtype=float)
    if w.shape != delta_w.shape or w.ndim != 1:
        raise InvalidInputError(f"shape mismatch: w {w.shape}, delta_w {delta_w.shape}")
    if feasible.is_box and feasible.lower.shape != w.shape:
        raise InvalidInputError("point dimension does not match the feasible box")
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(delta_w))):
        raise InvalidInputError("oracle input must be finite")
    if state is None:
        state = OracleState.fresh(w.size)
    elif state.first.shape != w.shape or state.second.shape != w.shape:
        raise InvalidInputError("oracle state does not match the point dimension")
    new = state.copy()
    w_next = advance(kind, feasible.lower, feasible.upper, w, delta_w, alpha, new)
    return w_next, new
