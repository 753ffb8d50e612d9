"""Central finite differences for checking analytic gradients."""

from __future__ import annotations

from collections.abc import Callable

import numpy as np


def fd_step(x: np.ndarray, scale: float = 1e-6) -> float:
    return scale * (1.0 + float(np.linalg.norm(x)))


def fd_gradient(f: Callable[[np.ndarray], float], x, scale: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of a scalar function with step ``scale * (1 + ||x||)``."""
    x = np.asarray(x, dtype=float)
    h = fd_step(x, scale)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g


def fd_jacobian(F: Callable[[np.ndarray], np.ndarray], x, scale: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian, shape ``(M, q)``."""
    x = np.asarray(x, dtype=float)
    h = fd_step(x, scale)
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        cols.append((np.asarray(F(x + e)) - np.asarray(F(x - e))) / (2.0 * h))
    return np.stack(cols, axis=-1)


def relative_error(analytic, reference, floor: float = 1e-8) -> float:
    """``||a - b|| / max(||a||, ||b||, floor)``."""
    a = np.asarray(analytic, dtype=float)
    b = np.asarray(reference, dtype=float)
    denom = max(float(np.linalg.norm(a)), float(np.linalg.norm(b)), floor)
    return float(np.linalg.norm(a - b)) / denom


def check_gradient(f, grad, x, scale: float = 1e-6, floor: float = 1e-8) -> float:
    """Relative error between ``grad(x)`` and central differences of ``f``."""
    return relative_error(grad(x), fd_gradient(f, x, scale), floor)


def check_jacobian(F, jac, x, scale: float = 1e-6, floor: float = 1e-8) -> float:
    return relative_error(jac(x), fd_jacobian(F, x, scale), floor)
