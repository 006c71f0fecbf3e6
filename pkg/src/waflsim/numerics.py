"""Shared numeric utilities: simplex projection and a finite-difference
gradient oracle used to cross-check every analytic gradient in the package."""

from __future__ import annotations

from typing import Callable

import numpy as np

SIMPLEX_TOL = 1e-9


def check_probability_vector(v: np.ndarray, tol: float = SIMPLEX_TOL) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("probability vector must be a non-empty 1-D array")
    if np.any(v < -tol) or abs(v.sum() - 1.0) > tol:
        raise ValueError("vector is not on the probability simplex")
    return v


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex.

    Sort-and-threshold algorithm; ties at the threshold are handled by the
    stable sort with no extra rule needed.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("input must be a non-empty 1-D vector")
    if not np.all(np.isfinite(v)):
        raise ValueError("non-finite vector")
    u = np.sort(v, kind="stable")[::-1]
    css = np.cumsum(u)
    k = np.arange(1, v.size + 1)
    cond = u - (css - 1.0) / k > 0
    rho = np.nonzero(cond)[0][-1]
    tau = (css[rho] - 1.0) / (rho + 1)
    out = np.maximum(v - tau, 0.0)
    return out


def finite_diff_grad(
    f: Callable[[np.ndarray], float], x: np.ndarray, h: float = 1e-5
) -> np.ndarray:
    """Central-difference gradient estimate of f at x."""
    if h <= 0:
        raise ValueError("step size must be positive")
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        g[j] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g


def relative_error(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    denom = max(np.linalg.norm(a), np.linalg.norm(b), 1e-12)
    return float(np.linalg.norm(a - b) / denom)
