"""Symmetric positive-definite solves with an explicit relative pivot test."""

from __future__ import annotations

import numpy as np

from .exceptions import RankDeficient

PIVOT_TOL = 1e-10


def cholesky_pivots(a: np.ndarray, tol: float = PIVOT_TOL) -> np.ndarray:
    """Lower Cholesky factor of ``a`` (assumed unit-diagonal after equilibration).

    Raises :class:`RankDeficient` as soon as a pivot falls below ``tol`` times
    the largest pivot seen so far.
    """
    p = a.shape[0]
    low = np.zeros_like(a)
    largest = 0.0
    for k in range(p):
        pivot = a[k, k] - low[k, :k] @ low[k, :k]
        largest = max(largest, pivot)
        if not pivot > tol * largest:
            raise RankDeficient(
                f"pivot {k} is {pivot:.3e}, below {tol:g} x largest pivot {largest:.3e}"
            )
        low[k, k] = np.sqrt(pivot)
        low[k + 1:, k] = (a[k + 1:, k] - low[k + 1:, :k] @ low[k, :k]) / low[k, k]
    return low


def spd_solve(a, b, tol: float = PIVOT_TOL, ridge: float = 0.0):
    """Solve ``a x = b`` for symmetric positive-definite ``a``.

    The matrix is equilibrated to unit diagonal before factorization so the
    relative pivot test is insensitive to column scaling. Returns ``(x, low, scale)``
    where ``low`` is the Cholesky factor of the equilibrated matrix; callers that
    need ``inv(a)`` can get it from :func:`spd_inverse`.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    diag = np.diag(a).copy()
    if np.any(~(diag > 0)):
        bad = int(np.flatnonzero(~(diag > 0))[0])
        raise RankDeficient(f"column {bad} has zero norm")
    scale = 1.0 / np.sqrt(diag)
    eq = a * np.outer(scale, scale)
    if ridge:
        eq = eq + ridge * np.eye(eq.shape[0])
    low = cholesky_pivots(eq, tol)
    rhs = b * (scale if b.ndim == 1 else scale[:, None])
    z = _forward(low, rhs)
    x = _backward(low.T, z)
    x = x * (scale if x.ndim == 1 else scale[:, None])
    return x, low, scale


def spd_inverse(low: np.ndarray, scale: np.ndarray) -> np.ndarray:
    eye = np.eye(low.shape[0])
    inv_low = _forward(low, eye)
    inv_eq = inv_low.T @ inv_low
    return inv_eq * np.outer(scale, scale)


def _forward(low, b):
    out = np.array(b, dtype=float, copy=True)
    for i in range(low.shape[0]):
        out[i] = (out[i] - low[i, :i] @ out[:i]) / low[i, i]
    return out


def _backward(up, b):
    out = np.array(b, dtype=float, copy=True)
    for i in range(up.shape[0] - 1, -1, -1):
        out[i] = (out[i] - up[i, i + 1:] @ out[i + 1:]) / up[i, i]
    return out
