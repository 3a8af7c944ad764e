"""Small input-checking helpers shared by the estimators and the functional API."""

from __future__ import annotations

import math

import numpy as np


def check_phi(phi) -> float:
    phi = float(phi)
    if not (0.0 <= phi <= 1.0) or math.isnan(phi):
        raise ValueError(f"phi must lie in [0, 1], got {phi!r}")
    return phi


def check_probability(pi, name="pi") -> float:
    pi = float(pi)
    if not (0.0 < pi < 1.0):
        raise ValueError(f"{name} must lie strictly inside (0, 1), got {pi!r}")
    return pi


def as_vector(a, name="array", allow_nan=False) -> np.ndarray:
    out = np.asarray(a, dtype=float)
    if out.ndim == 2 and out.shape[1] == 1:
        out = out[:, 0]
    if out.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {out.shape}")
    if not allow_nan and not np.all(np.isfinite(out)):
        raise ValueError(f"{name} contains non-finite values")
    return out


def as_matrix(a, name="matrix") -> np.ndarray:
    out = np.asarray(a, dtype=float)
    if out.ndim == 1:
        out = out[:, None]
    if out.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional, got shape {out.shape}")
    if not np.all(np.isfinite(out)):
        raise ValueError(f"{name} contains non-finite values")
    return out


def phi_grid(start=0.0, stop=1.0, step=0.01) -> np.ndarray:
    """Evenly spaced phi values, inclusive of ``stop`` when it lands on the grid.

    Built with ``linspace`` so grid points are exact decimals (0.5 is 0.5,
    not 0.5000000000000001) and ``stop`` is hit despite float drift.
    """
    start, stop, step = float(start), float(stop), float(step)
    if step <= 0:
        raise ValueError("phi grid step must be positive")
    if stop < start:
        raise ValueError("phi grid stop must not precede start")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    grid = start + step * np.arange(n)
    grid = np.round(grid, 12)
    for value in (grid[0], grid[-1]):
        check_phi(value)
    return grid


def parse_phi_grid(text: str) -> np.ndarray:
    """Parse ``start:stop:step`` (or a single value) into a grid."""
    parts = text.split(":")
    if len(parts) == 1:
        return np.array([check_phi(parts[0])])
    if len(parts) != 3:
        raise ValueError(f"phi grid must be 'start:stop:step', got {text!r}")
    return phi_grid(*(float(p) for p in parts))
