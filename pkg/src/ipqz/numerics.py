"""Reproducible floating-point kernels.

All dot products and norms in this package accumulate in IEEE-754
binary64, strictly in ascending coordinate order, with no pairwise or
tree reassociation and no FMA contraction. `np.add.accumulate` is
documented to apply the recurrence r[i] = r[i-1] + a[i], which is
exactly the ascending-order chain; the test suite pins this behaviour
against a pure Python loop.
"""

from __future__ import annotations

import numpy as np


def seq_sum(values: np.ndarray, axis: int = -1) -> np.ndarray | float:
    """Sum along `axis` in ascending index order (one rounding per add)."""
    values = np.asarray(values, dtype=np.float64)
    if values.shape[axis] == 0:
        return np.zeros(values.sum(axis=axis).shape)
    acc = np.add.accumulate(values, axis=axis)
    return np.take(acc, -1, axis=axis)


def seq_dot(x: np.ndarray, y: np.ndarray) -> np.ndarray | float:
    """Dot product: one rounded multiply per coordinate, ascending-order sum.

    For 2-D inputs the contraction runs along the last axis row by row.
    """
    return seq_sum(np.asarray(x, dtype=np.float64) * np.asarray(y, dtype=np.float64))


def seq_norm(x: np.ndarray) -> np.ndarray | float:
    """Euclidean norm with the same deterministic accumulation."""
    x = np.asarray(x, dtype=np.float64)
    return np.sqrt(seq_sum(x * x))
