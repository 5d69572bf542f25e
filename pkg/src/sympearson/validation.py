"""Input validation helpers shared by the estimator classes and the CLI."""

from __future__ import annotations

import numbers

import numpy as np

from .exceptions import DomainError
from .pearson_test import Partition


def check_series(X, order: int) -> np.ndarray:
    """Return ``X`` as a finite 1-d float array with at least ``2 * order + 10`` values.

    A column vector of shape ``(n, 1)`` is accepted and flattened.
    """
    check_order(order)
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise DomainError(f"expected a 1-d series or a single column, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("series contains NaN or infinite values")
    if arr.size - order < order + 10:
        raise DomainError(
            f"need n >= p + 10 observations after {order} pre-sample values; got {arr.size} in total")
    return arr


def check_order(order) -> int:
    if not isinstance(order, numbers.Integral) or order < 1:
        raise DomainError(f"AR order must be a positive integer, got {order!r}")
    return int(order)


def check_cells(m) -> int:
    if not isinstance(m, numbers.Integral) or m <= 2:
        raise DomainError(f"m must exceed 2, got {m!r}")
    return int(m)


def check_alpha(alpha) -> float:
    if not isinstance(alpha, numbers.Real) or not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    return float(alpha)


def check_partition(partition, m: int):
    """``None``/``"auto"`` for the data-driven partition, else a :class:`Partition`."""
    if partition is None or (isinstance(partition, str) and partition == "auto"):
        return None
    if not isinstance(partition, Partition):
        partition = Partition(tuple(partition))
    if partition.m != m:
        raise DomainError(f"partition has {partition.m} cells but m={m}")
    return partition
