"""Empirical distribution functions and their symmetrized versions."""

from __future__ import annotations

import numpy as np

from .exceptions import EmptySampleError

__all__ = ["Edf", "SymmetrizedEdf", "build_edf", "symmetrize"]


class Edf:
    """Right-continuous empirical distribution function ``F(x) = #{X_i <= x} / n``.

    The sorted sample is kept so every jump location is exact.
    """

    def __init__(self, sample):
        sample = np.asarray(sample, dtype=float).ravel()
        if sample.size == 0:
            raise EmptySampleError("cannot build an EDF from an empty sample")
        self._sorted = np.sort(sample)
        self._sorted.setflags(write=False)

    @property
    def n(self) -> int:
        return self._sorted.size

    @property
    def sorted_sample(self) -> np.ndarray:
        return self._sorted

    def count_le(self, x):
        """Integer ``#{X_i <= x}``; vectorized over ``x``."""
        out = np.searchsorted(self._sorted, x, side="right")
        return int(out) if np.ndim(out) == 0 else out

    def count_lt(self, x):
        """Integer ``#{X_i < x}``; vectorized over ``x``."""
        out = np.searchsorted(self._sorted, x, side="left")
        return int(out) if np.ndim(out) == 0 else out

    def __call__(self, x):
        out = np.searchsorted(self._sorted, x, side="right") / self.n
        return float(out) if np.ndim(out) == 0 else out


class SymmetrizedEdf:
    """``S(x) = (F(x) + 1 - F(-x)) / 2`` evaluated lazily from a base EDF."""

    def __init__(self, edf: Edf):
        self.edf = edf

    @property
    def n(self) -> int:
        return self.edf.n

    def doubled_count(self, x):
        """Exact integer ``2 n S(x) = #{X_i <= x} + n - #{X_i <= -x}``."""
        x = np.asarray(x, dtype=float)
        out = self.edf.count_le(x) + self.n - self.edf.count_le(-x)
        return int(out) if np.ndim(out) == 0 else out

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = (self.edf(x) + 1.0 - self.edf(-x)) / 2.0
        return float(out) if np.ndim(out) == 0 else out


def build_edf(sample) -> Edf:
    """EDF of a sample (residuals, or true innovations for oracle checks)."""
    return Edf(sample)


def symmetrize(f: Edf) -> SymmetrizedEdf:
    """Symmetrized version of an EDF."""
    return SymmetrizedEdf(f)
